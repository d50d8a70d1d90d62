#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace qfs {

template <typename Real>
using Complex = std::complex<Real>;

template <typename Real>
using RMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using CMatrix = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using CVector = Eigen::Matrix<Complex<Real>, Eigen::Dynamic, 1>;

template <typename Real>
using RVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

// Named tolerances shared by the closed-form engine and the oracle.
struct Tolerances {
  double sv = 1e-12;          // contraction slack on the largest singular value
  double psd = 1e-10;         // X - I positive semidefinite slack
  double herm = 1e-12;        // Hermiticity defect
  double cp = 1e-12;          // defect Gram matrix eigenvalue slack
  double xval = 5e-3;         // closed form vs oracle characteristic function
  double tail_mass = 1e-4;    // top-two-level population allowed per mode
  double probe_radius = 0.5;  // largest probe norm trusted at finite cutoff
  double trace_drift = 1e-8;  // |Tr rho - 1| per unit time
};

/// Raised when inputs violate a documented precondition.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a numerical invariant breaks during a computation.
class InvariantBreach : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace qfs
