#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "qfs/types.hpp"

namespace qfs {

/// Physical parameters of the repeatedly perturbed open boson system.
///
/// Mode 0 is the subsystem with energy E, modes 1..N form the chain with
/// common energy epsilon. During the n-th window of length tau the
/// subsystem is coupled to chain mode n with strength eta, while mode 0
/// exchanges quanta with a reservoir at rates sigma_plus (gain) and
/// sigma_minus (loss).
template <typename Real = double>
struct ModelParams {
  Real E = 1;
  Real epsilon = 1;
  Real eta = 0;
  Real tau = 1;
  Real sigma_plus = 0;
  Real sigma_minus = 1;
  int N = 1;

  int dim() const { return N + 1; }
};

struct Violation {
  std::string name;    // "H1", "H2", or the offending field
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }
  bool has(const std::string& name) const {
    for (const auto& v : violations)
      if (v.name == name) return true;
    return false;
  }
  std::string message() const {
    std::string out;
    for (const auto& v : violations) {
      if (!out.empty()) out += "; ";
      out += v.name + ": " + v.detail;
    }
    return out;
  }
};

/// Lists every violated constraint; never throws.
template <typename Real>
ValidationReport validate_params(const ModelParams<Real>& p) {
  ValidationReport r;
  auto need_positive = [&r](const char* name, Real v) {
    if (!(v > 0)) r.violations.push_back({name, std::string(name) + " must be > 0"});
  };
  need_positive("E", p.E);
  need_positive("epsilon", p.epsilon);
  if (!(p.eta >= 0)) r.violations.push_back({"eta", "eta must be >= 0"});
  need_positive("tau", p.tau);
  need_positive("sigma_minus", p.sigma_minus);
  if (!(p.sigma_plus >= 0))
    r.violations.push_back({"sigma_plus", "sigma_plus must be >= 0"});
  if (p.N < 1) r.violations.push_back({"N", "N must be >= 1"});
  if (!(p.eta * p.eta <= p.E * p.epsilon))
    r.violations.push_back({"H1", "eta^2 <= E*epsilon fails"});
  if (!(p.sigma_plus >= 0 && p.sigma_plus < p.sigma_minus))
    r.violations.push_back({"H2", "0 <= sigma_plus < sigma_minus fails"});
  return r;
}

template <typename Real>
void require_valid(const ModelParams<Real>& p) {
  const auto r = validate_params(p);
  if (!r.ok()) throw DomainError("invalid model parameters: " + r.message());
}

/// Attenuation coefficient (sigma_- + sigma_+)/(sigma_- - sigma_+).
template <typename Real>
Real kappa(const ModelParams<Real>& p) {
  if (!(p.sigma_plus >= 0 && p.sigma_plus < p.sigma_minus))
    throw DomainError("kappa: H2 violated (need 0 <= sigma_plus < sigma_minus)");
  return (p.sigma_minus + p.sigma_plus) / (p.sigma_minus - p.sigma_plus);
}

/// Damping rate of the mode-0 amplitude, i.e. the imaginary energy shift times two.
template <typename Real>
Real net_loss(const ModelParams<Real>& p) {
  return p.sigma_minus - p.sigma_plus;
}

/// Coupling matrices for the window in which chain mode n is active.
template <typename Real = double>
struct CouplingLayout {
  int n = 1;
  RMatrix<Real> J;   // unit entries at (0,0) and (n,n)
  RMatrix<Real> X;   // traceless 0/n block
  RMatrix<Real> Y;   // one-particle Hamiltonian: H_n = sum_jk Y_jk b_j^* b_k
  RMatrix<Real> P0;  // projector onto index 0
};

template <typename Real>
CouplingLayout<Real> build_layout(const ModelParams<Real>& p, int n) {
  require_valid(p);
  if (n < 1 || n > p.N)
    throw DomainError("build_layout: n=" + std::to_string(n) + " outside 1.." +
                      std::to_string(p.N));
  const int d = p.dim();
  const Real half_gap = (p.E - p.epsilon) / 2;

  CouplingLayout<Real> L;
  L.n = n;
  L.J = RMatrix<Real>::Zero(d, d);
  L.J(0, 0) = 1;
  L.J(n, n) = 1;

  L.X = RMatrix<Real>::Zero(d, d);
  L.X(0, 0) = half_gap;
  L.X(n, n) = -half_gap;
  L.X(0, n) = p.eta;
  L.X(n, 0) = p.eta;

  L.Y = p.epsilon * RMatrix<Real>::Identity(d, d) + half_gap * L.J + L.X;

  L.P0 = RMatrix<Real>::Zero(d, d);
  L.P0(0, 0) = 1;
  return L;
}

/// Relative bound of the coupling term with respect to the free generator:
/// c = sqrt(2) eta (E + sqrt(E^2 + (s+ + s-)^2/4))^{-1/2} epsilon^{-1/2}.
template <typename Real>
Real relative_bound_c(const ModelParams<Real>& p) {
  require_valid(p);
  using std::sqrt;
  const Real s = p.sigma_plus + p.sigma_minus;
  const Real inner = p.E + sqrt(p.E * p.E + s * s / 4);
  return sqrt(Real(2)) * p.eta / sqrt(inner) / sqrt(p.epsilon);
}

/// Additive constant in ||eta V phi|| <= c ||K0 phi|| + C ||phi||:
/// C = c |E + epsilon - i sigma_-/2|.
template <typename Real>
Real relative_bound_offset(const ModelParams<Real>& p) {
  using std::abs;
  return relative_bound_c(p) *
         abs(Complex<Real>(p.E + p.epsilon, -p.sigma_minus / 2));
}

}  // namespace qfs
