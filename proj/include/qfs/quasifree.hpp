#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>

#include "qfs/expm.hpp"
#include "qfs/model.hpp"
#include "qfs/types.hpp"

namespace qfs {

/// Largest singular value of a dense matrix.
template <typename Derived>
auto spectral_norm(const Eigen::MatrixBase<Derived>& A) {
  using Mat = typename Derived::PlainObject;
  Eigen::JacobiSVD<Mat> svd(A);
  return svd.singularValues()(0);
}

/// Smallest eigenvalue of the Hermitian part of A.
template <typename Derived>
auto min_hermitian_eigenvalue(const Eigen::MatrixBase<Derived>& A) {
  using Mat = typename Derived::PlainObject;
  const Mat H = (A + A.adjoint()) / 2;
  Eigen::SelfAdjointEigenSolver<Mat> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

/// A quasi-free unital map W(zeta) -> Gamma(zeta) W(U zeta), with
/// Gamma(zeta) = exp[-(kappa/4)(<zeta,zeta> - <U zeta, U zeta>)].
///
/// Construction through `make` checks that U is a contraction and
/// kappa >= 1; `unchecked` skips both and exists so that certificates can
/// be exercised on deliberately broken maps.
template <typename Real = double>
class QuasiFreeMap {
 public:
  static QuasiFreeMap make(CMatrix<Real> U, Real kappa, double tol_sv = 1e-12) {
    if (U.rows() != U.cols()) throw DomainError("QuasiFreeMap: U must be square");
    if (!(kappa >= 1)) throw DomainError("QuasiFreeMap: kappa must be >= 1");
    const double s = static_cast<double>(spectral_norm(U));
    if (s > 1 + tol_sv)
      throw InvariantBreach("QuasiFreeMap: U is not a contraction (|U|_2 = " +
                            std::to_string(s) + ")");
    return QuasiFreeMap(std::move(U), kappa, true);
  }

  static QuasiFreeMap unchecked(CMatrix<Real> U, Real kappa) {
    return QuasiFreeMap(std::move(U), kappa, false);
  }

  static QuasiFreeMap identity(int dim, Real kappa) {
    return QuasiFreeMap(CMatrix<Real>::Identity(dim, dim), kappa, true);
  }

  const CMatrix<Real>& U() const { return U_; }
  Real kappa() const { return kappa_; }
  int dim() const { return static_cast<int>(U_.rows()); }
  bool checked() const { return checked_; }

 private:
  QuasiFreeMap(CMatrix<Real> U, Real kappa, bool checked)
      : U_(std::move(U)), kappa_(kappa), checked_(checked) {}

  CMatrix<Real> U_;
  Real kappa_;
  bool checked_;
};

/// Covariance X of a zero-mean quasi-free state, omega(W(zeta)) = exp[-<zeta,X zeta>/4].
template <typename Real = double>
class CovarianceState {
 public:
  explicit CovarianceState(CMatrix<Real> X, double tol_herm = 1e-12,
                           double tol_psd = 1e-10)
      : X_(std::move(X)) {
    if (X_.rows() != X_.cols()) throw DomainError("CovarianceState: X must be square");
    const double herm = static_cast<double>((X_ - X_.adjoint()).cwiseAbs().maxCoeff());
    if (herm > tol_herm)
      throw InvariantBreach("CovarianceState: X not Hermitian (defect " +
                            std::to_string(herm) + ")");
    const double lo = static_cast<double>(min_eig_minus_identity());
    if (lo < -tol_psd)
      throw InvariantBreach("CovarianceState: X - I not PSD (min eigenvalue " +
                            std::to_string(lo) + ")");
  }

  const CMatrix<Real>& X() const { return X_; }
  int dim() const { return static_cast<int>(X_.rows()); }

  Real min_eig_minus_identity() const {
    return min_hermitian_eigenvalue(
        CMatrix<Real>(X_ - CMatrix<Real>::Identity(X_.rows(), X_.cols())));
  }

 private:
  CMatrix<Real> X_;
};

/// U_n(t) = exp[i t (Y_n + i (sigma_- - sigma_+)/2 P0)].
template <typename Real>
CMatrix<Real> propagator(const ModelParams<Real>& p, int n, Real t) {
  if (!(t >= 0)) throw DomainError("propagator: t must be >= 0");
  const auto L = build_layout(p, n);
  const Complex<Real> i(0, 1);
  const CMatrix<Real> generator =
      i * (L.Y.template cast<Complex<Real>>() +
           i * (net_loss(p) / 2) * L.P0.template cast<Complex<Real>>());
  return expm(CMatrix<Real>(t * generator));
}

template <typename Real>
QuasiFreeMap<Real> one_step_map(const ModelParams<Real>& p, int n, Real t,
                                double tol_sv = 1e-12) {
  return QuasiFreeMap<Real>::make(propagator(p, n, t), kappa(p), tol_sv);
}

namespace detail {
template <typename Real>
void require_dim(int expected, Eigen::Index got, const char* what) {
  if (got != expected)
    throw DomainError(std::string(what) + ": dimension mismatch (expected " +
                      std::to_string(expected) + ", got " + std::to_string(got) + ")");
}
}  // namespace detail

/// log Gamma(zeta). Working in log space lets Gamma underflow to 0 for huge zeta.
template <typename Real>
Real log_gamma(const QuasiFreeMap<Real>& m, const CVector<Real>& zeta) {
  detail::require_dim<Real>(m.dim(), zeta.size(), "gamma");
  const Real r = zeta.stableNorm();
  if (r == 0) return 0;
  // Work with the unit vector so that huge probes cannot overflow |zeta|^2.
  const CVector<Real> unit = zeta / r;
  Real defect = unit.squaredNorm() - (m.U() * unit).squaredNorm();
  // Rounding can push |U zeta| of a contraction a few ulps above |zeta|.
  if (m.checked() && defect < 0 && defect >= -std::numeric_limits<Real>::epsilon() * 64)
    defect = 0;
  if (defect == 0) return 0;
  return -(m.kappa() / 4) * r * r * defect;
}

template <typename Real>
Real gamma(const QuasiFreeMap<Real>& m, const CVector<Real>& zeta) {
  using std::exp;
  return exp(log_gamma(m, zeta));
}

template <typename Real>
struct WeylImage {
  Real scalar;
  CVector<Real> zeta;
};

/// Symbol-level action of the dual map on W(zeta).
template <typename Real>
WeylImage<Real> apply_to_weyl(const QuasiFreeMap<Real>& m, const CVector<Real>& zeta) {
  return {gamma(m, zeta), m.U() * zeta};
}

/// left o right: W(zeta) -> Gamma_right(zeta) Gamma_left(U_r zeta) W(U_l U_r zeta).
template <typename Real>
QuasiFreeMap<Real> compose(const QuasiFreeMap<Real>& left,
                           const QuasiFreeMap<Real>& right) {
  using std::abs;
  detail::require_dim<Real>(left.dim(), right.dim(), "compose");
  if (abs(left.kappa() - right.kappa()) > Real(1e-14) * std::max(Real(1), left.kappa()))
    throw DomainError("compose: kappa mismatch (" + std::to_string(double(left.kappa())) +
                      " vs " + std::to_string(double(right.kappa())) + ")");
  CMatrix<Real> U = left.U() * right.U();
  if (left.checked() && right.checked())
    return QuasiFreeMap<Real>::make(std::move(U), left.kappa(), 1e-11);
  return QuasiFreeMap<Real>::unchecked(std::move(U), left.kappa());
}

/// Window containing t: t in [(n-1) tau, n tau) belongs to window n.
template <typename Real>
int active_window(const ModelParams<Real>& p, Real t) {
  using std::floor;
  const int n = static_cast<int>(floor(t / p.tau)) + 1;
  return std::clamp(n, 1, p.N);
}

/// Dual evolution over [0, t): step-1 map outermost, partial window innermost.
template <typename Real>
QuasiFreeMap<Real> repeated_interaction_map(const ModelParams<Real>& p, Real t,
                                            double tol_sv = 1e-12) {
  require_valid(p);
  if (!(t >= 0) || !(t < p.N * p.tau))
    throw DomainError("repeated_interaction_map: t outside [0, N*tau)");
  const int n = active_window(p, t);
  const Real nu = t - (n - 1) * p.tau;
  auto total = one_step_map(p, n, nu, tol_sv);
  for (int k = n - 1; k >= 1; --k) total = compose(one_step_map(p, k, p.tau, tol_sv), total);
  return total;
}

/// coth(beta/2) = (1 + e^-beta)/(1 - e^-beta), the covariance of a thermal mode.
template <typename Real>
Real thermal_covariance(Real beta) {
  using std::tanh;
  return 1 / tanh(beta / 2);
}

template <typename Real>
CovarianceState<Real> gibbs_covariance(Real beta0, Real beta, int N) {
  if (!(beta0 > 0) || !(beta > 0))
    throw DomainError("gibbs_covariance: inverse temperatures must be > 0");
  if (N < 1) throw DomainError("gibbs_covariance: N must be >= 1");
  const Real chain = thermal_covariance(beta);
  CMatrix<Real> X = CMatrix<Real>::Identity(N + 1, N + 1) * chain;
  X(0, 0) = thermal_covariance(beta0);
  return CovarianceState<Real>(std::move(X));
}

/// X' = U^* X U + kappa (I - U^* U).
template <typename Real>
CovarianceState<Real> evolve_covariance(const QuasiFreeMap<Real>& m,
                                        const CovarianceState<Real>& s,
                                        double tol_psd = 1e-10) {
  detail::require_dim<Real>(m.dim(), s.dim(), "evolve_covariance");
  const auto& U = m.U();
  CMatrix<Real> X = U.adjoint() * s.X() * U;
  X.noalias() -= m.kappa() * (U.adjoint() * U);
  X.diagonal().array() += m.kappa();
  CMatrix<Real> sym = (X + X.adjoint()) / Real(2);
  return CovarianceState<Real>(std::move(sym), 1e-12, tol_psd);
}

template <typename Real>
Real char_function(const CovarianceState<Real>& s, const CVector<Real>& zeta) {
  using std::exp;
  detail::require_dim<Real>(s.dim(), zeta.size(), "char_function");
  const Real q = std::real(zeta.dot(s.X() * zeta));  // Eigen's dot conjugates the first slot
  return exp(-q / 4);
}

/// Mean occupation of each mode, (X_jj - 1)/2.
template <typename Real>
RVector<Real> occupations(const CovarianceState<Real>& s) {
  return (s.X().diagonal().real().array() - 1) / 2;
}

template <typename Real = double>
struct CpCertificate {
  Real min_defect_eigenvalue = 0;  // of D = I - U^* U
  Real kappa = 1;
  bool defect_psd = false;
  bool kappa_ok = false;
  bool completely_positive = false;
  CMatrix<Real> defect_map;        // C with C^* C = D (PSD part)
  Real defect_map_residual = 0;    // |C^* C - D|_max
  Real reservoir_beta = 0;         // beta with coth(beta/2) = kappa; +inf when kappa = 1
};

/// Complete-positivity certificate: the defect Gram matrix I - U^*U must be
/// PSD (so a defect map C exists) and kappa >= 1 (so Gamma is the
/// characteristic function of a thermal state evaluated at C zeta).
template <typename Real>
CpCertificate<Real> cp_certificate(const QuasiFreeMap<Real>& m, double tol = 1e-12) {
  using std::log;
  using std::sqrt;
  CpCertificate<Real> r;
  const auto d = m.dim();
  const CMatrix<Real> D =
      CMatrix<Real>::Identity(d, d) - m.U().adjoint() * m.U();
  const CMatrix<Real> Dh = (D + D.adjoint()) / Real(2);
  Eigen::SelfAdjointEigenSolver<CMatrix<Real>> es(Dh);
  r.min_defect_eigenvalue = es.eigenvalues()(0);
  r.kappa = m.kappa();
  r.defect_psd = r.min_defect_eigenvalue >= -Real(tol);
  r.kappa_ok = r.kappa >= 1;
  r.completely_positive = r.defect_psd && r.kappa_ok;

  const RVector<Real> root = es.eigenvalues().cwiseMax(Real(0)).cwiseSqrt();
  r.defect_map = root.template cast<Complex<Real>>().asDiagonal() * es.eigenvectors().adjoint();
  r.defect_map_residual = (r.defect_map.adjoint() * r.defect_map - Dh).cwiseAbs().maxCoeff();
  r.reservoir_beta = r.kappa > 1 ? log((r.kappa + 1) / (r.kappa - 1))
                                 : std::numeric_limits<Real>::infinity();
  return r;
}

}  // namespace qfs
