#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Eigenvalues>
#include <Eigen/Sparse>

#include "qfs/expm.hpp"
#include "qfs/model.hpp"
#include "qfs/quasifree.hpp"
#include "qfs/types.hpp"

namespace qfs {

// Brute-force reference: every mode truncated to Fock levels 0..M-1, all
// operators represented on the tensor product of N+1 such spaces. Mode 0 is
// the leading (slowest-varying) tensor factor.

template <typename Real>
using SparseOp = Eigen::SparseMatrix<Complex<Real>>;

inline constexpr long kDefaultDimensionBudget = 4096;

template <typename Real = double>
struct TruncatedModes {
  int N = 1;
  int M = 2;
  long dim = 0;
  std::vector<SparseOp<Real>> b;      // annihilators b_0..b_N
  std::vector<SparseOp<Real>> b_dag;  // creators
  SparseOp<Real> n_hat;               // sum_k b_k^* b_k

  long stride(int k) const {
    long s = 1;
    for (int j = k; j < N; ++j) s *= M;
    return s;
  }
  int level(long index, int k) const {
    return static_cast<int>((index / stride(k)) % M);
  }
  long index_of(const std::vector<int>& m) const {
    long idx = 0;
    for (int k = 0; k <= N; ++k) idx += m[k] * stride(k);
    return idx;
  }
};

template <typename Real = double>
TruncatedModes<Real> build_modes(int N, int M, long budget = kDefaultDimensionBudget) {
  if (N < 1) throw DomainError("build_modes: N must be >= 1");
  if (M < 2) throw DomainError("build_modes: cutoff M must be >= 2");
  long dim = 1;
  for (int k = 0; k <= N; ++k) {
    dim *= M;
    if (dim > budget)
      break;
  }
  if (dim > budget) {
    const double required = std::pow(double(M), N + 1);
    throw DomainError("build_modes: Fock dimension " + std::to_string(long(required)) +
                      " exceeds budget " + std::to_string(budget));
  }

  TruncatedModes<Real> modes;
  modes.N = N;
  modes.M = M;
  modes.dim = dim;
  modes.b.resize(N + 1);
  modes.b_dag.resize(N + 1);
  using std::sqrt;
  for (int k = 0; k <= N; ++k) {
    const long s = modes.stride(k);
    std::vector<Eigen::Triplet<Complex<Real>>> entries;
    entries.reserve(dim);
    for (long idx = 0; idx < dim; ++idx) {
      const int m = modes.level(idx, k);
      if (m >= 1) entries.emplace_back(idx - s, idx, Complex<Real>(sqrt(Real(m)), 0));
    }
    modes.b[k].resize(dim, dim);
    modes.b[k].setFromTriplets(entries.begin(), entries.end());
    modes.b_dag[k] = modes.b[k].adjoint();
  }
  modes.n_hat.resize(dim, dim);
  for (int k = 0; k <= N; ++k) modes.n_hat += SparseOp<Real>(modes.b_dag[k] * modes.b[k]);
  return modes;
}

namespace detail {
template <typename Real>
void require_window(const ModelParams<Real>& p, int n, const TruncatedModes<Real>& modes) {
  if (n < 1 || n > p.N)
    throw DomainError("window n=" + std::to_string(n) + " outside 1.." + std::to_string(p.N));
  if (modes.N != p.N) throw DomainError("modes and parameters disagree on N");
}
}  // namespace detail

/// H_n = E b0^*b0 + eps sum_{k>=1} b_k^*b_k + eta (b0^*b_n + b_n^*b0).
template <typename Real>
SparseOp<Real> hamiltonian(const ModelParams<Real>& p, int n,
                           const TruncatedModes<Real>& modes) {
  detail::require_window(p, n, modes);
  const auto& b = modes.b;
  const auto& bd = modes.b_dag;
  SparseOp<Real> H = Complex<Real>(p.E) * SparseOp<Real>(bd[0] * b[0]);
  for (int k = 1; k <= p.N; ++k) H += Complex<Real>(p.epsilon) * SparseOp<Real>(bd[k] * b[k]);
  H += Complex<Real>(p.eta) * SparseOp<Real>(bd[0] * b[n]);
  H += Complex<Real>(p.eta) * SparseOp<Real>(bd[n] * b[0]);
  return H;
}

/// sum_jk Y_jk b_j^* b_k for a one-particle matrix Y.
template <typename Real>
SparseOp<Real> second_quantize(const RMatrix<Real>& Y, const TruncatedModes<Real>& modes) {
  SparseOp<Real> H(modes.dim, modes.dim);
  for (int j = 0; j < Y.rows(); ++j)
    for (int k = 0; k < Y.cols(); ++k)
      if (Y(j, k) != Real(0))
        H += Complex<Real>(Y(j, k)) * SparseOp<Real>(modes.b_dag[j] * modes.b[k]);
  return H;
}

/// Half the dissipative anticommutator weight: Q^*(1)/2 = (s+/2) b0 b0^* + (s-/2) b0^* b0.
template <typename Real>
SparseOp<Real> half_dissipator_weight(const ModelParams<Real>& p,
                                      const TruncatedModes<Real>& modes) {
  const auto& b0 = modes.b[0];
  const auto& b0d = modes.b_dag[0];
  return Complex<Real>(p.sigma_plus / 2) * SparseOp<Real>(b0 * b0d) +
         Complex<Real>(p.sigma_minus / 2) * SparseOp<Real>(b0d * b0);
}

/// K_n = Q^*(1)/2 + i H_n.
template <typename Real>
SparseOp<Real> k_operator(const ModelParams<Real>& p, int n,
                          const TruncatedModes<Real>& modes) {
  return half_dissipator_weight(p, modes) +
         Complex<Real>(0, 1) * hamiltonian(p, n, modes);
}

/// K_0 = Q^*(1)/2 + i((E - eps) b0^*b0 + eps n_hat).
template <typename Real>
SparseOp<Real> k0_operator(const ModelParams<Real>& p, const TruncatedModes<Real>& modes) {
  const SparseOp<Real> free = Complex<Real>(p.E - p.epsilon) *
                                  SparseOp<Real>(modes.b_dag[0] * modes.b[0]) +
                              Complex<Real>(p.epsilon) * modes.n_hat;
  return half_dissipator_weight(p, modes) + Complex<Real>(0, 1) * free;
}

/// The coupling term V_n = b0^*b_n + b_n^*b0, so that K_n = K_0 + i eta V_n.
template <typename Real>
SparseOp<Real> hopping(int n, const TruncatedModes<Real>& modes) {
  return SparseOp<Real>(modes.b_dag[0] * modes.b[n]) +
         SparseOp<Real>(modes.b_dag[n] * modes.b[0]);
}

/// Closed-form K_0 eigenvalue on the Fock state m (valid for m_0 < M - 1):
/// ((s+ + s-)/2 + iE) m0 + s+/2 + i eps sum_{j>=1} m_j.
template <typename Real>
Complex<Real> k0_eigenvalue(const ModelParams<Real>& p, const std::vector<int>& m) {
  Real chain = 0;
  for (std::size_t j = 1; j < m.size(); ++j) chain += m[j];
  return Complex<Real>((p.sigma_plus + p.sigma_minus) / 2, p.E) * Real(m[0]) +
         Complex<Real>(p.sigma_plus / 2, p.epsilon * chain);
}

template <typename Real = double>
using DenseOp = CMatrix<Real>;

/// Density matrix on the truncated space. The constructor checks the
/// documented invariants; `diagnose` reports them without throwing.
template <typename Real = double>
class DensityMatrix {
 public:
  struct Diagnostics {
    double hermiticity = 0;
    double trace_error = 0;
    double min_eigenvalue = 0;
  };

  explicit DensityMatrix(DenseOp<Real> rho, double tol_herm = 1e-12,
                         double tol_trace = 1e-10, double tol_eig = 1e-8)
      : rho_(std::move(rho)) {
    if (rho_.rows() != rho_.cols()) throw DomainError("DensityMatrix: rho must be square");
    const auto d = diagnose(rho_);
    if (d.hermiticity > tol_herm || d.trace_error > tol_trace || d.min_eigenvalue < -tol_eig)
      throw InvariantBreach("DensityMatrix: invariant violated (hermiticity " +
                            std::to_string(d.hermiticity) + ", trace error " +
                            std::to_string(d.trace_error) + ", min eigenvalue " +
                            std::to_string(d.min_eigenvalue) + ")");
  }

  /// The spectrum is skipped (min_eigenvalue left at 0) when with_spectrum is false.
  static Diagnostics diagnose(const DenseOp<Real>& rho, bool with_spectrum = true) {
    using std::abs;
    Diagnostics d;
    d.hermiticity = static_cast<double>((rho - rho.adjoint()).cwiseAbs().maxCoeff());
    d.trace_error = static_cast<double>(abs(rho.trace() - Complex<Real>(1)));
    if (with_spectrum) d.min_eigenvalue = static_cast<double>(min_hermitian_eigenvalue(rho));
    return d;
  }

  const DenseOp<Real>& rho() const { return rho_; }
  long dim() const { return rho_.rows(); }

 private:
  DenseOp<Real> rho_;
};

namespace detail {
/// A S^* for dense A and sparse S, accumulated as contiguous column updates.
template <typename Real>
DenseOp<Real> times_adjoint(const DenseOp<Real>& A, const SparseOp<Real>& S) {
  DenseOp<Real> out = DenseOp<Real>::Zero(A.rows(), S.rows());
  for (Eigen::Index c = 0; c < S.outerSize(); ++c)
    for (typename SparseOp<Real>::InnerIterator it(S, c); it; ++it)
      out.col(it.row()) += std::conj(it.value()) * A.col(c);
  return out;
}
}  // namespace detail

/// L(rho) = -K_n rho - rho K_n^* + s- b0 rho b0^* + s+ b0^* rho b0.
template <typename Real>
DenseOp<Real> lindblad_rhs(const ModelParams<Real>& p, const SparseOp<Real>& K,
                           const TruncatedModes<Real>& modes, const DenseOp<Real>& rho) {
  using detail::times_adjoint;
  if (rho.rows() != modes.dim || rho.cols() != modes.dim)
    throw DomainError("lindblad_rhs: dimension mismatch");
  // Every product is written as (dense) (sparse)^*, using S A = (A^* S^*)^*.
  const DenseOp<Real> rho_dag = rho.adjoint();
  DenseOp<Real> out = -times_adjoint(rho, K);
  out -= times_adjoint(rho_dag, K).adjoint();
  auto sandwich = [&](const SparseOp<Real>& S) {  // S rho S^*
    const DenseOp<Real> right = times_adjoint(rho, S);
    return DenseOp<Real>(times_adjoint(DenseOp<Real>(right.adjoint()), S).adjoint());
  };
  if (p.sigma_minus != Real(0)) out += Complex<Real>(p.sigma_minus) * sandwich(modes.b[0]);
  if (p.sigma_plus != Real(0)) out += Complex<Real>(p.sigma_plus) * sandwich(modes.b_dag[0]);
  return out;
}

template <typename Real>
DenseOp<Real> lindblad_rhs(const ModelParams<Real>& p, int n, const TruncatedModes<Real>& modes,
                           const DenseOp<Real>& rho) {
  return lindblad_rhs(p, k_operator(p, n, modes), modes, rho);
}

/// Fixed-step RK4 integrator of the piecewise-autonomous master equation.
/// Steps are aligned so that no step straddles a window boundary k*tau.
template <typename Real = double>
class LindbladIntegrator {
 public:
  LindbladIntegrator(ModelParams<Real> p, const TruncatedModes<Real>& modes, Real dt)
      : p_(std::move(p)), modes_(&modes), dt_(dt) {
    require_valid(p_);
    if (!(dt > 0)) throw DomainError("LindbladIntegrator: dt must be > 0");
    if (modes.N != p_.N) throw DomainError("LindbladIntegrator: N mismatch");
    K_.reserve(p_.N);
    for (int n = 1; n <= p_.N; ++n) K_.push_back(k_operator(p_, n, modes));
  }

  /// Evolves rho in place from t0 to t1 (0 <= t0 <= t1 <= N tau).
  void advance(DenseOp<Real>& rho, Real t0, Real t1) const {
    using std::ceil;
    using std::min;
    if (!(t0 >= 0) || !(t1 >= t0) || t1 > p_.N * p_.tau * (1 + Real(1e-14)))
      throw DomainError("LindbladIntegrator: interval outside [0, N*tau]");
    Real t = t0;
    for (int n = active_window(p_, t0); n <= p_.N && t < t1; ++n) {
      const Real window_end = n == p_.N ? t1 : min<Real>(n * p_.tau, t1);
      const Real span = window_end - t;
      if (span <= 0) continue;
      const long steps = std::max<long>(1, static_cast<long>(ceil(span / dt_ - Real(1e-9))));
      const Real h = span / steps;
      for (long s = 0; s < steps; ++s) step(rho, K_[n - 1], h);
      t = window_end;
    }
  }

  const ModelParams<Real>& params() const { return p_; }

 private:
  void step(DenseOp<Real>& rho, const SparseOp<Real>& K, Real h) const {
    const Complex<Real> ch(h);
    const DenseOp<Real> k1 = lindblad_rhs(p_, K, *modes_, rho);
    const DenseOp<Real> k2 = lindblad_rhs(p_, K, *modes_, DenseOp<Real>(rho + (ch / Real(2)) * k1));
    const DenseOp<Real> k3 = lindblad_rhs(p_, K, *modes_, DenseOp<Real>(rho + (ch / Real(2)) * k2));
    const DenseOp<Real> k4 = lindblad_rhs(p_, K, *modes_, DenseOp<Real>(rho + ch * k3));
    rho += (ch / Real(6)) * (k1 + Real(2) * k2 + Real(2) * k3 + k4);
    // Re-symmetrize so that rounding does not accumulate an anti-Hermitian part.
    rho = (rho + rho.adjoint()).eval() / Real(2);
  }

  ModelParams<Real> p_;
  const TruncatedModes<Real>* modes_;
  Real dt_;
  std::vector<SparseOp<Real>> K_;
};

/// rho(t) from rho(0) by RK4 on [0, t), t < N tau.
template <typename Real>
DensityMatrix<Real> evolve_rho(const ModelParams<Real>& p, const TruncatedModes<Real>& modes,
                               const DensityMatrix<Real>& rho0, Real t, Real dt = Real(1e-3),
                               double tol_trace_rate = 1e-8, double tol_eig = 1e-8) {
  if (!(t >= 0) || !(t < p.N * p.tau))
    throw DomainError("evolve_rho: t outside [0, N*tau)");
  if (t == 0) return rho0;
  LindbladIntegrator<Real> rk(p, modes, dt);
  DenseOp<Real> rho = rho0.rho();
  rk.advance(rho, Real(0), t);
  const auto d = DensityMatrix<Real>::diagnose(rho);
  const double allowed_drift = tol_trace_rate * std::max(1.0, double(t)) + 1e-12;
  if (d.trace_error > allowed_drift || d.min_eigenvalue < -tol_eig || d.hermiticity > 1e-10)
    throw InvariantBreach("evolve_rho: trace drift " + std::to_string(d.trace_error) +
                          ", min eigenvalue " + std::to_string(d.min_eigenvalue) +
                          ", hermiticity " + std::to_string(d.hermiticity));
  return DensityMatrix<Real>(std::move(rho), 1e-10, allowed_drift + 1e-10, tol_eig);
}

/// exp(t L) applied through the vectorized superoperator; a second,
/// integrator-free route for tiny spaces. Single window only (t <= tau).
template <typename Real>
DenseOp<Real> evolve_rho_exact(const ModelParams<Real>& p, int n,
                               const TruncatedModes<Real>& modes, const DenseOp<Real>& rho0,
                               Real t) {
  constexpr long kMaxDim = 64;
  if (modes.dim > kMaxDim)
    throw DomainError("evolve_rho_exact: dimension " + std::to_string(modes.dim) +
                      " exceeds superoperator limit " + std::to_string(kMaxDim));
  const long d = modes.dim;
  const SparseOp<Real> K = k_operator(p, n, modes);
  // Column-major vec: vec(A rho B) = (B^T kron A) vec(rho).
  CMatrix<Real> superop = CMatrix<Real>::Zero(d * d, d * d);
  DenseOp<Real> unit = DenseOp<Real>::Zero(d, d);
  for (long c = 0; c < d; ++c)
    for (long r = 0; r < d; ++r) {
      unit(r, c) = 1;
      const DenseOp<Real> img = lindblad_rhs(p, K, modes, unit);
      superop.col(c * d + r) = Eigen::Map<const CVector<Real>>(img.data(), d * d);
      unit(r, c) = 0;
    }
  const CMatrix<Real> prop = expm(CMatrix<Real>(t * superop));
  const CVector<Real> v = prop * Eigen::Map<const CVector<Real>>(rho0.data(), d * d);
  return Eigen::Map<const DenseOp<Real>>(v.data(), d, d);
}

/// Normalized product Gibbs state with inverse temperature beta0 on mode 0
/// and beta on the chain. Fails when the discarded tail of any mode exceeds
/// max_tail.
template <typename Real>
DensityMatrix<Real> gibbs_rho(Real beta0, Real beta, const TruncatedModes<Real>& modes,
                              double max_tail = 1e-10) {
  using std::exp;
  if (!(beta0 > 0) || !(beta > 0)) throw DomainError("gibbs_rho: inverse temperatures must be > 0");
  const int M = modes.M;
  auto single = [M](Real b) {
    RVector<Real> w(M);
    for (int m = 0; m < M; ++m) w(m) = exp(-b * m);
    return RVector<Real>(w / w.sum());
  };
  const double tail0 = static_cast<double>(exp(-beta0 * M));
  const double tail = static_cast<double>(exp(-beta * M));
  if (std::max(tail0, tail) > max_tail)
    throw DomainError("gibbs_rho: truncated thermal tail " + std::to_string(std::max(tail0, tail)) +
                      " exceeds " + std::to_string(max_tail) + " at cutoff M=" +
                      std::to_string(M));
  const RVector<Real> p0 = single(beta0);
  const RVector<Real> pc = single(beta);
  DenseOp<Real> rho = DenseOp<Real>::Zero(modes.dim, modes.dim);
  for (long idx = 0; idx < modes.dim; ++idx) {
    Real w = p0(modes.level(idx, 0));
    for (int k = 1; k <= modes.N; ++k) w *= pc(modes.level(idx, k));
    rho(idx, idx) = w;
  }
  return DensityMatrix<Real>(std::move(rho));
}

/// Pure Fock state |m><m|.
template <typename Real>
DensityMatrix<Real> fock_state(const TruncatedModes<Real>& modes, const std::vector<int>& m) {
  DenseOp<Real> rho = DenseOp<Real>::Zero(modes.dim, modes.dim);
  const long idx = modes.index_of(m);
  rho(idx, idx) = 1;
  return DensityMatrix<Real>(std::move(rho));
}

/// Mean occupation Tr[rho b_k^* b_k] of each mode.
template <typename Real>
RVector<Real> mode_occupations(const DenseOp<Real>& rho, const TruncatedModes<Real>& modes) {
  RVector<Real> occ = RVector<Real>::Zero(modes.N + 1);
  for (long idx = 0; idx < modes.dim; ++idx) {
    const Real w = std::real(rho(idx, idx));
    for (int k = 0; k <= modes.N; ++k) occ(k) += w * modes.level(idx, k);
  }
  return occ;
}

/// Largest population held by the top two Fock levels of any single mode.
template <typename Real>
Real tail_mass(const DenseOp<Real>& rho, const TruncatedModes<Real>& modes) {
  RVector<Real> tail = RVector<Real>::Zero(modes.N + 1);
  for (long idx = 0; idx < modes.dim; ++idx) {
    const Real w = std::real(rho(idx, idx));
    for (int k = 0; k <= modes.N; ++k)
      if (modes.level(idx, k) >= modes.M - 2) tail(k) += w;
  }
  return tail.maxCoeff();
}

template <typename Real = double>
struct WeylMatrix {
  DenseOp<Real> W;
  double unitarity_defect = 0;  // max |W^* W - I|
  bool radius_exceeded = false;
};

/// Single-mode truncated exp[i (conj(z) a + z a^*)/sqrt 2].
template <typename Real>
DenseOp<Real> single_mode_weyl(int M, Complex<Real> z) {
  using std::sqrt;
  DenseOp<Real> G = DenseOp<Real>::Zero(M, M);
  const Complex<Real> i(0, 1);
  const Real inv_root2 = 1 / sqrt(Real(2));
  for (int m = 1; m < M; ++m) {
    const Real amp = sqrt(Real(m));
    G(m - 1, m) = i * std::conj(z) * amp * inv_root2;  // a
    G(m, m - 1) = i * z * amp * inv_root2;             // a^*
  }
  return expm(G);
}

/// W(zeta) = exp[i(<zeta,b> + <b,zeta>)/sqrt 2] at finite cutoff.
///
/// The truncated generator is a sum of commuting single-mode pieces acting on
/// distinct tensor factors, so its exponential is the Kronecker product of
/// the single-mode exponentials; building it that way keeps the cost at
/// O(dim^2) instead of a dense dim x dim exponential.
template <typename Real>
WeylMatrix<Real> weyl_matrix(const TruncatedModes<Real>& modes, const CVector<Real>& zeta,
                             double probe_radius = 0.5) {
  if (zeta.size() != modes.N + 1) throw DomainError("weyl_matrix: dimension mismatch");
  WeylMatrix<Real> out;
  out.radius_exceeded = static_cast<double>(zeta.norm()) > probe_radius;
  DenseOp<Real> W = single_mode_weyl<Real>(modes.M, zeta(0));
  for (int k = 1; k <= modes.N; ++k) {
    const DenseOp<Real> f = single_mode_weyl<Real>(modes.M, zeta(k));
    DenseOp<Real> next(W.rows() * f.rows(), W.cols() * f.cols());
    for (Eigen::Index r = 0; r < W.rows(); ++r)
      for (Eigen::Index c = 0; c < W.cols(); ++c)
        next.block(r * f.rows(), c * f.cols(), f.rows(), f.cols()) = W(r, c) * f;
    W = std::move(next);
  }
  out.unitarity_defect = static_cast<double>(
      (W.adjoint() * W - DenseOp<Real>::Identity(W.rows(), W.cols())).cwiseAbs().maxCoeff());
  out.W = std::move(W);
  return out;
}

/// Dense exp of the full truncated Weyl generator; reference route for small spaces.
template <typename Real>
DenseOp<Real> weyl_matrix_direct(const TruncatedModes<Real>& modes, const CVector<Real>& zeta) {
  using std::sqrt;
  SparseOp<Real> G(modes.dim, modes.dim);
  for (int k = 0; k <= modes.N; ++k)
    G += Complex<Real>(0, 1 / sqrt(Real(2))) *
         (std::conj(zeta(k)) * modes.b[k] + zeta(k) * modes.b_dag[k]);
  return expm(DenseOp<Real>(G));
}

/// Tr[rho W].
template <typename Real>
Complex<Real> trace_product(const DenseOp<Real>& rho, const DenseOp<Real>& W) {
  return rho.transpose().cwiseProduct(W).sum();
}

template <typename Real>
Complex<Real> oracle_char_function(const DenseOp<Real>& rho, const TruncatedModes<Real>& modes,
                                   const CVector<Real>& zeta, double probe_radius = 0.5) {
  if (rho.rows() != modes.dim) throw DomainError("oracle_char_function: dimension mismatch");
  return trace_product(rho, weyl_matrix(modes, zeta, probe_radius).W);
}

// --- sampled operator inequalities --------------------------------------

/// Uniform double in [0, 1) from the top 53 bits; stable across standard libraries.
inline double unit_uniform(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/// Standard normal via Box-Muller on unit_uniform.
inline double standard_normal(std::mt19937_64& rng) {
  const double u1 = 1.0 - unit_uniform(rng);
  const double u2 = unit_uniform(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

/// Random normalized vector, optionally supported only on Fock states with
/// every m_k <= max_level.
template <typename Real>
CVector<Real> random_state(const TruncatedModes<Real>& modes, std::mt19937_64& rng,
                           int max_level = -1) {
  CVector<Real> v(modes.dim);
  for (long idx = 0; idx < modes.dim; ++idx) {
    bool allowed = true;
    if (max_level >= 0)
      for (int k = 0; k <= modes.N; ++k) allowed = allowed && modes.level(idx, k) <= max_level;
    const Real re = standard_normal(rng);
    const Real im = standard_normal(rng);
    v(idx) = allowed ? Complex<Real>(re, im) : Complex<Real>(0);
  }
  return v / v.norm();
}

/// min Re<phi, K phi> over `samples` random unit vectors.
template <typename Real>
Real sampled_numerical_range_min(const SparseOp<Real>& K, const TruncatedModes<Real>& modes,
                                 int samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Real lo = std::numeric_limits<Real>::infinity();
  for (int s = 0; s < samples; ++s) {
    const CVector<Real> phi = random_state(modes, rng);
    const CVector<Real> Kphi = K * phi;
    lo = std::min(lo, std::real(phi.dot(Kphi)));
  }
  return lo;
}

struct RelativeBoundSample {
  double c = 0;
  double C = 0;
  double worst_slack = 0;  // min over samples of c|K0 phi| + C|phi| - |eta V phi|
};

/// Samples ||eta V_n phi|| <= c ||K0 phi|| + C ||phi|| on vectors kept
/// below the top Fock level, where truncated b0 b0^* agrees with b0^* b0 + 1.
template <typename Real>
RelativeBoundSample sampled_relative_bound(const ModelParams<Real>& p, int n,
                                           const TruncatedModes<Real>& modes, int samples,
                                           std::uint64_t seed) {
  detail::require_window(p, n, modes);
  const SparseOp<Real> K0 = k0_operator(p, modes);
  const SparseOp<Real> V = Complex<Real>(p.eta) * hopping(n, modes);
  RelativeBoundSample r;
  r.c = static_cast<double>(relative_bound_c(p));
  r.C = static_cast<double>(relative_bound_offset(p));
  r.worst_slack = std::numeric_limits<double>::infinity();
  std::mt19937_64 rng(seed);
  for (int s = 0; s < samples; ++s) {
    const CVector<Real> phi = random_state(modes, rng, modes.M - 2);
    const double lhs = static_cast<double>((V * phi).norm());
    const double rhs = r.c * static_cast<double>((K0 * phi).norm()) + r.C;
    r.worst_slack = std::min(r.worst_slack, rhs - lhs);
  }
  return r;
}

}  // namespace qfs
