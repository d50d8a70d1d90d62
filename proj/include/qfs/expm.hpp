#pragma once

#include <array>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/LU>

namespace qfs {

// Scaling-and-squaring matrix exponential with diagonal Pade approximants
// of degree 3, 5, 7, 9 or 13, chosen from the 1-norm of the argument.
// Nothing is assumed about normality or diagonalizability, which matters
// for the damped generators used here (i t Y - t gamma/2 P0 is not normal).
namespace detail {

// Largest 1-norms for which the degree-m approximant has backward error
// below the double unit roundoff.
inline constexpr std::array<double, 5> kPadeTheta = {
    1.495585217958292e-2, 2.539398330063230e-1, 9.504178996162932e-1,
    2.097847961257068e0, 5.371920351148152e0};

template <typename Mat>
double one_norm(const Mat& A) {
  return static_cast<double>(A.cwiseAbs().colwise().sum().maxCoeff());
}

template <typename Mat, std::size_t K>
void pade_low(const Mat& A, const std::array<double, K>& b, Mat& U, Mat& V) {
  // Degrees 3..9 need only even powers up to A^(K-2).
  using Scalar = typename Mat::Scalar;
  const auto n = A.rows();
  const Mat I = Mat::Identity(n, n);
  const Mat A2 = A * A;
  Mat power = I;
  Mat odd = Mat::Zero(n, n);
  Mat even = Mat::Zero(n, n);
  for (std::size_t k = 0; k + 1 < K; k += 2) {
    even += Scalar(b[k]) * power;
    odd += Scalar(b[k + 1]) * power;
    if (k + 3 < K) power = power * A2;
  }
  U.noalias() = A * odd;
  V = even;
}

template <typename Mat>
void pade13(const Mat& A, Mat& U, Mat& V) {
  using Scalar = typename Mat::Scalar;
  static constexpr double b[] = {64764752532480000.0, 32382376266240000.0,
                                 7771770303897600.0,  1187353796428800.0,
                                 129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,
                                 1323241920.0,        40840800.0,
                                 960960.0,            16380.0,
                                 182.0,               1.0};
  const auto n = A.rows();
  const Mat I = Mat::Identity(n, n);
  const Mat A2 = A * A;
  const Mat A4 = A2 * A2;
  const Mat A6 = A4 * A2;
  Mat tmp = Scalar(b[13]) * A6 + Scalar(b[11]) * A4 + Scalar(b[9]) * A2;
  Mat inner = A6 * tmp;
  inner += Scalar(b[7]) * A6 + Scalar(b[5]) * A4 + Scalar(b[3]) * A2 +
           Scalar(b[1]) * I;
  U.noalias() = A * inner;
  tmp = Scalar(b[12]) * A6 + Scalar(b[10]) * A4 + Scalar(b[8]) * A2;
  V = A6 * tmp;
  V += Scalar(b[6]) * A6 + Scalar(b[4]) * A4 + Scalar(b[2]) * A2 +
       Scalar(b[0]) * I;
}

}  // namespace detail

/// exp(A) for a square dense matrix. exp(0) is returned as the exact identity.
template <typename Derived>
typename Derived::PlainObject expm(const Eigen::MatrixBase<Derived>& arg) {
  using Mat = typename Derived::PlainObject;
  using Scalar = typename Mat::Scalar;
  const Mat A = arg;
  const auto n = A.rows();
  eigen_assert(n == A.cols());
  if (n == 0) return A;
  const double norm = detail::one_norm(A);
  if (norm == 0.0) return Mat::Identity(n, n);

  Mat U(n, n), V(n, n);
  int squarings = 0;
  if (norm <= detail::kPadeTheta[0]) {
    detail::pade_low(A, std::array<double, 4>{120., 60., 12., 1.}, U, V);
  } else if (norm <= detail::kPadeTheta[1]) {
    detail::pade_low(A, std::array<double, 6>{30240., 15120., 3360., 420., 30., 1.},
                     U, V);
  } else if (norm <= detail::kPadeTheta[2]) {
    detail::pade_low(A,
                     std::array<double, 8>{17297280., 8648640., 1995840., 277200.,
                                           25200., 1512., 56., 1.},
                     U, V);
  } else if (norm <= detail::kPadeTheta[3]) {
    detail::pade_low(
        A,
        std::array<double, 10>{17643225600., 8821612800., 2075673600., 302702400.,
                               30270240., 2162160., 110880., 3960., 90., 1.},
        U, V);
  } else {
    squarings = std::max(0, static_cast<int>(std::ceil(
                                std::log2(norm / detail::kPadeTheta[4]))));
    const Mat scaled = A * Scalar(std::ldexp(1.0, -squarings));
    detail::pade13(scaled, U, V);
  }

  Mat result = (V - U).partialPivLu().solve(V + U);
  for (int k = 0; k < squarings; ++k) result = result * result;
  return result;
}

}  // namespace qfs
