#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "qfs/model.hpp"

namespace {

qfs::ModelParams<double> desk(int N = 2) {
  qfs::ModelParams<double> p;
  p.E = 1;
  p.epsilon = 0.5;
  p.eta = 0.5;
  p.sigma_minus = 0.4;
  p.sigma_plus = 0.1;
  p.tau = 1;
  p.N = N;
  return p;
}

// Random parameters satisfying H1 and H2. With dyadic = true every value is
// a small multiple of 1/64 so that the layout arithmetic is exact.
qfs::ModelParams<double> random_valid(std::mt19937_64& rng, bool dyadic) {
  std::uniform_int_distribution<int> tick(1, 128);
  std::uniform_real_distribution<double> u(0.05, 2.0);
  auto draw = [&] { return dyadic ? tick(rng) / 64.0 : u(rng); };
  qfs::ModelParams<double> p;
  p.E = draw();
  p.epsilon = draw();
  const double eta_max = std::sqrt(p.E * p.epsilon);
  p.eta = dyadic ? std::floor(eta_max * 64) / 64 : eta_max * std::uniform_real_distribution<double>(0, 1)(rng);
  p.sigma_minus = draw();
  p.sigma_plus = dyadic ? std::floor(p.sigma_minus * 64 * 0.9) / 64
                        : p.sigma_minus * std::uniform_real_distribution<double>(0, 0.99)(rng);
  p.tau = draw();
  p.N = std::uniform_int_distribution<int>(1, 5)(rng);
  return p;
}

}  // namespace

TEST(ValidateParams, DeskParamsAreValid) {
  EXPECT_TRUE(qfs::validate_params(desk()).ok());
}

TEST(ValidateParams, ReportsH1) {
  auto p = desk();
  p.eta = 0.8;  // 0.64 > 0.5
  const auto r = qfs::validate_params(p);
  EXPECT_FALSE(r.ok());
  EXPECT_TRUE(r.has("H1"));
  EXPECT_FALSE(r.has("H2"));
}

TEST(ValidateParams, ReportsH2AtEquality) {
  auto p = desk();
  p.sigma_plus = 0.4;
  const auto r = qfs::validate_params(p);
  EXPECT_TRUE(r.has("H2"));
}

TEST(ValidateParams, ListsEveryViolation) {
  auto p = desk();
  p.eta = 0.8;
  p.sigma_plus = 0.5;
  p.tau = -1;
  p.N = 0;
  const auto r = qfs::validate_params(p);
  EXPECT_TRUE(r.has("H1"));
  EXPECT_TRUE(r.has("H2"));
  EXPECT_TRUE(r.has("tau"));
  EXPECT_TRUE(r.has("N"));
  EXPECT_EQ(r.violations.size(), 4u);
}

TEST(ValidateParams, BoundariesAccepted) {
  auto p = desk();
  p.E = 0.5;  // eta^2 = E*eps exactly: 0.25 = 0.5*0.5
  EXPECT_TRUE(qfs::validate_params(p).ok());
  p.sigma_plus = 0;
  EXPECT_TRUE(qfs::validate_params(p).ok());
}

TEST(Kappa, Values) {
  EXPECT_NEAR(qfs::kappa(desk()), 5.0 / 3.0, 1e-15);
  auto p = desk();
  p.sigma_plus = 0;
  EXPECT_EQ(qfs::kappa(p), 1.0);
  p.sigma_plus = 0.4;
  EXPECT_THROW(qfs::kappa(p), qfs::DomainError);
}

TEST(BuildLayout, DeskY1) {
  const auto L = qfs::build_layout(desk(2), 1);
  Eigen::Matrix3d expected;
  expected << 1, 0.5, 0, 0.5, 0.5, 0, 0, 0, 0.5;
  EXPECT_EQ(L.Y, expected);
}

TEST(BuildLayout, StructureOfJXP0) {
  const auto p = desk(4);
  for (int n = 1; n <= p.N; ++n) {
    const auto L = qfs::build_layout(p, n);
    EXPECT_EQ(L.J.sum(), 2.0);
    EXPECT_EQ(L.J(0, 0), 1.0);
    EXPECT_EQ(L.J(n, n), 1.0);
    EXPECT_EQ((L.X.array() != 0).count(), 4);
    EXPECT_EQ(L.P0.sum(), 1.0);
    EXPECT_EQ(L.P0(0, 0), 1.0);
    EXPECT_EQ(L.J * L.J, L.J);
    EXPECT_EQ(L.P0 * L.P0, L.P0);
  }
}

TEST(BuildLayout, DecoupledAndDegenerateCases) {
  auto p = desk(3);
  p.eta = 0;
  auto L = qfs::build_layout(p, 2);
  EXPECT_TRUE(L.Y.isDiagonal(0.0));
  EXPECT_EQ(L.Y(0, 0), p.E);
  for (int k = 1; k <= 3; ++k) EXPECT_EQ(L.Y(k, k), p.epsilon);

  p = desk(3);
  p.E = p.epsilon;
  L = qfs::build_layout(p, 2);
  EXPECT_EQ((L.X.array() != 0).count(), 2);
  EXPECT_EQ(L.Y, p.epsilon * Eigen::MatrixXd::Identity(4, 4) + L.X);
}

TEST(BuildLayout, RejectsWindowOutOfRange) {
  EXPECT_THROW(qfs::build_layout(desk(2), 0), qfs::DomainError);
  EXPECT_THROW(qfs::build_layout(desk(2), 3), qfs::DomainError);
  auto bad = desk();
  bad.eta = 1;
  EXPECT_THROW(qfs::build_layout(bad, 1), qfs::DomainError);
}

// Y_n must reproduce the Hamiltonian coefficients: E on (0,0), eta on the
// (0,n) pair, epsilon on the remaining diagonal, zero elsewhere.
TEST(BuildLayout, ReconstructsHamiltonianCoefficientsExactly) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const auto p = random_valid(rng, true);
    ASSERT_TRUE(qfs::validate_params(p).ok());
    for (int n = 1; n <= p.N; ++n) {
      const auto L = qfs::build_layout(p, n);
      ASSERT_EQ(L.Y, L.Y.transpose());
      for (int j = 0; j <= p.N; ++j)
        for (int k = 0; k <= p.N; ++k) {
          double want = 0;
          if (j == k) want = j == 0 ? p.E : p.epsilon;
          if ((j == 0 && k == n) || (j == n && k == 0)) want = p.eta;
          ASSERT_EQ(L.Y(j, k), want) << "n=" << n << " (" << j << "," << k << ")";
        }
    }
  }
}

TEST(RelativeBound, DeskValue) {
  EXPECT_NEAR(qfs::relative_bound_c(desk()), 0.7017282255051753, 1e-14);
  EXPECT_NEAR(qfs::relative_bound_offset(desk()),
              0.7017282255051753 * std::sqrt(1.5 * 1.5 + 0.04), 1e-14);
}

TEST(RelativeBound, Limits) {
  auto p = desk();
  p.eta = 0;
  EXPECT_EQ(qfs::relative_bound_c(p), 0.0);
  // eta^2 = E eps with vanishing dissipation approaches 1 from below.
  p.E = 1;
  p.epsilon = 1;
  p.eta = 1;
  p.sigma_plus = 0;
  p.sigma_minus = 1e-6;
  const double c = qfs::relative_bound_c(p);
  EXPECT_LT(c, 1.0);
  EXPECT_GT(c, 1.0 - 1e-12);
}

TEST(RelativeBound, BelowOneAndKappaAtLeastOneOnRandomGrid) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const auto p = random_valid(rng, false);
    EXPECT_LT(qfs::relative_bound_c(p), 1.0);
    EXPECT_GE(qfs::kappa(p), 1.0);
  }
}

TEST(ModelParams, LongDoubleInstantiation) {
  qfs::ModelParams<long double> p;
  p.E = 1;
  p.epsilon = 0.5L;
  p.eta = 0.5L;
  p.sigma_minus = 0.4L;
  p.sigma_plus = 0.1L;
  p.N = 1;
  EXPECT_NEAR(static_cast<double>(qfs::relative_bound_c(p)), 0.7017282255051753, 1e-15);
}
