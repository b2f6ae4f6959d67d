#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "wkam/monodromy.hpp"

using namespace wkam;

namespace {
constexpr double kPi = std::numbers::pi;

double top_modulus(const MonodromyReport& r) {
  double m = 0.0;
  for (const auto& l : r.eigenvalues) m = std::max(m, std::abs(l));
  return m;
}
}  // namespace

TEST(Monodromy, AutonomousPendulumHasClosedFormSpectrum) {
  auto s = catalog_get("forced_pendulum_1d", {{"a", 1.0}, {"eps", 0.0}});
  const auto r = monodromy(s, std::array<double, 1>{0.0});
  EXPECT_TRUE(r.hyperbolic);
  const double up = std::exp(2 * kPi), down = std::exp(-2 * kPi);
  EXPECT_NEAR(top_modulus(r) / up, 1.0, 1e-4);
  EXPECT_NEAR(r.lambda_max / down, 1.0, 1e-4);
  EXPECT_NEAR(r.mu, 2 * kPi, 1e-4 * 2 * kPi);
  EXPECT_NEAR(r.det, 1.0, 1e-6);
  EXPECT_LE(r.pairing_defect, 1e-6);
  EXPECT_NEAR(r.position[0], 0.0, 1e-12);
  EXPECT_NEAR(r.velocity[0], 0.0, 1e-12);
}

TEST(Monodromy, ForcedPendulumIsHyperbolicWithBoundedExponent) {
  auto s = catalog_get("forced_pendulum_1d", {{"a", 0.05}, {"eps", 0.2}});
  const auto r = monodromy(s, std::array<double, 1>{0.01});
  EXPECT_TRUE(r.hyperbolic);
  EXPECT_GT(r.mu, 0.0);
  EXPECT_LT(r.mu, 2 * kPi * std::sqrt(0.06));
  EXPECT_NEAR(r.det, 1.0, 1e-6);
  EXPECT_LE(r.pairing_defect, 1e-6);
  EXPECT_NEAR(r.position[0], 0.0, 1e-9);
}

TEST(Monodromy, StepDoublingIsConsistent) {
  auto s = catalog_get("forced_pendulum_1d", {{"a", 0.05}, {"eps", 0.2}});
  const auto coarse = monodromy(s, std::array<double, 1>{0.0}, 1024);
  const auto fine = monodromy(s, std::array<double, 1>{0.0}, 2048);
  EXPECT_NEAR(coarse.mu, fine.mu, 1e-9);
  EXPECT_LE((coarse.matrix - fine.matrix).norm(), 1e-9);
}

TEST(Monodromy, PlaneExampleIsNotHyperbolic) {
  auto s = catalog_get("example_4_1", {{"c", 0.5}});
  const auto r = monodromy(s, std::array<double, 2>{0.0, 0.0});
  EXPECT_FALSE(r.hyperbolic);
  EXPECT_EQ(r.matrix.rows(), 4);
  EXPECT_NEAR(r.det, 1.0, 1e-6);
  EXPECT_NEAR(r.velocity[1], 0.5, 1e-12);
}

TEST(Monodromy, RejectsBadInput) {
  auto s = catalog_get("forced_pendulum_1d", {});
  EXPECT_THROW(monodromy(s, std::array<double, 2>{0.0, 0.0}), ArgumentError);
  EXPECT_THROW(poincare_map(s, Eigen::VectorXd::Zero(2), 0), ArgumentError);
}
