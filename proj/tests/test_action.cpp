#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "wkam/action.hpp"

using namespace wkam;

namespace {

const LagrangianSystem kFree = LagrangianSystem::free();
const LagrangianSystem kMech0 = LagrangianSystem::mechanical_cos(1.0, 1, 0.0);
const LagrangianSystem kMech1 = LagrangianSystem::mechanical_cos(1.0, 1, 0.1);

// min over integer k of (y - x + k)^2 / (2 T), by scanning k
double free_oracle(double x, double y, double T) {
  double best = INFINITY;
  for (int k = -3; k <= 3; ++k) best = std::min(best, (y - x + k) * (y - x + k) / (2 * T));
  return best;
}

}  // namespace

TEST(MinimalAction, FreeExamples) {
  const auto a = minimal_action(kFree, 0.0, 0.0, 0.4, 1.0);
  EXPECT_NEAR(a.value, 0.08, 1e-12);
  EXPECT_EQ(a.curve.winding, 0);
  const auto b = minimal_action(kFree, 0.0, 0.0, 0.6, 1.0);
  EXPECT_NEAR(b.value, 0.08, 1e-12);
  EXPECT_EQ(b.curve.winding, -1);
  EXPECT_NEAR(minimal_action(kFree, 0.0, 0.0, 0.4, 2.0).value, 0.04, 1e-12);
}

TEST(MinimalAction, MechanicalRestBound) {
  const auto a = minimal_action(kMech0, 0.0, 0.0, 0.0, 1.0);
  EXPECT_LE(a.value, -1.0 + 1e-3);
}

TEST(MinimalAction, FreeOracleGrid) {
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      const double x = i / 20.0, y = j / 20.0 + 0.013;
      EXPECT_NEAR(minimal_action(kFree, x, 0.0, y, 1.0).value, free_oracle(x, y, 1.0), 1e-6)
          << x << " " << y;
    }
  }
}

TEST(MinimalAction, EndpointsAndValueConsistent) {
  const auto a = minimal_action(kMech1, 0.3, 0.25, 0.85, 1.75);
  EXPECT_EQ(a.curve.samples.front(), 0.3);
  EXPECT_EQ(a.curve.samples.back(), 0.85 + a.curve.winding);
  EXPECT_EQ(a.curve.t0, 0.25);
  EXPECT_EQ(a.curve.t1, 1.75);
  EXPECT_EQ(curve_action(kMech1, a.curve), a.value);
  EXPECT_LE(a.residual, 1e-9);
}

TEST(MinimalAction, EndpointsReducedModOne) {
  const auto a = minimal_action(kFree, 1.3, 0.0, -0.2, 1.0);
  EXPECT_NEAR(a.curve.samples.front(), 0.3, 1e-15);
  EXPECT_NEAR(a.value, free_oracle(0.3, 0.8, 1.0), 1e-12);
}

// Windows aligned on the shared time grid (integer endpoints), so the
// concatenated broken curve is admissible for the long window.
TEST(MinimalAction, Subadditive) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0, 1);
  for (int k = 0; k < 12; ++k) {
    const double x = u(rng), y = u(rng), z = u(rng);
    const double ac = minimal_action(kMech1, x, 0.0, z, 2.0).value;
    const double ab = minimal_action(kMech1, x, 0.0, y, 1.0).value;
    const double bc = minimal_action(kMech1, y, 1.0, z, 2.0).value;
    EXPECT_LE(ac, ab + bc + 1e-8);
  }
}

TEST(MinimalAction, SecondOrderInSegments) {
  auto value = [](int segments) {
    MinimizationSettings s;
    s.n_segments = segments;
    return minimal_action(kMech1, 0.1, 0.0, 0.35, 1.0, s).value;
  };
  const double a = value(16), b = value(32), c = value(64);
  const double ratio = (a - b) / (b - c);
  EXPECT_GE(ratio, 3.0);
  EXPECT_LE(ratio, 6.0);
}

TEST(MinimalAction, Preconditions) {
  EXPECT_THROW(minimal_action(kFree, 0.0, 1.0, 0.0, 1.0), PreconditionError);
  MinimizationSettings s;
  s.n_segments = 1;
  EXPECT_THROW(minimal_action(kFree, 0.0, 0.0, 0.0, 1.0, s), ConfigError);
  s = {};
  s.gradient_tolerance = 1.5;
  EXPECT_THROW(minimal_action(kFree, 0.0, 0.0, 0.0, 1.0, s), ConfigError);
  s = {};
  s.winding_range = -1;
  EXPECT_THROW(minimal_action(kFree, 0.0, 0.0, 0.0, 1.0, s), ConfigError);
}

TEST(MinimalAction, WindingOrder) {
  const std::vector<long> expect{0, -1, 1, -2, 2};
  EXPECT_EQ(winding_candidates(2.0, 1), expect);
  EXPECT_EQ(winding_candidates(0.5, 1), (std::vector<long>{0, -1, 1}));
  EXPECT_EQ(winding_candidates(3.0, 0), (std::vector<long>{0}));
}

TEST(RefineCurve, KeepsEndpointsAndClass) {
  DiscretizedCurve seed{0.0, 1.0, {}, 1};
  for (int k = 0; k <= 32; ++k) seed.samples.push_back(0.2 + 1.0 * k / 32.0);
  const auto r = refine_curve(kFree, seed);
  EXPECT_EQ(r.curve.winding, 1);
  EXPECT_EQ(r.curve.samples.front(), 0.2);
  EXPECT_EQ(r.curve.samples.back(), 1.2);
  EXPECT_NEAR(r.value, 0.5, 1e-12);
}

TEST(Phi, FreeHorizonFive) {
  EXPECT_NEAR(action_functional_phi(kFree, 0.0, 0.0, 0.4, 0.0, 0.0, 5), 0.016, 1e-10);
}

TEST(Phi, MechanicalRestNonPositive) {
  EXPECT_LE(action_functional_phi(kMech0, 0.0, 0.0, 0.0, 0.0, 1.0, 3), 1e-3);
}

TEST(Phi, SingleWindow) {
  const double phi = action_functional_phi(kMech1, 0.2, 0.0, 0.7, 0.0, 0.9, 1);
  EXPECT_DOUBLE_EQ(phi, minimal_action(kMech1, 0.2, 0.0, 0.7, 1.0).value + 0.9);
}

TEST(Phi, HorizonChecked) {
  EXPECT_THROW(action_functional_phi(kFree, 0.0, 0.0, 0.0, 0.0, 0.0, 0), PreconditionError);
}
