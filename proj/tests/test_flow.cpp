#include <gtest/gtest.h>

#include <cmath>

#include "wkam/flow.hpp"

using namespace wkam;

namespace {

const LagrangianSystem kFree = LagrangianSystem::free();
const LagrangianSystem kMech0 = LagrangianSystem::mechanical_cos(1.0, 1, 0.0);
const LagrangianSystem kMech1 = LagrangianSystem::mechanical_cos(1.0, 1, 0.1);
const double kTau = 2 * M_PI;

}  // namespace

TEST(FlowMap, FreeStraightLine) {
  const auto r = flow_map(kFree, {0.0, 0.5, 0.0}, 2.0, 400);
  EXPECT_NEAR(r.lifted_x, 1.0, 1e-13);
  EXPECT_EQ(r.winding, 1);
  EXPECT_NEAR(r.point.v, 0.5, 1e-15);
  EXPECT_NEAR(std::min(r.point.x, 1 - r.point.x), 0.0, 1e-13);
}

TEST(FlowMap, EquilibriaPersist) {
  for (const auto* sys : {&kMech0, &kMech1}) {
    const auto r = flow_map(*sys, {0.0, 0.0, 0.0}, 1.0, 200);
    EXPECT_EQ(r.point.x, 0.0);
    EXPECT_EQ(r.point.v, 0.0);
  }
}

TEST(FlowMap, StepCountChecked) {
  EXPECT_THROW(flow_map(kFree, {0, 0, 0}, 1.0, 0), PreconditionError);
}

TEST(FlowMap, Composition) {
  const PhasePoint p{0.2, 0.7, 0.0};
  const auto whole = flow_map(kMech1, p, 2.0, 400);
  const auto half = flow_map(kMech1, p, 1.0, 200);
  const auto rest = flow_map(kMech1, {half.lifted_x, half.point.v, 1.0}, 2.0, 200);
  EXPECT_NEAR(whole.lifted_x, rest.lifted_x, 1e-9);
  EXPECT_NEAR(whole.point.v, rest.point.v, 1e-9);
}

// Over a short window, where the hyperbolic stretching does not mask the
// asymptotic regime.
TEST(FlowMap, FourthOrder) {
  const PhasePoint p{0.2, 0.7, 0.0};
  const auto ref10 = flow_map(kMech1, p, 0.25, 800);
  const auto coarse = flow_map(kMech1, p, 0.25, 40);
  const auto fine = flow_map(kMech1, p, 0.25, 80);
  const double ec = std::hypot(coarse.lifted_x - ref10.lifted_x, coarse.point.v - ref10.point.v);
  const double ef = std::hypot(fine.lifted_x - ref10.lifted_x, fine.point.v - ref10.point.v);
  EXPECT_NEAR(ec / ef, 16.0, 2.5);
}

TEST(Monodromy, HyperbolicRestPoint) {
  const Eigen::Matrix2d m = monodromy(kMech0, {0.0, 0.0, 0.0}, 1);
  const auto f = floquet_analysis(m, 1);
  EXPECT_NEAR(std::abs(f.multipliers[0]) / std::exp(kTau), 1.0, 1e-6);
  EXPECT_NEAR(std::abs(f.multipliers[1]) / std::exp(-kTau), 1.0, 1e-6);
}

TEST(Monodromy, FreeShear) {
  const Eigen::Matrix2d m = monodromy(kFree, {0.3, 0.0, 0.0}, 1);
  EXPECT_NEAR(m(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(m(0, 1), 1.0, 1e-14);
  EXPECT_NEAR(m(1, 0), 0.0, 1e-14);
  EXPECT_NEAR(m(1, 1), 1.0, 1e-14);
}

TEST(Monodromy, TimePeriodicProductIsOne) {
  const Eigen::Matrix2d m = monodromy(kMech1, {0.0, 0.0, 0.0}, 1);
  const auto f = floquet_analysis(m, 1);
  EXPECT_NEAR(f.multipliers[0].imag(), 0.0, 1e-12);
  EXPECT_NEAR(f.multipliers[1].imag(), 0.0, 1e-12);
  EXPECT_NEAR((f.multipliers[0] * f.multipliers[1]).real(), 1.0, 1e-8);
}

TEST(Monodromy, UnitDeterminant) {
  for (const auto* sys : {&kFree, &kMech0, &kMech1})
    EXPECT_NEAR(monodromy(*sys, {0.0, 0.0, 0.0}, 1).determinant(), 1.0, 1e-6);
}

TEST(Monodromy, NonPeriodicSeedRejected) {
  try {
    monodromy(kMech0, {0.3, 0.0, 0.0}, 1);
    FAIL() << "expected PreconditionError";
  } catch (const PreconditionError& e) {
    EXPECT_GT(e.defect(), 1e-8);
  }
}

TEST(Floquet, DiagonalExamples) {
  Eigen::MatrixXd m(2, 2);
  m << 535.4917, 0, 0, 1.8674e-3;
  auto f = floquet_analysis(m, 1);
  EXPECT_TRUE(f.hyperbolic);
  EXPECT_NEAR(f.exponents[0].real(), kTau, 1e-4);
  EXPECT_NEAR(f.exponents[1].real(), -kTau, 1e-4);
  EXPECT_NEAR(f.lambda, f.exponents[0].real() * 0.999, 1e-15);

  m << 1, 1, 0, 1;
  EXPECT_FALSE(floquet_analysis(m, 1).hyperbolic);

  m << 2, 0, 0, 0.5;
  f = floquet_analysis(m, 2);
  EXPECT_NEAR(f.exponents[0].real(), std::log(2.0) / 2, 1e-15);
  EXPECT_NEAR(f.exponents[1].real(), -std::log(2.0) / 2, 1e-15);
}

TEST(Floquet, ShapeChecked) {
  EXPECT_THROW(floquet_analysis(Eigen::MatrixXd::Identity(3, 3), 1), PreconditionError);
  EXPECT_THROW(floquet_analysis(Eigen::MatrixXd::Identity(2, 2), 0), PreconditionError);
}

TEST(RefineOrbit, FindsRestPoint) {
  const auto o = refine_periodic_orbit(kMech0, {0.01, 0.01, 0.0}, 1);
  EXPECT_NEAR(std::min(o.initial.x, 1 - o.initial.x), 0.0, 1e-10);
  EXPECT_NEAR(o.initial.v, 0.0, 1e-10);
  EXPECT_TRUE(o.hyperbolic);
  EXPECT_NEAR(o.lambda / 0.999, kTau, 1e-6);
  EXPECT_LE(o.defect, 1e-10);
  EXPECT_EQ(o.winding, 0);
}

TEST(RefineOrbit, TwoOrbitsForFrequencyTwo) {
  const auto q2 = LagrangianSystem::mechanical_cos(1.0, 2, 0.0);
  const auto a = refine_periodic_orbit(q2, {0.02, 0.0, 0.0}, 1);
  const auto b = refine_periodic_orbit(q2, {0.48, 0.0, 0.0}, 1);
  EXPECT_NEAR(std::min(a.initial.x, 1 - a.initial.x), 0.0, 1e-10);
  EXPECT_NEAR(b.initial.x, 0.5, 1e-10);
  EXPECT_TRUE(a.hyperbolic);
  EXPECT_TRUE(b.hyperbolic);
}

TEST(RefineOrbit, FreeIsDegenerate) {
  EXPECT_THROW(refine_periodic_orbit(kFree, {0.3, 0.0, 0.0}, 1), DegenerateOrbitError);
}

TEST(RefineOrbit, FixedPoint) {
  const auto o = refine_periodic_orbit(kMech1, {0.01, 0.01, 0.0}, 1);
  const auto again = refine_periodic_orbit(kMech1, o.initial, 1);
  EXPECT_LT(std::abs(again.initial.x - o.initial.x), 1e-12);
  EXPECT_LT(std::abs(again.initial.v - o.initial.v), 1e-12);
}

TEST(RefineOrbit, PeriodChecked) {
  EXPECT_THROW(refine_periodic_orbit(kMech0, {0, 0, 0}, 0), PreconditionError);
}
