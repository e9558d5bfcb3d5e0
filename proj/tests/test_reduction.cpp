#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "wkam/flow.hpp"
#include "wkam/reduction.hpp"
#include "wkam/tropical.hpp"

using namespace wkam;

namespace {

const LagrangianSystem kFree = LagrangianSystem::free();
const LagrangianSystem kMech0 = LagrangianSystem::mechanical_cos(1.0, 1, 0.0);
const LagrangianSystem kMech1 = LagrangianSystem::mechanical_cos(1.0, 1, 0.1);

DiscretizedCurve random_curve(std::mt19937_64& rng, double t0, double t1, int segments) {
  std::uniform_real_distribution<double> u(0, 1);
  std::normal_distribution<double> g(0, 0.15);
  DiscretizedCurve c{t0, t1, {u(rng)}, 0};
  for (int k = 0; k < segments; ++k) c.samples.push_back(c.samples.back() + g(rng));
  c.winding = static_cast<long>(std::floor(c.samples.back()));
  return c;
}

}  // namespace

TEST(Lift, IdentityForOne) {
  const auto l = lift_system(kMech1, 1);
  for (double x : {0.1, 0.6})
    for (double v : {-1.0, 0.4}) EXPECT_EQ(l.jet(x, v, 0.3).value, kMech1.jet(x, v, 0.3).value);
}

TEST(Lift, FreeSubstitution) {
  const auto l = lift_system(kFree, 2);
  for (double v : {-3.0, 0.5, 2.0}) {
    EXPECT_DOUBLE_EQ(l.jet(0.2, v, 0.1).value, v * v / 8);
    EXPECT_DOUBLE_EQ(l.jet(0.2, v, 0.1).dvv, 0.25);
  }
  EXPECT_THROW(lift_system(kFree, 0), PreconditionError);
}

TEST(Lift, HamiltonianSubstitution) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0, 1), w(-3, 3);
  const auto l = lift_system(kMech1, 2);
  for (int k = 0; k < 100; ++k) {
    const double x = u(rng), p = w(rng), t = u(rng);
    EXPECT_EQ(l.hamiltonian(x, p, t), kMech1.hamiltonian_closed_form(x, 2 * p, 2 * t));
    // the Legendre dual of L_2 is H_2
    EXPECT_NEAR(legendre_transform(l, x, p, t).hamiltonian, l.hamiltonian(x, p, t), 1e-10);
  }
}

TEST(Lift, HalfPeriodInTime) {
  const auto l = lift_system(kMech1, 2);
  for (double t : {0.0, 0.125, 0.375}) EXPECT_EQ(l.jet(0.3, 0.2, t + 0.5).value, l.jet(0.3, 0.2, t).value);
}

TEST(LiftCurve, FreeHandComputation) {
  DiscretizedCurve g{0.0, 2.0, {}, 2};
  for (int k = 0; k <= 64; ++k) g.samples.push_back(2.0 * k / 64);
  const auto g2 = lift_curve(g, 2);
  EXPECT_EQ(g2.t0, 0.0);
  EXPECT_EQ(g2.t1, 1.0);
  EXPECT_EQ(g2.samples, g.samples);
  EXPECT_NEAR(curve_action(kFree, g), 1.0, 1e-13);
  EXPECT_NEAR(curve_action(lift_system(kFree, 2), g2), 0.5, 1e-13);
}

TEST(LiftCurve, ConstantCurve) {
  DiscretizedCurve c{0.0, 3.0, std::vector<double>(25, 0.0), 0};
  for (int n : {2, 3}) {
    EXPECT_NEAR(n * curve_action(lift_system(kMech0, n), lift_curve(c, n)), curve_action(kMech0, c),
                1e-12);
  }
}

TEST(LiftCurve, ActionIdentity) {
  std::mt19937_64 rng(13);
  for (int n : {2, 3}) {
    const auto l = lift_system(kMech1, n);
    for (int rep = 0; rep < 50; ++rep) {
      const auto c = random_curve(rng, 0.0, 3.0, 96);
      EXPECT_NEAR(n * curve_action(l, lift_curve(c, n)), curve_action(kMech1, c), 1e-10);
    }
  }
}

TEST(LiftFlow, Commutes) {
  for (int n : {2, 3}) {
    const auto l = lift_system(kMech1, n);
    const PhasePoint base{0.3, 0.4, 0.0};
    const auto a = flow_map(l, {base.x, n * base.v, 0.0}, 1.5, 600);
    const auto b = flow_map(kMech1, base, 1.5 * n, 600);
    EXPECT_NEAR(a.lifted_x, b.lifted_x, 1e-9);
    EXPECT_NEAR(a.point.v, n * b.point.v, 1e-9);
  }
}

TEST(Tilt, ZeroOnFree) {
  const auto t = tilt_system(kFree, Subsolution(SubsolutionTag::zero), 0.0);
  EXPECT_NEAR(t.validation().minimum, 0.0, 1e-2);
  EXPECT_GE(t.validation().minimum, 0.0);
  EXPECT_EQ(t.jet(0.3, 0.0, 0.2).value, 0.0);
}

TEST(Tilt, ConstantAddsC) {
  const auto t = tilt_system(kMech1, Subsolution(SubsolutionTag::constant, 4.0), 1.5);
  for (double x : {0.0, 0.3})
    EXPECT_DOUBLE_EQ(t.jet(x, 0.7, 0.2).value, kMech1.jet(x, 0.7, 0.2).value + 1.5);
}

TEST(Tilt, SubsolutionTags) {
  EXPECT_EQ(parse_subsolution("maupertuis"), SubsolutionTag::maupertuis);
  EXPECT_THROW(parse_subsolution("smooth"), ConfigError);
}

// With f' = 2 sin(pi x) the tilted Lagrangian is (v - f')^2 / 2 outside the
// smoothing band, so its zeros lie along the graph v = f'(x).
TEST(Tilt, MaupertuisNonNegative) {
  const Subsolution f(SubsolutionTag::maupertuis);
  const auto t = tilt_system(kMech0, f, 1.0);
  EXPECT_GE(t.validation().minimum, -1e-6);
  for (double x : {0.0, 0.1, 0.3, 0.45, 0.7, 0.9}) {
    const double fx = f(x, 0.0).fx;
    EXPECT_NEAR(t.jet(x, fx, 0.0).value, 0.0, 1e-12);
    EXPECT_NEAR(t.jet(x, fx + 0.2, 0.0).value, 0.02, 1e-12);
  }
  EXPECT_NEAR(f(0.25, 0).f, (2 / M_PI) * (1 - std::cos(M_PI * 0.25)), 1e-15);
  EXPECT_NEAR(f(0.75, 0).f, f(0.25, 0).f, 1e-15);
}

TEST(Tilt, WitnessOnFailure) {
  try {
    tilt_system(kMech0, Subsolution(SubsolutionTag::maupertuis), 0.5);
    FAIL() << "expected InvalidSubsolutionError";
  } catch (const InvalidSubsolutionError& e) {
    EXPECT_NEAR(e.value(), -0.5, 1e-2);
    EXPECT_LE(std::min(e.x(), 1 - e.x()), 1.0 / 64);
  }
}

TEST(Tilt, ActionIdentity) {
  std::mt19937_64 rng(19);
  const Subsolution f(SubsolutionTag::maupertuis);
  const double c = 1.0;
  const auto t = tilt_system(kMech0, f, c);
  std::uniform_int_distribution<int> start(0, 15);
  for (int rep = 0; rep < 200; ++rep) {
    const double a = start(rng) / 16.0;
    const auto curve = random_curve(rng, a, a + 1.5, 48);
    const double lhs = curve_action(t, curve);
    const double rhs = curve_action(kMech0, curve) + c * (curve.t1 - curve.t0) +
                       f(curve.samples.front(), a).f - f(curve.samples.back(), curve.t1).f;
    EXPECT_NEAR(lhs, rhs, 1e-9);
  }
}

TEST(Tilt, MinimizerInvariant) {
  const auto t = tilt_system(kMech0, Subsolution(SubsolutionTag::maupertuis), 1.0);
  for (auto [x, y] : {std::pair{0.2, 0.3}, {0.1, 0.8}, {0.6, 0.55}}) {
    const auto a = minimal_action(kMech0, x, 0.0, y, 1.0);
    const auto b = minimal_action(t, x, 0.0, y, 1.0);
    ASSERT_EQ(a.curve.samples.size(), b.curve.samples.size());
    EXPECT_EQ(a.curve.winding, b.curve.winding);
    for (std::size_t k = 0; k < a.curve.samples.size(); ++k)
      EXPECT_NEAR(a.curve.samples[k], b.curve.samples[k], 1e-6);
  }
}

TEST(Tilt, NormalizesCriticalValue) {
  const Grid g(32);
  const double c = karp_eigenvalue(assemble_kernel(kMech0, g, 0.0, 1.0));
  const auto t = tilt_system(kMech0, Subsolution(SubsolutionTag::maupertuis), c);
  EXPECT_NEAR(karp_eigenvalue(assemble_kernel(t, g, 0.0, 1.0)), 0.0, 2e-2);
}
