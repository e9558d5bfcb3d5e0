#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <random>

#include "wkam/tropical.hpp"

using namespace wkam;

namespace {

MinPlusMatrix from(std::initializer_list<std::initializer_list<double>> rows) {
  MinPlusMatrix m(rows.size());
  std::size_t i = 0;
  for (const auto& r : rows) {
    std::size_t j = 0;
    for (double e : r) m(i, j++) = e;
    ++i;
  }
  return m;
}

// Minimum mean over all simple cycles, by explicit enumeration.
double brute_min_cycle_mean(const MinPlusMatrix& k) {
  const int n = static_cast<int>(k.size());
  double best = INFINITY;
  std::vector<int> path;
  std::vector<bool> used(n, false);
  std::function<void(int, double)> walk = [&](int v, double w) {
    const int start = path.front();
    if (k(v, start) < INFINITY)
      best = std::min(best, (w + k(v, start)) / static_cast<double>(path.size()));
    for (int u = start + 1; u < n; ++u) {
      if (used[u]) continue;
      used[u] = true;
      path.push_back(u);
      walk(u, w + k(v, u));
      path.pop_back();
      used[u] = false;
    }
  };
  for (int s = 0; s < n; ++s) {
    path = {s};
    used.assign(n, false);
    used[s] = true;
    walk(s, 0.0);
  }
  return best;
}

MinPlusMatrix random_integer(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<int> d(-20, 40);
  MinPlusMatrix m(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = d(rng);
  return m;
}

}  // namespace

TEST(Grid, RejectsCoarse) {
  EXPECT_THROW(Grid(4), ConfigError);
  EXPECT_NO_THROW(Grid(8));
}

TEST(Grid, NearestAndDistance) {
  const Grid g(8);
  EXPECT_EQ(g.nearest(0.99), 0);
  EXPECT_EQ(g.nearest(0.26), 2);
  EXPECT_EQ(g.distance(0, 7), 1);
}

TEST(Kernel, FreeClosedForm) {
  const auto k = assemble_kernel(LagrangianSystem::free(), Grid(8), 0.0, 1.0);
  EXPECT_NEAR(k.matrix(0, 2), 0.03125, 1e-12);
  EXPECT_NEAR(k.matrix(0, 1), 0.0078125, 1e-12);
  for (int i = 0; i < 8; ++i) {
    for (int j = 0; j < 8; ++j) {
      EXPECT_NEAR(k.matrix(i, j), k.matrix(j, i), 1e-12);
      EXPECT_NEAR(k.matrix(i, j), k.matrix(0, (j - i + 8) % 8), 1e-12);
    }
  }
}

TEST(Kernel, MechanicalDiagonal) {
  const auto k = assemble_kernel(LagrangianSystem::mechanical_cos(1, 1, 0), Grid(64), 0.0, 1.0);
  EXPECT_NEAR(k.matrix(0, 0), -1.0, 2e-2);
}

TEST(Kernel, DurationChecked) {
  EXPECT_THROW(assemble_kernel(LagrangianSystem::free(), Grid(8), 0.0, 0.0), PreconditionError);
}

TEST(MinPlusApply, Examples) {
  const auto k = from({{0, 3}, {1, 5}});
  const std::vector<double> z{0, 0}, s{10, 0};
  auto a = minplus_apply(k, z);
  EXPECT_EQ(a.values, (std::vector<double>{0, 3}));
  EXPECT_EQ(a.argmin, (std::vector<int>{0, 0}));
  a = minplus_apply(k, s);
  EXPECT_EQ(a.values, (std::vector<double>{1, 5}));
  const std::vector<double> u{0.3, -2, 7};
  EXPECT_EQ(minplus_apply(MinPlusMatrix::identity(3), u).values, u);
}

TEST(MinPlusApply, ShapeChecked) {
  const std::vector<double> u{0, 0, 0};
  EXPECT_THROW(minplus_apply(MinPlusMatrix(2), u), PreconditionError);
}

TEST(Karp, Examples) {
  EXPECT_EQ(karp_eigenvalue(from({{0, 3}, {1, 5}})), 0.0);
  EXPECT_FALSE(std::signbit(karp_eigenvalue(from({{0, 3}, {1, 5}}))));
  EXPECT_EQ(karp_eigenvalue(from({{2, 1}, {4, 3}})), -2.0);
  EXPECT_EQ(karp_eigenvalue(from({{2, 1}, {4, 3}}), 0.5), -4.0);
}

TEST(Karp, FreeKernelIsZero) {
  const auto k = assemble_kernel(LagrangianSystem::free(), Grid(16), 0.0, 1.0);
  EXPECT_EQ(karp_eigenvalue(k), 0.0);
}

TEST(Karp, MatchesBruteForce) {
  std::mt19937_64 rng(17);
  for (int n = 1; n <= 7; ++n) {
    for (int rep = 0; rep < 20; ++rep) {
      const auto m = random_integer(rng, n);
      EXPECT_NEAR(min_mean_cycle(m), brute_min_cycle_mean(m), 1e-12) << "n=" << n;
    }
  }
}

TEST(Karp, ShiftEquivariant) {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 10; ++rep) {
    const auto m = random_integer(rng, 6);
    EXPECT_NEAR(karp_eigenvalue(m.shifted(4.0)), karp_eigenvalue(m) - 4.0, 1e-12);
  }
}

TEST(MinPlus, AssociativeAndMonotone) {
  std::mt19937_64 rng(29);
  std::uniform_int_distribution<int> d(-10, 10);
  for (int rep = 0; rep < 20; ++rep) {
    const auto k = random_integer(rng, 8);
    std::vector<double> u(8), w(8);
    for (int i = 0; i < 8; ++i) {
      u[i] = d(rng);
      w[i] = u[i] + std::abs(d(rng));
    }
    const auto lhs = minplus_apply(minplus_product(k, k), u).values;
    const auto rhs = minplus_apply(k, minplus_apply(k, u).values).values;
    EXPECT_EQ(lhs, rhs);
    const auto ku = minplus_apply(k, u).values, kw = minplus_apply(k, w).values;
    for (int i = 0; i < 8; ++i) EXPECT_LE(ku[i], kw[i]);
  }
}

TEST(Eigenvector, TwoByTwo) {
  const auto r = tropical_eigenvector(from({{0, 3}, {1, 5}}), 0.0, 1e-12, 100);
  EXPECT_TRUE(r.converged);
  EXPECT_EQ(r.values, (std::vector<double>{0, 3}));
}

TEST(Eigenvector, FreeKernelConstant) {
  const auto k = assemble_kernel(LagrangianSystem::free(), Grid(16), 0.0, 1.0);
  const auto r = tropical_eigenvector(k.matrix, 0.0, 1e-12, 100);
  EXPECT_TRUE(r.converged);
  const auto [lo, hi] = std::minmax_element(r.values.begin(), r.values.end());
  EXPECT_LE(*hi - *lo, 1e-12);
}

TEST(Eigenvector, NonConvergenceFlagged) {
  // the normalized iterates alternate (1,0), (0,0), ...
  const auto r = tropical_eigenvector(from({{kInf, 0}, {1, kInf}}), -0.5, 1e-12, 50);
  EXPECT_FALSE(r.converged);
  EXPECT_EQ(r.iterations, 50);
  // stationary after normalization but c is wrong, so the residual is 1
  const auto s = tropical_eigenvector(from({{0, 1}, {1, 0}}), 1.0, 1e-12, 50);
  EXPECT_FALSE(s.converged);
  EXPECT_NEAR(s.residual, 1.0, 1e-15);
}
