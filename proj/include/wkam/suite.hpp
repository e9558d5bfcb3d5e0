#pragma once

// The acceptance matrix as one deterministic batch. Every criterion yields a
// verdict, a one-line detail and one or more CSV tables; wall-clock time is
// measured but never written to the tables.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "wkam/action.hpp"
#include "wkam/csv.hpp"
#include "wkam/error.hpp"
#include "wkam/experiments.hpp"
#include "wkam/flow.hpp"
#include "wkam/lagrangian.hpp"
#include "wkam/reduction.hpp"
#include "wkam/tropical.hpp"
#include "wkam/weak_kam.hpp"

namespace wkam {

inline constexpr int kCriterionCount = 12;

struct SuiteSettings {
  int grid = 256;
  int cross_grid = 512;  // independent Karp check of criterion 1
  int horizon = 16;      // barrier horizon
  int k_max = 60;
  double aubry_tolerance = 2e-2;
  std::uint64_t seed = 0;
  MinimizationSettings cfg;
};

struct NamedTable {
  std::string name;  // file stem
  Table table;
};

struct CriterionOutcome {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  std::vector<NamedTable> tables;
  double seconds = 0.0;  // timed section, not part of any output file
};

inline std::string short_fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Smooth random lifted curve: x(tau) = x0 + w tau + sum of two sines.
inline DiscretizedCurve random_curve(std::mt19937_64& rng, int samples = 65) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DiscretizedCurve c;
  c.t0 = u(rng);
  c.t1 = c.t0 + 0.5 + 2.0 * u(rng);
  const double x0 = u(rng);
  const double w = 4.0 * u(rng) - 2.0;
  const double a1 = 0.3 * u(rng) - 0.15, a2 = 0.2 * u(rng) - 0.1;
  const double span = c.t1 - c.t0;
  for (int k = 0; k < samples; ++k) {
    const double s = static_cast<double>(k) / (samples - 1);
    c.samples.push_back(x0 + w * s * span + a1 * std::sin(std::numbers::pi * s) +
                        a2 * std::sin(3.0 * std::numbers::pi * s));
  }
  c.winding = static_cast<long>(std::floor(c.samples.back()));
  return c;
}

/// Least cycle mean by enumerating simple cycles (each rooted at its
/// smallest vertex). Exponential; meant for n <= 7.
inline double brute_force_min_cycle_mean(const MinPlusMatrix& k) {
  const int n = static_cast<int>(k.size());
  double best = kInf;
  std::vector<bool> used(n, false);
  std::function<void(int, int, double, int)> extend = [&](int root, int at, double w, int len) {
    for (int nx = root; nx < n; ++nx) {
      if (nx == root) {
        best = std::min(best, (w + k(at, root)) / static_cast<double>(len));
        continue;
      }
      if (used[nx]) continue;
      used[nx] = true;
      extend(root, nx, w + k(at, nx), len + 1);
      used[nx] = false;
    }
  };
  for (int r = 0; r < n; ++r) {
    used[r] = true;
    extend(r, r, 0.0, 1);
    used[r] = false;
  }
  return best;
}

class PaperSuite {
 public:
  explicit PaperSuite(SuiteSettings s = {}) : s_(std::move(s)) {}

  const SuiteSettings& settings() const { return s_; }

  static std::string title(int id) {
    static const char* names[kCriterionCount] = {
        "critical value oracle",    "barrier oracle",          "aubry detection",
        "floquet oracle",           "semigroup limit",         "convergence rate",
        "reduction identities",     "tilt identities",         "tropical core",
        "connection graph",         "dwell diagnostics",       "determinism"};
    if (id < 1 || id > kCriterionCount) throw ConfigError("unknown criterion " + std::to_string(id));
    return names[id - 1];
  }

  CriterionOutcome run(int id) {
    CriterionOutcome out;
    out.id = id;
    out.title = title(id);
    switch (id) {
      case 1: critical_value_oracle(out); break;
      case 2: barrier_oracle(out); break;
      case 3: aubry_detection(out); break;
      case 4: floquet_oracle(out); break;
      case 5: semigroup_limit_check(out); break;
      case 6: convergence_rate(out); break;
      case 7: reduction_identities(out); break;
      case 8: tilt_identities(out); break;
      case 9: tropical_core(out); break;
      case 10: connection_graph_check(out); break;
      case 11: dwell_diagnostics(out); break;
      case 12: determinism(out, nullptr); break;
    }
    return out;
  }

  /// Criteria 1..11, then 12 as an in-process rerun compared byte for byte.
  std::vector<CriterionOutcome> run_all() {
    std::vector<CriterionOutcome> all;
    for (int id = 1; id < kCriterionCount; ++id) all.push_back(run(id));
    CriterionOutcome last;
    last.id = kCriterionCount;
    last.title = title(kCriterionCount);
    determinism(last, &all);
    all.push_back(std::move(last));
    return all;
  }

  static Table summary(const std::vector<CriterionOutcome>& all) {
    Table t({"id", "criterion", "verdict", "detail"});
    for (const auto& o : all) t.add({fmt(o.id), o.title, o.pass ? "PASS" : "FAIL", o.detail});
    return t;
  }

  static std::string file_name(const CriterionOutcome& o, const NamedTable& t) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02d", o.id);
    return "criterion_" + std::string(buf) + (t.name.empty() ? "" : "_" + t.name) + ".csv";
  }

  static void write_bundle(const std::string& dir, const std::vector<CriterionOutcome>& all) {
    std::filesystem::create_directories(dir);
    for (const auto& o : all)
      for (const auto& t : o.tables)
        write_file((std::filesystem::path(dir) / file_name(o, t)).string(), t.table.str());
    write_file((std::filesystem::path(dir) / "summary.csv").string(), summary(all).str());
  }

 private:
  using Clock = std::chrono::steady_clock;

  LagrangianSystem mech(int q, double eps) const {
    return LagrangianSystem::mechanical_cos(1.0, q, eps);
  }

  const TropicalKernel& kernel(int q, double eps, int n) {
    const auto key = std::make_tuple(q, eps, n);
    auto it = kernels_.find(key);
    if (it == kernels_.end())
      it = kernels_.emplace(key, assemble_kernel(mech(q, eps), Grid(n), 0.0, 1.0, s_.cfg)).first;
    return it->second;
  }

  const BarrierMatrix& barrier(int q, double eps) {
    const auto key = std::make_tuple(q, eps, s_.grid);
    auto it = barriers_.find(key);
    if (it == barriers_.end()) {
      const TropicalKernel& k = kernel(q, eps, s_.grid);
      it = barriers_.emplace(key, peierls_barrier(k, karp_eigenvalue(k), s_.horizon)).first;
    }
    return it->second;
  }

  int index_of(double x) const { return Grid(s_.grid).nearest(x); }

  void critical_value_oracle(CriterionOutcome& out) {
    Table t({"q", "n", "c", "abs_error"});
    bool pass = true;
    double worst = 0.0, cross = 0.0;
    for (int q : {1, 2}) {
      const auto start = Clock::now();
      const double c = karp_eigenvalue(kernel(q, 0.0, s_.grid));
      out.seconds = std::max(out.seconds, std::chrono::duration<double>(Clock::now() - start).count());
      const double c2 = karp_eigenvalue(kernel(q, 0.0, s_.cross_grid));
      t.add({fmt(q), fmt(s_.grid), fmt(c), fmt(std::abs(c - 1.0))});
      t.add({fmt(q), fmt(s_.cross_grid), fmt(c2), fmt(std::abs(c2 - 1.0))});
      worst = std::max(worst, std::abs(c - 1.0));
      cross = std::max(cross, std::abs(c2 - c));
      pass = pass && std::abs(c - 1.0) <= 1e-2 && std::abs(c2 - 1.0) <= 1e-2 &&
             std::abs(c2 - c) <= 3e-3;
    }
    out.pass = pass;
    out.detail = "max |c-1| " + short_fmt(worst) + "; n=" + fmt(s_.grid) + " vs n=" +
                 fmt(s_.cross_grid) + " gap " + short_fmt(cross);
    out.tables.push_back({"", std::move(t)});
  }

  void barrier_oracle(CriterionOutcome& out) {
    const BarrierMatrix& h = barrier(1, 0.0);
    Table t({"x", "h", "oracle", "abs_error"});
    double worst = 0.0;
    for (double x : {0.125, 0.25, 0.375, 0.5}) {
      const double value = h(0, index_of(x));
      const double oracle = (2.0 / std::numbers::pi) * (1.0 - std::cos(std::numbers::pi * x));
      worst = std::max(worst, std::abs(value - oracle));
      t.add({fmt(x), fmt(value), fmt(oracle), fmt(std::abs(value - oracle))});
    }
    out.pass = worst <= 2e-2;
    out.detail = "max error " + short_fmt(worst) + "; stabilization defect " + short_fmt(h.defect);
    out.tables.push_back({"", std::move(t)});
  }

  void aubry_detection(CriterionOutcome& out) {
    Table t({"q", "cluster", "size", "first_x", "last_x", "representative_x"});
    bool pass = true;
    std::string detail;
    for (int q : {1, 2}) {
      const BarrierMatrix& h = barrier(q, 0.0);
      const AubrySet a = aubry_set(h, s_.aubry_tolerance);
      const Grid& g = h.grid;
      for (std::size_t c = 0; c < a.clusters.size(); ++c)
        t.add({fmt(q), fmt(static_cast<int>(c)), fmt(static_cast<int>(a.clusters[c].size())),
               fmt(g.point(a.clusters[c].front())), fmt(g.point(a.clusters[c].back())),
               fmt(g.point(a.representatives[c]))});
      std::vector<double> expected = q == 1 ? std::vector<double>{0.0}
                                            : std::vector<double>{0.0, 0.5};
      bool ok = a.clusters.size() == expected.size();
      for (std::size_t c = 0; ok && c < expected.size(); ++c) {
        const int target = g.nearest(expected[c]);
        const auto& cl = a.clusters[c];
        ok = std::find(cl.begin(), cl.end(), target) != cl.end() &&
             g.distance(a.representatives[c], target) <= 1;
      }
      pass = pass && ok;
      detail += (detail.empty() ? "" : "; ") + std::string("q=") + fmt(q) + " " +
                fmt(static_cast<int>(a.clusters.size())) + " cluster(s)";
    }
    out.pass = pass;
    out.detail = detail;
    out.tables.push_back({"", std::move(t)});
  }

  void floquet_oracle(CriterionOutcome& out) {
    Table t({"eps", "x", "v", "multiplier_1", "multiplier_2", "multiplier_1_imag",
             "multiplier_2_imag", "product_minus_1", "defect", "lambda", "hyperbolic"});
    bool pass = true;
    double rel = 0.0, prod = 0.0;
    for (double eps : {0.0, 0.1}) {
      const PeriodicOrbit o = refine_periodic_orbit(mech(1, eps), {0.01, 0.01, 0.0}, 1);
      const auto& m = o.multipliers;
      const double p = std::abs((m[0] * m[1]).real() - 1.0);
      t.add({fmt(eps), fmt(o.initial.x), fmt(o.initial.v), fmt(m[0].real()), fmt(m[1].real()),
             fmt(m[0].imag()), fmt(m[1].imag()), fmt(p), fmt(o.defect), fmt(o.lambda),
             fmt(o.hyperbolic)});
      pass = pass && o.defect <= 1e-10 && o.hyperbolic;
      if (eps == 0.0) {
        const double e = std::exp(2.0 * std::numbers::pi);
        rel = std::max(std::abs(m[0].real() / e - 1.0), std::abs(m[1].real() * e - 1.0));
        pass = pass && rel <= 1e-4 && m[0].imag() == 0.0 && m[1].imag() == 0.0;
      } else {
        prod = p;
        pass = pass && m[0].imag() == 0.0 && m[1].imag() == 0.0 && p <= 1e-8;
      }
    }
    out.pass = pass;
    out.detail = "eps=0 relative error " + short_fmt(rel) + "; eps=0.1 |det-1| " + short_fmt(prod);
    out.tables.push_back({"", std::move(t)});
  }

  void semigroup_limit_check(CriterionOutcome& out) {
    Table t({"q", "eps", "u0", "iterations", "converged", "sup_diff"});
    bool pass = true;
    double worst = 0.0;
    for (int q : {1, 2}) {
      for (double eps : {0.0, 0.1}) {
        const TropicalKernel& k = kernel(q, eps, s_.grid);
        const double c = karp_eigenvalue(k);
        const BarrierMatrix& h = barrier(q, eps);
        for (InitialCondition ic : {InitialCondition::zero, InitialCondition::spike}) {
          const GridFunction u0 = make_initial_condition(k.grid, ic, s_.seed);
          const SemigroupLimit lim = semigroup_limit(k, c, u0);
          const GridFunction ub = bar_u(u0, h);
          double d = 0.0;
          for (int j = 0; j < k.grid.n; ++j)
            d = std::max(d, std::abs(lim.limit.values[j] - ub.values[j]));
          worst = std::max(worst, d);
          pass = pass && lim.converged && d <= 1e-9;
          t.add({fmt(q), fmt(eps), initial_condition_name(ic), fmt(lim.iterations),
                 fmt(lim.converged), fmt(d)});
        }
      }
    }
    out.pass = pass;
    out.detail = "max sup|limit - bar_u| " + short_fmt(worst);
    out.tables.push_back({"", std::move(t)});
  }

  void convergence_rate(CriterionOutcome& out) {
    Table errors({"eps", "k", "error", "log_error"});
    Table fits({"eps", "k_star", "points_above_floor", "floor", "mu", "prefactor", "k_lo", "k_hi",
                "r2", "lambda", "ratio", "verdict", "note"});
    bool pass = true;
    std::string detail;
    for (double eps : {0.0, 0.1}) {
      ConvergenceInputs in{kernel(1, eps, s_.grid), std::nullopt};
      ConvergenceSettings cs;
      cs.k_max = s_.k_max;
      cs.horizon = s_.horizon;
      cs.aubry_tolerance = s_.aubry_tolerance;
      cs.seed = s_.seed;
      const ConvergenceReport r =
          run_convergence(mech(1, eps), mech(1, eps).describe(), in, InitialCondition::spike, cs);
      int above = 0;
      for (std::size_t k = 0; k < r.errors.size(); ++k) {
        const double e = r.errors[k];
        errors.add({fmt(eps), fmt(static_cast<int>(k)), fmt(e), e > 0.0 ? fmt(std::log(e)) : "-inf"});
        if (e > r.floor && above == static_cast<int>(k)) ++above;
      }
      const bool ok = r.pass && r.fit && r.fit->mu > 0.0 && r.fit->r2 >= kFitDetermination;
      fits.add({fmt(eps), r.k_star ? fmt(*r.k_star) : "", fmt(above), fmt(r.floor),
                r.fit ? fmt(r.fit->mu) : "", r.fit ? fmt(r.fit->prefactor) : "",
                r.fit ? fmt(r.fit->k_lo) : "", r.fit ? fmt(r.fit->k_hi) : "",
                r.fit ? fmt(r.fit->r2) : "", r.lambda ? fmt(*r.lambda) : "",
                r.ratio ? fmt(*r.ratio) : "", ok ? "PASS" : "FAIL", r.note});
      pass = pass && ok;
      detail += (detail.empty() ? "" : "; ") + std::string("eps=") + short_fmt(eps) + " k*=" +
                (r.k_star ? fmt(*r.k_star) : "none") + " points=" + fmt(above) +
                (r.fit ? " mu=" + short_fmt(r.fit->mu) + " r2=" + short_fmt(r.fit->r2) : "") +
                (r.ratio ? " mu/lambda=" + short_fmt(*r.ratio) : "") +
                (r.lambda ? " lambda=" + short_fmt(*r.lambda) : "");
    }
    out.pass = pass;
    out.detail = detail;
    out.tables.push_back({"", std::move(errors)});
    out.tables.push_back({"fit", std::move(fits)});
  }

  void reduction_identities(CriterionOutcome& out) {
    std::mt19937_64 rng(s_.seed + 7);
    const LagrangianSystem base = mech(1, 0.1);
    Table t({"N", "curves", "max_action_gap", "samples", "max_hamiltonian_gap",
             "max_legendre_gap"});
    bool pass = true;
    double worst_action = 0.0, worst_h = 0.0, worst_leg = 0.0;
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int n : {2, 3}) {
      const auto lifted = lift_system(base, n);
      double action_gap = 0.0, h_gap = 0.0, leg_gap = 0.0;
      for (int r = 0; r < 200; ++r) {
        const DiscretizedCurve c = random_curve(rng);
        const double lhs = n * curve_action(lifted, lift_curve(c, n));
        action_gap = std::max(action_gap, std::abs(lhs - curve_action(base, c)));
      }
      for (int r = 0; r < 100; ++r) {
        const double x = u(rng), p = 6.0 * u(rng) - 3.0, tt = 4.0 * u(rng) - 2.0;
        const double hn = lifted.hamiltonian(x, p, tt);
        h_gap = std::max(h_gap, std::abs(hn - base.hamiltonian_closed_form(x, n * p, n * tt)));
        leg_gap = std::max(leg_gap, std::abs(legendre_transform(lifted, x, p, tt).hamiltonian - hn));
      }
      t.add({fmt(n), fmt(200), fmt(action_gap), fmt(100), fmt(h_gap), fmt(leg_gap)});
      pass = pass && action_gap <= 1e-10 && h_gap == 0.0 && leg_gap <= 1e-10;
      worst_action = std::max(worst_action, action_gap);
      worst_h = std::max(worst_h, h_gap);
      worst_leg = std::max(worst_leg, leg_gap);
    }
    out.pass = pass;
    out.detail = "action gap " + short_fmt(worst_action) + "; H_N gap " + short_fmt(worst_h) +
                 "; Legendre gap " + short_fmt(worst_leg);
    out.tables.push_back({"", std::move(t)});
  }

  void tilt_identities(CriterionOutcome& out) {
    std::mt19937_64 rng(s_.seed + 8);
    const LagrangianSystem base = mech(1, 0.0);
    const double c = 1.0;
    const Subsolution f(SubsolutionTag::maupertuis);
    Table t({"check", "value", "tolerance", "x", "v", "t", "pass"});
    bool pass = true;

    const auto tilted = tilt_system(base, f, c);
    double gap = 0.0;
    for (int r = 0; r < 200; ++r) {
      const DiscretizedCurve cv = random_curve(rng);
      const double lhs = curve_action(tilted, cv);
      const double rhs = curve_action(base, cv) + c * (cv.t1 - cv.t0) + f(cv.samples.front(), cv.t0).f -
                         f(cv.samples.back(), cv.t1).f;
      gap = std::max(gap, std::abs(lhs - rhs));
    }
    const bool ok_gap = gap <= 1e-9;
    t.add({"action_identity", fmt(gap), fmt(1e-9), "", "", "", fmt(ok_gap)});

    const TiltValidation& v = tilted.validation();
    const bool ok_lattice = v.minimum >= -kSubsolutionTolerance;
    t.add({"lattice_minimum", fmt(v.minimum), fmt(-kSubsolutionTolerance), fmt(v.x), fmt(v.v),
           fmt(v.t), fmt(ok_lattice)});

    const double karp = karp_eigenvalue(assemble_kernel(tilted, Grid(s_.grid), 0.0, 1.0, s_.cfg));
    const bool ok_karp = std::abs(karp) <= 2e-2;
    t.add({"tilted_karp", fmt(karp), fmt(2e-2), "", "", "", fmt(ok_karp)});

    pass = ok_gap && ok_lattice && ok_karp;
    out.pass = pass;
    out.detail = "identity gap " + short_fmt(gap) + "; lattice min " + short_fmt(v.minimum) +
                 "; tilted c " + short_fmt(karp);
    out.tables.push_back({"", std::move(t)});
  }

  void tropical_core(CriterionOutcome& out) {
    std::mt19937_64 rng(s_.seed + 9);
    std::uniform_int_distribution<int> w(-10, 10);
    std::uniform_int_distribution<int> dyadic(-640, 640);
    Table t({"test", "cases", "failures", "max_gap"});

    int karp_fail = 0;
    double karp_gap = 0.0;
    for (int r = 0; r < 100; ++r) {
      const std::size_t n = 1 + r % 7;
      MinPlusMatrix m(n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = w(rng);
      const double a = min_mean_cycle(m), b = brute_force_min_cycle_mean(m);
      if (a != b) ++karp_fail;
      karp_gap = std::max(karp_gap, std::abs(a - b));
    }
    t.add({"karp_vs_brute_force", fmt(100), fmt(karp_fail), fmt(karp_gap)});

    auto random_matrix = [&](std::size_t n) {
      MinPlusMatrix m(n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = w(rng);
      return m;
    };
    int assoc_fail = 0;
    for (int r = 0; r < 100; ++r) {
      const MinPlusMatrix a = random_matrix(8), b = random_matrix(8), c = random_matrix(8);
      std::vector<double> u(8);
      for (double& e : u) e = w(rng);
      const bool vec_ok = minplus_apply(minplus_product(a, a), u).values ==
                          minplus_apply(a, minplus_apply(a, u).values).values;
      const bool mat_ok = minplus_product(minplus_product(a, b), c) ==
                          minplus_product(a, minplus_product(b, c));
      if (!vec_ok || !mat_ok) ++assoc_fail;
    }
    t.add({"associativity", fmt(100), fmt(assoc_fail), fmt(0.0)});

    // Dyadic values keep every sum exact.
    int nonexp_fail = 0;
    double worst_excess = 0.0;
    for (int r = 0; r < 100; ++r) {
      MinPlusMatrix k(8);
      for (std::size_t i = 0; i < 8; ++i)
        for (std::size_t j = 0; j < 8; ++j) k(i, j) = dyadic(rng) / 64.0;
      std::vector<double> u(8), v(8);
      for (double& e : u) e = dyadic(rng) / 64.0;
      for (double& e : v) e = dyadic(rng) / 64.0;
      double din = 0.0, dout = 0.0;
      for (std::size_t i = 0; i < 8; ++i) din = std::max(din, std::abs(u[i] - v[i]));
      const auto ku = minplus_apply(k, u).values, kv = minplus_apply(k, v).values;
      for (std::size_t i = 0; i < 8; ++i) dout = std::max(dout, std::abs(ku[i] - kv[i]));
      if (dout > din) ++nonexp_fail;
      worst_excess = std::max(worst_excess, dout - din);
    }
    t.add({"nonexpansiveness", fmt(100), fmt(nonexp_fail), fmt(std::max(0.0, worst_excess))});

    out.pass = karp_fail == 0 && assoc_fail == 0 && nonexp_fail == 0;
    out.detail = "failures: karp " + fmt(karp_fail) + "; associativity " + fmt(assoc_fail) +
                 "; nonexpansive " + fmt(nonexp_fail);
    out.tables.push_back({"", std::move(t)});
  }

  void connection_graph_check(CriterionOutcome& out) {
    const BarrierMatrix& h = barrier(2, 0.0);
    const Grid& g = h.grid;
    const AubrySet a = aubry_set(h, s_.aubry_tolerance);
    const int target = g.nearest(0.25);
    Table t({"item", "from_x", "to_x", "value"});
    bool pass = !a.empty;
    ConnectionGraph graph;
    if (pass) {
      graph = connection_graph(h, a.representatives, target, 1e-3);
      for (int v : graph.vertices) t.add({"vertex", fmt(g.point(v)), "", ""});
      for (const auto& e : graph.edges)
        t.add({"edge", fmt(g.point(graph.vertices[e.from])), fmt(g.point(graph.vertices[e.to])),
               fmt(e.slack)});
      for (int r : graph.roots) t.add({"root", fmt(g.point(graph.vertices[r])), "", ""});
      t.add({"acyclic", "", "", fmt(graph.acyclic)});
    }
    const int half = g.nearest(0.5);
    const double oracle = 2.0 / std::numbers::pi;
    const double h01 = h(0, half), h10 = h(half, 0);
    t.add({"barrier", fmt(0.0), fmt(0.5), fmt(h01)});
    t.add({"barrier", fmt(0.5), fmt(0.0), fmt(h10)});
    const double err = std::max(std::abs(h01 - oracle), std::abs(h10 - oracle));
    pass = pass && graph.acyclic && err <= 2e-2;
    out.pass = pass;
    out.detail = fmt(static_cast<int>(graph.vertices.size())) + " vertices; " +
                 fmt(static_cast<int>(graph.edges.size())) + " edges; acyclic " +
                 (graph.acyclic ? "yes" : "no") + "; barrier error " + short_fmt(err);
    out.tables.push_back({"", std::move(t)});
  }

  void dwell_diagnostics(CriterionOutcome& out) {
    const LagrangianSystem sys = mech(1, 0.0);
    const TropicalKernel& k = kernel(1, 0.0, s_.grid);
    const AubrySet a = aubry_set(barrier(1, 0.0), s_.aubry_tolerance);
    std::vector<PeriodicOrbit> orbits;
    for (int r : a.representatives) orbits.push_back(refine_periodic_orbit(sys, {k.grid.point(r), 0.0, 0.0}, 1));
    Table t({"horizon", "delta", "outside_time", "longest_stay", "longest_orbit", "implied_n",
             "stay_bound", "action"});
    std::vector<DwellReport> reps;
    for (double T : {8.0, 16.0, 32.0}) {
      reps.push_back(dwell_statistics(sys, 0.25, 0.0, 0.25, T, kDefaultDwellDelta, orbits, s_.cfg, &k));
      const DwellReport& r = reps.back();
      t.add({fmt(r.horizon), fmt(r.delta), fmt(r.outside_time), fmt(r.longest_stay),
             fmt(r.longest_orbit), fmt(r.implied_n), fmt(r.stay_bound), fmt(r.action)});
    }
    const double o8 = reps[0].outside_time, o16 = reps[1].outside_time;
    const double spread = std::max(o8, o16) > 0.0 ? std::abs(o16 - o8) / std::max(o8, o16) : 0.0;
    bool linear = reps[0].longest_stay > 0.0;
    for (std::size_t i = 1; i < reps.size(); ++i)
      linear = linear && reps[i].longest_stay / reps[i].horizon >=
                             reps[i - 1].longest_stay / reps[i - 1].horizon;
    out.pass = spread < 0.25 && linear;
    out.detail = "outside time 8 vs 16 differs by " + short_fmt(100.0 * spread) +
                 "%; stays " + short_fmt(reps[0].longest_stay) + " " +
                 short_fmt(reps[1].longest_stay) + " " + short_fmt(reps[2].longest_stay);
    out.tables.push_back({"", std::move(t)});
  }

  // Reruns criteria 1..11 from scratch and compares every rendered table
  // with `reference` (computed first when absent).
  void determinism(CriterionOutcome& out, const std::vector<CriterionOutcome>* reference) {
    auto render = [](const std::vector<CriterionOutcome>& all) {
      std::vector<std::string> files;
      for (const auto& o : all) {
        files.push_back(o.title + (o.pass ? " PASS " : " FAIL ") + o.detail);
        for (const auto& t : o.tables) files.push_back(t.table.str());
      }
      return files;
    };
    std::vector<CriterionOutcome> first;
    if (!reference) {
      PaperSuite a(s_);
      for (int id = 1; id < kCriterionCount; ++id) first.push_back(a.run(id));
      reference = &first;
    }
    PaperSuite b(s_);
    std::vector<CriterionOutcome> second;
    for (int id = 1; id < kCriterionCount; ++id) second.push_back(b.run(id));
    const auto ra = render(*reference), rb = render(second);
    int differing = 0;
    for (std::size_t i = 0; i < std::max(ra.size(), rb.size()); ++i)
      if (i >= ra.size() || i >= rb.size() || ra[i] != rb[i]) ++differing;
    Table t({"rendered_items", "differing"});
    t.add({fmt(static_cast<int>(ra.size())), fmt(differing)});
    out.pass = differing == 0;
    out.detail = "in-process rerun: " + fmt(differing) + " of " +
                 fmt(static_cast<int>(ra.size())) + " rendered items differ";
    out.tables.push_back({"", std::move(t)});
  }

  SuiteSettings s_;
  std::map<std::tuple<int, double, int>, TropicalKernel> kernels_;
  std::map<std::tuple<int, double, int>, BarrierMatrix> barriers_;
};

}  // namespace wkam
