// wkam: command-line front end. Exit codes: 0 success, 1 failed verdict or
// numerical failure, 2 configuration error.

#include <CLI11.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include "wkam/action.hpp"
#include "wkam/csv.hpp"
#include "wkam/error.hpp"
#include "wkam/experiments.hpp"
#include "wkam/flow.hpp"
#include "wkam/lagrangian.hpp"
#include "wkam/reduction.hpp"
#include "wkam/suite.hpp"
#include "wkam/tropical.hpp"
#include "wkam/weak_kam.hpp"

namespace {

using namespace wkam;

struct Common {
  std::string system = "mechanical-cos";
  double amp = 1.0;
  int freq = 1;
  double eps = 0.0;
  int grid = 256;
  int segments = 32;
  int windings = 1;
  std::string out;
  std::uint64_t seed = 0;

  LagrangianSystem make_system() const {
    return LagrangianSystem(parse_family(system), amp, freq, eps);
  }
  MinimizationSettings settings() const {
    MinimizationSettings s;
    s.n_segments = segments;
    s.winding_range = windings;
    s.validate();
    return s;
  }
  Grid make_grid() const { return Grid(grid); }
};

void add_common(CLI::App* app, Common& c, bool out_is_dir = false) {
  app->add_option("--system", c.system, "free | mechanical-cos")->capture_default_str();
  app->add_option("--amp", c.amp, "potential amplitude A")->capture_default_str();
  app->add_option("--freq", c.freq, "spatial frequency q")->capture_default_str();
  app->add_option("--eps", c.eps, "time modulation, |eps| < 1")->capture_default_str();
  app->add_option("--grid", c.grid, "grid points n >= 8")->capture_default_str();
  app->add_option("--segments", c.segments, "curve segments per unit time")->capture_default_str();
  app->add_option("--windings", c.windings, "winding range per unit time")->capture_default_str();
  app->add_option("--out", c.out, out_is_dir ? "output directory" : "output CSV file");
  app->add_option("--seed", c.seed, "random seed")->capture_default_str();
}

// Writes to --out when given, else to stdout.
void emit(const Common& c, const Table& t) {
  if (c.out.empty()) {
    t.write(std::cout);
  } else {
    write_file(c.out, t.str());
  }
}

std::string indices(const std::vector<int>& v) {
  std::string s;
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ";" : "") + std::to_string(v[k]);
  return s;
}

BarrierMatrix unit_barrier(const LagrangianSystem& sys, const Grid& g, int horizon,
                           const MinimizationSettings& cfg, double* c_out = nullptr) {
  const TropicalKernel k = assemble_kernel(sys, g, 0.0, 1.0, cfg);
  const double c = karp_eigenvalue(k);
  if (c_out) *c_out = c;
  return peierls_barrier(k, c, horizon);
}

double aubry_tol_or_default(double tol, const Grid& g, const MinimizationSettings& cfg) {
  return tol >= 0.0 ? tol : default_aubry_tolerance(g, cfg);
}

int run_main(int argc, char** argv) {
  CLI::App app{"Weak KAM toolkit: minimal action, tropical kernels, barriers, Aubry sets, orbits"};
  app.require_subcommand(1);
  Common c;
  std::function<int()> action;

  // action
  double from = 0.0, at = 0.0, to = 0.0, bt = 1.0;
  bool with_curve = false;
  auto* a_action = app.add_subcommand("action", "minimal action F_{a,b}(x, y)");
  add_common(a_action, c);
  a_action->add_option("--from", from, "start point x")->required();
  a_action->add_option("--at", at, "start time a")->capture_default_str();
  a_action->add_option("--to", to, "end point y")->required();
  a_action->add_option("--bt", bt, "end time b")->capture_default_str();
  a_action->add_flag("--curve", with_curve, "write the minimizer (tau, x_lifted)");
  a_action->callback([&] {
    action = [&] {
      const MinimalAction m = minimal_action(c.make_system(), from, at, to, bt, c.settings());
      Table summary({"value", "winding", "residual"});
      summary.add({fmt(m.value), fmt(m.curve.winding), fmt(m.residual)});
      summary.write(std::cout);
      if (with_curve) {
        Table t({"tau", "x_lifted"});
        for (std::size_t k = 0; k < m.curve.samples.size(); ++k)
          t.add({fmt(m.curve.time(k)), fmt(m.curve.samples[k])});
        emit(c, t);
      }
      return 0;
    };
  });

  // kernel
  double start = 0.0, duration = 1.0;
  auto* a_kernel = app.add_subcommand("kernel", "tropical kernel K[i][j] = F_{s,s+d}(x_i, x_j)");
  add_common(a_kernel, c);
  a_kernel->add_option("--start", start, "start time s")->capture_default_str();
  a_kernel->add_option("--duration", duration, "duration d")->capture_default_str();
  a_kernel->callback([&] {
    action = [&] {
      const TropicalKernel k =
          assemble_kernel(c.make_system(), c.make_grid(), start, duration, c.settings());
      Table t({"i", "j", "value"});
      for (int i = 0; i < k.grid.n; ++i)
        for (int j = 0; j < k.grid.n; ++j) t.add({fmt(i), fmt(j), fmt(k(i, j))});
      emit(c, t);
      return 0;
    };
  });

  // critical-value
  auto* a_cv = app.add_subcommand("critical-value", "critical value by minimum mean cycle");
  add_common(a_cv, c);
  a_cv->callback([&] {
    action = [&] {
      const double v = critical_value(c.make_system(), c.make_grid(), c.settings());
      std::cout << "c," << fmt(v) << '\n';
      return 0;
    };
  });

  // barrier
  int horizon = 16;
  double tau = 0.0;
  auto* a_bar = app.add_subcommand("barrier", "Peierls barrier h(x_i,[0], x_j,[tau])");
  add_common(a_bar, c);
  a_bar->add_option("--horizon", horizon, "number of unit steps")->capture_default_str();
  a_bar->add_option("--tau", tau, "end offset in [0, 1)")->capture_default_str();
  a_bar->callback([&] {
    action = [&] {
      if (!(tau >= 0.0 && tau < 1.0)) throw ConfigError("--tau must lie in [0, 1)");
      const LagrangianSystem sys = c.make_system();
      const Grid g = c.make_grid();
      const MinimizationSettings cfg = c.settings();
      const TropicalKernel k = assemble_kernel(sys, g, 0.0, 1.0, cfg);
      const double cval = karp_eigenvalue(k);
      std::optional<TropicalKernel> frac;
      if (tau > 0.0) frac = assemble_kernel(sys, g, 0.0, tau, cfg);
      const BarrierMatrix h = peierls_barrier(k, cval, horizon, frac ? &*frac : nullptr);
      Table t({"i", "j", "h"});
      for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) t.add({fmt(i), fmt(j), fmt(h(i, j))});
      emit(c, t);
      std::cerr << "c=" << fmt(cval) << " defect=" << fmt(h.defect)
                << (h.stabilized ? "" : " (not stabilized)") << '\n';
      return 0;
    };
  });

  // aubry
  double aubry_tol = -1.0;
  auto* a_aub = app.add_subcommand("aubry", "Aubry set {x : h(x, x) <= tol}");
  add_common(a_aub, c);
  a_aub->add_option("--tol", aubry_tol, "detection tolerance (default: 10x free-kernel error)");
  a_aub->add_option("--horizon", horizon, "barrier horizon")->capture_default_str();
  a_aub->callback([&] {
    action = [&] {
      const Grid g = c.make_grid();
      const MinimizationSettings cfg = c.settings();
      const BarrierMatrix h = unit_barrier(c.make_system(), g, horizon, cfg);
      const AubrySet a = aubry_set(h, aubry_tol_or_default(aubry_tol, g, cfg));
      if (a.empty) {
        std::cerr << "aubry: empty set (tolerance too small or horizon too short)\n";
        return 1;
      }
      Table t({"x", "h_diag", "cluster", "representative"});
      for (std::size_t k = 0; k < a.clusters.size(); ++k)
        for (int i : a.clusters[k])
          t.add({fmt(g.point(i)), fmt(h(i, i)), fmt(static_cast<int>(k)),
                 fmt(i == a.representatives[k])});
      emit(c, t);
      return 0;
    };
  });

  // graph
  double target = 0.0, graph_tol = 1e-3;
  auto* a_graph = app.add_subcommand("graph", "connection graph between Aubry orbits");
  add_common(a_graph, c);
  a_graph->add_option("--target", target, "target point z")->capture_default_str();
  a_graph->add_option("--tol", graph_tol, "edge tolerance")->capture_default_str();
  a_graph->add_option("--aubry-tol", aubry_tol, "Aubry detection tolerance");
  a_graph->add_option("--horizon", horizon, "barrier horizon")->capture_default_str();
  a_graph->callback([&] {
    action = [&] {
      const Grid g = c.make_grid();
      const MinimizationSettings cfg = c.settings();
      const BarrierMatrix h = unit_barrier(c.make_system(), g, horizon, cfg);
      const AubrySet a = aubry_set(h, aubry_tol_or_default(aubry_tol, g, cfg));
      if (a.empty) throw PreconditionError("graph: no Aubry representative detected");
      const ConnectionGraph cg = connection_graph(h, a.representatives, g.nearest(target), graph_tol);
      Table t({"j", "k", "slack"});
      for (const auto& e : cg.edges)
        t.add({fmt(cg.vertices[e.from]), fmt(cg.vertices[e.to]), fmt(e.slack)});
      emit(c, t);
      std::vector<int> roots, cycle;
      for (int r : cg.roots) roots.push_back(cg.vertices[r]);
      for (int r : cg.cycle) cycle.push_back(cg.vertices[r]);
      std::cout << "vertices," << indices(cg.vertices) << '\n'
                << "roots," << indices(roots) << '\n'
                << "acyclic," << fmt(cg.acyclic) << '\n';
      if (!cg.acyclic) std::cout << "cycle," << indices(cycle) << '\n';
      return 0;
    };
  });

  // orbit
  double guess_x = 0.0, guess_v = 0.0;
  int period = 1;
  auto* a_orbit = app.add_subcommand("orbit", "refine a periodic orbit and its Floquet data");
  add_common(a_orbit, c);
  a_orbit->add_option("--guess-x", guess_x, "initial x")->capture_default_str();
  a_orbit->add_option("--guess-v", guess_v, "initial v")->capture_default_str();
  a_orbit->add_option("--period", period, "integer period")->capture_default_str();
  a_orbit->callback([&] {
    action = [&] {
      const PeriodicOrbit o =
          refine_periodic_orbit(c.make_system(), {guess_x, guess_v, 0.0}, period);
      Table t({"x", "v", "period", "multiplier_1", "multiplier_2", "lambda", "hyperbolic",
               "multiplier_1_imag", "multiplier_2_imag", "defect"});
      t.add({fmt(o.initial.x), fmt(o.initial.v), fmt(o.period), fmt(o.multipliers[0].real()),
             fmt(o.multipliers[1].real()), fmt(o.lambda), fmt(o.hyperbolic),
             fmt(o.multipliers[0].imag()), fmt(o.multipliers[1].imag()), fmt(o.defect)});
      emit(c, t);
      return 0;
    };
  });

  // reduce
  int lift_n = 2;
  bool check = false;
  auto* a_red = app.add_subcommand("reduce", "period lift identities for L_N and H_N");
  add_common(a_red, c);
  a_red->add_option("--n", lift_n, "lift factor N >= 1")->capture_default_str();
  a_red->add_flag("--check", check, "exit 1 when an identity fails its tolerance");
  a_red->callback([&] {
    action = [&] {
      if (lift_n < 1) throw ConfigError("--n must be >= 1");
      const LagrangianSystem sys = c.make_system();
      const auto lifted = lift_system(sys, lift_n);
      std::mt19937_64 rng(c.seed);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      double action_gap = 0.0, h_gap = 0.0;
      for (int r = 0; r < 200; ++r) {
        const DiscretizedCurve cv = random_curve(rng);
        action_gap = std::max(action_gap, std::abs(lift_n * curve_action(lifted, lift_curve(cv, lift_n)) -
                                                   curve_action(sys, cv)));
      }
      for (int r = 0; r < 100; ++r) {
        const double x = u(rng), p = 6.0 * u(rng) - 3.0, t = 4.0 * u(rng) - 2.0;
        h_gap = std::max(h_gap, std::abs(legendre_transform(lifted, x, p, t).hamiltonian -
                                         sys.hamiltonian_closed_form(x, lift_n * p, lift_n * t)));
      }
      Table t({"N", "action_identity_residual", "hamiltonian_identity_residual"});
      t.add({fmt(lift_n), fmt(action_gap), fmt(h_gap)});
      emit(c, t);
      return check && (action_gap > 1e-10 || h_gap > 1e-10) ? 1 : 0;
    };
  });

  // tilt
  std::string f_tag = "zero";
  double tilt_c = 0.0, kappa = 0.0;
  auto* a_tilt = app.add_subcommand("tilt", "tilted Lagrangian L - f_x v - f_t + c");
  add_common(a_tilt, c);
  a_tilt->add_option("--f", f_tag, "zero | const | maupertuis")->capture_default_str();
  a_tilt->add_option("--c", tilt_c, "critical value used in the tilt")->capture_default_str();
  a_tilt->add_option("--kappa", kappa, "value of the constant subsolution")->capture_default_str();
  a_tilt->add_flag("--check", check, "exit 1 when the tilt is negative");
  a_tilt->callback([&] {
    action = [&] {
      const Subsolution f(parse_subsolution(f_tag), kappa);
      Table t({"minimum", "x", "v", "t", "valid"});
      try {
        const auto tilted = tilt_system(c.make_system(), f, tilt_c);
        const TiltValidation& v = tilted.validation();
        t.add({fmt(v.minimum), fmt(v.x), fmt(v.v), fmt(v.t), fmt(true)});
        emit(c, t);
        return 0;
      } catch (const InvalidSubsolutionError& e) {
        t.add({fmt(e.value()), fmt(e.x()), fmt(e.v()), fmt(e.t()), fmt(false)});
        emit(c, t);
        std::cerr << e.what() << '\n';
        return check ? 1 : 0;
      }
    };
  });

  // convergence
  std::string u0 = "spike";
  int kmax = 60;
  auto* a_conv = app.add_subcommand("convergence", "Lax-Oleinik convergence and fitted rate");
  add_common(a_conv, c);
  a_conv->add_option("--u0", u0, "zero | spike | random")->capture_default_str();
  a_conv->add_option("--kmax", kmax, "iterations, >= 8")->capture_default_str();
  a_conv->add_option("--tau", tau, "time offset in [0, 1)")->capture_default_str();
  a_conv->add_option("--horizon", horizon, "barrier horizon")->capture_default_str();
  a_conv->add_option("--aubry-tol", aubry_tol, "Aubry tolerance for the lambda lookup");
  a_conv->callback([&] {
    action = [&] {
      if (!(tau >= 0.0 && tau < 1.0)) throw ConfigError("--tau must lie in [0, 1)");
      const InitialCondition ic = parse_initial_condition(u0);
      ConvergenceSettings cs;
      cs.k_max = kmax;
      cs.tau = tau;
      cs.horizon = horizon;
      cs.seed = c.seed;
      if (aubry_tol >= 0.0) cs.aubry_tolerance = aubry_tol;
      if (kmax < 8) throw ConfigError("--kmax must be >= 8");
      const LagrangianSystem sys = c.make_system();
      const ConvergenceInputs in = convergence_inputs(sys, c.make_grid(), tau, c.settings());
      const ConvergenceReport r = run_convergence(sys, sys.describe(), in, ic, cs);
      Table t({"k", "error", "log_error"});
      for (std::size_t k = 0; k < r.errors.size(); ++k)
        t.add({fmt(static_cast<int>(k)), fmt(r.errors[k]),
               r.errors[k] > 0.0 ? fmt(std::log(r.errors[k])) : "-inf"});
      emit(c, t);
      Table s({"mu", "K", "r2", "lambda", "ratio", "kstar", "verdict", "note"});
      s.add({r.fit ? fmt(r.fit->mu) : "", r.fit ? fmt(r.fit->prefactor) : "",
             r.fit ? fmt(r.fit->r2) : "", r.lambda ? fmt(*r.lambda) : "",
             r.ratio ? fmt(*r.ratio) : "", r.k_star ? fmt(*r.k_star) : "",
             r.pass ? "PASS" : "FAIL", r.note});
      s.write(std::cout);
      return r.pass ? 0 : 1;
    };
  });

  // dwell
  double dwell_from = 0.25, dwell_to = 0.25, dwell_horizon = 8.0, dwell_start = 0.0;
  double delta = kDefaultDwellDelta;
  auto* a_dwell = app.add_subcommand("dwell", "time spent near the Aubry orbits by a minimizer");
  add_common(a_dwell, c);
  a_dwell->add_option("--from", dwell_from, "start point x")->capture_default_str();
  a_dwell->add_option("--to", dwell_to, "end point y")->capture_default_str();
  a_dwell->add_option("--horizon", dwell_horizon, "window length b - a >= 4")->capture_default_str();
  a_dwell->add_option("--start", dwell_start, "start time a")->capture_default_str();
  a_dwell->add_option("--delta", delta, "neighbourhood radius")->capture_default_str();
  a_dwell->add_option("--aubry-tol", aubry_tol, "Aubry detection tolerance");
  a_dwell->callback([&] {
    action = [&] {
      if (!(delta > 0.0)) throw ConfigError("--delta must be positive");
      const LagrangianSystem sys = c.make_system();
      const Grid g = c.make_grid();
      const MinimizationSettings cfg = c.settings();
      const TropicalKernel k = assemble_kernel(sys, g, reduce_mod1(dwell_start), 1.0, cfg);
      const BarrierMatrix h = peierls_barrier(k, karp_eigenvalue(k), 16);
      const AubrySet a = aubry_set(h, aubry_tol_or_default(aubry_tol, g, cfg));
      std::vector<PeriodicOrbit> orbits;
      for (int r : a.representatives) {
        try {
          orbits.push_back(refine_periodic_orbit(sys, {g.point(r), 0.0, 0.0}, 1));
        } catch (const NumericalError& e) {
          std::cerr << "dwell: skipping representative x=" << fmt(g.point(r)) << ": " << e.what()
                    << '\n';
        }
      }
      const DwellReport r = dwell_statistics(sys, dwell_from, dwell_start, dwell_to,
                                             dwell_start + dwell_horizon, delta, orbits, cfg, &k);
      Table t({"horizon", "delta", "outside_time", "longest_stay", "longest_orbit", "implied_n",
               "stay_bound", "action"});
      t.add({fmt(r.horizon), fmt(r.delta), fmt(r.outside_time), fmt(r.longest_stay),
             fmt(r.longest_orbit), fmt(r.implied_n), fmt(r.stay_bound), fmt(r.action)});
      emit(c, t);
      return 0;
    };
  });

  // paper-suite
  int suite_horizon = 16, cross_grid = 512;
  auto* a_suite = app.add_subcommand("paper-suite", "run the acceptance matrix");
  add_common(a_suite, c, true);
  a_suite->add_option("--horizon", suite_horizon, "barrier horizon")->capture_default_str();
  a_suite->add_option("--kmax", kmax, "convergence iterations")->capture_default_str();
  a_suite->add_option("--cross-grid", cross_grid, "grid of the independent Karp check")
      ->capture_default_str();
  a_suite->callback([&] {
    action = [&] {
      SuiteSettings s;
      s.grid = c.make_grid().n;
      s.cross_grid = Grid(cross_grid).n;
      s.horizon = suite_horizon;
      s.k_max = kmax;
      s.seed = c.seed;
      s.cfg = c.settings();
      if (c.system != "mechanical-cos" || c.amp != 1.0 || c.freq != 1 || c.eps != 0.0)
        throw ConfigError("paper-suite fixes its own systems; drop --system/--amp/--freq/--eps");
      const std::string dir = c.out.empty() ? "paper-suite-out" : c.out;
      PaperSuite suite(s);
      const std::vector<CriterionOutcome> all = suite.run_all();
      PaperSuite::write_bundle(dir, all);
      PaperSuite::summary(all).write(std::cout);
      for (const auto& o : all)
        if (!o.pass) return 1;
      return 0;
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "wkam: " << e.what() << '\n';
    return 2;
  }
  return action ? action() : 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_main(argc, argv);
  } catch (const wkam::ConfigError& e) {
    std::cerr << "wkam: configuration error: " << e.what() << '\n';
    return 2;
  } catch (const wkam::PreconditionError& e) {
    std::cerr << "wkam: invalid input: " << e.what() << '\n';
    return 2;
  } catch (const wkam::Error& e) {
    std::cerr << "wkam: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "wkam: " << e.what() << '\n';
    return 1;
  }
}
