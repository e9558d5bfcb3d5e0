#pragma once

// Convergence of the discrete Lax-Oleinik iteration to its limit, the fitted
// exponential rate, and dwell-time statistics of long minimizers.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "wkam/action.hpp"
#include "wkam/error.hpp"
#include "wkam/flow.hpp"
#include "wkam/lagrangian.hpp"
#include "wkam/tropical.hpp"
#include "wkam/weak_kam.hpp"

namespace wkam {

struct ExponentialFit {
  double mu = 0.0;
  double prefactor = 0.0;
  int k_lo = 0;
  int k_hi = 0;
  double r2 = 0.0;
};

inline constexpr double kFitDetermination = 0.98;

namespace detail {

inline ExponentialFit least_squares_log(const std::vector<double>& e, int lo, int hi) {
  const int n = hi - lo + 1;
  double sk = 0.0, sy = 0.0;
  for (int k = lo; k <= hi; ++k) {
    sk += k;
    sy += std::log(e[k]);
  }
  const double mk = sk / n, my = sy / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int k = lo; k <= hi; ++k) {
    const double dk = k - mk, dy = std::log(e[k]) - my;
    sxx += dk * dk;
    sxy += dk * dy;
    syy += dy * dy;
  }
  ExponentialFit f;
  const double slope = sxy / sxx;
  f.mu = -slope;
  f.prefactor = std::exp(my - slope * mk);
  f.k_lo = lo;
  f.k_hi = hi;
  f.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
  return f;
}

}  // namespace detail

/// Least-squares line through (k, log e_k) over the points above `floor`.
/// Among windows of at least four consecutive points the longest one with
/// determination >= 0.98 is used (earliest on ties); if none qualifies the
/// whole usable range is returned with its determination.
inline ExponentialFit fit_exponential_rate(const std::vector<double>& errors, double floor) {
  int last = -1;
  for (int k = 0; k < static_cast<int>(errors.size()); ++k) {
    if (errors[k] > floor && std::isfinite(errors[k])) last = k;
    else break;
  }
  const int usable = last + 1;
  if (usable < 4)
    throw InsufficientDataError("fit_exponential_rate: fewer than 4 points above floor");
  for (int len = usable; len >= 4; --len) {
    for (int lo = 0; lo + len <= usable; ++lo) {
      const ExponentialFit f = detail::least_squares_log(errors, lo, lo + len - 1);
      if (f.r2 >= kFitDetermination) return f;
    }
  }
  return detail::least_squares_log(errors, 0, last);
}

enum class InitialCondition { zero, spike, random };

inline InitialCondition parse_initial_condition(std::string_view tag) {
  if (tag == "zero") return InitialCondition::zero;
  if (tag == "spike") return InitialCondition::spike;
  if (tag == "random") return InitialCondition::random;
  throw ConfigError("unknown --u0 '" + std::string(tag) + "'");
}

inline std::string initial_condition_name(InitialCondition ic) {
  switch (ic) {
    case InitialCondition::zero: return "zero";
    case InitialCondition::spike: return "spike";
    case InitialCondition::random: return "random";
  }
  return "?";
}

inline constexpr double kSpikeHeight = 10.0;

/// zero: u = 0; spike: 0 at x = 0 and 10 elsewhere; random: uniform [0, 1)
/// from a 64-bit Mersenne twister, mapped bitwise so output is portable.
inline GridFunction make_initial_condition(const Grid& grid, InitialCondition ic,
                                           std::uint64_t seed = 0) {
  GridFunction u{grid, std::vector<double>(grid.n, 0.0)};
  switch (ic) {
    case InitialCondition::zero:
      break;
    case InitialCondition::spike:
      std::fill(u.values.begin(), u.values.end(), kSpikeHeight);
      u.values[grid.nearest(0.0)] = 0.0;
      break;
    case InitialCondition::random: {
      std::mt19937_64 rng(seed);
      for (double& e : u.values) e = static_cast<double>(rng() >> 11) * 0x1.0p-53;
      break;
    }
  }
  return u;
}

struct ConvergenceSettings {
  int k_max = 60;
  double tau = 0.0;
  int horizon = 24;
  double aubry_tolerance = 2e-2;
  std::uint64_t seed = 0;
};

struct ConvergenceReport {
  std::string system;
  int grid_n = 0;
  std::string u0;
  double c = 0.0;
  std::vector<double> errors;
  double floor = 0.0;
  bool trivial = false;
  std::optional<ExponentialFit> fit;
  std::optional<double> lambda;
  std::optional<double> ratio;  // mu / lambda
  std::optional<int> k_star;    // first k with e_k <= 1e-12
  double barrier_defect = 0.0;
  GridFunction limit;           // u_bar
  GridFunction final_iterate;
  bool pass = false;
  std::string note;
};

inline constexpr double kExactConvergence = 1e-12;

/// Precomputed kernels for one system and grid. `unit` starts at tau.
struct ConvergenceInputs {
  TropicalKernel unit;
  std::optional<TropicalKernel> fractional;  // K_{0, tau} when tau > 0
};

template <Lagrangian S>
ConvergenceInputs convergence_inputs(const S& sys, const Grid& grid, double tau,
                                     const MinimizationSettings& cfg = {}) {
  ConvergenceInputs in{assemble_kernel(sys, grid, tau, 1.0, cfg), std::nullopt};
  if (tau > 0.0) in.fractional = assemble_kernel(sys, grid, 0.0, tau, cfg);
  return in;
}

/// e_k = sup |L_{tau+k} u0 + c (tau + k) - u_bar(., [tau])| and its fit.
template <Lagrangian S>
ConvergenceReport run_convergence(const S& sys, const std::string& descriptor,
                                  const ConvergenceInputs& in, InitialCondition ic,
                                  const ConvergenceSettings& cs) {
  if (cs.k_max < 8) throw ConfigError("--kmax must be >= 8");
  const Grid& grid = in.unit.grid;
  ConvergenceReport rep;
  rep.system = descriptor;
  rep.grid_n = grid.n;
  rep.u0 = initial_condition_name(ic);
  rep.c = karp_eigenvalue(in.unit);

  GridFunction u = make_initial_condition(grid, ic, cs.seed);
  if (in.fractional) {
    u.values = minplus_apply(in.fractional->matrix, u.values).values;
    for (double& e : u.values) e += rep.c * in.fractional->duration;
  }
  const BarrierMatrix h = peierls_barrier(in.unit, rep.c, cs.horizon);
  rep.barrier_defect = h.defect;
  rep.limit = bar_u(u, h);

  double scale = 0.0;
  for (double e : rep.limit.values) scale = std::max(scale, std::abs(e));
  rep.floor = 100.0 * std::numeric_limits<double>::epsilon() * std::max(scale, 1.0);

  const MinPlusMatrix step = in.unit.matrix.shifted(rep.c);
  for (int k = 0; k <= cs.k_max; ++k) {
    if (k > 0) u.values = minplus_apply(step, u.values).values;
    double e = 0.0;
    for (int j = 0; j < grid.n; ++j) e = std::max(e, std::abs(u.values[j] - rep.limit.values[j]));
    rep.errors.push_back(e);
    if (!rep.k_star && e <= kExactConvergence) rep.k_star = k;
  }
  rep.final_iterate = u;

  try {
    const AubrySet aubry = aubry_set(h, cs.aubry_tolerance);
    if (!aubry.empty) {
      const PeriodicOrbit orbit =
          refine_periodic_orbit(sys, {grid.point(aubry.representatives.front()), 0.0, 0.0}, 1);
      if (orbit.hyperbolic) rep.lambda = orbit.lambda;
    }
  } catch (const Error&) {
    // no hyperbolic Aubry orbit (e.g. the free system)
  }

  const bool all_small =
      std::all_of(rep.errors.begin(), rep.errors.end(), [&](double e) { return e <= rep.floor; });
  if (all_small) {
    rep.trivial = true;
    rep.pass = true;
    rep.note = "trivial convergence";
    return rep;
  }
  try {
    rep.fit = fit_exponential_rate(rep.errors, rep.floor);
    if (rep.lambda) rep.ratio = rep.fit->mu / *rep.lambda;
    rep.pass = rep.fit->mu > 0.0;
    rep.note = rep.pass ? "exponential decay" : "no decay";
  } catch (const InsufficientDataError& e) {
    rep.pass = false;
    rep.note = e.what();
  }
  return rep;
}

struct DwellReport {
  double horizon = 0.0;
  double delta = 0.0;
  double outside_time = 0.0;
  double longest_stay = 0.0;
  int longest_orbit = -1;
  double implied_n = 0.0;   // horizon / (longest_stay + 1)
  double stay_bound = 0.0;  // horizon / implied_n - 1
  double action = 0.0;
};

inline constexpr double kDefaultDwellDelta = 0.05;

/// Minimizer over a long integer window [a, a + T] seeded by the tropical
/// dynamic program: the argmin walk of K^T between the grid points nearest
/// x and y, with one unit-time minimizer per step, concatenated and refined
/// as a whole. The better of this and plain minimal_action is returned, so
/// long waits near an orbit are found even when no straight lift is close.
template <Lagrangian S>
MinimalAction long_minimizer(const S& sys, double x, double a, double y, double b,
                             const TropicalKernel& unit, const MinimizationSettings& cfg = {}) {
  MinimalAction best = minimal_action(sys, x, a, y, b, cfg);
  const double span = b - a;
  const long steps = std::lround(span);
  if (unit.duration != 1.0 || std::abs(span - steps) > 1e-12 || steps < 1 ||
      std::abs(reduce_mod1(a) - reduce_mod1(unit.start)) > 1e-12)
    return best;
  const Grid& grid = unit.grid;
  const int p = grid.nearest(x);
  const int q = grid.nearest(y);
  const BarrierPath walk = barrier_path(unit, 0.0, p, q, static_cast<int>(steps));

  DiscretizedCurve seed;
  seed.t0 = a;
  seed.t1 = b;
  double lift = reduce_mod1(x);
  seed.samples.push_back(lift);
  for (long l = 0; l < steps; ++l) {
    const double from = l == 0 ? x : grid.point(walk.nodes[l]);
    const double to = l + 1 == steps ? y : grid.point(walk.nodes[l + 1]);
    const MinimalAction leg = minimal_action(sys, from, a + l, to, a + l + 1, cfg);
    const double offset = lift - leg.curve.samples.front();
    for (std::size_t k = 1; k < leg.curve.samples.size(); ++k)
      seed.samples.push_back(leg.curve.samples[k] + offset);
    lift = seed.samples.back();
  }
  seed.winding = std::lround(seed.samples.back() - reduce_mod1(y));
  seed.samples.back() = reduce_mod1(y) + static_cast<double>(seed.winding);
  try {
    MinimalAction refined = refine_curve(sys, seed, cfg);
    if (refined.value < best.value) best = std::move(refined);
  } catch (const NumericalError&) {
    // keep the enumerated minimizer
  }
  return best;
}

/// Phase-space distance (torus in x) from the minimizer to each orbit,
/// sampled at segment midpoints. With a unit kernel the minimizer is seeded
/// by the dynamic program (see long_minimizer).
template <Lagrangian S>
DwellReport dwell_statistics(const S& sys, double x, double a, double y, double b, double delta,
                             const std::vector<PeriodicOrbit>& orbits,
                             const MinimizationSettings& cfg = {},
                             const TropicalKernel* unit = nullptr) {
  if (!(b - a >= 4.0)) throw PreconditionError("dwell_statistics: need b - a >= 4");
  if (orbits.empty()) throw PreconditionError("dwell_statistics: no Aubry orbits supplied");
  const MinimalAction ma =
      unit ? long_minimizer(sys, x, a, y, b, *unit, cfg) : minimal_action(sys, x, a, y, b, cfg);
  const DiscretizedCurve& c = ma.curve;
  const std::size_t m = c.segments();
  const double h = c.spacing();

  DwellReport rep;
  rep.horizon = b - a;
  rep.delta = delta;
  rep.action = ma.value;
  double run = 0.0;
  int run_orbit = -1;
  for (std::size_t k = 0; k < m; ++k) {
    const double tm = c.t0 + (k + 0.5) * h;
    const double xm = 0.5 * (c.samples[k] + c.samples[k + 1]);
    const double vm = (c.samples[k + 1] - c.samples[k]) / h;
    int inside = -1;
    double best = kInf;
    for (std::size_t i = 0; i < orbits.size(); ++i) {
      const PeriodicOrbit& o = orbits[i];
      const double phase = tm - o.period * std::floor(tm / o.period);
      const int steps = std::max(1, static_cast<int>(std::ceil(phase * kDefaultStepsPerUnitTime)));
      const FlowResult s = flow_map(sys, o.initial, phase, steps);
      double dx = xm - s.point.x;
      dx -= std::round(dx);
      const double dist = std::hypot(dx, vm - s.point.v);
      if (dist <= delta && dist < best) {
        best = dist;
        inside = static_cast<int>(i);
      }
    }
    if (inside < 0) rep.outside_time += h;
    if (inside >= 0 && inside == run_orbit) {
      run += h;
    } else {
      run = inside >= 0 ? h : 0.0;
      run_orbit = inside;
    }
    if (run > rep.longest_stay) {
      rep.longest_stay = run;
      rep.longest_orbit = run_orbit;
    }
  }
  rep.implied_n = rep.horizon / (rep.longest_stay + 1.0);
  rep.stay_bound = rep.horizon / rep.implied_n - 1.0;
  return rep;
}

}  // namespace wkam
