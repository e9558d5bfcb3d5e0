#pragma once

// Euler-Lagrange flow, variational equations, periodic-orbit shooting and
// Floquet analysis.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "wkam/error.hpp"
#include "wkam/lagrangian.hpp"

namespace wkam {

inline constexpr int kDefaultStepsPerUnitTime = 200;

/// Endpoint of a flow: reduced phase point plus the integer displacement of
/// the lift.
struct FlowResult {
  PhasePoint point;
  long winding = 0;
  double lifted_x = 0.0;
};

namespace detail {

struct State {
  double x, v;
};

template <Lagrangian S>
State rk4_step(const S& sys, State s, double t, double h) {
  auto f = [&](State z, double tt) {
    return State{z.v, sys.acceleration(z.x, z.v, tt).a};
  };
  const State k1 = f(s, t);
  const State k2 = f({s.x + 0.5 * h * k1.x, s.v + 0.5 * h * k1.v}, t + 0.5 * h);
  const State k3 = f({s.x + 0.5 * h * k2.x, s.v + 0.5 * h * k2.v}, t + 0.5 * h);
  const State k4 = f({s.x + h * k3.x, s.v + h * k3.v}, t + h);
  return {s.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
          s.v + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v)};
}

// State augmented with the 2x2 fundamental matrix of the variational system.
struct VarState {
  double x, v;
  Eigen::Matrix2d phi;
};

template <Lagrangian S>
VarState rk4_var_step(const S& sys, const VarState& s, double t, double h) {
  auto f = [&](const VarState& z, double tt) {
    const AccelerationJet a = sys.acceleration(z.x, z.v, tt);
    Eigen::Matrix2d jac;
    jac << 0.0, 1.0, a.da_dx, a.da_dv;
    return VarState{z.v, a.a, jac * z.phi};
  };
  auto axpy = [](const VarState& z, double c, const VarState& k) {
    return VarState{z.x + c * k.x, z.v + c * k.v, z.phi + c * k.phi};
  };
  const VarState k1 = f(s, t);
  const VarState k2 = f(axpy(s, 0.5 * h, k1), t + 0.5 * h);
  const VarState k3 = f(axpy(s, 0.5 * h, k2), t + 0.5 * h);
  const VarState k4 = f(axpy(s, h, k3), t + h);
  return VarState{s.x + h / 6.0 * (k1.x + 2.0 * k2.x + 2.0 * k3.x + k4.x),
                  s.v + h / 6.0 * (k1.v + 2.0 * k2.v + 2.0 * k3.v + k4.v),
                  s.phi + h / 6.0 * (k1.phi + 2.0 * k2.phi + 2.0 * k3.phi + k4.phi)};
}

// Endpoints within rounding of an integer count as that integer, so a free
// particle with v = 1/2 lands on winding 1 after time 2, not 0.
inline double snap(double x) {
  const double r = std::round(x);
  return std::abs(x - r) <= 1e-12 * std::max(1.0, std::abs(x)) ? r : x;
}

inline FlowResult make_result(double x_lift, double x_start, double v, double t) {
  FlowResult r;
  r.lifted_x = x_lift;
  r.point = {reduce_mod1(snap(x_lift)), v, t};
  r.winding = static_cast<long>(std::floor(snap(x_lift)) - std::floor(snap(x_start)));
  return r;
}

}  // namespace detail

/// Integrates x' = v, v' = a(x, v, t) from p.t to t1 with n_steps classical
/// fourth-order steps. The returned winding counts unit cells crossed by the lift.
template <Lagrangian S>
FlowResult flow_map(const S& sys, const PhasePoint& p, double t1, int n_steps) {
  if (n_steps < 1) throw PreconditionError("flow_map: n_steps must be >= 1");
  const double h = (t1 - p.t) / n_steps;
  detail::State s{p.x, p.v};
  for (int k = 0; k < n_steps; ++k) s = detail::rk4_step(sys, s, p.t + k * h, h);
  return detail::make_result(s.x, p.x, s.v, t1);
}

struct VariationalResult {
  FlowResult end;
  Eigen::Matrix2d derivative;
};

/// Flow together with its derivative d(phi)/d(x, v).
template <Lagrangian S>
VariationalResult flow_with_derivative(const S& sys, const PhasePoint& p, double t1,
                                       int n_steps) {
  if (n_steps < 1) throw PreconditionError("flow_with_derivative: n_steps must be >= 1");
  const double h = (t1 - p.t) / n_steps;
  detail::VarState s{p.x, p.v, Eigen::Matrix2d::Identity()};
  for (int k = 0; k < n_steps; ++k) s = detail::rk4_var_step(sys, s, p.t + k * h, h);
  return {detail::make_result(s.x, p.x, s.v, t1), s.phi};
}

inline double periodic_defect(const PhasePoint& seed, const FlowResult& end) {
  const double dx = end.lifted_x - seed.x;
  return std::hypot(dx - std::round(dx), end.point.v - seed.v);
}

/// Monodromy of the orbit through `seed` over `period` time units.
/// Throws PreconditionError when the seed does not close up within `tolerance`.
template <Lagrangian S>
Eigen::Matrix2d monodromy(const S& sys, const PhasePoint& seed, int period,
                          int steps_per_unit = kDefaultStepsPerUnitTime,
                          double tolerance = 1e-8) {
  if (period < 1) throw PreconditionError("monodromy: period must be >= 1");
  const VariationalResult r =
      flow_with_derivative(sys, seed, seed.t + period, steps_per_unit * period);
  const double defect = periodic_defect(seed, r.end);
  if (defect > tolerance)
    throw PreconditionError("monodromy: seed is not periodic (defect " +
                                std::to_string(defect) + ")",
                            defect);
  return r.derivative;
}

struct FloquetResult {
  std::vector<std::complex<double>> multipliers;
  std::vector<std::complex<double>> exponents;
  bool hyperbolic = false;
  double lambda = 0.0;
};

inline constexpr double kUnitCircleTolerance = 1e-6;
inline constexpr double kLambdaDeflation = 1e-3;

/// Multipliers, exponents log(mu)/N, hyperbolicity and the deflated rate
/// lambda = (1 - 1e-3) * (least positive real part of the exponents).
inline FloquetResult floquet_analysis(const Eigen::MatrixXd& m, int period) {
  if (m.rows() != m.cols() || m.rows() % 2 != 0 || m.rows() == 0)
    throw PreconditionError("floquet_analysis: need a square even-dimensional matrix");
  if (period < 1) throw PreconditionError("floquet_analysis: period must be >= 1");
  Eigen::EigenSolver<Eigen::MatrixXd> es(m, false);
  if (es.info() != Eigen::Success)
    throw NumericalError("floquet_analysis: eigen-solver failed", 0.0);
  FloquetResult out;
  out.hyperbolic = true;
  double least = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < m.rows(); ++k) {
    const std::complex<double> mu = es.eigenvalues()[k];
    out.multipliers.push_back(mu);
    const std::complex<double> e = std::log(mu) / static_cast<double>(period);
    out.exponents.push_back(e);
    if (std::abs(std::abs(mu) - 1.0) <= kUnitCircleTolerance) out.hyperbolic = false;
    if (e.real() > 0.0) least = std::min(least, e.real());
  }
  // Deterministic order: by modulus, descending.
  std::vector<std::size_t> idx(out.multipliers.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(out.multipliers[a]) > std::abs(out.multipliers[b]);
  });
  FloquetResult sorted = out;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    sorted.multipliers[i] = out.multipliers[idx[i]];
    sorted.exponents[i] = out.exponents[idx[i]];
  }
  sorted.lambda = std::isfinite(least) ? least * (1.0 - kLambdaDeflation) : 0.0;
  return sorted;
}

struct PeriodicOrbit {
  PhasePoint initial;  // at t = 0, x reduced
  int period = 1;
  long winding = 0;
  Eigen::Matrix2d monodromy = Eigen::Matrix2d::Identity();
  std::vector<std::complex<double>> multipliers;
  std::vector<std::complex<double>> floquet_exponents;
  bool hyperbolic = false;
  double lambda = 0.0;
  double defect = 0.0;
  int newton_iterations = 0;
};

struct ShootingSettings {
  int steps_per_unit = kDefaultStepsPerUnitTime;
  int segments_per_unit = 8;  // multiple-shooting nodes per unit time
  int max_iterations = 50;
  double defect_tolerance = 1e-10;
  double singular_tolerance = 1e-8;
};

/// Multiple shooting: nodes z_0..z_{M-1} at t_k = k period / M, unknowns
/// solved by damped Newton on phi_{t_k, t_{k+1}}(z_k) - z_{k+1} = 0 with the
/// last node closing on z_0 + (winding, 0). The winding is round(v period).
/// Splitting keeps each segment's expansion moderate, which a single shot
/// across a strongly hyperbolic orbit does not.
template <Lagrangian S>
PeriodicOrbit refine_periodic_orbit(const S& sys, const PhasePoint& guess, int period,
                                    const ShootingSettings& cfg = {}) {
  if (period < 1) throw PreconditionError("refine_periodic_orbit: period must be >= 1");
  if (cfg.steps_per_unit < 1 || cfg.segments_per_unit < 1)
    throw ConfigError("refine_periodic_orbit: step counts must be positive");
  const int n_steps = cfg.steps_per_unit * period;
  const int m = std::min(n_steps, cfg.segments_per_unit * period);
  const double h = static_cast<double>(period) / n_steps;
  std::vector<int> bound(m + 1);
  for (int k = 0; k <= m; ++k) bound[k] = static_cast<int>((static_cast<long>(k) * n_steps) / m);
  const long winding = std::lround(guess.v * period);

  using Vec = Eigen::VectorXd;
  auto segment = [&](const Vec& z, int k, Eigen::Matrix2d* jac) {
    const PhasePoint p{z[2 * k], z[2 * k + 1], bound[k] * h};
    const double t1 = bound[k + 1] * h;
    const int steps = bound[k + 1] - bound[k];
    if (jac) {
      const VariationalResult r = flow_with_derivative(sys, p, t1, steps);
      *jac = r.derivative;
      return Eigen::Vector2d(r.end.lifted_x, r.end.point.v);
    }
    const FlowResult r = flow_map(sys, p, t1, steps);
    return Eigen::Vector2d(r.lifted_x, r.point.v);
  };
  // residual blocks g_k = phi_k(z_k) - z_{k+1} (- winding on the last)
  auto residual = [&](const Vec& z, std::vector<Eigen::Matrix2d>* jacs) {
    Vec g(2 * m);
    for (int k = 0; k < m; ++k) {
      const Eigen::Vector2d e = segment(z, k, jacs ? &(*jacs)[k] : nullptr);
      const int next = (k + 1) % m;
      g[2 * k] = e[0] - z[2 * next] - (k + 1 == m ? static_cast<double>(winding) : 0.0);
      g[2 * k + 1] = e[1] - z[2 * next + 1];
    }
    return g;
  };

  Vec z(2 * m);
  for (int k = 0; k < m; ++k) {
    z[2 * k] = guess.x + guess.v * bound[k] * h;
    z[2 * k + 1] = guess.v;
  }
  std::vector<Eigen::Matrix2d> jacs(m);
  Vec g = residual(z, &jacs);
  int it = 0;
  for (; it < cfg.max_iterations && g.norm() > 1e-3 * cfg.defect_tolerance; ++it) {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(2 * m, 2 * m);
    for (int k = 0; k < m; ++k) {
      const int next = (k + 1) % m;
      jac.block<2, 2>(2 * k, 2 * k) += jacs[k];
      jac.block<2, 2>(2 * k, 2 * next) -= Eigen::Matrix2d::Identity();
    }
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac);
    const double smax = std::max(1.0, svd.singularValues().maxCoeff());
    if (svd.singularValues().minCoeff() <= cfg.singular_tolerance * smax)
      throw DegenerateOrbitError("refine_periodic_orbit: shooting Jacobian is singular",
                                 g.norm());
    const Vec step = -jac.fullPivLu().solve(g);
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 40; ++ls, alpha *= 0.5) {
      const Vec trial = z + alpha * step;
      const Vec gt = residual(trial, nullptr);
      if (gt.norm() < g.norm()) {
        z = trial;
        accepted = true;
        break;
      }
    }
    if (!accepted) break;  // at the rounding floor
    g = residual(z, &jacs);
    if (!std::isfinite(g.norm()))
      throw NoOrbitError("refine_periodic_orbit: Newton diverged", g.norm());
  }

  const PhasePoint start{z[0], z[1], 0.0};
  const VariationalResult whole = flow_with_derivative(sys, start, period, n_steps);
  const double defect = std::hypot(whole.end.lifted_x - z[0] - winding, whole.end.point.v - z[1]);
  if (!(defect <= cfg.defect_tolerance))
    throw NoOrbitError("refine_periodic_orbit: no convergence (defect " +
                           std::to_string(defect) + ")",
                       defect);
  const Eigen::Matrix2d dpsi = whole.derivative;
  {
    Eigen::JacobiSVD<Eigen::Matrix2d> svd(dpsi - Eigen::Matrix2d::Identity());
    if (svd.singularValues().minCoeff() <=
        cfg.singular_tolerance * std::max(1.0, svd.singularValues().maxCoeff()))
      throw DegenerateOrbitError("refine_periodic_orbit: I - dpsi is singular", defect);
  }

  PeriodicOrbit orbit;
  orbit.initial = {reduce_mod1(z[0]), z[1], 0.0};
  orbit.period = period;
  orbit.winding = winding;
  orbit.monodromy = dpsi;
  const FloquetResult fl = floquet_analysis(dpsi, period);
  orbit.multipliers = fl.multipliers;
  orbit.floquet_exponents = fl.exponents;
  orbit.hyperbolic = fl.hyperbolic;
  orbit.lambda = fl.lambda;
  orbit.defect = defect;
  orbit.newton_iterations = it;
  return orbit;
}

}  // namespace wkam
