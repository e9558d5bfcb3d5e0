#pragma once

// Fixed-endpoint minimal action F_{a,b}(x, y) by the direct method over
// discretized curves, enumerating the homotopy class (winding) of the lift.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "wkam/error.hpp"
#include "wkam/lagrangian.hpp"

namespace wkam {

struct MinimizationSettings {
  int n_segments = 32;  // per unit time
  int winding_range = 1;
  int max_iterations = 200;
  double gradient_tolerance = 1e-9;
  int n_restarts = 1;

  void validate() const {
    if (n_segments < 2) throw ConfigError("--segments must be >= 2");
    if (winding_range < 0) throw ConfigError("--windings must be >= 0");
    if (max_iterations < 1) throw ConfigError("max_iterations must be positive");
    if (!(gradient_tolerance > 0.0 && gradient_tolerance < 1.0))
      throw ConfigError("gradient tolerance must lie in (0, 1)");
    if (n_restarts < 1) throw ConfigError("n_restarts must be >= 1");
  }
};

struct MinimalAction {
  double value = std::numeric_limits<double>::infinity();
  DiscretizedCurve curve;
  double residual = 0.0;  // sup norm of the discrete Euler-Lagrange residual
};

/// Number of segments used for a window of the given duration.
inline int segments_for(double duration, int per_unit) {
  const double raw = duration * per_unit;
  return std::max(2, static_cast<int>(std::ceil(raw - 1e-9)));
}

namespace detail {

struct LocalMinimum {
  DiscretizedCurve curve;
  double value = std::numeric_limits<double>::infinity();
  double residual = std::numeric_limits<double>::infinity();
  bool converged = false;
  bool positive_definite = false;
};

// LDL^T of a symmetric tridiagonal matrix (diag, off) plus shift; returns
// false on a non-positive pivot. Solves in place.
inline bool tridiagonal_solve(const std::vector<double>& diag, const std::vector<double>& off,
                              double shift, std::vector<double>& rhs) {
  const std::size_t n = diag.size();
  std::vector<double> d(n), l(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    d[i] = diag[i] + shift;
    if (i > 0) {
      l[i] = off[i - 1] / d[i - 1];
      d[i] -= l[i] * off[i - 1];
    }
    if (!(d[i] > 1e-14 * (std::abs(diag[i]) + 1.0))) return false;
  }
  for (std::size_t i = 1; i < n; ++i) rhs[i] -= l[i] * rhs[i - 1];
  for (std::size_t i = 0; i < n; ++i) rhs[i] /= d[i];
  for (std::size_t i = n - 1; i-- > 0;) rhs[i] -= l[i + 1] * rhs[i + 1];
  return true;
}

template <Lagrangian S>
double discrete_action(const S& sys, const std::vector<double>& x, double t0, double h) {
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < x.size(); ++k)
    total += segment_jet(sys, x[k], x[k + 1], t0 + k * h, t0 + (k + 1) * h).value;
  return total;
}

// Gradient and tridiagonal Hessian with respect to the interior samples.
template <Lagrangian S>
double assemble(const S& sys, const std::vector<double>& x, double t0, double h,
                std::vector<double>& grad, std::vector<double>& diag, std::vector<double>& off) {
  const std::size_t m = x.size() - 1;
  const std::size_t n = m - 1;
  grad.assign(n, 0.0);
  diag.assign(n, 0.0);
  off.assign(n > 0 ? n - 1 : 0, 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const SegmentJet s = segment_jet(sys, x[k], x[k + 1], t0 + k * h, t0 + (k + 1) * h);
    total += s.value;
    // interior index of sample k is k - 1
    if (k >= 1) {
      grad[k - 1] += s.d0;
      diag[k - 1] += s.d00;
    }
    if (k + 1 <= n) {
      grad[k] += s.d1;
      diag[k] += s.d11;
    }
    if (k >= 1 && k + 1 <= n) off[k - 1] += s.d01;
  }
  return total;
}

inline double sup_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double e : v) m = std::max(m, std::abs(e));
  return m;
}

// Newton iteration with a Levenberg shift when the Hessian is indefinite and
// an Armijo backtracking line search.
template <Lagrangian S>
LocalMinimum descend(const S& sys, std::vector<double> x, double t0, double t1,
                     const MinimizationSettings& cfg) {
  const std::size_t m = x.size() - 1;
  const double h = (t1 - t0) / static_cast<double>(m);
  std::vector<double> grad, diag, off, dir, trial, tgrad, tdiag, toff;
  LocalMinimum out;
  double value = assemble(sys, x, t0, h, grad, diag, off);
  double gnorm = sup_norm(grad);
  for (int it = 0; it < cfg.max_iterations && gnorm > cfg.gradient_tolerance; ++it) {
    double shift = 0.0;
    double scale = 0.0;
    for (double d : diag) scale = std::max(scale, std::abs(d));
    for (int attempt = 0; attempt < 60; ++attempt) {
      dir = grad;
      if (tridiagonal_solve(diag, off, shift, dir)) break;
      shift = shift == 0.0 ? 1e-6 * (scale + 1.0) : 4.0 * shift;
    }
    for (double& d : dir) d = -d;
    double slope = 0.0;
    for (std::size_t i = 0; i < dir.size(); ++i) slope += grad[i] * dir[i];
    if (!(slope < 0.0)) {
      dir = grad;
      for (double& d : dir) d = -d;
      slope = 0.0;
      for (double g : grad) slope -= g * g;
    }
    trial = x;
    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
      for (std::size_t i = 0; i < dir.size(); ++i) trial[i + 1] = x[i + 1] + alpha * dir[i];
      const double tv = ls == 0 ? assemble(sys, trial, t0, h, tgrad, tdiag, toff)
                                : discrete_action(sys, trial, t0, h);
      // Near the rounding floor Armijo cannot see the decrease; a full step
      // that shrinks the gradient without raising the value is then taken.
      const bool terminal = ls == 0 && tv <= value + 1e-13 * (1.0 + std::abs(value)) &&
                            sup_norm(tgrad) < gnorm;
      if (tv <= value + 1e-4 * alpha * slope || terminal) {
        accepted = true;
        if (ls == 0) {
          value = tv;
          grad.swap(tgrad);
          diag.swap(tdiag);
          off.swap(toff);
        } else {
          value = assemble(sys, trial, t0, h, grad, diag, off);
        }
        break;
      }
    }
    if (!accepted) break;  // stalled at the rounding floor
    x.swap(trial);
    gnorm = sup_norm(grad);
  }
  out.converged = gnorm <= cfg.gradient_tolerance;
  out.residual = gnorm;
  std::vector<double> probe(grad.size(), 0.0);
  out.positive_definite = grad.empty() || tridiagonal_solve(diag, off, 0.0, probe);
  out.curve.t0 = t0;
  out.curve.t1 = t1;
  out.curve.samples = std::move(x);
  out.value = curve_action(sys, out.curve);
  return out;
}

// Local minimum in one homotopy class. A converged critical point with an
// indefinite Hessian (e.g. a straight lift sitting on a potential well) is
// escaped with symmetric half-sine perturbations.
template <Lagrangian S>
LocalMinimum minimize_class(const S& sys, double x_start, double x_end, double t0,
                            double t1, int m, const MinimizationSettings& cfg) {
  std::vector<double> line(m + 1);
  for (int k = 0; k <= m; ++k)
    line[k] = x_start + (x_end - x_start) * static_cast<double>(k) / m;
  line[m] = x_end;

  auto perturbed = [&](double amp, int mode) {
    std::vector<double> p = line;
    for (int k = 1; k < m; ++k)
      p[k] += amp * std::sin(std::numbers::pi * mode * static_cast<double>(k) / m);
    return p;
  };

  LocalMinimum best = descend(sys, line, t0, t1, cfg);
  auto consider = [&](LocalMinimum cand) {
    if (cand.converged && (!best.converged || cand.value < best.value)) best = std::move(cand);
    else if (!best.converged && cand.residual < best.residual) best = std::move(cand);
  };
  for (int r = 1; r < cfg.n_restarts; ++r) {
    const double amp = 0.1 * ((r % 2) ? 1.0 : -1.0);
    consider(descend(sys, perturbed(amp, 1 + (r - 1) / 2), t0, t1, cfg));
  }
  if (best.converged && !best.positive_definite) {
    for (double amp : {0.05, -0.05}) {
      LocalMinimum cand = descend(sys, perturbed(amp, 1), t0, t1, cfg);
      consider(std::move(cand));
    }
  }
  return best;
}

}  // namespace detail

/// Windings enumerated for a window of the given duration, ordered by |k|
/// then value: 0, -1, 1, -2, 2, ...
inline std::vector<long> winding_candidates(double duration, int range) {
  const long cap = static_cast<long>(range) * static_cast<long>(std::ceil(duration - 1e-12));
  std::vector<long> ks{0};
  for (long k = 1; k <= cap; ++k) {
    ks.push_back(-k);
    ks.push_back(k);
  }
  return ks;
}

/// F_{a,b}(x, y): least discrete action over enumerated windings. The
/// returned value is exactly curve_action of the returned curve.
template <Lagrangian S>
MinimalAction minimal_action(const S& sys, double x, double a, double y, double b,
                             const MinimizationSettings& cfg = {}) {
  cfg.validate();
  if (!(b > a)) throw PreconditionError("minimal_action: need b > a");
  const double xs = reduce_mod1(x);
  const double ys = reduce_mod1(y);
  const int m = segments_for(b - a, cfg.n_segments);
  MinimalAction best;
  bool any = false;
  double worst_residual = std::numeric_limits<double>::infinity();
  detail::LocalMinimum fallback;
  for (long k : winding_candidates(b - a, cfg.winding_range)) {
    detail::LocalMinimum lm = detail::minimize_class(sys, xs, ys + k, a, b, m, cfg);
    if (!lm.converged) {
      if (lm.residual < worst_residual || !std::isfinite(worst_residual)) {
        worst_residual = lm.residual;
        fallback = lm;
        fallback.curve.winding = k;
      }
      continue;
    }
    if (!any || lm.value < best.value) {
      best.value = lm.value;
      best.curve = std::move(lm.curve);
      best.curve.winding = k;
      best.residual = lm.residual;
      any = true;
    }
  }
  if (!any)
    throw NumericalError("minimal_action: every winding failed to converge (best residual " +
                             std::to_string(worst_residual) + ")",
                         worst_residual);
  return best;
}

/// Newton refinement of a given sampled curve with its endpoints held fixed.
/// The result is a local minimizer in the homotopy class of the seed.
template <Lagrangian S>
MinimalAction refine_curve(const S& sys, const DiscretizedCurve& seed,
                           const MinimizationSettings& cfg = {}) {
  cfg.validate();
  seed.validate();
  detail::LocalMinimum lm = detail::descend(sys, seed.samples, seed.t0, seed.t1, cfg);
  if (!lm.converged)
    throw NumericalError("refine_curve: no convergence", lm.residual);
  MinimalAction out;
  out.value = lm.value;
  out.curve = std::move(lm.curve);
  out.curve.winding = seed.winding;
  out.residual = lm.residual;
  return out;
}

/// Phi(x,[s],y,[t]) = min over n = 0..horizon of F_{s, t+n}(x, y) + c (t + n - s),
/// restricted to windows of positive length.
template <Lagrangian S>
double action_functional_phi(const S& sys, double x, double s_frac, double y, double t_frac,
                             double c, int horizon, const MinimizationSettings& cfg = {}) {
  if (horizon < 1) throw PreconditionError("action_functional_phi: horizon must be >= 1");
  double best = std::numeric_limits<double>::infinity();
  for (int n = 0; n <= horizon; ++n) {
    const double b = t_frac + n;
    if (!(b > s_frac)) continue;
    const MinimalAction f = minimal_action(sys, x, s_frac, y, b, cfg);
    best = std::min(best, f.value + c * (b - s_frac));
  }
  return best;
}

}  // namespace wkam
