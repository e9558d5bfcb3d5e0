#pragma once

// Time-periodic Lagrangians on the circle, their Legendre duals and the
// midpoint-rule action of sampled curves.

#include <cmath>
#include <concepts>
#include <cstdio>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "wkam/error.hpp"

namespace wkam {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduce a lifted coordinate to [0, 1).
inline double reduce_mod1(double x) {
  double r = x - std::floor(x);
  return r >= 1.0 ? 0.0 : r;
}

/// Value and derivatives of L up to second order, plus the mixed L_vt term
/// the Euler-Lagrange equation needs.
struct LagrangianJet {
  double value = 0.0;
  double dx = 0.0;
  double dv = 0.0;
  double dxx = 0.0;
  double dxv = 0.0;
  double dvv = 0.0;
  double dvt = 0.0;
};

/// Euler-Lagrange acceleration a(x, v, t) and its partials.
struct AccelerationJet {
  double a = 0.0;
  double da_dx = 0.0;
  double da_dv = 0.0;
};

struct PhasePoint {
  double x = 0.0;
  double v = 0.0;
  double t = 0.0;
};

/// Uniformly sampled curve, stored lifted to the real line. `winding` is the
/// integer k such that the lifted end equals the reduced end plus k, with the
/// start sample kept at its reduced value.
struct DiscretizedCurve {
  double t0 = 0.0;
  double t1 = 1.0;
  std::vector<double> samples;
  long winding = 0;

  std::size_t segments() const { return samples.empty() ? 0 : samples.size() - 1; }
  double spacing() const { return (t1 - t0) / static_cast<double>(segments()); }
  double time(std::size_t k) const {
    return t0 + static_cast<double>(k) * spacing();
  }
  void validate() const {
    if (samples.size() < 2) throw PreconditionError("curve needs at least 2 samples");
    if (!(t1 > t0)) throw PreconditionError("curve time interval must be increasing");
  }
};

enum class Family { free, mechanical_cos };

inline Family parse_family(std::string_view tag) {
  if (tag == "free") return Family::free;
  if (tag == "mechanical-cos") return Family::mechanical_cos;
  throw ConfigError("unknown system family '" + std::string(tag) + "'");
}

inline std::string family_name(Family f) {
  return f == Family::free ? "free" : "mechanical-cos";
}

/// Built-in one-dimensional families:
///   free:            L = v^2 / 2
///   mechanical-cos:  L = v^2 / 2 - A cos(2 pi q x) (1 + eps cos(2 pi t))
class LagrangianSystem {
 public:
  LagrangianSystem() = default;
  LagrangianSystem(Family family, double amp = 1.0, int freq = 1, double eps = 0.0)
      : family_(family), amp_(amp), freq_(freq), eps_(eps) {
    if (!std::isfinite(amp)) throw ConfigError("--amp must be finite");
    if (freq < 1) throw ConfigError("--freq must be a positive integer");
    if (!(std::abs(eps) < 1.0)) throw ConfigError("--eps must satisfy |eps| < 1");
  }

  static LagrangianSystem free() { return LagrangianSystem(Family::free); }
  static LagrangianSystem mechanical_cos(double amp, int freq, double eps) {
    return LagrangianSystem(Family::mechanical_cos, amp, freq, eps);
  }

  Family family() const { return family_; }
  double amp() const { return amp_; }
  int freq() const { return freq_; }
  double eps() const { return eps_; }
  int dimension() const { return 1; }

  LagrangianJet jet(double x, double v, double t) const {
    LagrangianJet j;
    j.value = 0.5 * v * v;
    j.dv = v;
    j.dvv = 1.0;
    if (family_ == Family::mechanical_cos) {
      const Potential p = potential(x, t);
      j.value -= p.value;
      j.dx = -p.dx;
      j.dxx = -p.dxx;
    }
    return j;
  }

  AccelerationJet acceleration(double x, double /*v*/, double t) const {
    if (family_ == Family::free) return {};
    const Potential p = potential(x, t);
    return {-p.dx, -p.dxx, 0.0};
  }

  /// H(x, p, t) in closed form; used as an oracle for the Legendre transform.
  double hamiltonian_closed_form(double x, double p, double t) const {
    double h = 0.5 * p * p;
    if (family_ == Family::mechanical_cos) h += potential(x, t).value;
    return h;
  }

  std::string describe() const {
    if (family_ == Family::free) return "free";
    char buf[128];
    std::snprintf(buf, sizeof buf, "mechanical-cos(A=%.17g;q=%d;eps=%.17g)", amp_,
                  freq_, eps_);
    return buf;
  }

 private:
  struct Potential {
    double value, dx, dxx;
  };

  // V(x, t) = A cos(2 pi q x)(1 + eps cos(2 pi t)); arguments reduced mod 1 so
  // that integer shifts give bitwise identical values.
  Potential potential(double x, double t) const {
    const double w = kTwoPi * freq_;
    const double phase = w * reduce_mod1(x);
    const double mod = 1.0 + eps_ * std::cos(kTwoPi * reduce_mod1(t));
    const double c = std::cos(phase);
    const double s = std::sin(phase);
    return {amp_ * c * mod, -amp_ * w * s * mod, -amp_ * w * w * c * mod};
  }

  Family family_ = Family::free;
  double amp_ = 1.0;
  int freq_ = 1;
  double eps_ = 0.0;
};

/// Anything that can be evaluated as a one-dimensional Lagrangian with an
/// explicit Euler-Lagrange acceleration.
template <class S>
concept Lagrangian = requires(const S& s, double x, double v, double t) {
  { s.jet(x, v, t) } -> std::same_as<LagrangianJet>;
  { s.acceleration(x, v, t) } -> std::same_as<AccelerationJet>;
};

template <Lagrangian S>
LagrangianJet eval_lagrangian(const S& sys, const PhasePoint& p) {
  if (!std::isfinite(p.x) || !std::isfinite(p.v) || !std::isfinite(p.t))
    throw PreconditionError("phase point must be finite");
  return sys.jet(p.x, p.v, p.t);
}

struct LegendreResult {
  double v_star = 0.0;
  double hamiltonian = 0.0;
  double residual = 0.0;
  int iterations = 0;
};

/// H(x,p,t) = max_v p v - L(x,v,t). Solves p = L_v by damped Newton from v = 0.
template <Lagrangian S>
LegendreResult legendre_transform(const S& sys, double x, double p, double t,
                                  int max_iterations = 100) {
  constexpr double kTol = 1e-12;
  double v = 0.0;
  LagrangianJet j = sys.jet(x, v, t);
  double r = j.dv - p;
  int it = 0;
  for (; it < max_iterations && std::abs(r) > kTol; ++it) {
    if (!(j.dvv > 0.0))
      throw NumericalError("Legendre transform: L_vv not positive", std::abs(r));
    const double step = -r / j.dvv;
    double alpha = 1.0;
    for (int ls = 0; ls < 60; ++ls, alpha *= 0.5) {
      const LagrangianJet trial = sys.jet(x, v + alpha * step, t);
      if (std::abs(trial.dv - p) < std::abs(r) || ls == 59) {
        v += alpha * step;
        j = trial;
        break;
      }
    }
    r = j.dv - p;
  }
  if (std::abs(r) > kTol)
    throw NumericalError("Legendre transform did not converge", std::abs(r));
  return {v, p * v - j.value, std::abs(r), it};
}

/// Discrete action of one segment and its derivatives with respect to the
/// two endpoint positions.
struct SegmentJet {
  double value = 0.0;
  double d0 = 0.0;
  double d1 = 0.0;
  double d00 = 0.0;
  double d01 = 0.0;
  double d11 = 0.0;
};

/// Midpoint rule with finite-difference velocity:
///   h L((x0 + x1)/2, (x1 - x0)/h, (t0 + t1)/2).
template <Lagrangian S>
SegmentJet midpoint_segment(const S& sys, double x0, double x1, double t0, double t1) {
  const double h = t1 - t0;
  const LagrangianJet j = sys.jet(0.5 * (x0 + x1), (x1 - x0) / h, 0.5 * (t0 + t1));
  SegmentJet s;
  s.value = h * j.value;
  s.d0 = 0.5 * h * j.dx - j.dv;
  s.d1 = 0.5 * h * j.dx + j.dv;
  s.d00 = 0.25 * h * j.dxx - j.dxv + j.dvv / h;
  s.d11 = 0.25 * h * j.dxx + j.dxv + j.dvv / h;
  s.d01 = 0.25 * h * j.dxx - j.dvv / h;
  return s;
}

/// Systems may replace the midpoint segment with their own discrete form
/// (the tilted system telescopes its exact differential).
template <class S>
concept HasSegmentRule = requires(const S& s, double a, double b, double c, double d) {
  { s.segment(a, b, c, d) } -> std::same_as<SegmentJet>;
};

template <Lagrangian S>
SegmentJet segment_jet(const S& sys, double x0, double x1, double t0, double t1) {
  if constexpr (HasSegmentRule<S>) {
    return sys.segment(x0, x1, t0, t1);
  } else {
    return midpoint_segment(sys, x0, x1, t0, t1);
  }
}

template <Lagrangian S>
double curve_action(const S& sys, const DiscretizedCurve& c) {
  c.validate();
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < c.samples.size(); ++k)
    total += segment_jet(sys, c.samples[k], c.samples[k + 1], c.time(k), c.time(k + 1))
                 .value;
  return total;
}

}  // namespace wkam
