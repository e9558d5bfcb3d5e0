#pragma once

// Period lift (x, v, [t]) -> (x, v/N, [N t]) and the subsolution tilt
//   LL(x, v, t) = L(x, v, t) - d_x f(x, t) v - f_t(x, t) + c.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <string_view>

#include "wkam/error.hpp"
#include "wkam/lagrangian.hpp"

namespace wkam {

/// L_N = L o P_N with P_N(x, v, t) = (x, v / N, N t).
template <Lagrangian S>
class LiftedSystem {
 public:
  LiftedSystem(S base, int n) : base_(std::move(base)), n_(n) {
    if (n < 1) throw PreconditionError("lift_system: N must be >= 1");
  }

  const S& base() const { return base_; }
  int factor() const { return n_; }

  LagrangianJet jet(double x, double v, double t) const {
    const double nn = n_;
    LagrangianJet j = base_.jet(x, v / nn, nn * t);
    j.dv /= nn;
    j.dxv /= nn;
    j.dvv /= nn * nn;
    return j;  // dvt: d/dt (L_v(., v/N, N t) / N) = L_vt
  }

  AccelerationJet acceleration(double x, double v, double t) const {
    const double nn = n_;
    AccelerationJet a = base_.acceleration(x, v / nn, nn * t);
    a.a *= nn * nn;
    a.da_dx *= nn * nn;
    a.da_dv *= nn;
    return a;
  }

  /// H_N(x, p, t) = H(x, N p, N t).
  double hamiltonian(double x, double p, double t) const
    requires requires(const S& s) { s.hamiltonian_closed_form(0.0, 0.0, 0.0); }
  {
    return base_.hamiltonian_closed_form(x, n_ * p, n_ * t);
  }

 private:
  S base_;
  int n_;
};

template <Lagrangian S>
LiftedSystem<S> lift_system(const S& sys, int n) {
  return LiftedSystem<S>(sys, n);
}

/// gamma^N(t) = gamma(N t) on [a/N, b/N]: same samples, spacing divided by N.
inline DiscretizedCurve lift_curve(const DiscretizedCurve& c, int n) {
  c.validate();
  if (n < 1) throw PreconditionError("lift_curve: N must be >= 1");
  DiscretizedCurve out = c;
  out.t0 = c.t0 / n;
  out.t1 = c.t1 / n;
  return out;
}

/// Value and derivatives of a subsolution f(x, t).
struct SubsolutionJet {
  double f = 0.0;
  double fx = 0.0;
  double fxx = 0.0;
  double fxxx = 0.0;
  double ft = 0.0;
  double fxt = 0.0;
};

enum class SubsolutionTag { zero, constant, maupertuis };

inline SubsolutionTag parse_subsolution(std::string_view tag) {
  if (tag == "zero") return SubsolutionTag::zero;
  if (tag == "const") return SubsolutionTag::constant;
  if (tag == "maupertuis") return SubsolutionTag::maupertuis;
  throw ConfigError("unknown subsolution '" + std::string(tag) + "'");
}

/// Built-in subsolutions. `maupertuis` is the weak KAM solution of the
/// single-well mechanical system, f' = 2 sin(pi x) sigma(x), where sigma
/// switches from +1 to -1 by a C^2 quintic step across [1/2 - w, 1/2 + w].
class Subsolution {
 public:
  static constexpr double kBandHalfWidth = 0.005;

  explicit Subsolution(SubsolutionTag tag = SubsolutionTag::zero, double kappa = 0.0)
      : tag_(tag), kappa_(kappa) {
    if (tag_ == SubsolutionTag::maupertuis) band_start_value_ = closed_form(0.5 - kBandHalfWidth);
  }

  SubsolutionTag tag() const { return tag_; }

  SubsolutionJet operator()(double x, double /*t*/) const {
    SubsolutionJet j;
    switch (tag_) {
      case SubsolutionTag::zero:
        return j;
      case SubsolutionTag::constant:
        j.f = kappa_;
        return j;
      case SubsolutionTag::maupertuis:
        return maupertuis(reduce_mod1(x));
    }
    return j;
  }

 private:
  static constexpr double kPi = std::numbers::pi;

  static double closed_form(double x) { return (2.0 / kPi) * (1.0 - std::cos(kPi * x)); }

  // sigma and its first two derivatives.
  static std::array<double, 3> sigma(double x) {
    const double w = kBandHalfWidth;
    if (x <= 0.5 - w) return {1.0, 0.0, 0.0};
    if (x >= 0.5 + w) return {-1.0, 0.0, 0.0};
    const double s = (x - (0.5 - w)) / (2.0 * w);
    const double p = s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
    const double dp = 30.0 * s * s * (1.0 - s) * (1.0 - s);
    const double ddp = 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
    const double ds = 1.0 / (2.0 * w);
    return {1.0 - 2.0 * p, -2.0 * dp * ds, -2.0 * ddp * ds * ds};
  }

  static double derivative(double x) { return 2.0 * std::sin(kPi * x) * sigma(x)[0]; }

  // f on [1/2 - w, 1/2] by 20-point Gauss-Legendre quadrature of f'.
  double band_value(double x) const {
    static constexpr std::array<double, 10> nodes = {
        0.0765265211334973, 0.2277858511416451, 0.3737060887154195, 0.5108670019508271,
        0.6360536807265150, 0.7463319064601508, 0.8391169718222188, 0.9122344282513259,
        0.9639719272779138, 0.9931285991850949};
    static constexpr std::array<double, 10> weights = {
        0.1527533871307258, 0.1491729864726037, 0.1420961093183820, 0.1316886384491766,
        0.1181945319615184, 0.1019301198172404, 0.0832767415767048, 0.0626720483341091,
        0.0406014298003869, 0.0176140071391521};
    const double a = 0.5 - kBandHalfWidth;
    const double mid = 0.5 * (a + x);
    const double half = 0.5 * (x - a);
    double sum = 0.0;
    for (std::size_t k = 0; k < nodes.size(); ++k)
      sum += weights[k] * (derivative(mid + half * nodes[k]) + derivative(mid - half * nodes[k]));
    return band_start_value_ + half * sum;
  }

  SubsolutionJet maupertuis(double x) const {
    // f is symmetric about 1/2, so evaluate on [0, 1/2] and mirror.
    const bool mirrored = x > 0.5;
    const double y = mirrored ? 1.0 - x : x;
    const auto sg = sigma(y);
    const double s = std::sin(kPi * y);
    const double c = std::cos(kPi * y);
    SubsolutionJet j;
    j.f = y <= 0.5 - kBandHalfWidth ? closed_form(y) : band_value(y);
    j.fx = 2.0 * s * sg[0];
    j.fxx = 2.0 * kPi * c * sg[0] + 2.0 * s * sg[1];
    j.fxxx = -2.0 * kPi * kPi * s * sg[0] + 4.0 * kPi * c * sg[1] + 2.0 * s * sg[2];
    if (mirrored) {
      j.fx = -j.fx;
      j.fxxx = -j.fxxx;
    }
    return j;
  }

  SubsolutionTag tag_;
  double kappa_;
  double band_start_value_ = 0.0;
};

/// Pointwise minimum of LL over the validation lattice.
struct TiltValidation {
  double minimum = std::numeric_limits<double>::infinity();
  double x = 0.0, v = 0.0, t = 0.0;
};

template <Lagrangian S>
class TiltedSystem {
 public:
  TiltedSystem(S base, Subsolution f, double c) : base_(std::move(base)), f_(f), c_(c) {}

  const S& base() const { return base_; }
  const Subsolution& subsolution() const { return f_; }
  double critical_value() const { return c_; }
  const TiltValidation& validation() const { return validation_; }
  void set_validation(const TiltValidation& v) { validation_ = v; }

  LagrangianJet jet(double x, double v, double t) const {
    LagrangianJet j = base_.jet(x, v, t);
    const SubsolutionJet f = f_(x, t);
    j.value += -f.fx * v - f.ft + c_;
    j.dx += -f.fxx * v - f.fxt;
    j.dv += -f.fx;
    j.dxx += -f.fxxx * v;
    j.dxv += -f.fxx;
    j.dvt += -f.fxt;
    return j;
  }

  /// Tilting by an exact differential does not change the flow.
  AccelerationJet acceleration(double x, double v, double t) const {
    return base_.acceleration(x, v, t);
  }

  /// Discrete form: base midpoint segment + c h - (f(x1, t1) - f(x0, t0)).
  /// The differential telescopes exactly along any sampled curve.
  SegmentJet segment(double x0, double x1, double t0, double t1) const {
    SegmentJet s = segment_jet(base_, x0, x1, t0, t1);
    const SubsolutionJet f0 = f_(x0, t0);
    const SubsolutionJet f1 = f_(x1, t1);
    s.value += c_ * (t1 - t0) - (f1.f - f0.f);
    s.d0 += f0.fx;
    s.d1 -= f1.fx;
    s.d00 += f0.fxx;
    s.d11 -= f1.fxx;
    return s;
  }

 private:
  S base_;
  Subsolution f_;
  double c_;
  TiltValidation validation_;
};

inline constexpr double kSubsolutionTolerance = 1e-6;

/// Builds the tilted system and sweeps LL on a 64 x 32 x 16 lattice of
/// (x in [0,1), v in [-3,3], t in [0,1)); throws when LL < -1e-6 anywhere.
template <Lagrangian S>
TiltedSystem<S> tilt_system(const S& sys, const Subsolution& f, double c) {
  TiltedSystem<S> tilted(sys, f, c);
  TiltValidation val;
  for (int ix = 0; ix < 64; ++ix) {
    for (int iv = 0; iv < 32; ++iv) {
      for (int it = 0; it < 16; ++it) {
        const double x = ix / 64.0;
        const double v = -3.0 + 6.0 * iv / 31.0;
        const double t = it / 16.0;
        const double value = tilted.jet(x, v, t).value;
        if (value < val.minimum) val = {value, x, v, t};
      }
    }
  }
  tilted.set_validation(val);
  if (val.minimum < -kSubsolutionTolerance)
    throw InvalidSubsolutionError("tilt_system: tilted Lagrangian is negative", val.x, val.v,
                                  val.t, val.minimum);
  return tilted;
}

}  // namespace wkam
