#pragma once

// Named problem families for the experiments. Every family takes a parabolic
// dilation factor s: the problem is posed on s * [lower, upper]^d over
// (0, s^2 T), with coefficients and data evaluated at (t / s^2, x / s) and the
// lower-order terms rescaled so that v_s(t, x) = v(t / s^2, x / s).

#include <cmath>
#include <string>
#include <vector>

#include "ilab/harness/config.hpp"
#include "ilab/solver.hpp"

namespace ilab::harness {

struct ProblemConfig {
  std::string name;
  int dim = 1;
  double lower = -1.0, upper = 1.0, horizon = 1.0;
  double delta = 0.5;
  double K = 10.0;
  /// heat | piecewise_t | rough_x | pucci_max | pucci_min | drift | isaacs
  std::string op = "heat";
  double a = 1.0;
  double a_low = 0.8, a_high = 1.2, t_switch = 0.5;
  double base = 1.25, amplitude = 0.5, wavelength = 0.1;
  double drift = 0.5, source = 0.5;
  double game_G = 0.1;
  /// zero | affine | quadratic | heat_quadratic | sine | abs | abs15 | sqrt_t | cosmix
  std::string data = "abs";
  double data_scale = 1.0;
  double scale = 1.0;
};

inline const std::vector<std::string>& operator_names() {
  static const std::vector<std::string> n{"heat", "piecewise_t", "rough_x", "pucci_max", "pucci_min", "drift", "isaacs"};
  return n;
}

inline const std::vector<std::string>& data_names() {
  static const std::vector<std::string> n{"zero", "affine", "quadratic", "heat_quadratic", "sine",
                                          "abs", "abs15", "sqrt_t", "cosmix"};
  return n;
}

namespace detail {

/// Square wave with a phase offset that keeps its jumps off dyadic lattices.
inline double square_wave(double y, double wavelength) {
  return std::sin(2.0 * M_PI * (y - 1e-3) / wavelength) >= 0 ? 1.0 : -1.0;
}

inline double norm(const Point& x, int d) {
  double s = 0.0;
  for (int i = 0; i < d; ++i) s += x[i] * x[i];
  return std::sqrt(s);
}

inline bool contains(const std::vector<std::string>& names, const std::string& n) {
  for (const auto& m : names)
    if (m == n) return true;
  return false;
}

}  // namespace detail

/// Data on the undilated problem.
inline BoundaryData named_data(const ProblemConfig& c) {
  const int d = c.dim;
  const double T = c.horizon, a = c.a;
  if (c.data == "zero") return [](double, const Point&) { return 0.0; };
  if (c.data == "affine")
    return [d](double, const Point& x) { return 1.0 + 0.5 * x[0] - (d > 1 ? 0.25 * x[1] : 0.0); };
  if (c.data == "quadratic") return [d](double, const Point& x) { return detail::norm(x, d) * detail::norm(x, d); };
  if (c.data == "heat_quadratic") {
    // Exact solution of dt v + a Laplacian v = 0 with v(T) = |x|^2.
    return [d, T, a](double t, const Point& x) {
      const double r = detail::norm(x, d);
      return r * r + 2.0 * a * d * (T - t);
    };
  }
  if (c.data == "sine")
    return [d](double, const Point& x) { return std::sin(M_PI * x[0]) * (d > 1 ? std::sin(M_PI * x[1]) : 1.0); };
  if (c.data == "abs") return [d](double, const Point& x) { return detail::norm(x, d); };
  if (c.data == "abs15") return [d](double, const Point& x) { return std::pow(detail::norm(x, d), 1.5); };
  if (c.data == "sqrt_t") return [](double t, const Point&) { return std::sqrt(std::abs(t - 0.5)); };
  if (c.data == "cosmix")
    return [](double t, const Point& x) { return std::cos(0.5 * M_PI * x[0]) + 0.3 * std::sin(2.0 * M_PI * t) * x[0]; };
  throw ConfigError("unknown data family '" + c.data + "'");
}

inline void validate(const ProblemConfig& c) {
  auto req = [&](bool ok, const char* what) {
    if (!ok) throw ConfigError("problem '" + c.name + "': " + what);
  };
  req(c.dim == 1 || c.dim == 2, "dim must be 1 or 2");
  req(c.delta > 0 && c.delta <= 1, "delta must lie in (0,1]");
  req(c.upper > c.lower, "upper must exceed lower");
  req(c.horizon > 0, "horizon must be positive");
  req(c.K >= 0, "K must be nonnegative");
  req(c.scale > 0, "scale must be positive");
  req(detail::contains(operator_names(), c.op), "unknown operator family");
  req(detail::contains(data_names(), c.data), "unknown data family");
  const EllipticityBand band = EllipticityBand::from_delta(c.delta);
  auto in_band = [&](double v) { return v >= band.lo && v <= band.hi; };
  if (c.op == "heat" || c.op == "drift") req(in_band(c.a), "a outside [delta, 1/delta]");
  if (c.op == "piecewise_t" || c.op == "isaacs") req(in_band(c.a_low) && in_band(c.a_high), "a_low/a_high outside [delta, 1/delta]");
  if (c.op == "rough_x") {
    req(c.wavelength > 0, "wavelength must be positive");
    req(in_band(c.base - std::abs(c.amplitude)) && in_band(c.base + std::abs(c.amplitude)),
        "base +- amplitude outside [delta, 1/delta]");
  }
  req(c.drift >= 0 && c.game_G >= 0, "drift and game_G must be nonnegative");
}

/// True when F and G do not depend on x and G vanishes.
inline bool is_x_independent(const ProblemConfig& c) {
  return c.op == "heat" || c.op == "piecewise_t" || c.op == "pucci_max" || c.op == "pucci_min";
}

/// The operator is linear in the data (no Pucci extremum, no game, no
/// gradient nonlinearity), ignoring the cutoff.
inline bool is_linear(const ProblemConfig& c) { return c.op == "heat" || c.op == "piecewise_t" || c.op == "rough_x"; }

inline ProblemSpec build_problem(const ProblemConfig& c) {
  validate(c);
  const int d = c.dim;
  const double s = c.scale, s2 = s * s;
  ProblemSpec p;
  p.domain = Domain::box(d, s * c.lower, s * c.upper);
  p.horizon = s2 * c.horizon;
  p.cutoff = CutoffSpec::for_delta(c.delta, c.K / s2);
  const double delta = c.delta;

  if (c.op == "heat" || c.op == "drift") {
    p.H = FullOperatorSpec::second_order(HomogOperator::linear(SymMat::scalar(d, c.a), delta));
  } else if (c.op == "piecewise_t") {
    const double lo = c.a_low, hi = c.a_high, ts = c.t_switch;
    p.H = FullOperatorSpec::second_order(HomogOperator::linear(
        d, [=](double t, const Point&) { return SymMat::scalar(d, t / s2 < ts ? lo : hi); }, delta, false, true));
  } else if (c.op == "rough_x") {
    const double b = c.base, A = c.amplitude, l = c.wavelength;
    p.H = FullOperatorSpec::second_order(HomogOperator::linear(
        d,
        [=](double, const Point& x) {
          double w = detail::square_wave(x[0] / s, l);
          if (d > 1) w *= detail::square_wave(x[1] / s, l);
          return SymMat::scalar(d, b + A * w);
        },
        delta, true, false));
  } else if (c.op == "pucci_max" || c.op == "pucci_min") {
    p.H = FullOperatorSpec::second_order(HomogOperator::pucci(d, EllipticityBand::from_delta(delta), c.op == "pucci_min"));
  } else if (c.op == "isaacs") {
    IsaacsSpec game;
    game.dim = d;
    game.delta = delta;
    game.x_dependent = false;
    game.t_dependent = false;
    const double coef[2] = {c.a_low, c.a_high};
    const double gam = c.game_G / s;
    game.a.resize(2);
    game.G.resize(2);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        const double ai = coef[i];
        game.a[i].push_back([=](double, const Point&) { return SymMat::scalar(d, ai); });
        const double sign = i == j ? 1.0 : -1.0;
        game.G[i].push_back([=](double, const std::array<double, kMaxDim>& grad, double, const Point&) {
          double n = 0.0;
          for (int q = 0; q < d; ++q) n += grad[q] * grad[q];
          return sign * gam * std::sqrt(n);
        });
      }
    game.envelope.K0 = gam;
    p.H = build_isaacs(game);
  }

  if (c.op == "drift") {
    const double b = c.drift / s, f = c.source / s2;
    p.H.G = [=](double, const std::array<double, kMaxDim>& grad, double, const Point& x) {
      double n = 0.0;
      for (int q = 0; q < d; ++q) n += grad[q] * grad[q];
      return b * std::sqrt(n) + f * std::cos(0.5 * M_PI * x[0] / s);
    };
    p.H.G_uses_gradient = true;
    p.H.envelope.K0 = b;
    p.H.envelope.Hbar = [=](double, const Point& x) { return std::abs(f * std::cos(0.5 * M_PI * x[0] / s)); };
  }

  const BoundaryData g = named_data(c);
  const double m = c.data_scale;
  p.g = [=](double t, const Point& x) {
    Point y = x;
    for (int i = 0; i < d; ++i) y[i] = x[i] / s;
    return m * g(t / s2, y);
  };
  return p;
}

/// Scheme with lattice steps (s h, s^2 dt); dt <= 0 means dt = h^2.
inline SchemeParams scheme_for(const ProblemConfig& c, double h, double dt, std::uint64_t seed = 1) {
  SchemeParams sp;
  sp.h = c.scale * h;
  sp.dt = c.scale * c.scale * (dt > 0 ? dt : h * h);
  sp.seed = seed;
  return sp;
}

/// Keys understood by read_problem.
inline const std::vector<std::string_view>& problem_keys() {
  static const std::vector<std::string_view> k{"dim",  "lower",     "upper",  "horizon",   "delta",      "K",
                                               "operator", "a",    "a_low",  "a_high",    "t_switch",   "base",
                                               "amplitude", "wavelength", "drift", "source", "game_G", "data",
                                               "data_scale", "scale"};
  return k;
}

/// Reads the problem keys of a section; unspecified keys keep `base` values.
/// With read_data false the `data` key is left to the caller.
inline ProblemConfig read_problem(const Config& cfg, std::string_view sec, ProblemConfig base = {}, bool read_data = true) {
  ProblemConfig c = base;
  c.dim = static_cast<int>(cfg.integer(sec, "dim", c.dim));
  c.lower = cfg.number(sec, "lower", c.lower);
  c.upper = cfg.number(sec, "upper", c.upper);
  c.horizon = cfg.number(sec, "horizon", c.horizon);
  c.delta = cfg.number(sec, "delta", c.delta);
  c.K = cfg.number(sec, "K", c.K);
  c.op = cfg.string(sec, "operator", c.op);
  c.a = cfg.number(sec, "a", c.a);
  c.a_low = cfg.number(sec, "a_low", c.a_low);
  c.a_high = cfg.number(sec, "a_high", c.a_high);
  c.t_switch = cfg.number(sec, "t_switch", c.t_switch);
  c.base = cfg.number(sec, "base", c.base);
  c.amplitude = cfg.number(sec, "amplitude", c.amplitude);
  c.wavelength = cfg.number(sec, "wavelength", c.wavelength);
  c.drift = cfg.number(sec, "drift", c.drift);
  c.source = cfg.number(sec, "source", c.source);
  c.game_G = cfg.number(sec, "game_G", c.game_G);
  if (read_data) c.data = cfg.string(sec, "data", c.data);
  c.data_scale = cfg.number(sec, "data_scale", c.data_scale);
  c.scale = cfg.number(sec, "scale", c.scale);
  if (c.name.empty()) c.name = std::string(sec);
  validate(c);
  return c;
}

}  // namespace ilab::harness
