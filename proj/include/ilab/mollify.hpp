#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "ilab/core.hpp"

namespace ilab {

/// Space-time mollifier: tensor bump of width eps in x and eps^2 in t.
struct MollifierSpec {
  double eps = 0.25;
  double kappa = 1.0;

  MollifierSpec() = default;
  MollifierSpec(double e, double k) : eps(e), kappa(k) {
    if (!(e > 0 && e <= 1)) throw InputError("MollifierSpec: eps must lie in (0,1]");
    if (!(k > 0 && k <= 2)) throw InputError("MollifierSpec: kappa must lie in (0,2]");
  }
};

namespace detail {

inline double bump(double s) { return std::abs(s) < 1 ? std::exp(-1.0 / (1.0 - s * s)) : 0.0; }

inline double bump_d1(double s) {
  if (std::abs(s) >= 1) return 0.0;
  const double q = 1.0 - s * s;
  return bump(s) * (-2.0 * s / (q * q));
}

inline double bump_d2(double s) {
  if (std::abs(s) >= 1) return 0.0;
  const double q = 1.0 - s * s;
  const double r = -2.0 * s / (q * q);
  const double dr = -2.0 / (q * q) - 8.0 * s * s / (q * q * q);
  return bump(s) * (r * r + dr);
}

/// Kernel taps at offsets j * stride * step, j in [-radius, radius].
struct Taps {
  std::vector<double> w;
  long radius = 0;
  long stride = 1;
  double at(long j) const { return w[static_cast<std::size_t>(j + radius)]; }
};

/// Taps of the exact convolution of the piecewise-linear interpolant with
/// rho^(order): W_j = int rho^(order)(tau) hat(tau/u - j) dtau, u = stride * step.
/// The hat weights make the result exact for data that are linear between
/// nodes, so kinks sitting on nodes are mollified without lattice error.
/// order 0 taps are nonnegative with unit mass; order 1 taps are odd and
/// differentiate linear data exactly; order 2 taps are even and kill
/// constants and linear data.
inline Taps make_taps(double scale, double step, long stride, int order) {
  Taps T;
  T.stride = stride;
  const double u = static_cast<double>(stride) * step;
  T.radius = static_cast<long>(std::ceil(scale / u * (1 - 1e-12)));
  const long R = T.radius;
  auto profile = [&](double s) { return order == 0 ? bump(s) : order == 1 ? bump_d1(s) : bump_d2(s); };
  // Midpoint rule on each half of the hat; the bump is C-infinity, so this
  // converges fast. Scaling: rho^(k)(tau) = bump^(k)(tau/scale) / (M scale^{k+1}).
  const int q = 256;
  auto weight = [&](long j) {
    double acc = 0.0;
    for (int m = 0; m < 2 * q; ++m) {
      const double sigma = -1.0 + (m + 0.5) / q;
      acc += profile(u * (static_cast<double>(j) + sigma) / scale) * (1.0 - std::abs(sigma));
    }
    return acc * u / q;
  };
  double M = 0.0;  // int bump(tau/scale) dtau = scale * int bump
  {
    const int n = 4096;
    for (int m = 0; m < n; ++m) M += bump(-1.0 + (m + 0.5) * 2.0 / n);
    M *= 2.0 / n * scale;
  }
  T.w.assign(static_cast<std::size_t>(2 * R + 1), 0.0);
  for (long j = 0; j <= R; ++j) {
    const double v = weight(j) / (M * std::pow(scale, order));
    T.w[static_cast<std::size_t>(R + j)] = v;
    T.w[static_cast<std::size_t>(R - j)] = order == 1 ? -v : v;
  }
  if (order == 1) T.w[static_cast<std::size_t>(R)] = 0.0;
  if (order == 0) {
    double mass = 0.0;
    for (double v : T.w) mass += v;
    for (double& v : T.w) v /= mass;
  } else if (order == 1) {
    double m1 = 0.0;
    for (long j = -R; j <= R; ++j) m1 -= T.at(j) * static_cast<double>(j) * u;
    for (double& v : T.w) v /= m1;
  } else {
    double sum = 0.0;
    for (double v : T.w) sum += v;
    // Remove the quadrature residue of the zeroth moment from the centre tap.
    T.w[static_cast<std::size_t>(R)] -= sum;
  }
  return T;
}

/// Dense row-major array over (t, x_1[, x_2]).
struct Field {
  std::vector<std::size_t> ext;
  std::vector<double> v;

  std::size_t stride(std::size_t axis) const {
    std::size_t s = 1;
    for (std::size_t i = ext.size() - 1; i > axis; --i) s *= ext[i];
    return s;
  }
  std::size_t size() const {
    std::size_t s = 1;
    for (auto e : ext) s *= e;
    return s;
  }
};

/// Pads one axis by `pad` nodes on each side. Time (axis 0) uses the even
/// 2-periodic reflection; space uses point reflection through the face value.
inline Field pad_axis(const Field& in, std::size_t axis, std::size_t pad) {
  const std::size_t n = in.ext[axis];
  if (pad > n - 1) throw ResolutionError("extend_data: padding exceeds the domain width");
  Field out;
  out.ext = in.ext;
  out.ext[axis] = n + 2 * pad;
  out.v.resize(out.size());
  const std::size_t st_in = in.stride(axis), st_out = out.stride(axis);
  const std::size_t outer = in.size() / (n * st_in);
  const long period = 2 * static_cast<long>(n - 1);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t inner = 0; inner < st_in; ++inner) {
      auto src = [&](long i) { return in.v[o * n * st_in + static_cast<std::size_t>(i) * st_in + inner]; };
      for (std::size_t k = 0; k < n + 2 * pad; ++k) {
        const long i = static_cast<long>(k) - static_cast<long>(pad);
        double val;
        if (i >= 0 && i < static_cast<long>(n)) {
          val = src(i);
        } else if (axis == 0) {
          long m = ((i % period) + period) % period;
          if (m > static_cast<long>(n - 1)) m = period - m;
          val = src(m);
        } else if (i < 0) {
          val = 2.0 * src(0) - src(-i);
        } else {
          const long last = static_cast<long>(n - 1);
          val = 2.0 * src(last) - src(2 * last - i);
        }
        out.v[o * (n + 2 * pad) * st_out + k * st_out + inner] = val;
      }
    }
  return out;
}

/// Valid-mode convolution along one axis: the extent shrinks by 2 R stride.
inline Field convolve_axis(const Field& in, std::size_t axis, const Taps& T) {
  const std::size_t shrink = static_cast<std::size_t>(2 * T.radius * T.stride);
  if (in.ext[axis] <= shrink) throw ResolutionError("mollify: kernel wider than the padded data");
  Field out;
  out.ext = in.ext;
  out.ext[axis] = in.ext[axis] - shrink;
  out.v.assign(out.size(), 0.0);
  const std::size_t st = in.stride(axis);  // identical in and out for this axis
  const std::size_t n_in = in.ext[axis], n_out = out.ext[axis];
  const std::size_t outer = in.size() / (n_in * st);
  const std::size_t off = static_cast<std::size_t>(T.radius * T.stride);
  for (std::size_t o = 0; o < outer; ++o)
    for (std::size_t k = 0; k < n_out; ++k) {
      double* dst = &out.v[(o * n_out + k) * st];
      for (long j = -T.radius; j <= T.radius; ++j) {
        const double w = T.at(j);
        if (w == 0.0) continue;
        // g(x - tau_j) sits at padded index k + off - j * stride.
        const std::size_t src_k = k + off - static_cast<std::size_t>(j * T.stride);
        const double* src = &in.v[(o * n_in + src_k) * st];
        for (std::size_t i = 0; i < st; ++i) dst[i] += w * src[i];
      }
    }
  return out;
}

inline Field to_field(const GridFunction& g) {
  Field f;
  const auto& gr = g.grid();
  f.ext.push_back(gr.nt());
  for (int i = 0; i < gr.dim(); ++i) f.ext.push_back(gr.nx());
  f.v.assign(g.values().begin(), g.values().end());
  return f;
}

}  // namespace detail

/// Data on an enlarged lattice; the original grid sits at offset (pad_t, pad_x, ...).
struct Extension {
  GridFunction values;
  SpaceTimeGrid original;
  std::size_t pad_x = 0, pad_t = 0;
};

/// Even 2-periodic reflection in t; point reflection g(b + y) = 2 g(b) - g(b - y)
/// across each box face, which keeps affine data affine and C^{1,a} data C^{1,a}.
inline Extension extend_data(const GridFunction& g, std::size_t pad_x, std::size_t pad_t) {
  const auto& gr = g.grid();
  detail::Field f = detail::to_field(g);
  if (pad_t) f = detail::pad_axis(f, 0, pad_t);
  for (int i = 0; i < gr.dim(); ++i)
    if (pad_x) f = detail::pad_axis(f, static_cast<std::size_t>(i + 1), pad_x);
  const double px = static_cast<double>(pad_x) * gr.h(), pt = static_cast<double>(pad_t) * gr.dt();
  SpaceTimeGrid big(gr.dim(), gr.lower() - px, gr.upper() + px, gr.h(), gr.t0() - pt, gr.horizon() + 2 * pt, gr.dt());
  return Extension{GridFunction(big, std::move(f.v)), gr, pad_x, pad_t};
}

struct MollifyResult {
  GridFunction g_eps;
  double sup_diff = 0, sup_dt = 0, sup_d2 = 0, sup_d3 = 0, sup_dxdt = 0;
  double N1 = 0;  // sup|g - g^eps| / eps^kappa
  double N2 = 0;  // (sup|dt g^eps| + sup|D^2 g^eps|) / eps^{kappa-2}
  double N3 = 0;  // (sup|D dt g^eps| + sup|D^3 g^eps|) / eps^{kappa-3}, reported only
  long time_stride = 1;
  long space_radius = 0, time_radius = 0;
};

namespace detail {
inline void check_resolution(const SpaceTimeGrid& g, const MollifierSpec& s) {
  if (s.eps < 2 * g.h() * (1 - 1e-12))
    throw ResolutionError("mollify: eps = " + std::to_string(s.eps) + " is below two space steps");
  if (s.eps * s.eps < 2 * g.dt() * (1 - 1e-12))
    throw ResolutionError("mollify: eps^2 = " + std::to_string(s.eps * s.eps) + " is below two time steps");
}

inline long time_stride(const SpaceTimeGrid& g, const MollifierSpec& s) {
  return std::max(1L, static_cast<long>(std::floor(s.eps * s.eps / (16.0 * g.dt()))));
}

/// Convolves the extension with time taps Tt and space taps Tx[axis].
inline Field convolve(const Extension& e, const Taps& Tt, const std::vector<const Taps*>& Tx) {
  Field f = to_field(e.values);
  f = convolve_axis(f, 0, Tt);
  for (std::size_t i = 0; i < Tx.size(); ++i) f = convolve_axis(f, i + 1, *Tx[i]);
  return f;
}
}  // namespace detail

/// g^eps on the original lattice. The extension must be padded by at least
/// the kernel radius in both directions.
inline MollifyResult smooth(const Extension& ext, const MollifierSpec& spec) {
  const auto& g = ext.original;
  detail::check_resolution(g, spec);
  const long stride = detail::time_stride(g, spec);
  const detail::Taps Tt = detail::make_taps(spec.eps * spec.eps, g.dt(), stride, 0);
  const detail::Taps Tx = detail::make_taps(spec.eps, g.h(), 1, 0);
  if (static_cast<std::size_t>(Tt.radius * stride) != ext.pad_t || static_cast<std::size_t>(Tx.radius) != ext.pad_x)
    throw InputError("smooth: extension padding does not match the kernel radius");
  const detail::Taps Dt = detail::make_taps(spec.eps * spec.eps, g.dt(), stride, 1);
  const detail::Taps Dx = detail::make_taps(spec.eps, g.h(), 1, 1);
  const detail::Taps Ex = detail::make_taps(spec.eps, g.h(), 1, 2);
  const int d = g.dim();

  MollifyResult r;
  r.time_stride = stride;
  r.space_radius = Tx.radius;
  r.time_radius = Tt.radius;
  std::vector<const detail::Taps*> plain(static_cast<std::size_t>(d), &Tx);
  detail::Field ge = detail::convolve(ext, Tt, plain);
  detail::Field gt = detail::convolve(ext, Dt, plain);
  // Hessian components.
  std::vector<detail::Field> hess;
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      std::vector<const detail::Taps*> taps = plain;
      if (i == j) {
        taps[static_cast<std::size_t>(i)] = &Ex;
      } else {
        taps[static_cast<std::size_t>(i)] = &Dx;
        taps[static_cast<std::size_t>(j)] = &Dx;
      }
      hess.push_back(detail::convolve(ext, Tt, taps));
    }

  const std::size_t n = g.size();
  for (std::size_t m = 0; m < n; ++m) {
    r.sup_dt = std::max(r.sup_dt, std::abs(gt.v[m]));
    double op = 0.0;
    if (d == 1) {
      op = std::abs(hess[0].v[m]);
    } else {
      const double a = hess[0].v[m], b = hess[1].v[m], c = hess[2].v[m];
      op = 0.5 * std::abs(a + c) + std::sqrt(0.25 * (a - c) * (a - c) + b * b);
    }
    r.sup_d2 = std::max(r.sup_d2, op);
  }
  // Third-order quantities by central differences of the exact second-order fields.
  for (std::size_t m = 0; m < n; ++m) {
    const std::size_t s = g.spatial_index(m);
    const auto idx = g.multi(s);
    for (int i = 0; i < d; ++i) {
      if (idx[i] == 0 || idx[i] + 1 == g.nx()) continue;
      const std::size_t st = g.stride(i);
      r.sup_dxdt = std::max(r.sup_dxdt, std::abs(gt.v[m + st] - gt.v[m - st]) / (2 * g.h()));
      for (const auto& H : hess) r.sup_d3 = std::max(r.sup_d3, std::abs(H.v[m + st] - H.v[m - st]) / (2 * g.h()));
    }
  }
  // Original values sit at the centre of the extension.
  const auto& eg = ext.values.grid();
  for (std::size_t k = 0; k < g.nt(); ++k)
    for (std::size_t s = 0; s < g.spatial_size(); ++s) {
      auto idx = g.multi(s);
      for (int i = 0; i < d; ++i) idx[i] += ext.pad_x;
      const double orig = ext.values.at(k + ext.pad_t, eg.spatial(idx));
      r.sup_diff = std::max(r.sup_diff, std::abs(orig - ge.v[g.node(k, s)]));
    }
  const double e = spec.eps, kp = spec.kappa;
  r.N1 = r.sup_diff / std::pow(e, kp);
  r.N2 = (r.sup_dt + r.sup_d2) / std::pow(e, kp - 2);
  r.N3 = (r.sup_dxdt + r.sup_d3) / std::pow(e, kp - 3);
  r.g_eps = GridFunction(g, std::move(ge.v));
  return r;
}

/// Extension plus smoothing in one call.
inline MollifyResult mollify(const GridFunction& g, const MollifierSpec& spec) {
  detail::check_resolution(g.grid(), spec);
  const long stride = detail::time_stride(g.grid(), spec);
  const auto Tt = detail::make_taps(spec.eps * spec.eps, g.grid().dt(), stride, 0);
  const auto Tx = detail::make_taps(spec.eps, g.grid().h(), 1, 0);
  return smooth(extend_data(g, static_cast<std::size_t>(Tx.radius), static_cast<std::size_t>(Tt.radius * stride)), spec);
}

struct BarrierReport {
  double N = 0.0;
  std::size_t argmax = 0;
};

/// Smallest N with |u - g^eps| <= N eps^{kappa-2} (1 - |x - x0|^2/R^2)_+^{kappa/2} + N eps^kappa on the grid.
inline BarrierReport barrier_check(const GridFunction& u, const GridFunction& g_eps, const MollifierSpec& spec,
                                   const Point& x0, double R = 1.0) {
  if (!(u.grid() == g_eps.grid())) throw InputError("barrier_check: grids differ");
  const auto& g = u.grid();
  BarrierReport r;
  const double e = spec.eps, kp = spec.kappa;
  std::vector<double> denom(g.spatial_size());
  for (std::size_t s = 0; s < g.spatial_size(); ++s) {
    const double rho = distance(g.point(s), x0, g.dim()) / R;
    denom[s] = std::pow(e, kp - 2) * std::pow(std::max(0.0, 1 - rho * rho), kp / 2) + std::pow(e, kp);
  }
  for (std::size_t n = 0; n < g.size(); ++n) {
    const double q = std::abs(u[n] - g_eps[n]) / denom[g.spatial_index(n)];
    if (q > r.N) r.N = q, r.argmax = n;
  }
  return r;
}

struct MollifyRow {
  double eps = 0, kappa = 0, N1 = 0, N2 = 0, N3 = 0, barrier = 0;
};

/// max/min of a sequence of nonnegative constants: 1 for an all-zero
/// sequence, infinite when zeros mix with positive entries.
inline double spread(const std::vector<double>& xs) {
  if (xs.empty()) throw InputError("spread: empty sequence");
  const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
  if (*hi == 0.0) return 1.0;
  return *lo > 0 ? *hi / *lo : INFINITY;
}

}  // namespace ilab
