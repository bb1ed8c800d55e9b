#pragma once

// Discrete parabolic Hoelder seminorms, the Morrey-type f_kappa norm,
// oscillation, best affine approximation and the measurement routines built
// on them.

#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ilab/core.hpp"

namespace ilab {

/// How pair sups are taken: exact over all pairs up to `exact_limit` items,
/// otherwise over all pairs within a lattice window, dyadic axis offsets and
/// `random_pairs` uniform pairs drawn with `seed`.
struct PairPolicy {
  std::size_t exact_limit = 10000;
  int window = 3;
  std::size_t random_pairs = 100000;
  std::uint64_t seed = 0x5eed5eedULL;
  /// Total pair budget for grouped sups (holder_high) before subsampling.
  std::size_t group_budget = 40000000;
};

struct HolderReport {
  double kappa = 0.0;
  double value = 0.0;
  std::size_t node_a = 0, node_b = 0;
  std::string policy = "exact";
  bool degenerate = false;
  /// holder_high only: the two parts of the seminorm.
  double time_part = 0.0, gradient_part = 0.0;
};

struct AffineFit {
  double c = 0.0;
  std::array<double, kMaxDim> b{};
  double error = 0.0;
  /// Error of the vertex-jet affine function v(vertex) + (x - x0) Dv(vertex).
  double vertex_error = std::numeric_limits<double>::quiet_NaN();

  double operator()(const Point& x, int dim) const {
    double s = c;
    for (int i = 0; i < dim; ++i) s += b[i] * x[i];
    return s;
  }
};

namespace detail {

/// Items with integer lattice coordinates (up to 4 axes) and a dense lookup.
struct LatticeSet {
  int axes = 0;
  std::vector<std::array<int, 4>> coord;
  std::array<int, 4> lo{}, ext{};
  std::vector<int> lookup;

  void finalize() {
    lo.fill(std::numeric_limits<int>::max());
    std::array<int, 4> hi{};
    hi.fill(std::numeric_limits<int>::min());
    for (const auto& c : coord)
      for (int a = 0; a < axes; ++a) lo[a] = std::min(lo[a], c[a]), hi[a] = std::max(hi[a], c[a]);
    std::size_t total = 1;
    for (int a = 0; a < axes; ++a) {
      ext[a] = coord.empty() ? 0 : hi[a] - lo[a] + 1;
      total *= static_cast<std::size_t>(std::max(ext[a], 1));
    }
    lookup.assign(total, -1);
    for (std::size_t i = 0; i < coord.size(); ++i) lookup[flat(coord[i])] = static_cast<int>(i);
  }
  std::size_t flat(const std::array<int, 4>& c) const {
    std::size_t f = 0;
    for (int a = 0; a < axes; ++a) f = f * static_cast<std::size_t>(ext[a]) + static_cast<std::size_t>(c[a] - lo[a]);
    return f;
  }
  int find(const std::array<int, 4>& c) const {
    for (int a = 0; a < axes; ++a)
      if (c[a] < lo[a] || c[a] >= lo[a] + ext[a]) return -1;
    return lookup[flat(c)];
  }
};

struct PairMax {
  double value = 0.0;
  std::size_t a = 0, b = 0;
  bool exact = true;
};

/// sup of ratio(i, j) over pairs of the set under the policy.
template <class Ratio>
PairMax sup_over_pairs(const LatticeSet& set, Ratio&& ratio, const PairPolicy& pol, bool force_exact = false) {
  PairMax best;
  const std::size_t n = set.coord.size();
  auto consider = [&](std::size_t i, std::size_t j) {
    const double r = ratio(i, j);
    if (r > best.value) best.value = r, best.a = i, best.b = j;
  };
  if (n < 2) return best;
  if (force_exact || n <= pol.exact_limit) {
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) consider(i, j);
    return best;
  }
  best.exact = false;
  const int w = pol.window;
  // Window offsets (half space to avoid double counting).
  std::vector<std::array<int, 4>> offsets;
  std::array<int, 4> off{};
  std::function<void(int)> rec = [&](int a) {
    if (a == set.axes) {
      for (int q = 0; q < set.axes; ++q) {
        if (off[q] > 0) {
          offsets.push_back(off);
          break;
        }
        if (off[q] < 0) break;
      }
      return;
    }
    for (int o = -w; o <= w; ++o) off[a] = o, rec(a + 1);
    off[a] = 0;
  };
  rec(0);
  // Dyadic offsets along each axis beyond the window.
  for (int a = 0; a < set.axes; ++a)
    for (int s = 2 * w; s < set.ext[a]; s *= 2) {
      std::array<int, 4> o{};
      o[a] = s;
      offsets.push_back(o);
    }
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& o : offsets) {
      std::array<int, 4> c = set.coord[i];
      for (int a = 0; a < set.axes; ++a) c[a] += o[a];
      const int j = set.find(c);
      if (j >= 0) consider(i, static_cast<std::size_t>(j));
    }
  Rng rng(pol.seed);
  for (std::size_t r = 0; r < pol.random_pairs; ++r) {
    const std::size_t i = rng.index(n), j = rng.index(n);
    if (i != j) consider(i, j);
  }
  return best;
}

/// Lattice coordinates (k, i_1..i_d) of grid nodes.
inline LatticeSet lattice_of(const SpaceTimeGrid& g, const std::vector<std::size_t>& nodes, bool with_time = true) {
  LatticeSet s;
  s.axes = g.dim() + (with_time ? 1 : 0);
  s.coord.reserve(nodes.size());
  for (std::size_t n : nodes) {
    std::array<int, 4> c{};
    int a = 0;
    if (with_time) c[a++] = static_cast<int>(g.time_index(n));
    const auto m = g.multi(g.spatial_index(n));
    for (int i = 0; i < g.dim(); ++i) c[a++] = static_cast<int>(m[i]);
    s.coord.push_back(c);
  }
  s.finalize();
  return s;
}

inline std::vector<std::size_t> unique_sorted(std::vector<std::size_t> nodes) {
  std::sort(nodes.begin(), nodes.end());
  nodes.erase(std::unique(nodes.begin(), nodes.end()), nodes.end());
  return nodes;
}

inline double spatial_distance(const SpaceTimeGrid& g, std::size_t a, std::size_t b) {
  return distance(g.point(g.spatial_index(a)), g.point(g.spatial_index(b)), g.dim());
}

inline double time_distance(const SpaceTimeGrid& g, std::size_t a, std::size_t b) {
  const auto ka = g.time_index(a), kb = g.time_index(b);
  return static_cast<double>(ka > kb ? ka - kb : kb - ka) * g.dt();
}

}  // namespace detail

/// |v(a) - v(b)| / (|t - s|^{kappa/2} + |x - y|^kappa) for two nodes.
inline double holder_ratio(const GridFunction& v, std::size_t a, std::size_t b, double kappa) {
  const auto& g = v.grid();
  const double den = std::pow(detail::time_distance(g, a, b), kappa / 2) +
                     std::pow(detail::spatial_distance(g, a, b), kappa);
  return den > 0 ? std::abs(v[a] - v[b]) / den : 0.0;
}

/// [v]_{C^kappa} for kappa in (0, 1] over the node set.
inline HolderReport holder_low(const GridFunction& v, const std::vector<std::size_t>& region, double kappa,
                               const PairPolicy& pol = {}) {
  if (!(kappa > 0 && kappa <= 1)) throw InputError("holder_low: kappa must lie in (0,1]");
  HolderReport rep;
  rep.kappa = kappa;
  const auto nodes = detail::unique_sorted(region);
  if (nodes.size() < 2) {
    rep.degenerate = true;
    return rep;
  }
  const auto& g = v.grid();
  const auto set = detail::lattice_of(g, nodes);
  // Denominator tables over lattice offsets.
  const double dt = g.dt(), h = g.h();
  std::vector<double> tpow(g.nt());
  for (std::size_t k = 0; k < g.nt(); ++k) tpow[k] = std::pow(static_cast<double>(k) * dt, kappa / 2);
  std::unordered_map<long, double> xpow;
  auto xterm = [&](long sq) {
    auto it = xpow.find(sq);
    if (it != xpow.end()) return it->second;
    const double val = std::pow(std::sqrt(static_cast<double>(sq)) * h, kappa);
    xpow.emplace(sq, val);
    return val;
  };
  std::vector<double> vals(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) vals[i] = v[nodes[i]];
  const int d = g.dim();
  auto ratio = [&](std::size_t i, std::size_t j) {
    const auto& a = set.coord[i];
    const auto& b = set.coord[j];
    long sq = 0;
    for (int q = 1; q <= d; ++q) sq += static_cast<long>(a[q] - b[q]) * (a[q] - b[q]);
    const double den = tpow[static_cast<std::size_t>(std::abs(a[0] - b[0]))] + xterm(sq);
    return std::abs(vals[i] - vals[j]) / den;
  };
  const auto best = detail::sup_over_pairs(set, ratio, pol);
  rep.value = best.value;
  rep.node_a = nodes[best.a];
  rep.node_b = nodes[best.b];
  rep.policy = best.exact ? "exact" : "window+dyadic+random";
  return rep;
}

/// Discrete gradient at a node (central differences; one-sided at the grid
/// boundary), the stencil shared with the solver.
inline std::array<double, kMaxDim> discrete_gradient(const GridFunction& v, std::size_t node) {
  return discrete_derivatives(v, node, StencilMode::OneSidedAtBoundary).grad;
}

/// [v]_{C^kappa} for kappa in (1, 2]: sup over same-x pairs of
/// |v(t,x) - v(s,x)| / |t - s|^{kappa/2} plus sup over same-t pairs of
/// |Dv(t,x) - Dv(t,y)| / |x - y|^{kappa - 1}.
inline HolderReport holder_high(const GridFunction& v, const std::vector<std::size_t>& region, double kappa,
                                const PairPolicy& pol = {}) {
  if (!(kappa > 1 && kappa <= 2)) throw InputError("holder_high: kappa must lie in (1,2]");
  HolderReport rep;
  rep.kappa = kappa;
  const auto nodes = detail::unique_sorted(region);
  const auto& g = v.grid();
  if (nodes.size() < 2) {
    rep.degenerate = true;
    return rep;
  }
  // Group by spatial node (time part) and by time slice (gradient part).
  std::unordered_map<std::size_t, std::vector<std::size_t>> by_x, by_t;
  for (std::size_t n : nodes) {
    by_x[g.spatial_index(n)].push_back(n);
    by_t[g.time_index(n)].push_back(n);
  }
  std::size_t tx_pairs = 0, gr_pairs = 0;
  for (const auto& [k, list] : by_x) tx_pairs += list.size() * list.size() / 2;
  for (const auto& [k, list] : by_t) gr_pairs += list.size() * list.size() / 2;
  const bool exact_t = tx_pairs <= pol.group_budget, exact_g = gr_pairs <= pol.group_budget;
  rep.policy = std::string(exact_t ? "exact" : "window+dyadic+random") + "/" + (exact_g ? "exact" : "window+dyadic+random");

  for (const auto& [s, list] : by_x) {
    if (list.size() < 2) continue;
    const auto set = detail::lattice_of(g, list);
    std::vector<double> vals(list.size());
    for (std::size_t i = 0; i < list.size(); ++i) vals[i] = v[list[i]];
    auto ratio = [&](std::size_t i, std::size_t j) {
      const double dtij = std::abs(set.coord[i][0] - set.coord[j][0]) * g.dt();
      return std::abs(vals[i] - vals[j]) / std::pow(dtij, kappa / 2);
    };
    const auto b = detail::sup_over_pairs(set, ratio, pol, exact_t);
    if (b.value > rep.time_part) rep.time_part = b.value;
  }

  std::size_t ga = 0, gb = 0;
  for (const auto& [k, list] : by_t) {
    if (list.size() < 2) continue;
    const auto set = detail::lattice_of(g, list, false);
    std::vector<std::array<double, kMaxDim>> grads(list.size());
    for (std::size_t i = 0; i < list.size(); ++i) grads[i] = discrete_gradient(v, list[i]);
    auto ratio = [&](std::size_t i, std::size_t j) {
      double s = 0.0;
      for (int q = 0; q < g.dim(); ++q) s += (grads[i][q] - grads[j][q]) * (grads[i][q] - grads[j][q]);
      return std::sqrt(s) / std::pow(detail::spatial_distance(g, list[i], list[j]), kappa - 1);
    };
    const auto b = detail::sup_over_pairs(set, ratio, pol, exact_g);
    if (b.value > rep.gradient_part) rep.gradient_part = b.value, ga = list[b.a], gb = list[b.b];
  }
  rep.value = rep.time_part + rep.gradient_part;
  rep.node_a = ga;
  rep.node_b = gb;
  return rep;
}

/// max - min over the node set.
inline double oscillation(const GridFunction& v, const std::vector<std::size_t>& region) {
  if (region.empty()) throw InputError("oscillation: empty region");
  double lo = INFINITY, hi = -INFINITY;
  for (std::size_t n : region) lo = std::min(lo, v[n]), hi = std::max(hi, v[n]);
  return hi - lo;
}

/// sup over dyadic radii R in {R0, R0/2, ...} (R >= 4h) and vertex nodes of
/// R^{2-kappa} (mean over C_R(t,x) of |f|^{d+1})^{1/(d+1)}, with cylinders
/// clipped to the lattice. `vertex_stride` thins the vertex set per axis.
inline double f_kappa_norm(const GridFunction& f, double kappa, double R0, std::size_t vertex_stride = 1) {
  if (!(kappa > 0 && kappa <= 2)) throw InputError("f_kappa_norm: kappa must lie in (0,2]");
  const auto& g = f.grid();
  const int d = g.dim();
  if (d > 2) throw InputError("f_kappa_norm: only d in {1,2}");
  const std::size_t nt = g.nt(), nx = g.nx(), ns = g.spatial_size();
  // Prefix sums in time per spatial node.
  std::vector<double> pre((nt + 1) * ns, 0.0);
  for (std::size_t k = 0; k < nt; ++k)
    for (std::size_t s = 0; s < ns; ++s)
      pre[(k + 1) * ns + s] = pre[k * ns + s] + std::pow(std::abs(f.at(k, s)), d + 1);
  double best = 0.0;
  const std::size_t stride = std::max<std::size_t>(1, vertex_stride);
  for (double R = R0; R >= 4.0 * g.h() - 1e-12; R /= 2.0) {
    const long steps_t = static_cast<long>(std::floor(R * R / g.dt() + 1e-9));
    const long steps_x = static_cast<long>(std::floor(R / g.h() + 1e-9));
    // Spatial offsets inside the ball.
    std::vector<std::array<long, 2>> offs;
    for (long i = -steps_x; i <= steps_x; ++i)
      for (long j = (d == 2 ? -steps_x : 0); j <= (d == 2 ? steps_x : 0); ++j)
        if ((i * i + j * j) * g.h() * g.h() <= R * R * (1 + 1e-12)) offs.push_back({i, j});
    const double weight = std::pow(R, 2.0 - kappa);
    for (std::size_t k = 0; k < nt; k += stride) {
      const std::size_t k1 = std::min<std::size_t>(nt - 1, k + static_cast<std::size_t>(steps_t));
      for (std::size_t s = 0; s < ns; ++s) {
        const auto m = g.multi(s);
        if ((m[0] % stride) || (d == 2 && m[1] % stride)) continue;
        double acc = 0.0;
        std::size_t count = 0;
        for (const auto& o : offs) {
          const long i = static_cast<long>(m[0]) + o[0];
          const long j = d == 2 ? static_cast<long>(m[1]) + o[1] : 0;
          if (i < 0 || i >= static_cast<long>(nx) || j < 0 || (d == 2 && j >= static_cast<long>(nx))) continue;
          const std::size_t sp = d == 2 ? static_cast<std::size_t>(i) * nx + static_cast<std::size_t>(j)
                                        : static_cast<std::size_t>(i);
          acc += pre[(k1 + 1) * ns + sp] - pre[k * ns + sp];
          count += k1 - k + 1;
        }
        if (count) best = std::max(best, weight * std::pow(acc / static_cast<double>(count), 1.0 / (d + 1)));
      }
    }
  }
  return best;
}

namespace detail {

/// Minimizes a convex function on [lo, hi] by golden-section search.
template <class Fn>
double golden_min(Fn&& fn, double lo, double hi, double* arg, int iters = 120) {
  const double r = (std::sqrt(5.0) - 1) / 2;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = fn(c), fd = fn(d);
  for (int i = 0; i < iters && b - a > 1e-15 * (1 + std::abs(a) + std::abs(b)); ++i) {
    if (fc <= fd) {
      b = d, d = c, fd = fc;
      c = b - r * (b - a), fc = fn(c);
    } else {
      a = c, c = d, fc = fd;
      d = a + r * (b - a), fd = fn(d);
    }
  }
  double best = fc, x = c;
  for (double cand : {a, b, d}) {
    const double fv = fn(cand);
    if (fv < best) best = fv, x = cand;
  }
  if (arg) *arg = x;
  return best;
}

}  // namespace detail

/// Best time-independent affine approximation c + <b, x> in the sup norm over
/// the node set. The objective over b is convex; it is minimized by nested
/// golden-section search inside |b_i| <= 2 osc / width, which contains every
/// minimizer. `vertex`, if given, also evaluates the vertex-jet affine function.
inline AffineFit best_affine(const GridFunction& v, const std::vector<std::size_t>& region,
                             std::optional<std::size_t> vertex = std::nullopt) {
  const auto& g = v.grid();
  const int d = g.dim();
  if (d > 2) throw InputError("best_affine: only d in {1,2}");
  // Per spatial node: max and min over time.
  std::unordered_map<std::size_t, std::pair<double, double>> ext;
  for (std::size_t n : region) {
    const auto s = g.spatial_index(n);
    auto it = ext.find(s);
    if (it == ext.end())
      ext.emplace(s, std::make_pair(v[n], v[n]));
    else
      it->second.first = std::max(it->second.first, v[n]), it->second.second = std::min(it->second.second, v[n]);
  }
  struct Row {
    Point x;
    double hi, lo;
  };
  std::vector<Row> rows;
  for (const auto& [s, mm] : ext) rows.push_back({g.point(s), mm.first, mm.second});
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.x < b.x; });
  // Affine independence of the spatial nodes.
  bool independent = rows.size() >= static_cast<std::size_t>(d + 1);
  if (independent && d == 2) {
    independent = false;
    for (std::size_t i = 2; i < rows.size() && !independent; ++i) {
      const double cr = (rows[1].x[0] - rows[0].x[0]) * (rows[i].x[1] - rows[0].x[1]) -
                        (rows[1].x[1] - rows[0].x[1]) * (rows[i].x[0] - rows[0].x[0]);
      independent = std::abs(cr) > 1e-14;
    }
  }
  if (!independent) throw InputError("best_affine: region spans fewer than d+1 affinely independent nodes");

  double vmax = -INFINITY, vmin = INFINITY;
  std::array<double, 2> xlo{INFINITY, INFINITY}, xhi{-INFINITY, -INFINITY};
  for (const auto& r : rows) {
    vmax = std::max(vmax, r.hi), vmin = std::min(vmin, r.lo);
    for (int i = 0; i < d; ++i) xlo[i] = std::min(xlo[i], r.x[i]), xhi[i] = std::max(xhi[i], r.x[i]);
  }
  const double osc = vmax - vmin;
  // Center coordinates for conditioning.
  Point ctr{};
  for (int i = 0; i < d; ++i) ctr[i] = 0.5 * (xlo[i] + xhi[i]);

  auto spread = [&](double b0, double b1, double* c_out) {
    double up = -INFINITY, dn = INFINITY;
    for (const auto& r : rows) {
      const double lin = b0 * (r.x[0] - ctr[0]) + (d == 2 ? b1 * (r.x[1] - ctr[1]) : 0.0);
      up = std::max(up, r.hi - lin), dn = std::min(dn, r.lo - lin);
    }
    if (c_out) *c_out = 0.5 * (up + dn);
    return 0.5 * (up - dn);
  };

  AffineFit fit;
  double b0 = 0.0, b1 = 0.0;
  if (osc > 0) {
    const double B0 = 2.0 * osc / std::max(xhi[0] - xlo[0], 1e-300);
    if (d == 1) {
      detail::golden_min([&](double b) { return spread(b, 0.0, nullptr); }, -B0, B0, &b0);
    } else {
      const double B1 = 2.0 * osc / std::max(xhi[1] - xlo[1], 1e-300);
      auto inner_min = [&](double bb0, double* arg) {
        return detail::golden_min([&](double bb1) { return spread(bb0, bb1, nullptr); }, -B1, B1, arg, 80);
      };
      detail::golden_min([&](double bb0) { return inner_min(bb0, nullptr); }, -B0, B0, &b0, 80);
      inner_min(b0, &b1);
    }
  }
  double cc = 0.0;
  fit.error = spread(b0, b1, &cc);
  // Never worse than the best constant.
  if (fit.error > 0.5 * osc) {
    b0 = b1 = 0.0;
    fit.error = spread(0.0, 0.0, &cc);
  }
  fit.b[0] = b0;
  fit.b[1] = d == 2 ? b1 : 0.0;
  fit.c = cc - fit.b[0] * ctr[0] - fit.b[1] * ctr[1];

  if (vertex) {
    const auto grad = discrete_gradient(v, *vertex);
    const Point x0 = g.point(g.spatial_index(*vertex));
    double err = 0.0;
    for (std::size_t n : region) {
      const Point x = g.point(g.spatial_index(n));
      double lin = v[*vertex];
      for (int i = 0; i < d; ++i) lin += grad[i] * (x[i] - x0[i]);
      err = std::max(err, std::abs(v[n] - lin));
    }
    fit.vertex_error = err;
  }
  return fit;
}

struct DecayRow {
  double radius = 0.0;
  double error = 0.0;
  double ratio = 0.0;
};

struct DecayReport {
  double value = 0.0;
  std::vector<DecayRow> rows;
  std::vector<std::string> warnings;
};

/// max over radii of (best affine error on C_r(vertex)) / r^kappa. Radii
/// below two lattice steps are skipped with a warning.
inline DecayReport affine_decay_seminorm(const GridFunction& v, double t0, const Point& x0,
                                         const std::vector<double>& radii, double kappa) {
  if (radii.size() < 3) throw InputError("affine_decay_seminorm: need at least 3 radii");
  const auto& g = v.grid();
  DecayReport rep;
  for (double r : radii) {
    if (r < 2.0 * g.h()) {
      rep.warnings.push_back("radius " + std::to_string(r) + " below two lattice steps; skipped");
      continue;
    }
    const ParabolicCylinder cyl{g.dim(), t0, x0, r};
    const auto nodes = cylinder_nodes(g, cyl);
    const double e = best_affine(v, nodes).error;
    rep.rows.push_back({r, e, e / std::pow(r, kappa)});
    rep.value = std::max(rep.value, rep.rows.back().ratio);
  }
  return rep;
}

struct InterpolationReport {
  bool holds = true;
  double lhs = 0.0;
  double rhs = 0.0;
  /// min over slices of (1.05 rhs - lhs); nonnegative when the check holds.
  double margin = INFINITY;
};

/// Per time slice: sup_{B_r1} |Dv| <= eps^g (r2 - r1)^g [Dv]_{C^g(B_r2)}
/// + eps^{-1} (r2 - r1)^{-1} osc_{B_r2} v, with 5% slack.
inline InterpolationReport interpolation_check(const GridFunction& v, const Point& center, double r1, double r2,
                                               double gam, double eps) {
  if (!(r1 > 0 && r2 > r1)) throw InputError("interpolation_check: need 0 < r1 < r2");
  if (!(eps > 0 && eps < 1)) throw InputError("interpolation_check: eps must lie in (0,1)");
  if (!(gam > 0 && gam <= 1)) throw InputError("interpolation_check: gamma must lie in (0,1]");
  const auto& g = v.grid();
  const int d = g.dim();
  std::vector<std::size_t> inner_s, outer_s;
  for (std::size_t s = 0; s < g.spatial_size(); ++s) {
    const double r = distance(g.point(s), center, d);
    if (r <= r2 * (1 + 1e-12)) outer_s.push_back(s);
    if (r <= r1 * (1 + 1e-12)) inner_s.push_back(s);
  }
  if (inner_s.empty()) throw InputError("interpolation_check: inner ball holds no nodes");
  InterpolationReport rep;
  const double gap = r2 - r1;
  for (std::size_t k = 0; k < g.nt(); ++k) {
    std::vector<std::array<double, kMaxDim>> grads(outer_s.size());
    double lo = INFINITY, hi = -INFINITY;
    for (std::size_t i = 0; i < outer_s.size(); ++i) {
      grads[i] = discrete_gradient(v, g.node(k, outer_s[i]));
      lo = std::min(lo, v.at(k, outer_s[i])), hi = std::max(hi, v.at(k, outer_s[i]));
    }
    double semi = 0.0;
    for (std::size_t i = 0; i < outer_s.size(); ++i)
      for (std::size_t j = i + 1; j < outer_s.size(); ++j) {
        double s = 0.0;
        for (int q = 0; q < d; ++q) s += (grads[i][q] - grads[j][q]) * (grads[i][q] - grads[j][q]);
        semi = std::max(semi, std::sqrt(s) / std::pow(distance(g.point(outer_s[i]), g.point(outer_s[j]), d), gam));
      }
    double lhs = 0.0;
    for (std::size_t s : inner_s) {
      const auto gr = discrete_gradient(v, g.node(k, s));
      double n2 = 0.0;
      for (int q = 0; q < d; ++q) n2 += gr[q] * gr[q];
      lhs = std::max(lhs, std::sqrt(n2));
    }
    const double rhs = std::pow(eps, gam) * std::pow(gap, gam) * semi + (hi - lo) / (eps * gap);
    const double margin = 1.05 * rhs - lhs;
    if (margin < rep.margin) rep.margin = margin, rep.lhs = lhs, rep.rhs = rhs;
  }
  rep.holds = rep.margin >= 0;
  return rep;
}

}  // namespace ilab
