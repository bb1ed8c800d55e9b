#pragma once

#include <bit>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "ilab/core.hpp"
#include "ilab/operators.hpp"
#include "ilab/pucci.hpp"

namespace ilab {

/// Boundary and terminal data g(t, x), evaluated on the closed cylinder.
using BoundaryData = std::function<double(double t, const Point& x)>;

/// dt v + max(H[v], P[v] - K) = 0 on (0, T) x box, with v = g on the top
/// slice and on the lateral boundary.
struct ProblemSpec {
  Domain domain = Domain::box(1, 0.0, 1.0);
  double horizon = 1.0;
  FullOperatorSpec H;
  CutoffSpec cutoff;
  BoundaryData g;

  int dim() const { return domain.dim; }

  void validate() const {
    if (domain.kind != Domain::Kind::Box) throw InputError("ProblemSpec: only box domains are supported");
    if (!H.F.valid()) throw InputError("ProblemSpec: missing operator");
    if (H.dim() != domain.dim) throw InputError("ProblemSpec: operator and domain dimensions differ");
    if (domain.dim > 2) throw InputError("ProblemSpec: the solver handles d in {1,2}");
    if (!(horizon > 0)) throw InputError("ProblemSpec: horizon must be positive");
    if (!g) throw InputError("ProblemSpec: missing boundary data");
    if (!(H.envelope.K0 >= 0)) throw InputError("ProblemSpec: K0 must be nonnegative");
    cutoff.validate(H.delta());
  }
};

struct SchemeParams {
  double h = 1.0 / 32;
  /// Output time spacing; 0 stores every CFL step. Each output interval is
  /// split into equal substeps obeying the CFL bound.
  double dt = 0.0;
  double cfl_safety = 0.9;
  /// Random samples for the homogeneity/ellipticity check before a run (0 skips it).
  std::size_t operator_samples = 64;
  std::uint64_t seed = 1;
  /// Quadrature cells per axis for frozen operators; 0 picks 400 (d=1) or 24 (d=2).
  std::size_t frozen_cells = 0;

  static std::string stencil_kind(int dim) { return dim == 1 ? "3-point" : "9-point"; }
};

struct Solution {
  GridFunction v;
  std::size_t substeps = 1;  // CFL steps per output interval
  double dt_step = 0.0;
  double max_rate = 0.0;     // sup |dt v| seen by the update
  double cutoff_fraction = 0.0;  // share of node updates where P - K won
  double wall_seconds = 0.0;
  std::string stencil;
};

/// Lambda = max(2/delta, 1/delta_hat): the largest band entry the scheme may see.
inline double scheme_lambda(const ProblemSpec& p) {
  return std::max(2.0 / p.H.delta(), 1.0 / p.cutoff.delta_hat);
}

/// Largest stable step: sigma / (4 d Lambda / h^2 + d K0 / h + K0). The K0
/// terms cover the Lax-Friedrichs viscosity and value dependence of G.
inline double cfl_dt(const ProblemSpec& p, const SchemeParams& s) {
  const double d = p.dim(), h = s.h, K0 = p.H.envelope.K0;
  if (!(s.cfl_safety > 0) || s.cfl_safety > 1) throw InputError("SchemeParams: CFL safety must lie in (0,1]");
  return s.cfl_safety / (4.0 * d * scheme_lambda(p) / (h * h) + d * K0 / h + K0);
}

inline SpaceTimeGrid solution_grid(const ProblemSpec& p, const SchemeParams& s) {
  double dt = s.dt;
  if (dt <= 0) dt = p.horizon / std::ceil(p.horizon / cfl_dt(p, s));
  return SpaceTimeGrid(p.dim(), p.domain.lower, p.domain.upper, s.h, 0.0, p.horizon, dt);
}

namespace detail {

inline std::string node_label(const SpaceTimeGrid& g, std::size_t s, double t) {
  const Point x = g.point(s);
  std::ostringstream os;
  os << "node " << s << " (t=" << t << ", x=" << x[0];
  if (g.dim() > 1) os << "," << x[1];
  os << ")";
  return os.str();
}

/// Second differences around spatial index s of a slice: one per axis plus,
/// in d = 2, the two diagonal directions.
struct Differences {
  double axis[2] = {0, 0};
  double pp = 0, pm = 0;
  double grad[2] = {0, 0};
};

inline Differences differences(std::span<const double> v, const SpaceTimeGrid& g, std::size_t s) {
  Differences D;
  const double h = g.h(), c = v[s];
  for (int i = 0; i < g.dim(); ++i) {
    const std::size_t st = g.stride(i);
    D.axis[i] = v[s + st] - 2.0 * c + v[s - st];
    D.grad[i] = (v[s + st] - v[s - st]) / (2.0 * h);
  }
  if (g.dim() == 2) {
    const std::size_t a = g.stride(0), b = g.stride(1);
    D.pp = v[s + a + b] - 2.0 * c + v[s - a - b];
    D.pm = v[s + a - b] - 2.0 * c + v[s - a + b];
  }
  return D;
}

/// a : D^2 v through the monotone 3/9-point stencil.
inline double apply_stencil(const SymMat& a, const Differences& D, int dim, double h) {
  if (dim == 1) return a(0, 0) * D.axis[0] / (h * h);
  const double a12 = a(0, 1), m = std::abs(a12);
  const double cross = a12 >= 0 ? D.pp : D.pm;
  return ((a(0, 0) - m) * D.axis[0] + (a(1, 1) - m) * D.axis[1] + m * cross) / (h * h);
}

}  // namespace detail

/// Discrete a : D^2 v at an interior node. Requires diagonal dominance in d = 2.
inline double stencil_apply(const SymMat& a, const GridFunction& v, std::size_t node) {
  const auto& g = v.grid();
  if (node >= g.size()) throw IndexError("stencil_apply: node outside grid");
  if (a.dim() != g.dim()) throw InputError("stencil_apply: dimension mismatch");
  const std::size_t k = g.time_index(node), s = g.spatial_index(node);
  if (g.on_spatial_boundary(s)) throw InputError("stencil_apply: boundary node");
  if (g.dim() == 2 && std::abs(a(0, 1)) > std::min(a(0, 0), a(1, 1)) + 1e-12)
    throw SchemeError("stencil_apply: " + detail::node_label(g, s, g.time(k)) +
                      " matrix not diagonally dominant: " + a.str());
  if (g.dim() > 2) throw InputError("stencil_apply: d <= 2 only");
  return detail::apply_stencil(a, detail::differences(v.slice(k), g, s), g.dim(), g.h());
}

/// One explicit backward step of the cutoff equation on a fixed lattice.
/// Coefficient caches are refreshed only when the operator depends on t.
class Stepper {
 public:
  Stepper(const ProblemSpec& p, const SpaceTimeGrid& grid)
      : p_(p), g_(grid), lambda_(scheme_lambda(p)), P_(HomogOperator::pucci(p.dim(), p.cutoff.band())) {
    for (std::size_t s = 0; s < g_.spatial_size(); ++s) {
      points_.push_back(g_.point(s));
      if (!g_.on_spatial_boundary(s)) interior_.push_back(s);
    }
    fast1d_ = g_.dim() == 1 && !p_.H.game;
  }

  const std::vector<std::size_t>& interior() const { return interior_; }

  /// Discrete max(H, P - K) at interior spatial index s of slice v at time t.
  double rate(std::span<const double> v, std::size_t s, double t, bool* cutoff_won = nullptr) {
    refresh(t);
    const detail::Differences D = detail::differences(v, g_, s);
    const int d = g_.dim();
    const double h = g_.h();
    const Point& x = points_[s];
    auto apply = [&](const SymMat& a) {
      check_matrix(a, s, t);
      return detail::apply_stencil(a, D, d, h);
    };
    std::array<double, kMaxDim> grad{};
    for (int i = 0; i < d; ++i) grad[i] = D.grad[i];

    double H = 0.0;
    if (p_.H.game) {
      H = game_rate(v[s], grad, D, s, t);
    } else {
      if (fast1d_) {
        const double c = D.axis[0] >= 0 ? fplus_[s] : fminus_[s];
        H = c * D.axis[0] / (h * h);
      } else {
        H = p_.H.F.discrete(apply, t, x);
      }
      if (p_.H.G) H += p_.H.G(v[s], grad, t, x);
    }
    const double K0 = p_.H.envelope.K0;
    if (K0 > 0) {
      double lf = 0.0;
      for (int i = 0; i < d; ++i) lf += D.axis[i];
      H += K0 / (2.0 * h) * lf;
    }
    const double P = d == 1 ? pucci_max(SymMat::scalar(1, D.axis[0] / (h * h)), p_.cutoff.band())
                            : P_.discrete([&](const SymMat& a) { return detail::apply_stencil(a, D, d, h); }, t, x);
    const double Pk = P - p_.cutoff.K;
    if (cutoff_won) *cutoff_won = Pk > H;
    return std::max(H, Pk);
  }

  struct Stats {
    double max_rate = 0.0;
    std::size_t cutoff_hits = 0, updates = 0;
  };

  /// v(t - tau) from v(t); lateral boundary values are g(t_new, x).
  std::vector<double> step(std::span<const double> v, double t, double tau, double t_new, Stats* stats = nullptr) {
    std::vector<double> out(v.begin(), v.end());
    for (std::size_t s : interior_) {
      bool won = false;
      const double r = rate(v, s, t, &won);
      const double nv = v[s] + tau * r;
      if (!std::isfinite(nv))
        throw BlowUpError("step_backward: non-finite update at " + detail::node_label(g_, s, t) +
                          " (value " + std::to_string(v[s]) + ", rate " + std::to_string(r) + ")");
      out[s] = nv;
      if (stats) {
        stats->max_rate = std::max(stats->max_rate, std::abs(r));
        stats->cutoff_hits += won ? 1 : 0;
        ++stats->updates;
      }
    }
    for (std::size_t s = 0; s < g_.spatial_size(); ++s)
      if (g_.on_spatial_boundary(s)) out[s] = p_.g(t_new, points_[s]);
    return out;
  }

 private:
  void refresh(double t) {
    const bool tdep = p_.H.game ? p_.H.game->t_dependent : p_.H.F.t_dependent();
    if (cached_ && (!tdep || t == cached_t_)) return;
    cached_ = true;
    cached_t_ = t;
    if (fast1d_) {
      // d = 1 and positive homogeneity: F(X) = X F(1) for X >= 0 and
      // X (-F(-1)) for X < 0.
      fplus_.assign(g_.spatial_size(), 0.0);
      fminus_.assign(g_.spatial_size(), 0.0);
      const SymMat one = SymMat::scalar(1, 1.0), mone = SymMat::scalar(1, -1.0);
      for (std::size_t s : interior_) {
        fplus_[s] = p_.H.F(one, t, points_[s]);
        fminus_[s] = -p_.H.F(mone, t, points_[s]);
        check_matrix(SymMat::scalar(1, fplus_[s]), s, t);
        check_matrix(SymMat::scalar(1, fminus_[s]), s, t);
      }
    } else if (p_.H.game) {
      const auto& G = *p_.H.game;
      game_a_.assign(g_.spatial_size() * G.n_alpha() * G.n_beta(), SymMat(g_.dim()));
      for (std::size_t s : interior_)
        for (std::size_t i = 0; i < G.n_alpha(); ++i)
          for (std::size_t j = 0; j < G.n_beta(); ++j) {
            SymMat a = G.a[i][j](t, points_[s]);
            check_matrix(a, s, t);
            game_a_[(s * G.n_alpha() + i) * G.n_beta() + j] = std::move(a);
          }
    }
  }

  double game_rate(double u0, const std::array<double, kMaxDim>& grad, const detail::Differences& D, std::size_t s,
                   double t) const {
    const auto& G = *p_.H.game;
    const std::size_t na = G.n_alpha(), nb = G.n_beta();
    auto term = [&](std::size_t i, std::size_t j) {
      double v = detail::apply_stencil(game_a_[(s * na + i) * nb + j], D, g_.dim(), g_.h());
      if (!G.G.empty() && G.G[i][j]) v += G.G[i][j](u0, grad, t, points_[s]);
      return v;
    };
    if (!G.inf_first) {
      double sup = -INFINITY;
      for (std::size_t i = 0; i < na; ++i) {
        double inf = INFINITY;
        for (std::size_t j = 0; j < nb; ++j) inf = std::min(inf, term(i, j));
        sup = std::max(sup, inf);
      }
      return sup;
    }
    double inf = INFINITY;
    for (std::size_t j = 0; j < nb; ++j) {
      double sup = -INFINITY;
      for (std::size_t i = 0; i < na; ++i) sup = std::max(sup, term(i, j));
      inf = std::min(inf, sup);
    }
    return inf;
  }

  /// Monotonicity of the update needs 0 <= a_ii <= 2 Lambda and, in d = 2,
  /// |a_12| <= min(a_11, a_22).
  void check_matrix(const SymMat& a, std::size_t s, double t) const {
    const double tol = 1e-12 * (1.0 + lambda_);
    bool ok = a.is_finite();
    for (int i = 0; ok && i < a.dim(); ++i) ok = a(i, i) >= -tol && a(i, i) <= 2.0 * lambda_ + tol;
    if (ok && a.dim() == 2) ok = std::abs(a(0, 1)) <= std::min(a(0, 0), a(1, 1)) + tol;
    if (!ok)
      throw SchemeError("stencil: " + detail::node_label(g_, s, t) + " matrix outside the monotone range: " + a.str());
  }

  const ProblemSpec& p_;
  const SpaceTimeGrid& g_;
  double lambda_;
  HomogOperator P_;
  std::vector<Point> points_;
  std::vector<std::size_t> interior_;
  bool fast1d_ = false;
  bool cached_ = false;
  double cached_t_ = 0.0;
  std::vector<double> fplus_, fminus_;
  std::vector<SymMat> game_a_;
};

/// One explicit step of length tau from the slice at time t (tau must obey the CFL bound).
inline std::vector<double> step_backward(const ProblemSpec& p, const SchemeParams& s, const SpaceTimeGrid& grid,
                                         std::span<const double> v_t, double t, double tau) {
  p.validate();
  if (v_t.size() != grid.spatial_size()) throw InputError("step_backward: slice size mismatch");
  if (!(tau > 0) || tau > cfl_dt(p, s) * (1 + 1e-12)) throw SchemeError("step_backward: step violates the CFL bound");
  Stepper st(p, grid);
  return st.step(v_t, t, tau, t - tau);
}

inline Solution solve(const ProblemSpec& p, const SchemeParams& s) {
  const auto start = std::chrono::steady_clock::now();
  p.validate();
  const SpaceTimeGrid grid = solution_grid(p, s);
  if (s.operator_samples > 0 && !p.H.game) {
    const auto rep = validate_homogeneous(p.H.F, s.operator_samples, s.seed, 0.5 * p.horizon, p.domain.center);
    if (!rep.pass) throw AdmissibilityError("solve: operator fails the homogeneity/ellipticity check");
  }
  const double dt_cfl = cfl_dt(p, s);
  const std::size_t nsub = static_cast<std::size_t>(std::ceil(grid.dt() / dt_cfl * (1 - 1e-12)));
  const double tau = grid.dt() / static_cast<double>(nsub);

  std::vector<double> values(grid.size());
  const std::size_t top = grid.nt() - 1;
  for (std::size_t sp = 0; sp < grid.spatial_size(); ++sp) {
    const double g = p.g(grid.time(top), grid.point(sp));
    if (!std::isfinite(g)) throw InputError("solve: non-finite boundary data at the top slice");
    values[grid.node(top, sp)] = g;
  }
  Stepper st(p, grid);
  Stepper::Stats stats;
  std::vector<double> cur(values.begin() + static_cast<std::ptrdiff_t>(grid.node(top, 0)),
                          values.begin() + static_cast<std::ptrdiff_t>(grid.node(top, 0) + grid.spatial_size()));
  for (std::size_t k = top; k > 0; --k) {
    for (std::size_t j = 0; j < nsub; ++j) {
      const double t = grid.time(k) - static_cast<double>(j) * tau;
      const double t_new = j + 1 == nsub ? grid.time(k - 1) : t - tau;
      cur = st.step(cur, t, tau, t_new, &stats);
    }
    for (std::size_t sp = 0; sp < grid.spatial_size(); ++sp) {
      if (grid.on_spatial_boundary(sp) && !std::isfinite(cur[sp]))
        throw InputError("solve: non-finite boundary data at t=" + std::to_string(grid.time(k - 1)));
      values[grid.node(k - 1, sp)] = cur[sp];
    }
  }
  Solution sol;
  sol.v = GridFunction(grid, std::move(values));
  sol.substeps = nsub;
  sol.dt_step = tau;
  sol.max_rate = stats.max_rate;
  sol.cutoff_fraction = stats.updates ? static_cast<double>(stats.cutoff_hits) / static_cast<double>(stats.updates) : 0.0;
  sol.stencil = SchemeParams::stencil_kind(p.dim());
  sol.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return sol;
}

/// Same problem with F replaced by its ball average around the domain center.
inline Solution solve_frozen(const ProblemSpec& p, double R, const SchemeParams& s) {
  if (p.H.game) throw InputError("solve_frozen: games are not supported");
  if (!(R > 0)) throw InputError("solve_frozen: R must be positive");
  ProblemSpec q = p;
  const std::size_t cells = s.frozen_cells ? s.frozen_cells : (p.dim() == 1 ? 400 : 24);
  q.H.F = frozen_operator(p.H.F, p.domain.center, R, cells);
  return solve(q, s);
}

struct ComparisonReport {
  bool holds = true;
  double max_violation = 0.0;  // max(v1 - v2), clipped at 0
  double min_gap = 0.0;        // min(v2 - v1)
  double max_gap = 0.0;
  explicit operator bool() const { return holds; }
};

/// v1 <= v2 + 1e-12 on every node.
inline ComparisonReport comparison_check(const Solution& a, const Solution& b) {
  if (!(a.v.grid() == b.v.grid())) throw InputError("comparison_check: grids differ");
  ComparisonReport r;
  r.min_gap = INFINITY;
  r.max_gap = -INFINITY;
  for (std::size_t n = 0; n < a.v.grid().size(); ++n) {
    const double gap = b.v[n] - a.v[n];
    r.min_gap = std::min(r.min_gap, gap);
    r.max_gap = std::max(r.max_gap, gap);
    r.max_violation = std::max(r.max_violation, -gap);
  }
  r.holds = r.max_violation <= 1e-12;
  return r;
}

inline double sup_distance(const GridFunction& a, const GridFunction& b) {
  if (!(a.grid() == b.grid())) throw InputError("sup_distance: grids differ");
  double m = 0.0;
  for (std::size_t n = 0; n < a.grid().size(); ++n) m = std::max(m, std::abs(a[n] - b[n]));
  return m;
}

struct KSaturationReport {
  std::vector<double> K;
  std::vector<double> gaps;  // sup |v_{K_i} - v_{K_{i+1}}|
  std::vector<double> cutoff_fraction;
  bool saturated = false;    // last gap <= 1e-10
  long first_saturated = -1; // first i with gaps[i] <= 1e-10
};

inline KSaturationReport k_saturation(const ProblemSpec& p, const SchemeParams& s, const std::vector<double>& Ks) {
  if (Ks.size() < 2) throw InputError("k_saturation: need at least two K values");
  for (std::size_t i = 1; i < Ks.size(); ++i)
    if (!(Ks[i] > Ks[i - 1])) throw InputError("k_saturation: K sequence must increase");
  KSaturationReport r;
  r.K = Ks;
  std::vector<GridFunction> sols;
  for (double K : Ks) {
    ProblemSpec q = p;
    q.cutoff.K = K;
    auto sol = solve(q, s);
    r.cutoff_fraction.push_back(sol.cutoff_fraction);
    sols.push_back(std::move(sol.v));
  }
  for (std::size_t i = 0; i + 1 < sols.size(); ++i) {
    r.gaps.push_back(sup_distance(sols[i], sols[i + 1]));
    if (r.first_saturated < 0 && r.gaps.back() <= 1e-10) r.first_saturated = static_cast<long>(i);
  }
  r.saturated = r.gaps.back() <= 1e-10;
  return r;
}

// ---------------------------------------------------------------------------
// Export
// ---------------------------------------------------------------------------

/// CSV with columns t, x1[, x2], v.
inline void write_csv(const GridFunction& v, std::ostream& os) {
  const auto& g = v.grid();
  os << "t";
  for (int i = 0; i < g.dim(); ++i) os << ",x" << i + 1;
  os << ",v\n";
  os.precision(17);
  for (std::size_t k = 0; k < g.nt(); ++k)
    for (std::size_t s = 0; s < g.spatial_size(); ++s) {
      const Point x = g.point(s);
      os << g.time(k);
      for (int i = 0; i < g.dim(); ++i) os << ',' << x[i];
      os << ',' << v.at(k, s) << '\n';
    }
}

namespace detail {
template <class T>
void put_le(std::ostream& os, T value) {
  unsigned char b[sizeof(T)];
  std::memcpy(b, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  os.write(reinterpret_cast<const char*>(b), sizeof(T));
}
template <class T>
T get_le(std::istream& is) {
  unsigned char b[sizeof(T)];
  if (!is.read(reinterpret_cast<char*>(b), sizeof(T))) throw InputError("raw grid: truncated file");
  if constexpr (std::endian::native == std::endian::big)
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
  T value;
  std::memcpy(&value, b, sizeof(T));
  return value;
}
}  // namespace detail

/// Raw dump: u64 rank, u64 extents (time axis first), f64 h, dt, T, then
/// the values in row-major order. Everything little-endian.
inline void write_raw(const GridFunction& v, std::ostream& os) {
  const auto& g = v.grid();
  detail::put_le<std::uint64_t>(os, static_cast<std::uint64_t>(g.dim() + 1));
  detail::put_le<std::uint64_t>(os, g.nt());
  for (int i = 0; i < g.dim(); ++i) detail::put_le<std::uint64_t>(os, g.nx());
  detail::put_le<double>(os, g.h());
  detail::put_le<double>(os, g.dt());
  detail::put_le<double>(os, g.horizon());
  for (double x : v.values()) detail::put_le<double>(os, x);
}

struct RawGrid {
  std::vector<std::uint64_t> extents;
  double h = 0, dt = 0, T = 0;
  std::vector<double> values;
};

inline RawGrid read_raw(std::istream& is) {
  RawGrid r;
  const auto rank = detail::get_le<std::uint64_t>(is);
  if (rank < 2 || rank > 4) throw InputError("raw grid: bad rank");
  std::uint64_t count = 1;
  for (std::uint64_t i = 0; i < rank; ++i) {
    r.extents.push_back(detail::get_le<std::uint64_t>(is));
    count *= r.extents.back();
  }
  r.h = detail::get_le<double>(is);
  r.dt = detail::get_le<double>(is);
  r.T = detail::get_le<double>(is);
  r.values.resize(count);
  for (auto& x : r.values) x = detail::get_le<double>(is);
  return r;
}

inline void write_raw_file(const GridFunction& v, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("write_raw_file: cannot open " + path);
  write_raw(v, os);
}

}  // namespace ilab
