#pragma once

// Matrix, jet and lattice primitives shared by every other ilab header.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Eigenvalues>

namespace ilab {

inline constexpr int kMaxDim = 3;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
/// Malformed or out-of-range arguments.
struct InputError : Error {
  using Error::Error;
};
/// A lattice index outside the grid.
struct IndexError : Error {
  using Error::Error;
};
/// An operator outside the admissible class (e.g. H(alpha) > G(alpha)).
struct AdmissibilityError : Error {
  using Error::Error;
};
/// The monotone scheme cannot be applied (CFL, dominance).
struct SchemeError : Error {
  using Error::Error;
};
/// Non-finite values produced while time stepping.
struct BlowUpError : Error {
  using Error::Error;
};
/// Smoothing scale below what the lattice can resolve.
struct ResolutionError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Deterministic random numbers
// ---------------------------------------------------------------------------

/// mt19937_64 with hand-rolled transforms so that streams are identical on
/// every standard library (std distributions are implementation defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(eng_() % n); }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// ---------------------------------------------------------------------------
// Points
// ---------------------------------------------------------------------------

/// Spatial point; only the first `dim` coordinates are meaningful.
using Point = std::array<double, kMaxDim>;

inline double distance(const Point& a, const Point& b, int dim) {
  double s = 0.0;
  for (int i = 0; i < dim; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// SymMat
// ---------------------------------------------------------------------------

/// Symmetric d x d real matrix, 1 <= d <= 3. Symmetry holds by construction:
/// every write goes to both (i,j) and (j,i).
class SymMat {
 public:
  SymMat() = default;
  explicit SymMat(int dim) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim) throw InputError("SymMat: dimension must be in [1,3]");
  }

  static SymMat identity(int dim) { return scalar(dim, 1.0); }
  static SymMat scalar(int dim, double c) {
    SymMat m(dim);
    for (int i = 0; i < dim; ++i) m.set(i, i, c);
    return m;
  }
  static SymMat diagonal(std::initializer_list<double> diag) {
    SymMat m(static_cast<int>(diag.size()));
    int i = 0;
    for (double v : diag) m.set(i, i, v), ++i;
    return m;
  }
  /// Builds from a full row list; the symmetric part (A + A^T)/2 is kept.
  static SymMat from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    SymMat m(static_cast<int>(rows.size()));
    int i = 0;
    std::array<double, 9> full{};
    for (const auto& row : rows) {
      if (static_cast<int>(row.size()) != m.dim_) throw InputError("SymMat::from_rows: ragged rows");
      int j = 0;
      for (double v : row) full[i * 3 + j++] = v;
      ++i;
    }
    for (int r = 0; r < m.dim_; ++r)
      for (int c = r; c < m.dim_; ++c) m.set(r, c, 0.5 * (full[r * 3 + c] + full[c * 3 + r]));
    return m;
  }

  int dim() const { return dim_; }
  double operator()(int i, int j) const { return a_[i * 3 + j]; }
  void set(int i, int j, double v) {
    a_[i * 3 + j] = v;
    a_[j * 3 + i] = v;
  }

  bool is_finite() const {
    for (int i = 0; i < dim_; ++i)
      for (int j = 0; j < dim_; ++j)
        if (!std::isfinite((*this)(i, j))) return false;
    return true;
  }

  double trace() const {
    double s = 0.0;
    for (int i = 0; i < dim_; ++i) s += (*this)(i, i);
    return s;
  }

  SymMat& operator+=(const SymMat& o) {
    check_same(o);
    for (auto k = 0u; k < a_.size(); ++k) a_[k] += o.a_[k];
    return *this;
  }
  SymMat& operator-=(const SymMat& o) {
    check_same(o);
    for (auto k = 0u; k < a_.size(); ++k) a_[k] -= o.a_[k];
    return *this;
  }
  SymMat& operator*=(double s) {
    for (double& v : a_) v *= s;
    return *this;
  }
  friend SymMat operator+(SymMat a, const SymMat& b) { return a += b; }
  friend SymMat operator-(SymMat a, const SymMat& b) { return a -= b; }
  friend SymMat operator*(SymMat a, double s) { return a *= s; }
  friend SymMat operator*(double s, SymMat a) { return a *= s; }
  friend SymMat operator-(SymMat a) { return a *= -1.0; }

  friend bool operator==(const SymMat& a, const SymMat& b) {
    if (a.dim_ != b.dim_) return false;
    for (int i = 0; i < a.dim_; ++i)
      for (int j = 0; j < a.dim_; ++j)
        if (a(i, j) != b(i, j)) return false;
    return true;
  }

  std::string str() const {
    std::ostringstream os;
    os.precision(17);
    os << '[';
    for (int i = 0; i < dim_; ++i) {
      os << (i ? "; " : "");
      for (int j = 0; j < dim_; ++j) os << (j ? ", " : "") << (*this)(i, j);
    }
    os << ']';
    return os.str();
  }

 private:
  void check_same(const SymMat& o) const {
    if (o.dim_ != dim_) throw InputError("SymMat: dimension mismatch");
  }

  int dim_ = 0;
  std::array<double, 9> a_{};
};

/// Frobenius pairing <A, B> = tr(A B).
inline double inner(const SymMat& a, const SymMat& b) {
  if (a.dim() != b.dim()) throw InputError("inner: dimension mismatch");
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i)
    for (int j = 0; j < a.dim(); ++j) s += a(i, j) * b(i, j);
  return s;
}

/// |A| = (tr A A)^{1/2}.
inline double frobenius_norm(const SymMat& a) { return std::sqrt(inner(a, a)); }

// ---------------------------------------------------------------------------
// Spectrum
// ---------------------------------------------------------------------------

/// Eigenvalues sorted descending and the matching orthonormal eigenvectors.
/// vectors[k * 3 + i] is component i of eigenvector k.
struct Spectrum {
  int dim = 0;
  std::array<double, kMaxDim> values{};
  std::array<double, 9> vectors{};

  double vec(int k, int i) const { return vectors[k * 3 + i]; }

  /// Q diag(c) Q^T.
  SymMat compose(std::span<const double> c) const {
    SymMat m(dim);
    for (int i = 0; i < dim; ++i)
      for (int j = i; j < dim; ++j) {
        double s = 0.0;
        for (int k = 0; k < dim; ++k) s += c[k] * vec(k, i) * vec(k, j);
        m.set(i, j, s);
      }
    return m;
  }
  SymMat reconstruct() const { return compose(std::span<const double>(values.data(), dim)); }
};

/// Eigen-decomposition with deterministic conventions: eigenvalues descending,
/// each eigenvector's first component with magnitude above 1e-12 is positive.
inline Spectrum spectral_decompose(const SymMat& a) {
  if (!a.is_finite()) throw InputError("spectral_decompose: non-finite entries");
  const int d = a.dim();
  Spectrum s;
  s.dim = d;
  if (d == 1) {
    s.values[0] = a(0, 0);
    s.vectors[0] = 1.0;
    return s;
  }
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, 3, 3> m(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) m(i, j) = a(i, j);
  Eigen::SelfAdjointEigenSolver<decltype(m)> solver(m);
  if (solver.info() != Eigen::Success) throw InputError("spectral_decompose: eigen solver failed");
  // Eigen returns ascending order.
  for (int k = 0; k < d; ++k) {
    const int src = d - 1 - k;
    s.values[k] = solver.eigenvalues()(src);
    double sign = 1.0;
    for (int i = 0; i < d; ++i) {
      const double c = solver.eigenvectors()(i, src);
      if (std::abs(c) > 1e-12) {
        sign = c > 0 ? 1.0 : -1.0;
        break;
      }
    }
    for (int i = 0; i < d; ++i) s.vectors[k * 3 + i] = sign * solver.eigenvectors()(i, src);
  }
  return s;
}

/// Eigenvalues only, descending. Closed form for d <= 2.
inline std::array<double, kMaxDim> eigenvalues(const SymMat& a) {
  std::array<double, kMaxDim> ev{};
  if (a.dim() == 1) {
    ev[0] = a(0, 0);
  } else if (a.dim() == 2) {
    const double m = 0.5 * (a(0, 0) + a(1, 1));
    const double r = std::hypot(0.5 * (a(0, 0) - a(1, 1)), a(0, 1));
    ev[0] = m + r;
    ev[1] = m - r;
  } else {
    ev = spectral_decompose(a).values;
  }
  return ev;
}

// ---------------------------------------------------------------------------
// Jet
// ---------------------------------------------------------------------------

/// Argument u = (u'_0, u'_1..u'_d, u'') of a Hamiltonian.
struct Jet {
  double value = 0.0;
  std::array<double, kMaxDim> grad{};
  SymMat hess;

  int dim() const { return hess.dim(); }

  /// |u'| over (u'_0, ..., u'_d).
  double first_order_norm() const {
    double s = value * value;
    for (int i = 0; i < dim(); ++i) s += grad[i] * grad[i];
    return std::sqrt(s);
  }
  double grad_norm() const {
    double s = 0.0;
    for (int i = 0; i < dim(); ++i) s += grad[i] * grad[i];
    return std::sqrt(s);
  }
};

// ---------------------------------------------------------------------------
// Cylinders and domains
// ---------------------------------------------------------------------------

/// C_R(t,x) = (t,x) + (0,R^2) x B_R.
struct ParabolicCylinder {
  int dim = 1;
  double t = 0.0;
  Point x{};
  double radius = 1.0;

  /// Open-set membership.
  bool contains(double s, const Point& y) const {
    return s > t && s < t + radius * radius && distance(x, y, dim) < radius;
  }
  /// Closure membership with a relative slack for lattice round-off.
  bool contains_closed(double s, const Point& y, double slack = 1e-12) const {
    const double tol = slack * std::max(1.0, radius);
    return s >= t - tol && s <= t + radius * radius + tol && distance(x, y, dim) <= radius + tol;
  }
  double measure() const {
    const double r = radius;
    const double ball = dim == 1 ? 2 * r : dim == 2 ? M_PI * r * r : 4.0 / 3.0 * M_PI * r * r * r;
    return r * r * ball;
  }
};

/// Spatial domain: the box [lower, upper]^d or the ball B_radius(center).
struct Domain {
  enum class Kind { Box, Ball };
  Kind kind = Kind::Box;
  int dim = 1;
  double lower = 0.0, upper = 1.0;
  Point center{};
  double radius = 1.0;

  static Domain box(int dim, double lower, double upper) {
    Domain d;
    d.kind = Kind::Box;
    d.dim = dim;
    d.lower = lower;
    d.upper = upper;
    d.center.fill(0.0);
    for (int i = 0; i < dim; ++i) d.center[i] = 0.5 * (lower + upper);
    d.radius = 0.5 * (upper - lower);
    return d;
  }
  static Domain ball(int dim, const Point& center, double radius) {
    Domain d;
    d.kind = Kind::Ball;
    d.dim = dim;
    d.center = center;
    d.radius = radius;
    d.lower = center[0] - radius;
    d.upper = center[0] + radius;
    for (int i = 1; i < dim; ++i) {
      d.lower = std::min(d.lower, center[i] - radius);
      d.upper = std::max(d.upper, center[i] + radius);
    }
    return d;
  }
};

/// Euclidean distance from x to the complement of the domain; zero on the
/// boundary and outside.
inline double dist_to_boundary(const Point& x, const Domain& dom) {
  double d = 0.0;
  if (dom.kind == Domain::Kind::Box) {
    d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < dom.dim; ++i) d = std::min({d, x[i] - dom.lower, dom.upper - x[i]});
  } else {
    d = dom.radius - distance(x, dom.center, dom.dim);
  }
  return std::max(d, 0.0);
}

// ---------------------------------------------------------------------------
// Space-time lattice
// ---------------------------------------------------------------------------

/// Uniform lattice over [t0, t0 + horizon] x [lower, upper]^d. Flat node
/// indices are row-major with time outermost and x_d fastest.
class SpaceTimeGrid {
 public:
  SpaceTimeGrid() = default;
  SpaceTimeGrid(int dim, double lower, double upper, double h, double t0, double horizon, double dt)
      : dim_(dim), lower_(lower), upper_(upper), h_(h), t0_(t0), horizon_(horizon), dt_(dt) {
    if (dim < 1 || dim > kMaxDim) throw InputError("SpaceTimeGrid: dimension must be in [1,3]");
    if (!(h > 0) || !(dt > 0)) throw InputError("SpaceTimeGrid: h and dt must be positive");
    if (!(upper > lower) || !(horizon > 0)) throw InputError("SpaceTimeGrid: empty domain");
    nx_ = lattice_count((upper - lower) / h, "space");
    nt_ = lattice_count(horizon / dt, "time");
    if (nx_ < 3) throw InputError("SpaceTimeGrid: need at least 3 nodes per spatial axis");
    if (nt_ < 2) throw InputError("SpaceTimeGrid: need at least 2 time slices");
    spatial_ = 1;
    for (int i = 0; i < dim; ++i) spatial_ *= nx_;
  }

  int dim() const { return dim_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  double h() const { return h_; }
  double t0() const { return t0_; }
  double horizon() const { return horizon_; }
  double dt() const { return dt_; }
  std::size_t nx() const { return nx_; }
  std::size_t nt() const { return nt_; }
  std::size_t spatial_size() const { return spatial_; }
  std::size_t size() const { return spatial_ * nt_; }

  double time(std::size_t k) const { return t0_ + static_cast<double>(k) * dt_; }
  double coord(std::size_t i) const { return lower_ + static_cast<double>(i) * h_; }

  std::size_t node(std::size_t k, std::size_t s) const { return k * spatial_ + s; }
  std::size_t time_index(std::size_t node) const { return node / spatial_; }
  std::size_t spatial_index(std::size_t node) const { return node % spatial_; }

  /// Spatial multi-index -> flat spatial index.
  std::size_t spatial(const std::array<std::size_t, kMaxDim>& idx) const {
    std::size_t s = 0;
    for (int i = 0; i < dim_; ++i) s = s * nx_ + idx[i];
    return s;
  }
  std::array<std::size_t, kMaxDim> multi(std::size_t s) const {
    std::array<std::size_t, kMaxDim> idx{};
    for (int i = dim_ - 1; i >= 0; --i) {
      idx[i] = s % nx_;
      s /= nx_;
    }
    return idx;
  }
  Point point(std::size_t s) const {
    Point p{};
    const auto idx = multi(s);
    for (int i = 0; i < dim_; ++i) p[i] = coord(idx[i]);
    return p;
  }
  /// Stride of axis i in the flat spatial index.
  std::size_t stride(int axis) const {
    std::size_t st = 1;
    for (int i = dim_ - 1; i > axis; --i) st *= nx_;
    return st;
  }
  bool on_spatial_boundary(std::size_t s) const {
    const auto idx = multi(s);
    for (int i = 0; i < dim_; ++i)
      if (idx[i] == 0 || idx[i] + 1 == nx_) return true;
    return false;
  }

  friend bool operator==(const SpaceTimeGrid& a, const SpaceTimeGrid& b) {
    return a.dim_ == b.dim_ && a.lower_ == b.lower_ && a.upper_ == b.upper_ && a.h_ == b.h_ &&
           a.t0_ == b.t0_ && a.horizon_ == b.horizon_ && a.dt_ == b.dt_;
  }

 private:
  static std::size_t lattice_count(double steps, const char* axis) {
    const double r = std::round(steps);
    if (std::abs(r - steps) > 1e-9 * std::max(1.0, steps))
      throw InputError(std::string("SpaceTimeGrid: step does not divide the ") + axis + " extent");
    return static_cast<std::size_t>(r) + 1;
  }

  int dim_ = 1;
  double lower_ = 0.0, upper_ = 1.0, h_ = 0.5, t0_ = 0.0, horizon_ = 1.0, dt_ = 0.5;
  std::size_t nx_ = 3, nt_ = 3, spatial_ = 3;
};

// ---------------------------------------------------------------------------
// GridFunction
// ---------------------------------------------------------------------------

/// One finite value per lattice node. Immutable once built.
class GridFunction {
 public:
  GridFunction() = default;
  GridFunction(SpaceTimeGrid grid, std::vector<double> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size()) throw InputError("GridFunction: value count does not match the grid");
    for (std::size_t n = 0; n < values_.size(); ++n)
      if (!std::isfinite(values_[n]))
        throw InputError("GridFunction: non-finite value at node " + std::to_string(n));
  }

  /// Samples f(t, x) at every node.
  template <class F>
  static GridFunction sample(const SpaceTimeGrid& grid, F&& f) {
    std::vector<double> v(grid.size());
    for (std::size_t k = 0; k < grid.nt(); ++k) {
      const double t = grid.time(k);
      for (std::size_t s = 0; s < grid.spatial_size(); ++s) v[grid.node(k, s)] = f(t, grid.point(s));
    }
    return GridFunction(grid, std::move(v));
  }

  const SpaceTimeGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t node) const { return values_[node]; }
  double at(std::size_t k, std::size_t s) const { return values_[grid_.node(k, s)]; }
  std::span<const double> slice(std::size_t k) const {
    return std::span<const double>(values_).subspan(k * grid_.spatial_size(), grid_.spatial_size());
  }

 private:
  SpaceTimeGrid grid_;
  std::vector<double> values_;
};

/// Every node of the grid, in flat order.
inline std::vector<std::size_t> all_nodes(const SpaceTimeGrid& grid) {
  std::vector<std::size_t> n(grid.size());
  std::iota(n.begin(), n.end(), std::size_t{0});
  return n;
}

/// Nodes whose (t, x) lies in the closure of the cylinder.
inline std::vector<std::size_t> cylinder_nodes(const SpaceTimeGrid& grid, const ParabolicCylinder& c) {
  if (c.dim != grid.dim()) throw InputError("cylinder_nodes: dimension mismatch");
  std::vector<std::size_t> spatial;
  for (std::size_t s = 0; s < grid.spatial_size(); ++s)
    if (c.contains_closed(c.t, grid.point(s))) spatial.push_back(s);
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < grid.nt(); ++k) {
    if (!c.contains_closed(grid.time(k), c.x)) continue;
    for (std::size_t s : spatial) out.push_back(grid.node(k, s));
  }
  return out;
}

enum class StencilMode { Interior, OneSidedAtBoundary };

/// Central-difference jet at a node: O(h^2) gradient, standard second
/// differences on the diagonal and the four-point cross difference off it.
/// All of them are exact on polynomials of degree <= 2. In one-sided mode,
/// boundary nodes use stencils shifted inward.
inline Jet discrete_derivatives(const GridFunction& v, std::size_t node,
                                StencilMode mode = StencilMode::Interior) {
  const auto& g = v.grid();
  if (node >= g.size()) throw IndexError("discrete_derivatives: node " + std::to_string(node) + " outside grid");
  const std::size_t k = g.time_index(node);
  const std::size_t s = g.spatial_index(node);
  const auto idx = g.multi(s);
  const int d = g.dim();
  const double h = g.h();
  if (mode == StencilMode::Interior && g.on_spatial_boundary(s))
    throw InputError("discrete_derivatives: boundary node without one-sided mode");

  // Center of the stencil along each axis (shifted inward at the boundary).
  std::array<std::size_t, kMaxDim> c = idx;
  for (int i = 0; i < d; ++i) {
    if (c[i] == 0) c[i] = 1;
    if (c[i] + 1 == g.nx()) c[i] = g.nx() - 2;
  }
  auto val = [&](std::array<std::size_t, kMaxDim> m) { return v.at(k, g.spatial(m)); };
  auto shifted = [&](int axis, long off) {
    auto m = c;
    m[axis] = static_cast<std::size_t>(static_cast<long>(m[axis]) + off);
    return m;
  };

  Jet jet;
  jet.value = v[node];
  jet.hess = SymMat(d);
  for (int i = 0; i < d; ++i) {
    const double vp = val(shifted(i, 1)), vm = val(shifted(i, -1)), v0 = val(c);
    const double second = (vp - 2.0 * v0 + vm) / (h * h);
    // Gradient at the true node: central value plus the offset times the
    // second derivative keeps exactness on quadratics.
    const double offset = (static_cast<double>(idx[i]) - static_cast<double>(c[i])) * h;
    jet.grad[i] = (vp - vm) / (2.0 * h) + offset * second;
    jet.hess.set(i, i, second);
    for (int j = i + 1; j < d; ++j) {
      auto pp = c, pm = c, mp = c, mm = c;
      pp[i] += 1, pp[j] += 1;
      pm[i] += 1, pm[j] -= 1;
      mp[i] -= 1, mp[j] += 1;
      mm[i] -= 1, mm[j] -= 1;
      jet.hess.set(i, j, (val(pp) - val(pm) - val(mp) + val(mm)) / (4.0 * h * h));
    }
  }
  // Off-axis offsets also shift the gradient through the cross terms.
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      if (j != i) {
        const double offset = (static_cast<double>(idx[j]) - static_cast<double>(c[j])) * h;
        jet.grad[i] += offset * jet.hess(i, j);
      }
  return jet;
}

}  // namespace ilab
