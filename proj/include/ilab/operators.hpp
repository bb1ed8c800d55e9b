#pragma once

// Operator descriptions F(u'', t, x), the lower-order part G(u, t, x), the
// cutoff max(H, P - K), finite games, and the validators/averages built on them.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ilab/core.hpp"
#include "ilab/pucci.hpp"

namespace ilab {

using CoefficientMap = std::function<SymMat(double t, const Point& x)>;
using HessianFunction = std::function<double(const SymMat& X, double t, const Point& x)>;

/// Positive-homogeneous second-order operator, assembled from linear maps,
/// Pucci operators, pointwise max/min, finite sup-inf families and ball
/// averages. Cheap to copy (shared immutable tree).
class HomogOperator {
 public:
  enum class Kind { Linear, Pucci, Max, Min, SupInf, InfSup, Average, Custom };

  HomogOperator() = default;

  /// Constant coefficient a : u''.
  static HomogOperator linear(const SymMat& a, double delta) {
    auto n = make(Kind::Linear, a.dim(), delta);
    n->a = a;
    return HomogOperator(std::move(n));
  }
  /// a(t, x) : u''. The dependence flags drive fast paths in the solver.
  static HomogOperator linear(int dim, CoefficientMap a, double delta, bool x_dependent = true,
                              bool t_dependent = true) {
    auto n = make(Kind::Linear, dim, delta);
    n->field = std::move(a);
    n->xdep = x_dependent;
    n->tdep = t_dependent;
    return HomogOperator(std::move(n));
  }
  /// Maximal Pucci operator of the band; `minimal` selects the inf instead.
  static HomogOperator pucci(int dim, EllipticityBand band, bool minimal = false) {
    auto n = make(Kind::Pucci, dim, std::min(band.lo, 1.0 / band.hi));
    n->band = band;
    n->minimal = minimal;
    if (dim <= 2) n->family = pucci_lattice_family(dim, band);
    return HomogOperator(std::move(n));
  }
  static HomogOperator max(std::vector<HomogOperator> parts) { return combine(Kind::Max, std::move(parts)); }
  static HomogOperator min(std::vector<HomogOperator> parts) { return combine(Kind::Min, std::move(parts)); }

  /// sup over rows of inf over columns: rows[alpha][beta].
  static HomogOperator supinf(const std::vector<std::vector<HomogOperator>>& rows) {
    return table(Kind::SupInf, rows);
  }
  /// inf over columns of sup over rows, on the same table layout.
  static HomogOperator infsup(const std::vector<std::vector<HomogOperator>>& rows) {
    return table(Kind::InfSup, rows);
  }
  /// Mean of `inner` over the given spatial points (x-independent result).
  static HomogOperator average(HomogOperator inner, std::vector<Point> points) {
    if (points.empty()) throw InputError("HomogOperator::average: no quadrature points");
    auto n = make(Kind::Average, inner.dim(), inner.delta());
    n->tdep = inner.t_dependent();
    n->xdep = false;
    n->points = std::move(points);
    n->kids.push_back(std::move(inner));
    return HomogOperator(std::move(n));
  }
  /// Arbitrary evaluator. No monotone stencil is known for it in d >= 2.
  static HomogOperator custom(int dim, HessianFunction f, double delta, bool x_dependent = true,
                              bool t_dependent = true) {
    auto n = make(Kind::Custom, dim, delta);
    n->custom = std::move(f);
    n->xdep = x_dependent;
    n->tdep = t_dependent;
    return HomogOperator(std::move(n));
  }

  bool valid() const { return static_cast<bool>(node_); }
  Kind kind() const { return need().kind; }
  int dim() const { return need().dim; }
  /// Declared ellipticity constant: the gradient lies in S_delta.
  double delta() const { return need().delta; }
  bool x_dependent() const { return need().xdep; }
  bool t_dependent() const { return need().tdep; }

  double operator()(const SymMat& X, double t, const Point& x) const {
    const Node& n = need();
    if (X.dim() != n.dim) throw InputError("HomogOperator: Hessian dimension mismatch");
    switch (n.kind) {
      case Kind::Linear:
        return inner(coefficient(t, x), X);
      case Kind::Pucci:
        return n.minimal ? pucci_min(X, n.band) : pucci_max(X, n.band);
      case Kind::Max:
      case Kind::Min: {
        double best = n.kids.front()(X, t, x);
        for (std::size_t i = 1; i < n.kids.size(); ++i) {
          const double v = n.kids[i](X, t, x);
          best = n.kind == Kind::Max ? std::max(best, v) : std::min(best, v);
        }
        return best;
      }
      case Kind::SupInf:
      case Kind::InfSup:
        return reduce_table([&](const HomogOperator& k) { return k(X, t, x); });
      case Kind::Average: {
        double s = 0.0;
        for (const Point& y : n.points) s += n.kids.front()(X, t, y);
        return s / static_cast<double>(n.points.size());
      }
      case Kind::Custom:
        return n.custom(X, t, x);
    }
    return 0.0;
  }

  /// Coefficient matrix of a Linear node at (t, x).
  SymMat coefficient(double t, const Point& x) const {
    const Node& n = need();
    if (n.kind != Kind::Linear) throw InputError("HomogOperator::coefficient: not a linear node");
    return n.field ? n.field(t, x) : n.a;
  }

  /// Discrete evaluation through a linear stencil: `apply(a)` must return the
  /// discrete a : D^2 v at the current node. Every node kind is reduced to
  /// max/min/mean combinations of apply calls, so a monotone `apply` yields a
  /// monotone operator. Pucci nodes use a finite family of band matrices that
  /// is diagonally dominant in d = 2 (axis-aligned and 45-degree rotated).
  template <class Apply>
  double discrete(Apply&& apply, double t, const Point& x) const {
    const Node& n = need();
    switch (n.kind) {
      case Kind::Linear:
        return apply(coefficient(t, x));
      case Kind::Pucci: {
        const auto& fam = pucci_family(n);
        double best = apply(fam.front());
        for (std::size_t i = 1; i < fam.size(); ++i) {
          const double v = apply(fam[i]);
          best = n.minimal ? std::min(best, v) : std::max(best, v);
        }
        return best;
      }
      case Kind::Max:
      case Kind::Min: {
        double best = n.kids.front().discrete(apply, t, x);
        for (std::size_t i = 1; i < n.kids.size(); ++i) {
          const double v = n.kids[i].discrete(apply, t, x);
          best = n.kind == Kind::Max ? std::max(best, v) : std::min(best, v);
        }
        return best;
      }
      case Kind::SupInf:
      case Kind::InfSup:
        return reduce_table([&](const HomogOperator& k) { return k.discrete(apply, t, x); });
      case Kind::Average: {
        double s = 0.0;
        for (const Point& y : n.points) s += n.kids.front().discrete(apply, t, y);
        return s / static_cast<double>(n.points.size());
      }
      case Kind::Custom:
        throw SchemeError("HomogOperator: custom evaluator has no monotone stencil");
    }
    return 0.0;
  }

  /// The band matrices used by discrete() for a Pucci node.
  static std::vector<SymMat> pucci_lattice_family(int dim, const EllipticityBand& b) {
    std::vector<SymMat> fam;
    if (dim == 1) {
      fam = {SymMat::diagonal({b.lo}), SymMat::diagonal({b.hi})};
    } else if (dim == 2) {
      for (double c1 : {b.lo, b.hi})
        for (double c2 : {b.lo, b.hi}) fam.push_back(SymMat::diagonal({c1, c2}));
      // Rotations by 45 degrees of diag(lo, hi) and diag(hi, lo).
      const double m = 0.5 * (b.lo + b.hi), r = 0.5 * (b.hi - b.lo);
      fam.push_back(SymMat::from_rows({{m, r}, {r, m}}));
      fam.push_back(SymMat::from_rows({{m, -r}, {-r, m}}));
    } else {
      throw SchemeError("Pucci lattice family only available for d <= 2");
    }
    return fam;
  }

 private:
  struct Node {
    Kind kind = Kind::Linear;
    int dim = 1;
    double delta = 1.0;
    bool xdep = false, tdep = false;
    SymMat a;
    CoefficientMap field;
    EllipticityBand band;
    bool minimal = false;
    std::vector<HomogOperator> kids;
    std::size_t cols = 0;
    std::vector<Point> points;
    HessianFunction custom;
    std::vector<SymMat> family;
  };

  explicit HomogOperator(std::shared_ptr<Node> n) : node_(std::move(n)) {}

  static std::shared_ptr<Node> make(Kind k, int dim, double delta) {
    if (dim < 1 || dim > kMaxDim) throw InputError("HomogOperator: dimension must be in [1,3]");
    if (!(delta > 0 && delta <= 1)) throw InputError("HomogOperator: delta must lie in (0,1]");
    auto n = std::make_shared<Node>();
    n->kind = k;
    n->dim = dim;
    n->delta = delta;
    return n;
  }

  static HomogOperator combine(Kind k, std::vector<HomogOperator> parts) {
    if (parts.empty()) throw InputError("HomogOperator: empty max/min family");
    auto n = make(k, parts.front().dim(), parts.front().delta());
    for (const auto& p : parts) {
      if (p.dim() != n->dim) throw InputError("HomogOperator: mixed dimensions");
      n->delta = std::min(n->delta, p.delta());
      n->xdep = n->xdep || p.x_dependent();
      n->tdep = n->tdep || p.t_dependent();
    }
    n->kids = std::move(parts);
    return HomogOperator(std::move(n));
  }

  static HomogOperator table(Kind k, const std::vector<std::vector<HomogOperator>>& rows) {
    if (rows.empty() || rows.front().empty()) throw InputError("HomogOperator: empty index family");
    std::vector<HomogOperator> flat;
    for (const auto& r : rows) {
      if (r.size() != rows.front().size()) throw InputError("HomogOperator: ragged index family");
      flat.insert(flat.end(), r.begin(), r.end());
    }
    HomogOperator op = combine(k, std::move(flat));
    std::const_pointer_cast<Node>(op.node_)->cols = rows.front().size();
    return op;
  }

  template <class Eval>
  double reduce_table(Eval&& eval) const {
    const Node& n = need();
    const std::size_t rows = n.kids.size() / n.cols;
    if (n.kind == Kind::SupInf) {
      double sup = -std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < rows; ++r) {
        double inf = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < n.cols; ++c) inf = std::min(inf, eval(n.kids[r * n.cols + c]));
        sup = std::max(sup, inf);
      }
      return sup;
    }
    double inf = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < n.cols; ++c) {
      double sup = -std::numeric_limits<double>::infinity();
      for (std::size_t r = 0; r < rows; ++r) sup = std::max(sup, eval(n.kids[r * n.cols + c]));
      inf = std::min(inf, sup);
    }
    return inf;
  }

  static const std::vector<SymMat>& pucci_family(const Node& n) {
    if (n.family.empty()) throw SchemeError("Pucci lattice family only available for d <= 2");
    return n.family;
  }

  const Node& need() const {
    if (!node_) throw InputError("HomogOperator: empty operator");
    return *node_;
  }

  std::shared_ptr<const Node> node_;
};

// ---------------------------------------------------------------------------
// Full operator H = F + G and the cutoff
// ---------------------------------------------------------------------------

/// G(u'_0, u', t, x).
using LowerOrderFunction =
    std::function<double(double u0, const std::array<double, kMaxDim>& grad, double t, const Point& x)>;
using EnvelopeFunction = std::function<double(double t, const Point& x)>;

/// Growth data: |G(u,t,x)| <= K0 |u'| + Hbar(t,x). K0 also bounds the
/// Lipschitz constant of G in (u'_0, u'), which the solver relies on.
struct GrowthEnvelope {
  double K0 = 0.0;
  EnvelopeFunction Hbar;
  /// Modulus of continuity in u'; carried for reports only.
  std::string omega = "linear";

  double hbar(double t, const Point& x) const { return Hbar ? Hbar(t, x) : 0.0; }
};

/// Finite stochastic-differential-game Hamiltonian
///   sup_alpha inf_beta [a^{ab}(t,x) : u'' + G^{ab}(u', t, x)].
struct IsaacsSpec {
  int dim = 1;
  double delta = 1.0;
  std::vector<std::vector<CoefficientMap>> a;  // a[alpha][beta]
  std::vector<std::vector<LowerOrderFunction>> G;  // same shape; empty means G == 0
  GrowthEnvelope envelope;
  bool x_dependent = true;
  bool t_dependent = true;
  /// Reverse the order of play: inf_beta sup_alpha.
  bool inf_first = false;

  std::size_t n_alpha() const { return a.size(); }
  std::size_t n_beta() const { return a.empty() ? 0 : a.front().size(); }
};

struct FullOperatorSpec {
  HomogOperator F;
  LowerOrderFunction G;  // empty means G == 0
  GrowthEnvelope envelope;
  bool G_uses_value = false;
  bool G_uses_gradient = false;
  std::shared_ptr<const IsaacsSpec> game;

  int dim() const { return F.dim(); }
  double delta() const { return F.delta(); }

  double lower_order(const Jet& u, double t, const Point& x) const {
    return G ? G(u.value, u.grad, t, x) : 0.0;
  }

  static FullOperatorSpec second_order(HomogOperator F) {
    FullOperatorSpec s;
    s.F = std::move(F);
    return s;
  }
};

/// The cutoff operator P (maximal Pucci with band [dhat, 1/dhat]) and K.
struct CutoffSpec {
  double delta_hat = 0.125;
  double K = 0.0;

  CutoffSpec() = default;
  CutoffSpec(double dhat, double k) : delta_hat(dhat), K(k) {
    if (!(dhat > 0) || !(k >= 0)) throw InputError("CutoffSpec: need delta_hat > 0 and K >= 0");
  }
  /// The default choice delta_hat = delta / 8.
  static CutoffSpec for_delta(double delta, double K) { return {delta / 8.0, K}; }

  EllipticityBand band() const { return {delta_hat, 1.0 / delta_hat}; }
  double P(const SymMat& X) const { return pucci_max(X, band()); }
  void validate(double delta) const {
    if (!(delta_hat < delta / 4.0)) throw InputError("CutoffSpec: delta_hat must be below delta/4");
  }
};

namespace detail {
inline double check_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw Error(std::string(what) + ": non-finite evaluation");
  return v;
}

inline double game_value(const IsaacsSpec& g, const Jet& u, double t, const Point& x) {
  const std::size_t na = g.n_alpha(), nb = g.n_beta();
  auto term = [&](std::size_t i, std::size_t j) {
    double v = inner(g.a[i][j](t, x), u.hess);
    if (!g.G.empty() && g.G[i][j]) v += g.G[i][j](u.value, u.grad, t, x);
    return v;
  };
  if (!g.inf_first) {
    double sup = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < na; ++i) {
      double inf = std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < nb; ++j) inf = std::min(inf, term(i, j));
      sup = std::max(sup, inf);
    }
    return sup;
  }
  double inf = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < nb; ++j) {
    double sup = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < na; ++i) sup = std::max(sup, term(i, j));
    inf = std::min(inf, sup);
  }
  return inf;
}
}  // namespace detail

/// H(u, t, x) = F(u'', t, x) + G(u, t, x).
inline double eval_H(const FullOperatorSpec& spec, const Jet& u, double t, const Point& x) {
  if (u.dim() != spec.dim()) throw InputError("eval_H: jet dimension mismatch");
  if (spec.game) return detail::check_finite(detail::game_value(*spec.game, u, t, x), "eval_H");
  const double v = spec.F(u.hess, t, x) + spec.lower_order(u, t, x);
  return detail::check_finite(v, "eval_H");
}

/// max(H(u, t, x), P(u'') - K).
inline double eval_cutoff(const FullOperatorSpec& spec, const CutoffSpec& cut, const Jet& u, double t,
                          const Point& x) {
  return std::max(eval_H(spec, u, t, x), detail::check_finite(cut.P(u.hess), "eval_cutoff") - cut.K);
}

/// Splits a finite game into F = supinf a : u'' and G = H - F.
inline FullOperatorSpec build_isaacs(const IsaacsSpec& game) {
  if (game.n_alpha() == 0 || game.n_beta() == 0) throw InputError("build_isaacs: empty index set");
  for (const auto& row : game.a)
    if (row.size() != game.n_beta()) throw InputError("build_isaacs: ragged coefficient table");
  if (!game.G.empty()) {
    if (game.G.size() != game.n_alpha()) throw InputError("build_isaacs: G table shape mismatch");
    for (const auto& row : game.G)
      if (row.size() != game.n_beta()) throw InputError("build_isaacs: G table shape mismatch");
  }
  std::vector<std::vector<HomogOperator>> rows;
  for (const auto& row : game.a) {
    std::vector<HomogOperator> r;
    for (const auto& a : row)
      r.push_back(HomogOperator::linear(game.dim, a, game.delta, game.x_dependent, game.t_dependent));
    rows.push_back(std::move(r));
  }
  FullOperatorSpec spec;
  spec.F = game.inf_first ? HomogOperator::infsup(rows) : HomogOperator::supinf(rows);
  spec.envelope = game.envelope;
  auto shared = std::make_shared<const IsaacsSpec>(game);
  spec.game = shared;
  bool has_G = false;
  for (const auto& row : game.G)
    for (const auto& g : row) has_G = has_G || static_cast<bool>(g);
  if (has_G) {
    HomogOperator F = spec.F;
    spec.G = [shared, F](double u0, const std::array<double, kMaxDim>& grad, double t, const Point& x) {
      // G is the gap between the full game and its second-order part; it is
      // only evaluable together with a Hessian, so this form is used with
      // the zero Hessian (pure lower-order probe).
      Jet u;
      u.value = u0;
      u.grad = grad;
      u.hess = SymMat(shared->dim);
      return detail::game_value(*shared, u, t, x) - F(u.hess, t, x);
    };
    spec.G_uses_gradient = true;
    spec.G_uses_value = true;
  }
  return spec;
}

// ---------------------------------------------------------------------------
// Validators
// ---------------------------------------------------------------------------

/// Random symmetric matrix with i.i.d. standard normal upper-triangle entries.
inline SymMat random_symmat(Rng& rng, int dim, double scale = 1.0) {
  SymMat m(dim);
  for (int i = 0; i < dim; ++i)
    for (int j = i; j < dim; ++j) m.set(i, j, scale * rng.normal());
  return m;
}

struct HomogeneityReport {
  double max_residual = 0.0;
  double min_grad_eigenvalue = std::numeric_limits<double>::infinity();
  double max_grad_eigenvalue = -std::numeric_limits<double>::infinity();
  double fd_step = 1e-6;
  std::size_t samples = 0;
  bool pass = false;
};

/// Finite-difference gradient of X -> F(X, t, x) as a symmetric matrix.
inline SymMat fd_gradient(const HomogOperator& F, const SymMat& X, double t, const Point& x, double eta) {
  const int d = X.dim();
  SymMat g(d);
  for (int i = 0; i < d; ++i)
    for (int j = i; j < d; ++j) {
      SymMat p = X, m = X;
      p.set(i, j, X(i, j) + eta);
      m.set(i, j, X(i, j) - eta);
      const double der = (F(p, t, x) - F(m, t, x)) / (2.0 * eta);
      g.set(i, j, i == j ? der : 0.5 * der);
    }
  return g;
}

/// Samples homogeneity residuals |F(sX) - sF(X)| / (s|X| or 1) for
/// s in {0, 0.5, 2, 10} and the spectra of finite-difference gradients.
inline HomogeneityReport validate_homogeneous(const HomogOperator& F, std::size_t samples, std::uint64_t seed,
                                              double t = 0.0, const Point& x = Point{}) {
  HomogeneityReport rep;
  rep.samples = samples;
  Rng rng(seed);
  const double eta = rep.fd_step;
  for (std::size_t n = 0; n < samples; ++n) {
    const SymMat X = random_symmat(rng, F.dim());
    const double fx = F(X, t, x);
    const double norm = std::max(frobenius_norm(X), 1e-300);
    for (double s : {0.0, 0.5, 2.0, 10.0}) {
      const double r = std::abs(F(s * X, t, x) - s * fx) / std::max(s * norm, 1.0);
      rep.max_residual = std::max(rep.max_residual, r);
    }
    const auto ev = eigenvalues(fd_gradient(F, X, t, x, eta));
    for (int i = 0; i < F.dim(); ++i) {
      rep.min_grad_eigenvalue = std::min(rep.min_grad_eigenvalue, ev[i]);
      rep.max_grad_eigenvalue = std::max(rep.max_grad_eigenvalue, ev[i]);
    }
  }
  const double tol = 10.0 * eta;
  rep.pass = rep.max_residual <= 1e-8 && rep.min_grad_eigenvalue >= F.delta() - tol &&
             rep.max_grad_eigenvalue <= 1.0 / F.delta() + tol;
  return rep;
}

/// Largest violation of F(X) <= F(X + PSD) over samples (<= 0 means monotone).
inline double monotonicity_violation(const HomogOperator& F, std::size_t samples, std::uint64_t seed,
                                     double t = 0.0, const Point& x = Point{}) {
  Rng rng(seed);
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t n = 0; n < samples; ++n) {
    const SymMat X = random_symmat(rng, F.dim());
    const SymMat B = random_symmat(rng, F.dim());
    SymMat psd(F.dim());
    for (int i = 0; i < F.dim(); ++i)
      for (int j = i; j < F.dim(); ++j) {
        double s = 0.0;
        for (int k = 0; k < F.dim(); ++k) s += B(i, k) * B(j, k);
        psd.set(i, j, s);
      }
    worst = std::max(worst, F(X, t, x) - F(X + psd, t, x));
  }
  return worst;
}

struct GrowthReport {
  double max_excess = -std::numeric_limits<double>::infinity();
  std::size_t samples = 0;
  bool pass = false;
};

/// Samples |G(u,t,x)| - K0 |u'| - Hbar(t,x) over random first-order jets and
/// points of [lower, upper]^d x [t0, t1].
inline GrowthReport validate_growth(const FullOperatorSpec& spec, std::size_t samples, std::uint64_t seed,
                                    double lower = -1.0, double upper = 1.0, double t0 = 0.0, double t1 = 1.0) {
  GrowthReport rep;
  rep.samples = samples;
  Rng rng(seed);
  const int d = spec.dim();
  for (std::size_t n = 0; n < samples; ++n) {
    Jet u;
    u.hess = SymMat(d);
    const double scale = std::pow(10.0, rng.uniform(-2.0, 2.0));
    u.value = scale * rng.normal();
    for (int i = 0; i < d; ++i) u.grad[i] = scale * rng.normal();
    Point x{};
    for (int i = 0; i < d; ++i) x[i] = rng.uniform(lower, upper);
    const double t = rng.uniform(t0, t1);
    const double g = spec.game ? eval_H(spec, u, t, x) - spec.F(u.hess, t, x) : spec.lower_order(u, t, x);
    rep.max_excess =
        std::max(rep.max_excess, std::abs(g) - spec.envelope.K0 * u.first_order_norm() - spec.envelope.hbar(t, x));
  }
  rep.pass = rep.max_excess <= 1e-10;
  return rep;
}

// ---------------------------------------------------------------------------
// Averages and oscillations
// ---------------------------------------------------------------------------

/// Midpoints of an n-per-axis cell mesh of [x - R, x + R]^d kept inside B_R(x).
inline std::vector<Point> ball_quadrature(int dim, const Point& x, double R, std::size_t n) {
  if (!(R > 0) || n == 0) throw InputError("ball_quadrature: degenerate mesh");
  if (dim < 1 || dim > 2) throw InputError("ball_quadrature: only d in {1,2}");
  const double w = 2.0 * R / static_cast<double>(n);
  std::vector<Point> pts;
  for (std::size_t i = 0; i < n; ++i) {
    const double yi = x[0] - R + (static_cast<double>(i) + 0.5) * w;
    if (dim == 1) {
      pts.push_back(Point{yi, 0.0, 0.0});
      continue;
    }
    for (std::size_t j = 0; j < n; ++j) {
      const double yj = x[1] - R + (static_cast<double>(j) + 0.5) * w;
      Point p{yi, yj, 0.0};
      if (distance(p, x, 2) <= R) pts.push_back(p);
    }
  }
  if (pts.empty()) throw InputError("ball_quadrature: degenerate mesh");
  return pts;
}

/// Midpoint-rule mean of F(X, s, .) over B_R(x).
inline double average_F_ball(const HomogOperator& F, const SymMat& X, double s, const Point& x, double R,
                             std::size_t cells) {
  const auto pts = ball_quadrature(F.dim(), x, R, cells);
  double acc = 0.0;
  for (const Point& y : pts) acc += F(X, s, y);
  return acc / static_cast<double>(pts.size());
}

/// Fixed net of unit-Frobenius symmetric matrices: {+1, -1} in d = 1, a
/// 32-point Fibonacci sphere in (a11, a22, sqrt(2) a12) in d = 2.
inline std::vector<SymMat> unit_sphere_net(int dim) {
  if (dim == 1) return {SymMat::diagonal({1.0}), SymMat::diagonal({-1.0})};
  if (dim != 2) throw InputError("unit_sphere_net: only d in {1,2}");
  std::vector<SymMat> net;
  const int n = 32;
  const double golden = M_PI * (3.0 - std::sqrt(5.0));
  for (int k = 0; k < n; ++k) {
    const double z = 1.0 - (2.0 * k + 1.0) / n;
    const double r = std::sqrt(1.0 - z * z);
    const double phi = golden * k;
    net.push_back(SymMat::from_rows({{r * std::cos(phi), z / std::sqrt(2.0)}, {z / std::sqrt(2.0), r * std::sin(phi)}}));
  }
  return net;
}

/// Quadrature layout for cylinder functionals: `space_cells` per spatial
/// axis over the ball and `time_cells` over (t, t + R^2).
struct CylinderQuadrature {
  std::size_t space_cells = 200;
  std::size_t time_cells = 8;
};

namespace detail {
template <class Integrand>
double cylinder_mean(const HomogOperator& F, double R, double t, const Point& x, const CylinderQuadrature& q,
                     Integrand&& f) {
  const auto pts = ball_quadrature(F.dim(), x, R, q.space_cells);
  if (q.time_cells == 0) throw InputError("cylinder quadrature: no time cells");
  double acc = 0.0;
  for (std::size_t k = 0; k < q.time_cells; ++k) {
    const double s = t + (static_cast<double>(k) + 0.5) * R * R / static_cast<double>(q.time_cells);
    acc += f(s, pts);
  }
  return acc / static_cast<double>(q.time_cells);
}
}  // namespace detail

/// max over the net of the cylinder mean of |F(X,s,y) - Fbar_{R,x}(X,s)|.
inline double theta_oscillation(const HomogOperator& F, double R, double t, const Point& x,
                                const std::vector<SymMat>& net, const CylinderQuadrature& q = {}) {
  if (!(R > 0)) throw InputError("theta_oscillation: R must be positive");
  if (!F.x_dependent()) return 0.0;
  double best = 0.0;
  for (const SymMat& X : net) {
    const double v = detail::cylinder_mean(F, R, t, x, q, [&](double s, const std::vector<Point>& pts) {
      double mean = 0.0;
      for (const Point& y : pts) mean += F(X, s, y);
      mean /= static_cast<double>(pts.size());
      double dev = 0.0;
      for (const Point& y : pts) dev += std::abs(F(X, s, y) - mean);
      return dev / static_cast<double>(pts.size());
    });
    best = std::max(best, v);
  }
  return best;
}

/// Cylinder mean of the sup over the net of |F - Fbar| / |X|.
inline double mu_oscillation(const HomogOperator& F, double R, double t, const Point& x,
                             const std::vector<SymMat>& net, const CylinderQuadrature& q = {}) {
  if (!(R > 0)) throw InputError("mu_oscillation: R must be positive");
  if (!F.x_dependent()) return 0.0;
  return detail::cylinder_mean(F, R, t, x, q, [&](double s, const std::vector<Point>& pts) {
    std::vector<double> means(net.size(), 0.0);
    for (std::size_t k = 0; k < net.size(); ++k) {
      for (const Point& y : pts) means[k] += F(net[k], s, y);
      means[k] /= static_cast<double>(pts.size());
    }
    double acc = 0.0;
    for (const Point& y : pts) {
      double sup = 0.0;
      for (std::size_t k = 0; k < net.size(); ++k)
        sup = std::max(sup, std::abs(F(net[k], s, y) - means[k]) / frobenius_norm(net[k]));
      acc += sup;
    }
    return acc / static_cast<double>(pts.size());
  });
}

/// Fbar_{R,x}: the ball average of F around x, as an operator.
inline HomogOperator frozen_operator(const HomogOperator& F, const Point& x, double R, std::size_t cells) {
  if (!F.x_dependent()) return F;
  return HomogOperator::average(F, ball_quadrature(F.dim(), x, R, cells));
}

}  // namespace ilab
