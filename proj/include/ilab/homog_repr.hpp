#pragma once

// Sup-inf affine representation of positive-homogeneous functions on the
// symmetric matrices, and the coefficient field a^{ab}(t, x) it induces for
// the cutoff equation.

#include <functional>
#include <vector>

#include "ilab/operators.hpp"

namespace ilab {

/// H : S -> R, positive homogeneous of degree one.
using HomogFunction = std::function<double(const SymMat&)>;

/// Element (f, l) of the affine families B and B0. In the matrix setting
/// l is a symmetric matrix acting through the Frobenius pairing.
struct AffinePair {
  double f = 0.0;
  SymMat l;

  double operator()(const SymMat& u) const { return f + inner(l, u); }
};

/// Matrix instantiation B = {0} x S_delta inside B0 = {0} x S_{delta/2}.
struct EnvelopeSpec {
  int dim = 1;
  double delta = 0.5;

  EnvelopeSpec() = default;
  EnvelopeSpec(int d, double del) : dim(d), delta(del) {
    if (d < 1 || d > kMaxDim) throw InputError("EnvelopeSpec: dimension must be in [1,3]");
    if (!(del > 0 && del <= 1)) throw InputError("EnvelopeSpec: delta must lie in (0,1]");
  }

  EllipticityBand band_B() const { return EllipticityBand::from_delta(delta); }
  EllipticityBand band_B0() const { return {delta / 2.0, 2.0 / delta}; }
  /// sup over B of f + <l, alpha>.
  double sup_B(const SymMat& alpha) const { return pucci_max(alpha, band_B()); }
  double inf_B(const SymMat& alpha) const { return pucci_min(alpha, band_B()); }
  /// Lower bound constant mu in gamma(alpha) >= mu |alpha|.
  double mu() const { return delta / 2.0; }
};

struct ReprCoefficients {
  double lambda = 1.0;
  AffinePair pair;
};

/// Support function of B0: Pucci maximal operator with band [delta/2, 2/delta].
inline double support_G(const EnvelopeSpec& env, const SymMat& alpha) { return pucci_max(alpha, env.band_B0()); }

/// DG(alpha) = Q diag(c) Q^T, c = 2/delta on eigenvalues >= 0, delta/2 below.
inline SymMat grad_G(const EnvelopeSpec& env, const SymMat& alpha) { return pucci_gradient(alpha, env.band_B0()); }

/// gamma(alpha) = G(alpha) - sup_B(f + <l, alpha>).
inline double gamma(const EnvelopeSpec& env, const SymMat& alpha) {
  return std::max(0.0, support_G(env, alpha) - env.sup_B(alpha));
}

namespace detail {
inline void check_query(const EnvelopeSpec& env, const SymMat& alpha, const AffinePair& beta) {
  if (alpha.dim() != env.dim || beta.l.dim() != env.dim) throw InputError("homog_repr: dimension mismatch");
  if (!alpha.is_finite() || !beta.l.is_finite() || !std::isfinite(beta.f))
    throw InputError("homog_repr: non-finite argument");
}

inline double admissible_value(const EnvelopeSpec& env, const HomogFunction& H, const SymMat& alpha, double G) {
  const double h = H(alpha);
  if (!std::isfinite(h)) throw AdmissibilityError("homog_repr: H is not finite at " + alpha.str());
  if (h > G + 1e-9 * std::max(1.0, frobenius_norm(alpha)))
    throw AdmissibilityError("homog_repr: H(alpha) > G(alpha) at alpha = " + alpha.str());
  (void)env;
  return h;
}

inline double lambda_from(double G, double h, double aff) {
  if (aff >= h) return 1.0;  // also covers 0/0
  return std::clamp((G - h) / (G - aff), 0.0, 1.0);
}
}  // namespace detail

/// lambda = 1 ^ (G - H) / (G - (f + <l, alpha>)), with 0/0 = 1.
inline double lambda_coeff(const EnvelopeSpec& env, const HomogFunction& H, const SymMat& alpha,
                           const AffinePair& beta) {
  detail::check_query(env, alpha, beta);
  const double G = support_G(env, alpha);
  const double h = detail::admissible_value(env, H, alpha, G);
  return detail::lambda_from(G, h, beta(alpha));
}

/// (f_H, l_H) = lambda (f, l) + (1 - lambda) (G - <alpha, DG>, DG). The
/// constant part of the second term vanishes by the Euler relation of G.
inline ReprCoefficients repr_pair(const EnvelopeSpec& env, const HomogFunction& H, const SymMat& alpha,
                                  const AffinePair& beta) {
  detail::check_query(env, alpha, beta);
  const double G = support_G(env, alpha);
  const double h = detail::admissible_value(env, H, alpha, G);
  ReprCoefficients rc;
  rc.lambda = detail::lambda_from(G, h, beta(alpha));
  if (rc.lambda == 1.0) {
    rc.pair = beta;
    return rc;
  }
  rc.pair.f = rc.lambda * beta.f;
  rc.pair.l = rc.lambda * beta.l + (1.0 - rc.lambda) * grad_G(env, alpha);
  return rc;
}

/// sup over the alpha-net (with u appended) of inf over the beta-net of
/// f_H + <l_H, u>. Every beta must lie in B.
inline double supinf_eval(const EnvelopeSpec& env, const HomogFunction& H, const SymMat& u,
                          const std::vector<SymMat>& alpha_net, const std::vector<AffinePair>& beta_net) {
  if (alpha_net.empty() || beta_net.empty()) throw InputError("supinf_eval: empty net");
  for (const auto& b : beta_net)
    if (b.f != 0.0 || !in_band(b.l, env.band_B(), 1e-12))
      throw AdmissibilityError("supinf_eval: beta outside B: " + b.l.str());
  double sup = -std::numeric_limits<double>::infinity();
  auto visit = [&](const SymMat& alpha) {
    double inf = std::numeric_limits<double>::infinity();
    for (const auto& b : beta_net) inf = std::min(inf, repr_pair(env, H, alpha, b).pair(u));
    sup = std::max(sup, inf);
  };
  for (const auto& a : alpha_net) visit(a);
  visit(u);
  return sup;
}

struct StabilityGap {
  double f_gap = 0.0;
  double l_gap = 0.0;
  double f_bound = 0.0;
  double l_bound = 0.0;
};

/// Differences of the representation pairs of H and F at (alpha, beta),
/// together with the bounds |H - F| / gamma * |f + <alpha, DG> - G| and
/// |H - F| / gamma * |l - DG| (0/0 = 0). Throws if a bound is violated.
inline StabilityGap stability_gap(const EnvelopeSpec& env, const HomogFunction& H, const HomogFunction& F,
                                  const SymMat& alpha, const AffinePair& beta) {
  const auto rh = repr_pair(env, H, alpha, beta);
  const auto rf = repr_pair(env, F, alpha, beta);
  StabilityGap g;
  g.f_gap = std::abs(rh.pair.f - rf.pair.f);
  g.l_gap = frobenius_norm(rh.pair.l - rf.pair.l);
  const double gam = gamma(env, alpha);
  const double diff = std::abs(H(alpha) - F(alpha));
  const double ratio = diff == 0.0 ? 0.0 : diff / gam;
  const SymMat dg = grad_G(env, alpha);
  g.f_bound = ratio * std::abs(beta.f + inner(alpha, dg) - support_G(env, alpha));
  g.l_bound = ratio * frobenius_norm(beta.l - dg);
  const double slack = 1e-10 * (1.0 + g.l_bound);
  if (g.f_gap > g.f_bound + slack || g.l_gap > g.l_bound + slack) {
    std::ostringstream os;
    os.precision(17);
    os << "stability_gap: bound violated at alpha = " << alpha.str() << " (f " << g.f_gap << " > " << g.f_bound
       << " or l " << g.l_gap << " > " << g.l_bound << ")";
    throw Error(os.str());
  }
  return g;
}

/// Sampled membership test for the admissible class: positive homogeneity
/// and inf_B <= H <= sup_B. Returns the largest violation found.
inline double admissibility_violation(const EnvelopeSpec& env, const HomogFunction& H, std::size_t samples,
                                      std::uint64_t seed) {
  Rng rng(seed);
  double worst = 0.0;
  for (std::size_t n = 0; n < samples; ++n) {
    const SymMat a = random_symmat(rng, env.dim);
    const double h = H(a);
    const double scale = std::max(1.0, frobenius_norm(a));
    worst = std::max(worst, (h - env.sup_B(a)) / scale);
    worst = std::max(worst, (env.inf_B(a) - h) / scale);
    worst = std::max(worst, std::abs(H(2.5 * a) - 2.5 * h) / scale);
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Coefficient field for the cutoff equation
// ---------------------------------------------------------------------------

/// Index family A^ = A1 (unit matrices plus query Hessians) disjoint-union
/// A2 (coefficients of P), paired with a beta-net in S_delta. For alpha in A1
/// a^{ab}(t,x) = l_H with H = F(., t, x); for alpha in A2, a^{ab} = alpha and
/// f_K = -K.
class CoefficientField {
 public:
  CoefficientField(HomogOperator F, CutoffSpec cut, std::vector<SymMat> alpha_net, std::vector<SymMat> beta_net,
                   std::vector<SymMat> a2, double delta)
      : F_(std::move(F)),
        cut_(cut),
        env_(F_.dim(), delta),
        a1_(std::move(alpha_net)),
        beta_(std::move(beta_net)),
        a2_(std::move(a2)) {
    if (a1_.empty() || beta_.empty() || a2_.empty()) throw InputError("CoefficientField: empty index net");
    for (const auto& b : beta_)
      if (!in_band(b, env_.band_B(), 1e-12)) throw AdmissibilityError("CoefficientField: beta outside S_delta");
    for (const auto& a : a2_)
      if (!in_band(a, cut_.band(), 1e-12)) throw AdmissibilityError("CoefficientField: A2 entry outside P's band");
  }

  const EnvelopeSpec& env() const { return env_; }
  const CutoffSpec& cutoff() const { return cut_; }
  const std::vector<SymMat>& alpha_net() const { return a1_; }
  const std::vector<SymMat>& beta_net() const { return beta_; }
  const std::vector<SymMat>& a2() const { return a2_; }
  std::size_t n_alpha() const { return a1_.size() + a2_.size(); }
  std::size_t n_beta() const { return beta_.size(); }
  bool in_A2(std::size_t i) const { return i >= a1_.size(); }

  double f(std::size_t i) const { return in_A2(i) ? -cut_.K : 0.0; }

  double lambda(std::size_t i, std::size_t j, double t, const Point& x) const {
    if (in_A2(i)) return 1.0;
    return lambda_coeff(env_, frozen(t, x), a1_.at(i), AffinePair{0.0, beta_.at(j)});
  }

  SymMat a(std::size_t i, std::size_t j, double t, const Point& x) const {
    if (in_A2(i)) return a2_.at(i - a1_.size());
    return repr_pair(env_, frozen(t, x), a1_.at(i), AffinePair{0.0, beta_.at(j)}).pair.l;
  }

  /// sup over A^ (plus the query in A1 and DP(query) in A2) of inf over B of
  /// f_K + a : X. Agrees with max(F, P - K) when the nets carry the active
  /// coefficients.
  double hamiltonian(const SymMat& X, double t, const Point& x) const {
    const HomogFunction H = frozen(t, x);
    double sup = -std::numeric_limits<double>::infinity();
    auto a1_term = [&](const SymMat& alpha) {
      double inf = std::numeric_limits<double>::infinity();
      for (const auto& b : beta_) inf = std::min(inf, repr_pair(env_, H, alpha, AffinePair{0.0, b}).pair(X));
      sup = std::max(sup, inf);
    };
    for (const auto& al : a1_) a1_term(al);
    a1_term(X);
    for (const auto& al : a2_) sup = std::max(sup, inner(al, X) - cut_.K);
    sup = std::max(sup, inner(pucci_gradient(X, cut_.band()), X) - cut_.K);
    return sup;
  }

  /// Sampled check of the eigenvalue invariants: A1 coefficients in
  /// [delta/2, 2/delta], A2 coefficients in [dhat, 1/dhat]. Returns the
  /// largest excursion outside the respective band.
  double band_violation(const std::vector<std::pair<double, Point>>& points) const {
    double worst = 0.0;
    auto excursion = [](const SymMat& a, const EllipticityBand& b) {
      const auto ev = eigenvalues(a);
      double w = 0.0;
      for (int i = 0; i < a.dim(); ++i) w = std::max({w, b.lo - ev[i], ev[i] - b.hi});
      return w;
    };
    for (const auto& [t, x] : points)
      for (std::size_t i = 0; i < n_alpha(); ++i)
        for (std::size_t j = 0; j < n_beta(); ++j)
          worst = std::max(worst, excursion(a(i, j, t, x), in_A2(i) ? cut_.band() : env_.band_B0()));
    return worst;
  }

  bool same_nets(const CoefficientField& o) const {
    return a1_ == o.a1_ && beta_ == o.beta_ && a2_ == o.a2_ && cut_.K == o.cut_.K &&
           cut_.delta_hat == o.cut_.delta_hat && env_.delta == o.env_.delta && env_.dim == o.env_.dim;
  }

  /// sup over indices of |f - f'| + |a - a'| against another field at (t, x).
  double pointwise_distance(const CoefficientField& o, double t, const Point& x) const {
    const HomogFunction H = frozen(t, x), Hb = o.frozen(t, x);
    double sup = 0.0;
    for (std::size_t i = 0; i < a1_.size(); ++i) {
      for (std::size_t j = 0; j < beta_.size(); ++j) {
        const AffinePair b{0.0, beta_[j]};
        const auto p = repr_pair(env_, H, a1_[i], b).pair;
        const auto q = repr_pair(env_, Hb, a1_[i], b).pair;
        sup = std::max(sup, std::abs(p.f - q.f) + frobenius_norm(p.l - q.l));
      }
    }
    // A2 entries are identical constants in both fields.
    return sup;
  }

  const HomogOperator& op() const { return F_; }

 private:
  HomogFunction frozen(double t, const Point& x) const {
    return [this, t, x](const SymMat& X) { return F_(X, t, x); };
  }

  HomogOperator F_;
  CutoffSpec cut_;
  EnvelopeSpec env_;
  std::vector<SymMat> a1_, beta_, a2_;
};

/// Coefficient set of P used for A2: the band endpoints in d = 1 and
/// rotations by k pi / 16 of diag(lo, hi) and diag(hi, lo) plus the two
/// scalar matrices in d = 2.
inline std::vector<SymMat> pucci_coefficient_set(int dim, const EllipticityBand& b) {
  if (dim == 1) return {SymMat::diagonal({b.lo}), SymMat::diagonal({b.hi})};
  if (dim != 2) throw InputError("pucci_coefficient_set: only d in {1,2}");
  std::vector<SymMat> out{SymMat::scalar(2, b.lo), SymMat::scalar(2, b.hi)};
  for (int k = 0; k < 16; ++k) {
    const double th = M_PI * k / 16.0, c = std::cos(th), s = std::sin(th);
    const double d0 = b.lo, d1 = b.hi;
    out.push_back(SymMat::from_rows({{d0 * c * c + d1 * s * s, (d0 - d1) * c * s},
                                     {(d0 - d1) * c * s, d0 * s * s + d1 * c * c}}));
  }
  return out;
}

/// Builds the field after checking F against the admissible operator class.
inline CoefficientField coeff_field(const HomogOperator& F, const CutoffSpec& cut, std::vector<SymMat> alpha_net,
                                    std::vector<SymMat> beta_net, std::uint64_t seed = 7) {
  cut.validate(F.delta());
  const auto rep = validate_homogeneous(F, 64, seed);
  if (!rep.pass) throw AdmissibilityError("coeff_field: F fails the homogeneity/ellipticity validator");
  return CoefficientField(F, cut, std::move(alpha_net), std::move(beta_net),
                          pucci_coefficient_set(F.dim(), cut.band()), F.delta());
}

/// Evenly spaced scalar matrices c I with c in [delta, 1/delta], plus extras.
inline std::vector<SymMat> scalar_beta_net(int dim, double delta, std::size_t n, std::vector<double> extra = {}) {
  std::vector<SymMat> net;
  for (std::size_t k = 0; k < n; ++k) {
    const double c = delta + (1.0 / delta - delta) * static_cast<double>(k) / static_cast<double>(n - 1);
    net.push_back(SymMat::scalar(dim, c));
  }
  for (double c : extra) net.push_back(SymMat::scalar(dim, c));
  return net;
}

struct CoeffDistance {
  double integral = 0.0;
  double mean = 0.0;
};

/// Midpoint-rule integral (and mean) over a cylinder of the index-sup of the
/// coefficient distance between two fields with identical nets.
inline CoeffDistance coeff_distance_theta(const CoefficientField& a, const CoefficientField& b,
                                          const ParabolicCylinder& cyl, const CylinderQuadrature& q = {}) {
  if (!a.same_nets(b)) throw InputError("coeff_distance_theta: fields use different index nets");
  const auto pts = ball_quadrature(cyl.dim, cyl.x, cyl.radius, q.space_cells);
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < q.time_cells; ++k) {
    const double s = cyl.t + (static_cast<double>(k) + 0.5) * cyl.radius * cyl.radius / q.time_cells;
    for (const Point& y : pts) {
      acc += a.pointwise_distance(b, s, y);
      ++count;
    }
  }
  CoeffDistance out;
  out.mean = count ? acc / static_cast<double>(count) : 0.0;
  out.integral = out.mean * cyl.measure();
  return out;
}

}  // namespace ilab
