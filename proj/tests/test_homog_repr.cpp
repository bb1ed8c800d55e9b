#include <gtest/gtest.h>

#include "ilab/homog_repr.hpp"

using namespace ilab;

namespace {

SymMat s1(double v) { return SymMat::diagonal({v}); }
AffinePair beta1(double l) { return AffinePair{0.0, s1(l)}; }

const HomogFunction kIdentity = [](const SymMat& a) { return a(0, 0); };
const HomogFunction kTilted = [](const SymMat& a) {
  const double x = a(0, 0);
  return x > 0 ? 0.9 * x : x;  // 0.9 x^+ - x^-
};

// Oracle for G on d = 1: direct scan of a in [delta/2, 2/delta].
double support_oracle_1d(double alpha, double delta) {
  double best = -INFINITY;
  for (int i = 0; i <= 20000; ++i) best = std::max(best, (delta / 2 + (2 / delta - delta / 2) * i / 20000.0) * alpha);
  return best;
}

// Oracle for G on d = 2: scan rotations and endpoint eigenvalues of S_{delta/2}.
double support_oracle_2d(const SymMat& X, double delta) {
  double best = -INFINITY;
  const double lo = delta / 2, hi = 2 / delta;
  for (int k = 0; k < 4000; ++k) {
    const double th = M_PI * k / 4000, c = std::cos(th), s = std::sin(th);
    for (double c1 : {lo, hi})
      for (double c2 : {lo, hi}) {
        const double a11 = c1 * c * c + c2 * s * s, a22 = c1 * s * s + c2 * c * c, a12 = (c1 - c2) * c * s;
        best = std::max(best, a11 * X(0, 0) + a22 * X(1, 1) + 2 * a12 * X(0, 1));
      }
  }
  return best;
}

// Hand formula for lambda in the scalar case.
double lambda_oracle_1d(double G, double h, double aff) {
  if (aff >= h) return 1.0;
  return std::min(1.0, (G - h) / (G - aff));
}

SymMat random_in_band(Rng& rng, int d, const EllipticityBand& b) {
  if (d == 1) return s1(rng.uniform(b.lo, b.hi));
  const double th = rng.uniform(0, M_PI), c = std::cos(th), s = std::sin(th);
  const double c1 = rng.uniform(b.lo, b.hi), c2 = rng.uniform(b.lo, b.hi);
  return SymMat::from_rows({{c1 * c * c + c2 * s * s, (c1 - c2) * c * s}, {(c1 - c2) * c * s, c1 * s * s + c2 * c * c}});
}

struct RandomFamily {
  std::vector<SymMat> slopes;
  bool use_max = true;
  double operator()(const SymMat& a) const {
    double best = use_max ? -INFINITY : INFINITY;
    for (const auto& s : slopes) best = use_max ? std::max(best, inner(s, a)) : std::min(best, inner(s, a));
    return best;
  }
};

RandomFamily random_family(Rng& rng, int d, double delta, bool use_max) {
  RandomFamily f;
  f.use_max = use_max;
  const int n = 1 + static_cast<int>(rng.index(4));
  for (int k = 0; k < n; ++k) f.slopes.push_back(random_in_band(rng, d, EllipticityBand::from_delta(delta)));
  return f;
}

}  // namespace

TEST(SupportG, Examples) {
  const EnvelopeSpec e1(1, 0.5), e2(2, 0.5);
  EXPECT_DOUBLE_EQ(support_G(e1, s1(1.0)), 4.0);
  EXPECT_NEAR(support_oracle_1d(1.0, 0.5), 4.0, 1e-12);
  EXPECT_EQ(support_G(e2, SymMat(2)), 0.0);
  EXPECT_DOUBLE_EQ(support_G(e2, SymMat::diagonal({1, -1})), 3.75);
  EXPECT_NEAR(support_oracle_2d(SymMat::diagonal({1, -1}), 0.5), 3.75, 1e-12);
}

TEST(SupportG, AgreesWithOracleOnRandomInputs) {
  Rng rng(31);
  for (double delta : {0.25, 0.5, 0.9}) {
    const EnvelopeSpec e(2, delta);
    for (int n = 0; n < 10; ++n) {
      const SymMat X = random_symmat(rng, 2);
      EXPECT_NEAR(support_G(e, X), support_oracle_2d(X, delta), 1e-4 * (1 + frobenius_norm(X)));
    }
    for (double a : {-2.0, -0.1, 0.5, 3.0}) EXPECT_NEAR(support_G(EnvelopeSpec(1, delta), s1(a)), support_oracle_1d(a, delta), 1e-12);
  }
}

TEST(GradG, Examples) {
  const EnvelopeSpec e(2, 0.5);
  const SymMat g = grad_G(e, SymMat::diagonal({1, -1}));
  EXPECT_NEAR(g(0, 0), 4.0, 1e-15);
  EXPECT_NEAR(g(1, 1), 0.25, 1e-15);
  EXPECT_NEAR(g(0, 1), 0.0, 1e-15);
  // Finite-difference oracle on support_G.
  const double eta = 1e-6;
  const SymMat X = SymMat::diagonal({1, -1});
  for (int i = 0; i < 2; ++i) {
    SymMat p = X, m = X;
    p.set(i, i, X(i, i) + eta);
    m.set(i, i, X(i, i) - eta);
    EXPECT_NEAR((support_G(e, p) - support_G(e, m)) / (2 * eta), g(i, i), 1e-6);
  }
  EXPECT_EQ(grad_G(e, SymMat::identity(2)), SymMat::scalar(2, 4.0));
  EXPECT_EQ(grad_G(e, SymMat(2)), SymMat::scalar(2, 4.0));
}

TEST(Gamma, Examples) {
  EXPECT_DOUBLE_EQ(gamma(EnvelopeSpec(2, 0.5), SymMat::diagonal({1, -1})), 2.25);
  EXPECT_GE(2.25, 0.25 * std::sqrt(2.0));
  EXPECT_EQ(gamma(EnvelopeSpec(2, 0.5), SymMat(2)), 0.0);
  EXPECT_DOUBLE_EQ(gamma(EnvelopeSpec(1, 0.5), s1(1.0)), 2.0);
}

TEST(Lambda, HandValues) {
  const EnvelopeSpec e(1, 0.5);
  EXPECT_EQ(lambda_coeff(e, kIdentity, s1(0.0), beta1(0.5)), 1.0);
  EXPECT_NEAR(lambda_coeff(e, kIdentity, s1(1.0), beta1(0.5)), 6.0 / 7.0, 1e-15);
  EXPECT_EQ(lambda_coeff(e, kIdentity, s1(1.0), beta1(2.0)), 1.0);
  EXPECT_NEAR(lambda_coeff(e, kIdentity, s1(-1.0), beta1(2.0)), 3.0 / 7.0, 1e-15);
}

TEST(Lambda, RejectsHAboveG) {
  const EnvelopeSpec e(1, 0.5);
  const HomogFunction big = [](const SymMat& a) { return 5.0 * a(0, 0); };
  EXPECT_THROW(lambda_coeff(e, big, s1(1.0), beta1(1.0)), AdmissibilityError);
  EXPECT_THROW(repr_pair(e, big, s1(1.0), beta1(1.0)), AdmissibilityError);
}

TEST(ReprPair, HandValues) {
  const EnvelopeSpec e(1, 0.5);
  const auto r = repr_pair(e, kIdentity, s1(1.0), beta1(0.5));
  EXPECT_NEAR(r.lambda, 6.0 / 7.0, 1e-15);
  EXPECT_NEAR(r.pair.l(0, 0), 1.0, 1e-15);
  EXPECT_EQ(r.pair.f, 0.0);
  EXPECT_NEAR(r.pair(s1(1.0)), kIdentity(s1(1.0)), 1e-15);
  // Minorant branch leaves beta unchanged.
  const auto same = repr_pair(e, kIdentity, s1(1.0), beta1(2.0));
  EXPECT_EQ(same.pair.l, s1(2.0));
  EXPECT_EQ(same.pair.f, 0.0);
  const auto zero = repr_pair(e, kIdentity, s1(0.0), beta1(0.7));
  EXPECT_EQ(zero.lambda, 1.0);
  EXPECT_EQ(zero.pair.l, s1(0.7));
}

TEST(SupInf, HandExampleAtMinusOne) {
  const EnvelopeSpec e(1, 0.5);
  const auto r = repr_pair(e, kIdentity, s1(-1.0), beta1(2.0));
  EXPECT_NEAR(r.lambda, 3.0 / 7.0, 1e-15);
  EXPECT_NEAR(r.pair.l(0, 0), 1.0, 1e-15);
  const std::vector<AffinePair> betas{beta1(0.5), beta1(1.0), beta1(2.0)};
  EXPECT_NEAR(supinf_eval(e, kIdentity, s1(-1.0), {s1(1.0)}, betas), -1.0, 1e-12);
}

TEST(SupInf, LinearHIsReconstructedExactly) {
  const EnvelopeSpec e(2, 0.5);
  const SymMat a = SymMat::from_rows({{1.2, 0.3}, {0.3, 0.8}});
  const HomogFunction H = [a](const SymMat& X) { return inner(a, X); };
  Rng rng(5);
  for (int n = 0; n < 50; ++n) {
    const SymMat u = random_symmat(rng, 2);
    EXPECT_NEAR(supinf_eval(e, H, u, {random_symmat(rng, 2), random_symmat(rng, 2)}, {AffinePair{0, a}}), H(u), 1e-12);
  }
}

TEST(SupInf, ZeroQuery) {
  const EnvelopeSpec e(2, 0.5);
  const HomogFunction H = [](const SymMat& X) { return pucci_min(X, {0.5, 2.0}); };
  Rng rng(6);
  std::vector<SymMat> alphas{random_symmat(rng, 2), random_symmat(rng, 2)};
  std::vector<AffinePair> betas{AffinePair{0, SymMat::scalar(2, 0.5)}, AffinePair{0, SymMat::scalar(2, 2.0)}};
  EXPECT_NEAR(supinf_eval(e, H, SymMat(2), alphas, betas), 0.0, 1e-12);
}

TEST(SupInf, Errors) {
  const EnvelopeSpec e(1, 0.5);
  EXPECT_THROW(supinf_eval(e, kIdentity, s1(1.0), {}, {beta1(1.0)}), InputError);
  EXPECT_THROW(supinf_eval(e, kIdentity, s1(1.0), {s1(1.0)}, {}), InputError);
  EXPECT_THROW(supinf_eval(e, kIdentity, s1(1.0), {s1(1.0)}, {beta1(3.0)}), AdmissibilityError);
}

TEST(Stability, Examples) {
  const EnvelopeSpec e(1, 0.5);
  const auto same = stability_gap(e, kIdentity, kIdentity, s1(1.0), beta1(0.5));
  EXPECT_EQ(same.f_gap, 0.0);
  EXPECT_EQ(same.l_gap, 0.0);
  const auto zero = stability_gap(e, kIdentity, kTilted, s1(0.0), beta1(0.5));
  EXPECT_EQ(zero.f_gap, 0.0);
  EXPECT_EQ(zero.l_gap, 0.0);
  const auto g = stability_gap(e, kIdentity, kTilted, s1(1.0), beta1(0.5));
  const double lamF = std::min(1.0, 3.1 / 3.5), lamH = 3.0 / 3.5;
  EXPECT_EQ(g.f_gap, 0.0);
  EXPECT_NEAR(g.l_gap, std::abs(lamH - lamF) * 3.5, 1e-14);
  EXPECT_NEAR(g.l_gap, 0.1, 1e-14);
  EXPECT_NEAR(g.l_bound, 0.175, 1e-14);
  EXPECT_LE(g.l_gap, g.l_bound);
}

// Randomized invariants over delta in {0.25, 0.5, 0.9} and d in {1, 2}.
TEST(Properties, LambdaMinorantEulerContainmentGamma) {
  Rng rng(77);
  for (double delta : {0.25, 0.5, 0.9}) {
    for (int d : {1, 2}) {
      const EnvelopeSpec e(d, delta);
      for (int n = 0; n < 2000; ++n) {
        const SymMat alpha = random_symmat(rng, d, std::pow(10.0, rng.uniform(-2, 2)));
        const RandomFamily fam = random_family(rng, d, delta, rng.uniform() < 0.5);
        const HomogFunction H = [&fam](const SymMat& X) { return fam(X); };
        const AffinePair beta{0.0, random_in_band(rng, d, e.band_B())};
        const auto r = repr_pair(e, H, alpha, beta);
        const double h = H(alpha);
        ASSERT_GE(r.lambda, 0.0);
        ASSERT_LE(r.lambda, 1.0);
        const double scale = 1.0 + frobenius_norm(alpha);
        ASSERT_EQ(r.lambda == 1.0, beta(alpha) >= h) << "delta " << delta;
        ASSERT_GE(r.pair(alpha), h - 1e-10 * scale);
        if (r.lambda < 1.0) {
          ASSERT_NEAR(r.pair(alpha), h, 1e-10 * scale);
        }
        ASSERT_EQ(r.pair.f, 0.0);
        ASSERT_TRUE(in_band(r.pair.l, e.band_B0(), 1e-10));
        ASSERT_NEAR(inner(alpha, grad_G(e, alpha)), support_G(e, alpha), 1e-10 * scale);
        ASSERT_GE(gamma(e, alpha), e.mu() * frobenius_norm(alpha) - 1e-10);
      }
    }
  }
}

TEST(Properties, ReconstructionOfFiniteFamilies) {
  Rng rng(88);
  for (double delta : {0.25, 0.5, 0.9}) {
    const EnvelopeSpec e(2, delta);
    for (int n = 0; n < 100; ++n) {
      const bool use_max = n % 2 == 0;
      const RandomFamily fam = random_family(rng, 2, delta, use_max);
      const HomogFunction H = [&fam](const SymMat& X) { return fam(X); };
      std::vector<AffinePair> betas;
      for (const auto& s : fam.slopes) betas.push_back({0.0, s});
      std::vector<SymMat> alphas;
      for (int k = 0; k < 6; ++k) alphas.push_back(random_symmat(rng, 2));
      const SymMat u = random_symmat(rng, 2);
      EXPECT_NEAR(supinf_eval(e, H, u, alphas, betas), H(u), 1e-9);
    }
  }
}

TEST(Properties, ReconstructionOfPucci) {
  // For H = sup_B the active slopes are the Pucci maximizers at each alpha.
  Rng rng(89);
  const double delta = 0.5;
  const EnvelopeSpec e(2, delta);
  const HomogFunction H = [&e](const SymMat& X) { return e.sup_B(X); };
  for (int n = 0; n < 100; ++n) {
    std::vector<SymMat> alphas;
    for (int k = 0; k < 5; ++k) alphas.push_back(random_symmat(rng, 2));
    const SymMat u = random_symmat(rng, 2);
    std::vector<AffinePair> betas;
    for (const auto& a : alphas) betas.push_back({0.0, pucci_gradient(a, e.band_B())});
    betas.push_back({0.0, pucci_gradient(u, e.band_B())});
    EXPECT_NEAR(supinf_eval(e, H, u, alphas, betas), H(u), 1e-9);
  }
}

TEST(Properties, StabilityBoundsHold) {
  Rng rng(99);
  int checked = 0;
  for (double delta : {0.25, 0.5, 0.9}) {
    for (int d : {1, 2}) {
      const EnvelopeSpec e(d, delta);
      for (int n = 0; n < 200; ++n) {
        const RandomFamily fh = random_family(rng, d, delta, true);
        const RandomFamily ff = random_family(rng, d, delta, false);
        const HomogFunction H = [&fh](const SymMat& X) { return fh(X); };
        const HomogFunction F = [&ff](const SymMat& X) { return ff(X); };
        const SymMat alpha = random_symmat(rng, d);
        const AffinePair beta{0.0, random_in_band(rng, d, e.band_B())};
        StabilityGap g;
        ASSERT_NO_THROW(g = stability_gap(e, H, F, alpha, beta));
        ASSERT_LE(g.l_gap, g.l_bound + 1e-10 * (1 + g.l_bound));
        ++checked;
      }
    }
  }
  EXPECT_GE(checked, 1000);
}

TEST(Admissibility, ClassMembership) {
  const EnvelopeSpec e(1, 0.5);
  EXPECT_LE(admissibility_violation(e, kIdentity, 200, 1), 1e-12);
  EXPECT_LE(admissibility_violation(e, kTilted, 200, 1), 1e-12);
  const HomogFunction bad = [](const SymMat& a) { return 3.0 * a(0, 0); };
  EXPECT_GT(admissibility_violation(e, bad, 200, 1), 0.0);
}

TEST(CoefficientField, ConstantCoefficientsGiveConstantField) {
  const double delta = 0.5;
  const auto F = HomogOperator::linear(SymMat::from_rows({{1.1, 0.2}, {0.2, 0.9}}), delta);
  const auto field = coeff_field(F, CutoffSpec::for_delta(delta, 2.0), unit_sphere_net(2), scalar_beta_net(2, delta, 5));
  for (std::size_t i = 0; i < field.n_alpha(); ++i)
    for (std::size_t j = 0; j < field.n_beta(); ++j)
      EXPECT_EQ(field.a(i, j, 0.0, Point{0, 0, 0}), field.a(i, j, 0.7, Point{0.3, -0.4, 0}));
  EXPECT_EQ(field.f(field.n_alpha() - 1), -2.0);
  EXPECT_EQ(field.f(0), 0.0);
}

TEST(CoefficientField, ZeroKGivesZeroConstants) {
  const double delta = 0.5;
  const auto field = coeff_field(HomogOperator::pucci(1, EllipticityBand::from_delta(delta)), CutoffSpec::for_delta(delta, 0.0),
                                 unit_sphere_net(1), scalar_beta_net(1, delta, 4));
  for (std::size_t i = 0; i < field.n_alpha(); ++i) EXPECT_EQ(field.f(i), 0.0);
}

TEST(CoefficientField, PiecewiseCoefficientTakesTwoValues) {
  const double delta = 0.5;
  const auto F = HomogOperator::linear(1, [](double, const Point& y) { return s1(y[0] < 0.5 ? 1.0 : 1.5); }, delta, true, false);
  const auto cut = CutoffSpec::for_delta(delta, 3.0);
  const auto field = coeff_field(F, cut, unit_sphere_net(1), scalar_beta_net(1, delta, 6, {1.0, 1.5}));
  const EnvelopeSpec e(1, delta);
  for (std::size_t i = 0; i < 2; ++i) {
    const double alpha = field.alpha_net()[i](0, 0);
    for (std::size_t j = 0; j < field.n_beta(); ++j) {
      const double b = field.beta_net()[j](0, 0);
      for (double c : {1.0, 1.5}) {
        const Point y{c == 1.0 ? 0.25 : 0.75, 0, 0};
        const double G = support_G(e, s1(alpha));
        const double lam = lambda_oracle_1d(G, c * alpha, b * alpha);
        EXPECT_NEAR(field.lambda(i, j, 0, y), lam, 1e-14);
        const double dg = alpha >= 0 ? 4.0 : 0.25;
        EXPECT_NEAR(field.a(i, j, 0, y)(0, 0), lam * b + (1 - lam) * dg, 1e-14);
      }
    }
  }
  // The field reproduces the cutoff Hamiltonian max(F, P - K).
  FullOperatorSpec spec = FullOperatorSpec::second_order(F);
  for (double X : {-3.0, -1.0, -0.2, 0.0, 0.4, 1.0, 2.0, 10.0})
    for (double y : {0.1, 0.9}) {
      Jet j;
      j.hess = s1(X);
      EXPECT_NEAR(field.hamiltonian(s1(X), 0, Point{y, 0, 0}), eval_cutoff(spec, cut, j, 0, Point{y, 0, 0}), 1e-12);
    }
  std::vector<std::pair<double, Point>> pts{{0.0, Point{0.2, 0, 0}}, {0.0, Point{0.8, 0, 0}}};
  EXPECT_LE(field.band_violation(pts), 1e-12);
}

TEST(CoefficientField, HamiltonianMatchesCutoffIn2D) {
  const double delta = 0.5;
  const auto F = HomogOperator::linear(2, [](double, const Point& y) {
    return SymMat::from_rows({{1.0 + 0.2 * (y[0] > 0), 0.1}, {0.1, 0.9}});
  }, delta, true, false);
  auto betas = scalar_beta_net(2, delta, 3);
  betas.push_back(SymMat::from_rows({{1.0, 0.1}, {0.1, 0.9}}));
  betas.push_back(SymMat::from_rows({{1.2, 0.1}, {0.1, 0.9}}));
  const auto cut = CutoffSpec::for_delta(delta, 4.0);
  const auto field = coeff_field(F, cut, unit_sphere_net(2), betas);
  const auto spec = FullOperatorSpec::second_order(F);
  Rng rng(3);
  for (int n = 0; n < 40; ++n) {
    const SymMat X = random_symmat(rng, 2, 3.0);
    const Point y{rng.uniform(-1, 1), rng.uniform(-1, 1), 0};
    Jet j;
    j.hess = X;
    EXPECT_NEAR(field.hamiltonian(X, 0, y), eval_cutoff(spec, cut, j, 0, y), 1e-10);
  }
  std::vector<std::pair<double, Point>> pts{{0.0, Point{-0.5, 0, 0}}, {0.0, Point{0.5, 0.3, 0}}};
  EXPECT_LE(field.band_violation(pts), 1e-10);
}

TEST(CoefficientField, RejectsInadmissibleOperator) {
  const auto sq = HomogOperator::custom(1, [](const SymMat& X, double, const Point&) { return X(0, 0) * X(0, 0); }, 0.5);
  EXPECT_THROW(coeff_field(sq, CutoffSpec::for_delta(0.5, 1), unit_sphere_net(1), scalar_beta_net(1, 0.5, 3)),
               AdmissibilityError);
}

namespace {

HomogOperator wave(double amp) {
  return HomogOperator::linear(1, [amp](double, const Point& y) {
    const double s = std::sin(2 * M_PI * y[0] / 0.1);
    return s1(1.25 + amp * (s > 0 ? 1.0 : -1.0));
  }, 0.5, true, false);
}

// Direct quadrature oracle for the 1D coefficient distance.
double distance_oracle(double amp, const std::vector<double>& betas, int cells, int tcells) {
  const double G[2] = {4.0, -0.25};  // G(+1), G(-1) at delta = 0.5
  const double alphas[2] = {1.0, -1.0}, dg[2] = {4.0, 0.25};
  double acc = 0.0;
  for (int k = 0; k < tcells; ++k)
    for (int i = 0; i < cells; ++i) {
      const double y = -1.0 + (i + 0.5) * 2.0 / cells;
      const double s = std::sin(2 * M_PI * y / 0.1);
      const double c = 1.25 + amp * (s > 0 ? 1.0 : -1.0);
      double sup = 0.0;
      for (int a = 0; a < 2; ++a)
        for (double b : betas) {
          const double lh = lambda_oracle_1d(G[a], c * alphas[a], b * alphas[a]);
          const double lf = lambda_oracle_1d(G[a], 1.25 * alphas[a], b * alphas[a]);
          sup = std::max(sup, std::abs(lh - lf) * std::abs(b - dg[a]));
        }
      acc += sup;
    }
  return acc / (cells * tcells);
}

}  // namespace

TEST(CoeffDistance, Examples) {
  const double delta = 0.5;
  const auto cut = CutoffSpec::for_delta(delta, 1.0);
  const auto betas = scalar_beta_net(1, delta, 7);
  std::vector<double> bvals;
  for (const auto& b : betas) bvals.push_back(b(0, 0));
  const ParabolicCylinder cyl{1, 0.0, Point{0, 0, 0}, 1.0};
  const CylinderQuadrature q{400, 2};
  const auto flat = coeff_field(HomogOperator::linear(s1(1.25), delta), cut, unit_sphere_net(1), betas);
  EXPECT_EQ(coeff_distance_theta(flat, flat, cyl, q).integral, 0.0);

  double prev = INFINITY;
  for (double amp : {0.25, 0.125, 0.0625}) {
    const auto fH = coeff_field(wave(amp), cut, unit_sphere_net(1), betas);
    const auto bar = coeff_field(frozen_operator(wave(amp), Point{0, 0, 0}, 1.0, 400), cut, unit_sphere_net(1), betas);
    const auto dist = coeff_distance_theta(fH, bar, cyl, q);
    EXPECT_GT(dist.mean, 0.0);
    EXPECT_LT(dist.mean, prev);
    EXPECT_NEAR(dist.mean, distance_oracle(amp, bvals, 400, 2), 1e-12);
    EXPECT_NEAR(dist.integral, dist.mean * cyl.measure(), 1e-15);
    prev = dist.mean;
    // Integrated stability bound with N = sup |l - DG| / mu.
    double N = 0.0;
    for (double b : bvals) N = std::max({N, std::abs(b - 4.0), std::abs(b - 0.25)});
    N /= EnvelopeSpec(1, delta).mu();
    const double osc = mu_oscillation(wave(amp), 1.0, 0.0, Point{0, 0, 0}, unit_sphere_net(1), q);
    EXPECT_LE(dist.mean, N * osc + 1e-12);
  }
  const auto other = coeff_field(wave(0.1), cut, unit_sphere_net(1), scalar_beta_net(1, delta, 5));
  EXPECT_THROW(coeff_distance_theta(flat, other, cyl, q), InputError);
}
