#include <gtest/gtest.h>

#include "ilab/operators.hpp"

using namespace ilab;

namespace {

const Point kOrigin{0, 0, 0};

Jet jet_of(const SymMat& X, double u0 = 0.0, std::array<double, 3> grad = {0, 0, 0}) {
  Jet j;
  j.value = u0;
  j.grad = grad;
  j.hess = X;
  return j;
}

// c(y) = base + amp * sign(sin(2 pi y / ell)).
HomogOperator square_wave_operator(double base, double amp, double ell, double delta) {
  return HomogOperator::linear(
      1,
      [=](double, const Point& y) {
        const double s = std::sin(2.0 * M_PI * y[0] / ell);
        return SymMat::diagonal({base + amp * (s > 0 ? 1.0 : s < 0 ? -1.0 : 0.0)});
      },
      delta, true, false);
}

// Independent oracle for theta on a 1D linear operator: plain midpoint sums.
double theta_oracle_1d(const std::function<double(double)>& c, double R, double x, int n) {
  double mean = 0.0;
  for (int i = 0; i < n; ++i) mean += c(x - R + (i + 0.5) * 2 * R / n);
  mean /= n;
  double dev = 0.0;
  for (int i = 0; i < n; ++i) dev += std::abs(c(x - R + (i + 0.5) * 2 * R / n) - mean);
  return dev / n;
}

}  // namespace

TEST(EvalH, Examples) {
  auto lin = FullOperatorSpec::second_order(HomogOperator::linear(SymMat::identity(2), 1.0));
  EXPECT_DOUBLE_EQ(eval_H(lin, jet_of(SymMat::identity(2)), 0.0, kOrigin), 2.0);

  FullOperatorSpec zero_order = FullOperatorSpec::second_order(HomogOperator::linear(SymMat::identity(2), 1.0));
  zero_order.G = [](double u0, const std::array<double, 3>&, double, const Point&) { return u0; };
  EXPECT_EQ(eval_H(zero_order, jet_of(SymMat(2)), 0.0, kOrigin), 0.0);

  FullOperatorSpec p = FullOperatorSpec::second_order(HomogOperator::pucci(2, {0.5, 2.0}));
  p.G = [](double, const std::array<double, 3>& g, double, const Point&) { return std::hypot(g[0], g[1]); };
  EXPECT_DOUBLE_EQ(eval_H(p, jet_of(SymMat::diagonal({1, -1}), 0.0, {3, 4, 0}), 0.0, kOrigin), 6.5);
}

TEST(EvalH, NonFiniteIsAnError) {
  FullOperatorSpec s = FullOperatorSpec::second_order(HomogOperator::linear(SymMat::identity(1), 1.0));
  s.G = [](double, const std::array<double, 3>&, double, const Point&) { return std::nan(""); };
  EXPECT_THROW(eval_H(s, jet_of(SymMat::identity(1)), 0.0, kOrigin), Error);
  EXPECT_THROW(eval_H(s, jet_of(SymMat::identity(2)), 0.0, kOrigin), InputError);
}

TEST(EvalCutoff, Examples) {
  const double delta = 0.5;
  const auto cut = CutoffSpec::for_delta(delta, 0.0);
  EXPECT_DOUBLE_EQ(cut.delta_hat, 0.0625);
  // H very negative on the jet, so the cutoff branch P(I) = 16 wins.
  FullOperatorSpec neg = FullOperatorSpec::second_order(HomogOperator::linear(SymMat::identity(1), delta));
  neg.G = [](double, const std::array<double, 3>&, double, const Point&) { return -1e6; };
  EXPECT_DOUBLE_EQ(eval_cutoff(neg, cut, jet_of(SymMat::identity(1)), 0.0, kOrigin), 16.0);

  FullOperatorSpec pu = FullOperatorSpec::second_order(HomogOperator::pucci(1, EllipticityBand::from_delta(delta)));
  EXPECT_EQ(eval_cutoff(pu, CutoffSpec::for_delta(delta, 1.0), jet_of(SymMat(1)), 0.0, kOrigin), 0.0);

  Rng rng(1);
  const auto big = CutoffSpec::for_delta(delta, 1e9);
  for (int n = 0; n < 100; ++n) {
    const auto j = jet_of(random_symmat(rng, 1));
    EXPECT_EQ(eval_cutoff(pu, big, j, 0.0, kOrigin), eval_H(pu, j, 0.0, kOrigin));
  }
}

TEST(EvalCutoff, DominatesHAndSaturates) {
  Rng rng(2);
  const double delta = 0.4;
  FullOperatorSpec s = FullOperatorSpec::second_order(HomogOperator::pucci(2, EllipticityBand::from_delta(delta), true));
  double sup_gap = 0.0;
  std::vector<Jet> jets;
  for (int n = 0; n < 300; ++n) jets.push_back(jet_of(random_symmat(rng, 2)));
  for (const auto& j : jets) sup_gap = std::max(sup_gap, pucci_max(j.hess, CutoffSpec::for_delta(delta, 0).band()) - eval_H(s, j, 0, kOrigin));
  for (double K : {0.0, 1.0, 10.0}) {
    const auto cut = CutoffSpec::for_delta(delta, K);
    for (const auto& j : jets) EXPECT_GE(eval_cutoff(s, cut, j, 0, kOrigin), eval_H(s, j, 0, kOrigin));
  }
  const auto cut = CutoffSpec::for_delta(delta, sup_gap + 1e-9);
  for (const auto& j : jets) EXPECT_EQ(eval_cutoff(s, cut, j, 0, kOrigin), eval_H(s, j, 0, kOrigin));
}

TEST(Cutoff, Validation) {
  EXPECT_THROW(CutoffSpec(0.0, 1.0), InputError);
  EXPECT_THROW(CutoffSpec(0.1, -1.0), InputError);
  EXPECT_THROW(CutoffSpec(0.2, 0.0).validate(0.5), InputError);
  EXPECT_NO_THROW(CutoffSpec(0.1, 0.0).validate(0.5));
}

TEST(BuildIsaacs, Singleton) {
  IsaacsSpec g;
  g.dim = 1;
  g.delta = 0.5;
  g.a = {{[](double, const Point&) { return SymMat::diagonal({1.3}); }}};
  g.G = {{[](double, const std::array<double, 3>& p, double, const Point&) { return 0.2 * p[0]; }}};
  g.envelope.K0 = 0.2;
  const auto spec = build_isaacs(g);
  const auto j = jet_of(SymMat::diagonal({2.0}), 0.0, {1.5, 0, 0});
  EXPECT_DOUBLE_EQ(spec.F(j.hess, 0, kOrigin), 2.6);
  EXPECT_DOUBLE_EQ(eval_H(spec, j, 0, kOrigin), 2.6 + 0.3);
  EXPECT_DOUBLE_EQ(spec.lower_order(j, 0, kOrigin), 0.3);
}

TEST(BuildIsaacs, EnumeratedSupInf) {
  IsaacsSpec g;
  g.dim = 1;
  g.delta = 0.5;
  g.a = {{[](double, const Point&) { return SymMat::diagonal({1.0}); }},
         {[](double, const Point&) { return SymMat::diagonal({2.0}); }}};
  const auto spec = build_isaacs(g);
  EXPECT_DOUBLE_EQ(spec.F(SymMat::diagonal({-1.0}), 0, kOrigin), -1.0);
  EXPECT_FALSE(static_cast<bool>(spec.G));
  EXPECT_DOUBLE_EQ(eval_H(spec, jet_of(SymMat::diagonal({-1.0})), 0, kOrigin), -1.0);
}

TEST(BuildIsaacs, Errors) {
  IsaacsSpec g;
  EXPECT_THROW(build_isaacs(g), InputError);
  g.a = {{}};
  EXPECT_THROW(build_isaacs(g), InputError);
}

TEST(BuildIsaacs, EnvelopeByTriangleInequality) {
  // 2 x 2 game, G^{ab} = +-0.1 |u'| + 0.05 b, shared envelope K0 = 0.1, Hbar = 0.05.
  IsaacsSpec g;
  g.dim = 2;
  g.delta = 0.5;
  for (int a = 0; a < 2; ++a) {
    g.a.emplace_back();
    g.G.emplace_back();
    for (int b = 0; b < 2; ++b) {
      const double c = a ? 1.2 : 0.8, sgn = b ? -1.0 : 1.0, shift = 0.05 * b;
      g.a.back().push_back([c](double, const Point&) { return SymMat::scalar(2, c); });
      g.G.back().push_back([sgn, shift](double, const std::array<double, 3>& p, double, const Point&) {
        return sgn * 0.1 * std::hypot(p[0], p[1]) + shift;
      });
    }
  }
  g.envelope.K0 = 0.1;
  g.envelope.Hbar = [](double, const Point&) { return 0.05; };
  const auto spec = build_isaacs(g);
  EXPECT_TRUE(validate_growth(spec, 2000, 4).pass);
}

TEST(ValidateHomogeneous, Examples) {
  const auto lin = validate_homogeneous(HomogOperator::linear(SymMat::from_rows({{1, 0.2}, {0.2, 0.7}}), 0.5), 100, 1);
  EXPECT_TRUE(lin.pass);
  const auto sq = validate_homogeneous(
      HomogOperator::custom(1, [](const SymMat& X, double, const Point&) { return X(0, 0) * X(0, 0); }, 0.5), 100, 1);
  EXPECT_FALSE(sq.pass);
  EXPECT_GT(sq.max_residual, 1e-3);
  const double delta = 0.3;
  const auto pu = validate_homogeneous(HomogOperator::pucci(2, EllipticityBand::from_delta(delta)), 400, 2);
  EXPECT_TRUE(pu.pass);
  EXPECT_NEAR(pu.min_grad_eigenvalue, delta, 1e-5);
  EXPECT_NEAR(pu.max_grad_eigenvalue, 1.0 / delta, 1e-5);
}

TEST(ValidateHomogeneous, CompositeOperatorsStayAdmissible) {
  const double delta = 0.5;
  std::vector<std::vector<HomogOperator>> rows{
      {HomogOperator::linear(SymMat::scalar(2, 0.8), delta), HomogOperator::linear(SymMat::diagonal({1.5, 0.6}), delta)},
      {HomogOperator::pucci(2, {0.6, 1.8}), HomogOperator::pucci(2, {0.5, 2.0}, true)}};
  const auto op = HomogOperator::supinf(rows);
  EXPECT_TRUE(validate_homogeneous(op, 300, 3).pass);
  EXPECT_LE(monotonicity_violation(op, 300, 4), 1e-12);
  EXPECT_LE(monotonicity_violation(HomogOperator::infsup(rows), 300, 4), 1e-12);
}

TEST(Homogeneity, PropertyOverRandomMatrices) {
  Rng rng(12);
  const auto op = HomogOperator::max({HomogOperator::pucci(2, {0.5, 2.0}, true), HomogOperator::linear(SymMat::identity(2), 0.5)});
  for (int n = 0; n < 500; ++n) {
    const SymMat X = random_symmat(rng, 2);
    for (double s : {0.0, 0.5, 2.0, 10.0})
      EXPECT_LE(std::abs(op(s * X, 0, kOrigin) - s * op(X, 0, kOrigin)), 1e-8 * std::max(s * frobenius_norm(X), 1e-300));
  }
}

TEST(AverageF, Examples) {
  const auto flat = HomogOperator::pucci(1, {0.5, 2.0});
  EXPECT_DOUBLE_EQ(average_F_ball(flat, SymMat::diagonal({-3.0}), 0.0, Point{0.2, 0, 0}, 0.3, 50), -1.5);
  const auto wave = square_wave_operator(1.25, 0.25, 0.1, 0.5);
  EXPECT_NEAR(average_F_ball(wave, SymMat::identity(1), 0.0, kOrigin, 0.5, 400), 1.25, 1e-12);
  const auto odd = HomogOperator::linear(1, [](double, const Point& y) { return SymMat::diagonal({y[0]}); }, 0.5);
  EXPECT_NEAR(average_F_ball(odd, SymMat::identity(1), 0.0, kOrigin, 0.7, 101), 0.0, 1e-14);
  EXPECT_THROW(average_F_ball(flat, SymMat::identity(1), 0.0, kOrigin, 0.0, 10), InputError);
  EXPECT_THROW(average_F_ball(flat, SymMat::identity(1), 0.0, kOrigin, 1.0, 0), InputError);
}

TEST(AverageF, LinearInFAndExactOnConstants) {
  const auto F1 = HomogOperator::linear(2, [](double, const Point& y) { return SymMat::scalar(2, 1 + 0.3 * std::sin(5 * y[0])); }, 0.5);
  const auto F2 = HomogOperator::linear(2, [](double, const Point& y) { return SymMat::scalar(2, 1 + 0.2 * y[1] * y[1]); }, 0.5);
  const auto sum = HomogOperator::linear(2, [](double, const Point& y) {
    return SymMat::scalar(2, 2 + 0.3 * std::sin(5 * y[0]) + 0.2 * y[1] * y[1]);
  }, 0.5);
  const SymMat X = SymMat::from_rows({{1, 0.4}, {0.4, -2}});
  const Point c{0.1, -0.2, 0};
  EXPECT_NEAR(average_F_ball(sum, X, 0, c, 0.5, 40),
              average_F_ball(F1, X, 0, c, 0.5, 40) + average_F_ball(F2, X, 0, c, 0.5, 40), 1e-12);
  const auto cst = HomogOperator::linear(SymMat::from_rows({{1, 0.1}, {0.1, 0.9}}), 0.5);
  EXPECT_NEAR(average_F_ball(cst, X, 0, c, 0.5, 40), cst(X, 0, c), 1e-12);
}

TEST(Oscillation, XIndependentIsZero) {
  const auto flat = HomogOperator::pucci(2, {0.5, 2.0});
  EXPECT_EQ(theta_oscillation(flat, 0.5, 0, kOrigin, unit_sphere_net(2)), 0.0);
  EXPECT_EQ(mu_oscillation(flat, 0.5, 0, kOrigin, unit_sphere_net(2)), 0.0);
}

TEST(Oscillation, SquareWaveAgainstOracle) {
  const CylinderQuadrature q{400, 4};
  for (double amp : {0.25, 0.125}) {
    const auto wave = square_wave_operator(1.25, amp, 0.1, 0.5);
    const double th = theta_oscillation(wave, 0.5, 0, kOrigin, unit_sphere_net(1), q);
    const auto c = [&](double y) {
      const double s = std::sin(2 * M_PI * y / 0.1);
      return 1.25 + amp * (s > 0 ? 1.0 : -1.0);
    };
    EXPECT_NEAR(th, theta_oracle_1d(c, 0.5, 0.0, 400), 1e-12);
    EXPECT_NEAR(th, amp, 1e-12);
    // In d = 1 the normalized sup over {+1, -1} is the same deviation.
    EXPECT_NEAR(mu_oscillation(wave, 0.5, 0, kOrigin, unit_sphere_net(1), q), th, 1e-12);
  }
}

TEST(Oscillation, MuDominatesThetaForDirectionalDeviation) {
  // Deviation only in the (1,1) direction of the Hessian.
  const auto F = HomogOperator::linear(2, [](double, const Point& y) {
    return SymMat::diagonal({1.0 + 0.3 * (y[0] > 0 ? 1.0 : -1.0), 1.0});
  }, 0.5, true, false);
  const auto net = unit_sphere_net(2);
  const CylinderQuadrature q{24, 2};
  const double th = theta_oscillation(F, 0.5, 0, kOrigin, net, q);
  const double mu = mu_oscillation(F, 0.5, 0, kOrigin, net, q);
  EXPECT_GT(th, 0.0);
  EXPECT_GE(mu, th - 1e-12);
}

TEST(UnitSphereNet, NormalizedAndDeterministic) {
  const auto net = unit_sphere_net(2);
  ASSERT_EQ(net.size(), 32u);
  for (const auto& X : net) EXPECT_NEAR(frobenius_norm(X), 1.0, 1e-14);
  EXPECT_EQ(net, unit_sphere_net(2));
}

TEST(Discrete, PucciLatticeFamilyIsDominantAndInBand) {
  const EllipticityBand b(0.0625, 16.0);
  for (const auto& a : HomogOperator::pucci_lattice_family(2, b)) {
    EXPECT_TRUE(in_band(a, b, 1e-12));
    EXPECT_LE(std::abs(a(0, 1)), std::min(a(0, 0), a(1, 1)) + 1e-15);
  }
}
