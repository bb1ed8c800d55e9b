#include <gtest/gtest.h>

#include "ilab/norms.hpp"

using namespace ilab;

namespace {

// Plain O(N^2) oracle for the low-order seminorm.
double holder_low_oracle(const GridFunction& v, const std::vector<std::size_t>& nodes, double kappa) {
  const auto& g = v.grid();
  double best = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i)
    for (std::size_t j = i + 1; j < nodes.size(); ++j) {
      const double dt = std::abs(g.time(g.time_index(nodes[i])) - g.time(g.time_index(nodes[j])));
      const double dx = distance(g.point(g.spatial_index(nodes[i])), g.point(g.spatial_index(nodes[j])), g.dim());
      best = std::max(best, std::abs(v[nodes[i]] - v[nodes[j]]) / (std::pow(dt, kappa / 2) + std::pow(dx, kappa)));
    }
  return best;
}

// Chebyshev fit oracle in 1D: dense scan over slopes.
double chebyshev_oracle_1d(const std::vector<double>& x, const std::vector<double>& y) {
  double best = INFINITY;
  for (int k = -20000; k <= 20000; ++k) {
    const double b = k * 1e-4;
    double up = -INFINITY, dn = INFINITY;
    for (std::size_t i = 0; i < x.size(); ++i) up = std::max(up, y[i] - b * x[i]), dn = std::min(dn, y[i] - b * x[i]);
    best = std::min(best, 0.5 * (up - dn));
  }
  return best;
}

SpaceTimeGrid grid1(double a, double b, double h, double T, double dt) { return SpaceTimeGrid(1, a, b, h, 0.0, T, dt); }

}  // namespace

TEST(HolderLow, Examples) {
  const auto g = SpaceTimeGrid(2, 0.0, 1.0, 1.0 / 16, 0.0, 1.0, 1.0 / 8);
  const auto cst = GridFunction::sample(g, [](double, const Point&) { return 2.5; });
  EXPECT_EQ(holder_low(cst, all_nodes(g), 0.7).value, 0.0);
  const auto lin = GridFunction::sample(g, [](double, const Point& x) { return x[0]; });
  const auto rep = holder_low(lin, all_nodes(g), 1.0);
  EXPECT_NEAR(rep.value, 1.0, 1e-12);
  EXPECT_NEAR(holder_ratio(lin, rep.node_a, rep.node_b, 1.0), rep.value, 1e-15);
}

TEST(HolderLow, SqrtTimeAgainstBruteForce) {
  const auto g = grid1(0.0, 1.0, 1.0 / 64, 1.0, 1.0 / 64);
  const auto v = GridFunction::sample(g, [](double t, const Point&) { return std::sqrt(t); });
  const auto nodes = all_nodes(g);
  const auto rep = holder_low(v, nodes, 1.0);
  EXPECT_EQ(rep.policy, "exact");
  EXPECT_NEAR(rep.value, holder_low_oracle(v, nodes, 1.0), 1e-14);
  EXPECT_NEAR(rep.value, 1.0, 0.02);
  EXPECT_EQ(std::min(g.time_index(rep.node_a), g.time_index(rep.node_b)), 0u);
  // Fine time lattice: subsampled policy still finds the sup near t = 0.
  const auto gf = grid1(0.0, 1.0, 1.0 / 64, 1.0, 1.0 / 4096);
  const auto vf = GridFunction::sample(gf, [](double t, const Point&) { return std::sqrt(t); });
  const auto rf = holder_low(vf, all_nodes(gf), 1.0);
  EXPECT_NE(rf.policy, "exact");
  EXPECT_NEAR(rf.value, 1.0, 0.02);
  EXPECT_NEAR(holder_ratio(vf, rf.node_a, rf.node_b, 1.0), rf.value, 1e-14);
}

TEST(HolderLow, MatchesOracleOnRandomData) {
  const auto g = SpaceTimeGrid(2, 0.0, 1.0, 1.0 / 8, 0.0, 1.0, 1.0 / 8);
  Rng rng(4);
  std::vector<double> vals(g.size());
  for (double& x : vals) x = rng.normal();
  const GridFunction v(g, vals);
  for (double kappa : {0.3, 0.8, 1.0}) EXPECT_NEAR(holder_low(v, all_nodes(g), kappa).value, holder_low_oracle(v, all_nodes(g), kappa), 1e-13);
}

TEST(HolderLow, SingleNodeIsDegenerate) {
  const auto g = grid1(0.0, 1.0, 0.25, 1.0, 0.5);
  const auto v = GridFunction::sample(g, [](double t, const Point& x) { return t + x[0]; });
  const auto rep = holder_low(v, {3}, 0.5);
  EXPECT_TRUE(rep.degenerate);
  EXPECT_EQ(rep.value, 0.0);
}

TEST(HolderLow, HomogeneitySubadditivityRescaling) {
  const auto g = grid1(-1.0, 1.0, 1.0 / 32, 1.0, 1.0 / 32);
  const auto u = GridFunction::sample(g, [](double t, const Point& x) { return std::sin(3 * x[0]) + std::sqrt(t); });
  const auto w = GridFunction::sample(g, [](double t, const Point& x) { return std::abs(x[0]) * (1 + t); });
  std::vector<double> sum(g.size()), scaled(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) sum[n] = u[n] + w[n], scaled[n] = -3.5 * u[n];
  const auto nodes = all_nodes(g);
  for (double kappa : {0.5, 1.0}) {
    const double hu = holder_low(u, nodes, kappa).value, hw = holder_low(w, nodes, kappa).value;
    EXPECT_NEAR(holder_low(GridFunction(g, scaled), nodes, kappa).value, 3.5 * hu, 1e-12 * hu);
    EXPECT_LE(holder_low(GridFunction(g, sum), nodes, kappa).value, hu + hw + 1e-12);
  }
  // v_s(t, x) = v(s^2 t, s x) on the lattice scaled by (1/s, 1/s^2).
  const double s = 2.0;
  const auto gs = SpaceTimeGrid(1, -1.0 / s, 1.0 / s, 1.0 / 32 / s, 0.0, 1.0 / (s * s), 1.0 / 32 / (s * s));
  std::vector<double> vs(gs.size());
  for (std::size_t n = 0; n < gs.size(); ++n) vs[n] = u[n];  // identical values, dilated coordinates
  for (double kappa : {0.5, 1.0}) {
    const double h0 = holder_low(u, nodes, kappa).value;
    EXPECT_NEAR(holder_low(GridFunction(gs, vs), all_nodes(gs), kappa).value, std::pow(s, kappa) * h0, 1e-12 * h0);
  }
}

TEST(HolderHigh, KernelAndQuadratic) {
  const auto g = SpaceTimeGrid(2, -1.0, 1.0, 1.0 / 16, 0.0, 1.0, 1.0 / 16);
  const auto aff = GridFunction::sample(g, [](double, const Point& x) { return 3.0 + 0.5 * x[0] - 0.25 * x[1]; });
  const auto rep = holder_high(aff, all_nodes(g), 1.5);
  EXPECT_EQ(rep.value, 0.0);
  const auto g1 = grid1(-1.0, 1.0, 1.0 / 64, 1.0, 1.0 / 16);
  const auto q = GridFunction::sample(g1, [](double, const Point& x) { return 0.5 * x[0] * x[0]; });
  const auto rq = holder_high(q, all_nodes(g1), 2.0);
  EXPECT_NEAR(rq.gradient_part, 1.0, 1e-12);
  EXPECT_EQ(rq.time_part, 0.0);
}

TEST(HolderHigh, PowerProfileGradientPart) {
  // One-sided region [0, 1]: continuum value 1.5.
  const auto g = grid1(0.0, 1.0, 1.0 / 128, 1.0, 0.5);
  const auto v = GridFunction::sample(g, [](double, const Point& x) { return std::pow(std::abs(x[0]), 1.5); });
  EXPECT_NEAR(holder_high(v, all_nodes(g), 1.5).gradient_part, 1.5, 0.15);
  // Symmetric region [-1, 1]: pairs x = -y give 1.5 sqrt(2).
  const auto gs = grid1(-1.0, 1.0, 1.0 / 128, 1.0, 0.5);
  const auto vs = GridFunction::sample(gs, [](double, const Point& x) { return std::pow(std::abs(x[0]), 1.5); });
  EXPECT_NEAR(holder_high(vs, all_nodes(gs), 1.5).gradient_part, 1.5 * std::sqrt(2.0), 0.15 * std::sqrt(2.0));
}

TEST(HolderHigh, TimePartAndHomogeneity) {
  const auto g = grid1(0.0, 1.0, 1.0 / 16, 1.0, 1.0 / 64);
  const auto v = GridFunction::sample(g, [](double t, const Point&) { return t; });
  // |t - s| / |t - s|^{kappa/2} is maximized at the longest separation.
  EXPECT_NEAR(holder_high(v, all_nodes(g), 1.5).time_part, 1.0, 1e-12);
  std::vector<double> sc(g.size());
  for (std::size_t n = 0; n < g.size(); ++n) sc[n] = -2 * v[n];
  EXPECT_NEAR(holder_high(GridFunction(g, sc), all_nodes(g), 1.5).value, 2 * holder_high(v, all_nodes(g), 1.5).value, 1e-12);
  EXPECT_THROW(holder_high(v, all_nodes(g), 1.0), InputError);
}

TEST(FKappa, Examples) {
  const auto g = grid1(0.0, 1.0, 1.0 / 32, 1.0, 1.0 / 32);
  const auto c = GridFunction::sample(g, [](double, const Point&) { return 3.0; });
  EXPECT_NEAR(f_kappa_norm(c, 1.0, 0.5), 3.0 * 0.5, 1e-12);
  EXPECT_NEAR(f_kappa_norm(c, 1.5, 0.5), 3.0 * std::pow(0.5, 0.5), 1e-12);
  EXPECT_NEAR(f_kappa_norm(c, 2.0, 0.5), 3.0, 1e-12);
  const auto ind = GridFunction::sample(g, [](double t, const Point& x) {
    return (std::abs(x[0] - 0.5) < 0.05 && t < 0.05) ? 1.0 : 0.0;
  });
  const double k1 = f_kappa_norm(ind, 1.0, 0.5), k15 = f_kappa_norm(ind, 1.5, 0.5), k2 = f_kappa_norm(ind, 2.0, 0.5);
  EXPECT_GT(k1, 0.0);
  EXPECT_LT(k1, k15);
  EXPECT_LT(k15, k2);
}

TEST(FKappa, BoundedUnderRefinementForIntegrableSingularity) {
  // f = |x - 1/2|^{-1/4} lies in L_p for p < 4; kappa = 1 <= 2 - 3/p for p = 3.
  std::vector<double> vals;
  for (double h : {1.0 / 32, 1.0 / 64, 1.0 / 128}) {
    const auto g = grid1(0.0, 1.0, h, 0.25, h * h * 16);
    const auto f = GridFunction::sample(g, [h](double, const Point& x) { return std::pow(std::abs(x[0] - 0.5) + h, -0.25); });
    vals.push_back(f_kappa_norm(f, 1.0, 0.5, 2));
  }
  EXPECT_LE(vals[2], 1.25 * vals[0]);
  EXPECT_LE(vals[1], 1.25 * vals[0]);
}

TEST(Oscillation, Examples) {
  const auto g = grid1(-1.0, 1.0, 1.0 / 64, 1.0, 0.5);
  EXPECT_EQ(oscillation(GridFunction::sample(g, [](double, const Point&) { return 1.0; }), all_nodes(g)), 0.0);
  EXPECT_DOUBLE_EQ(oscillation(GridFunction::sample(g, [](double, const Point& x) { return x[0]; }), all_nodes(g)), 2.0);
  EXPECT_NEAR(oscillation(GridFunction::sample(g, [](double, const Point& x) { return std::sin(M_PI * x[0]); }), all_nodes(g)), 2.0, 1e-3);
  EXPECT_THROW(oscillation(GridFunction::sample(g, [](double, const Point&) { return 1.0; }), {}), InputError);
}

TEST(BestAffine, Examples) {
  const auto g = grid1(-1.0, 1.0, 1.0 / 64, 1.0, 0.5);
  const auto aff = GridFunction::sample(g, [](double, const Point& x) { return 0.3 - 1.7 * x[0]; });
  const auto fa = best_affine(aff, all_nodes(g));
  EXPECT_NEAR(fa.error, 0.0, 1e-10);
  EXPECT_NEAR(fa.b[0], -1.7, 1e-9);
  EXPECT_NEAR(fa.c, 0.3, 1e-9);
  for (double r : {1.0, 0.5, 0.25}) {
    const auto sq = GridFunction::sample(g, [](double, const Point& x) { return x[0] * x[0]; });
    std::vector<std::size_t> nodes;
    for (auto n : all_nodes(g))
      if (std::abs(g.point(g.spatial_index(n))[0]) <= r + 1e-12) nodes.push_back(n);
    const auto f = best_affine(sq, nodes);
    EXPECT_NEAR(f.error, r * r / 2, 1e-10);
    EXPECT_NEAR(f.c, r * r / 2, 1e-10);
    EXPECT_NEAR(f.b[0], 0.0, 1e-9);
  }
  const auto ab = GridFunction::sample(g, [](double, const Point& x) { return std::abs(x[0]); });
  EXPECT_NEAR(best_affine(ab, all_nodes(g)).b[0], 0.0, 1e-9);
}

TEST(BestAffine, MatchesDenseScanAndBeatsVertexJet) {
  const auto g = grid1(-1.0, 1.0, 1.0 / 16, 1.0, 0.25);
  Rng rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    std::vector<double> vals(g.size());
    for (double& x : vals) x = rng.normal();
    const GridFunction v(g, vals);
    std::vector<double> xs, ys;
    for (auto n : all_nodes(g)) xs.push_back(g.point(g.spatial_index(n))[0]), ys.push_back(v[n]);
    const auto fit = best_affine(v, all_nodes(g), g.node(0, 8));
    EXPECT_NEAR(fit.error, chebyshev_oracle_1d(xs, ys), 2e-4);
    EXPECT_LE(fit.error, fit.vertex_error + 1e-12);
    EXPECT_LE(fit.error, 0.5 * oscillation(v, all_nodes(g)) + 1e-15);
  }
}

TEST(BestAffine, TwoDimensionalPlaneAndDegenerateRegion) {
  const auto g = SpaceTimeGrid(2, 0.0, 1.0, 1.0 / 16, 0.0, 1.0, 0.5);
  const auto p = GridFunction::sample(g, [](double, const Point& x) { return 1 + 2 * x[0] - 3 * x[1]; });
  const auto f = best_affine(p, all_nodes(g));
  EXPECT_NEAR(f.error, 0.0, 1e-8);
  EXPECT_NEAR(f.b[0], 2.0, 1e-7);
  EXPECT_NEAR(f.b[1], -3.0, 1e-7);
  const auto q = GridFunction::sample(g, [](double, const Point& x) { return x[0] * x[0] + x[1] * x[1]; });
  // Best plane for x^2 + y^2 on [0,1]^2: b = (1,1), error 1/4.
  EXPECT_NEAR(best_affine(q, all_nodes(g)).error, 0.25, 1e-6);
  std::vector<std::size_t> line;
  for (std::size_t i = 0; i < g.nx(); ++i) line.push_back(g.node(0, g.spatial({i, 3, 0})));
  EXPECT_THROW(best_affine(p, line), InputError);
}

TEST(AffineDecay, Examples) {
  const auto g = grid1(-1.0, 1.0, 1.0 / 256, 0.25, 1.0 / 64);
  const std::vector<double> radii{0.25, 0.125, 0.0625};
  const auto aff = GridFunction::sample(g, [](double, const Point& x) { return 1 + x[0]; });
  EXPECT_NEAR(affine_decay_seminorm(aff, 0.0, Point{0, 0, 0}, radii, 1.5).value, 0.0, 1e-9);

  const auto pw = GridFunction::sample(g, [](double, const Point& x) { return std::pow(std::abs(x[0]), 1.5); });
  const auto rp = affine_decay_seminorm(pw, 0.0, Point{0, 0, 0}, radii, 1.5);
  ASSERT_EQ(rp.rows.size(), 3u);
  for (const auto& row : rp.rows) EXPECT_NEAR(row.ratio, 0.5, 1e-9);

  const auto sq = GridFunction::sample(g, [](double, const Point& x) { return x[0] * x[0]; });
  const auto rs = affine_decay_seminorm(sq, 0.0, Point{0, 0, 0}, radii, 1.5);
  for (const auto& row : rs.rows) EXPECT_NEAR(row.ratio, 0.5 * std::sqrt(row.radius), 1e-9);
  EXPECT_NEAR(rs.value, rs.rows.front().ratio, 1e-15);

  const auto warn = affine_decay_seminorm(sq, 0.0, Point{0, 0, 0}, {0.25, 0.125, 1.0 / 512}, 1.5);
  EXPECT_EQ(warn.rows.size(), 2u);
  EXPECT_EQ(warn.warnings.size(), 1u);
  EXPECT_THROW(affine_decay_seminorm(sq, 0.0, Point{0, 0, 0}, {0.25, 0.125}, 1.5), InputError);
}

TEST(Interpolation, Examples) {
  const auto g = grid1(-1.0, 1.0, 1.0 / 128, 0.5, 0.25);
  const auto c = GridFunction::sample(g, [](double, const Point&) { return 4.0; });
  const auto rc = interpolation_check(c, Point{0, 0, 0}, 0.25, 0.75, 0.5, 0.5);
  EXPECT_TRUE(rc.holds);
  EXPECT_EQ(rc.lhs, 0.0);
  const auto a = GridFunction::sample(g, [](double, const Point& x) { return 0.5 - 2 * x[0]; });
  // lhs |b| = 2; rhs = osc / (eps (r2 - r1)) = 2 * 2 * 0.75 / (0.5 * 0.5) = 12.
  const auto ra = interpolation_check(a, Point{0, 0, 0}, 0.25, 0.75, 0.5, 0.5);
  EXPECT_TRUE(ra.holds);
  EXPECT_NEAR(ra.lhs, 2.0, 1e-12);
  EXPECT_NEAR(ra.rhs, 12.0, 1e-9);
  const auto s = GridFunction::sample(g, [](double, const Point& x) { return std::sin(8 * x[0]); });
  for (int k = 1; k <= 9; ++k)
    for (double gam : {0.5, 1.0}) EXPECT_TRUE(interpolation_check(s, Point{0, 0, 0}, 0.25, 0.75, gam, 0.1 * k).holds);
}
