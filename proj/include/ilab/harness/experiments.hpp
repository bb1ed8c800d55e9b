#pragma once

// The desk-scale studies. Each experiment reads its section of the config,
// produces a Report with fixed columns, and derives its checks through a gate
// function that only looks at the stored rows and parameters, so
// gate(read_report_csv(write_report_csv(r))) reproduces r.checks.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <string>
#include <vector>

#include "ilab/harness/config.hpp"
#include "ilab/harness/pool.hpp"
#include "ilab/harness/problems.hpp"
#include "ilab/harness/report.hpp"
#include "ilab/homog_repr.hpp"
#include "ilab/mollify.hpp"
#include "ilab/norms.hpp"
#include "ilab/solver.hpp"

namespace ilab::harness {

struct Context {
  unsigned threads = 1;
  std::uint64_t seed = 20240601;
  bool seed_from_cli = false;
};

namespace detail {

inline std::string tag(double v) { return fmt_short(v); }

inline double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

inline std::uint64_t seed_for(const Config& cfg, std::string_view sec, const Context& ctx) {
  if (ctx.seed_from_cli) return ctx.seed;
  return static_cast<std::uint64_t>(cfg.integer(sec, "seed", static_cast<std::int64_t>(ctx.seed)));
}

inline std::vector<double> positive_list(const Config& cfg, std::string_view sec, std::string_view key,
                                         std::vector<double> fallback) {
  auto xs = cfg.numbers(sec, key, fallback);
  Config::require(!xs.empty(), sec, key, "must not be empty");
  for (double x : xs) Config::require(x > 0 && std::isfinite(x), sec, key, "entries must be positive");
  return xs;
}

inline Check check(std::string name, bool pass, std::string detail) { return {std::move(name), pass, std::move(detail)}; }

inline SymMat random_in_band(Rng& rng, int d, const EllipticityBand& b) {
  if (d == 1) return SymMat::diagonal({rng.uniform(b.lo, b.hi)});
  const double th = rng.uniform(0, M_PI), c = std::cos(th), s = std::sin(th);
  const double c1 = rng.uniform(b.lo, b.hi), c2 = rng.uniform(b.lo, b.hi);
  return SymMat::from_rows({{c1 * c * c + c2 * s * s, (c1 - c2) * c * s}, {(c1 - c2) * c * s, c1 * s * s + c2 * c * c}});
}

/// Nodes of C_r(t0, x0) on the lattice of v.
inline std::vector<std::size_t> cylinder(const GridFunction& v, double t0, const Point& x0, double r) {
  return cylinder_nodes(v.grid(), ParabolicCylinder{v.grid().dim(), t0, x0, r});
}

}  // namespace detail

// ---------------------------------------------------------------------------
// represent: randomized invariant suite of the sup-inf representation
// ---------------------------------------------------------------------------

inline Report run_represent(const Config& cfg, const Context& ctx) {
  const std::string_view sec = "represent";
  const auto cases = cfg.integer(sec, "cases", 10000);
  const auto recon = cfg.integer(sec, "reconstruction_cases", 300);
  Config::require(cases > 0 && recon > 0, sec, "cases", "case counts must be positive");
  const auto deltas = detail::positive_list(cfg, sec, "deltas", {0.25, 0.5, 0.9});
  for (double d : deltas) Config::require(d <= 1, sec, "deltas", "entries must lie in (0,1]");
  const std::uint64_t seed = detail::seed_for(cfg, sec, ctx);

  Report r;
  r.experiment = "represent";
  r.params = {{"cases", static_cast<double>(cases)}, {"seed", static_cast<double>(seed)}, {"tolerance", 1e-9}};
  r.columns = {"delta", "dim", "cases", "lambda_range", "minorant", "equality", "euler_residual", "containment",
               "gamma", "stability", "recon_cases", "recon_error", "hand_value", "hand_expected"};
  const double nan = std::numeric_limits<double>::quiet_NaN();

  // Families: max/min of random linear functions, Pucci, 2x2 sup-inf tables.
  const std::vector<std::string> families{"max_linear", "min_linear", "pucci_max", "pucci_min", "isaacs_2x2"};
  struct Job {
    double delta;
    int dim;
    std::size_t family;
  };
  std::vector<Job> jobs;
  for (double delta : deltas)
    for (int d : {1, 2})
      for (std::size_t f = 0; f < families.size(); ++f) jobs.push_back({delta, d, f});
  const std::size_t per_job = static_cast<std::size_t>((cases + static_cast<std::int64_t>(jobs.size()) - 1) /
                                                       static_cast<std::int64_t>(jobs.size()));

  auto rows = parallel_map(jobs.size(), ctx.threads, [&](std::size_t ji) {
    const Job& job = jobs[ji];
    const EnvelopeSpec env(job.dim, job.delta);
    const EllipticityBand bB = env.band_B();
    Rng rng(seed + 7919 * ji);
    // A random member of the family with its active slopes.
    struct Member {
      std::vector<std::vector<SymMat>> table;  // sup over rows of inf over columns
      bool pucci = false, minimal = false;
      double operator()(const SymMat& X, const EllipticityBand& b) const {
        if (pucci) return minimal ? pucci_min(X, b) : pucci_max(X, b);
        double sup = -INFINITY;
        for (const auto& row : table) {
          double inf = INFINITY;
          for (const auto& a : row) inf = std::min(inf, inner(a, X));
          sup = std::max(sup, inf);
        }
        return sup;
      }
    };
    auto draw = [&](std::size_t fam) {
      Member m;
      const std::string& name = families[fam];
      if (name == "pucci_max" || name == "pucci_min") {
        m.pucci = true;
        m.minimal = name == "pucci_min";
        return m;
      }
      const std::size_t n = 1 + rng.index(4);
      if (name == "max_linear") {
        for (std::size_t k = 0; k < n; ++k) m.table.push_back({detail::random_in_band(rng, job.dim, bB)});
      } else if (name == "min_linear") {
        m.table.emplace_back();
        for (std::size_t k = 0; k < n; ++k) m.table[0].push_back(detail::random_in_band(rng, job.dim, bB));
      } else {
        for (int i = 0; i < 2; ++i) {
          m.table.emplace_back();
          for (int j = 0; j < 2; ++j) m.table[i].push_back(detail::random_in_band(rng, job.dim, bB));
        }
      }
      return m;
    };

    double lam_bad = 0, minorant_bad = 0, eq_bad = 0, euler = 0, contain_bad = 0, gamma_bad = 0, stab_bad = 0;
    for (std::size_t n = 0; n < per_job; ++n) {
      const Member m = draw(job.family);
      const Member other = draw(job.family);
      const HomogFunction H = [&m, bB](const SymMat& X) { return m(X, bB); };
      const HomogFunction F = [&other, bB](const SymMat& X) { return other(X, bB); };
      const SymMat alpha = random_symmat(rng, job.dim, std::pow(10.0, rng.uniform(-2, 2)));
      const AffinePair beta{0.0, detail::random_in_band(rng, job.dim, bB)};
      const auto rc = repr_pair(env, H, alpha, beta);
      const double h = H(alpha), scale = 1.0 + frobenius_norm(alpha);
      if (!(rc.lambda >= 0 && rc.lambda <= 1)) ++lam_bad;
      if (rc.pair(alpha) < h - 1e-10 * scale) ++minorant_bad;
      if (rc.lambda < 1 && std::abs(rc.pair(alpha) - h) > 1e-10 * scale) ++eq_bad;
      euler = std::max(euler, std::abs(inner(alpha, grad_G(env, alpha)) - support_G(env, alpha)) / scale);
      if (rc.pair.f != 0.0 || !in_band(rc.pair.l, env.band_B0(), 1e-10)) ++contain_bad;
      if (gamma(env, alpha) < env.mu() * frobenius_norm(alpha) - 1e-10 * scale) ++gamma_bad;
      try {
        stability_gap(env, H, F, alpha, beta);
      } catch (const Error&) {
        ++stab_bad;
      }
    }
    double recon_err = 0.0;
    const std::size_t rc_cases = static_cast<std::size_t>(recon);
    for (std::size_t n = 0; n < rc_cases; ++n) {
      const Member m = draw(job.family);
      const HomogFunction H = [&m, bB](const SymMat& X) { return m(X, bB); };
      std::vector<SymMat> alphas;
      for (int k = 0; k < 6; ++k) alphas.push_back(random_symmat(rng, job.dim));
      const SymMat u = random_symmat(rng, job.dim);
      std::vector<AffinePair> betas;
      if (m.pucci) {
        auto grad = [&](const SymMat& a) { return m.minimal ? pucci_min_gradient(a, bB) : pucci_gradient(a, bB); };
        for (const auto& a : alphas) betas.push_back({0.0, grad(a)});
        betas.push_back({0.0, grad(u)});
      } else {
        for (const auto& row : m.table)
          for (const auto& a : row) betas.push_back({0.0, a});
      }
      recon_err = std::max(recon_err, std::abs(supinf_eval(env, H, u, alphas, betas) - H(u)));
    }
    return Row{"delta=" + detail::tag(job.delta) + " d=" + std::to_string(job.dim) + " " + families[job.family],
               {job.delta, static_cast<double>(job.dim), static_cast<double>(per_job), lam_bad, minorant_bad, eq_bad,
                euler, contain_bad, gamma_bad, stab_bad, static_cast<double>(rc_cases), recon_err, nan, nan}};
  });
  for (auto& row : rows) r.add(row.label, row.values);

  // Hand-derived scalar instance: delta = 0.5, H(alpha) = alpha.
  {
    const EnvelopeSpec e(1, 0.5);
    const HomogFunction H = [](const SymMat& a) { return a(0, 0); };
    auto s1 = [](double v) { return SymMat::diagonal({v}); };
    const auto rc = repr_pair(e, H, s1(1.0), AffinePair{0.0, s1(0.5)});
    const double recon_v = supinf_eval(e, H, s1(-1.0), {s1(1.0)}, {{0.0, s1(0.5)}, {0.0, s1(1.0)}, {0.0, s1(2.0)}});
    auto hand = [&](const std::string& what, double v, double expect) {
      std::vector<double> vals(r.columns.size(), nan);
      vals[r.column("hand_value")] = v;
      vals[r.column("hand_expected")] = expect;
      r.add("hand " + what, vals);
    };
    hand("lambda(1;(0,0.5))", rc.lambda, 6.0 / 7.0);
    hand("l(1;(0,0.5))", rc.pair.l(0, 0), 1.0);
    hand("supinf(-1)", recon_v, -1.0);
  }
  return r;
}

inline std::vector<Check> gate_represent(const Report& r) {
  std::vector<Check> out;
  const double tol = r.param("tolerance");
  double total = 0, viol = 0, recon = 0, euler = 0;
  for (const Row* row : r.select("delta=")) {
    total += r.at(*row, "cases");
    for (const char* c : {"lambda_range", "minorant", "equality", "containment", "gamma", "stability"})
      viol += r.at(*row, c);
    recon = std::max(recon, r.at(*row, "recon_error"));
    euler = std::max(euler, r.at(*row, "euler_residual"));
  }
  out.push_back(detail::check("invariants", viol == 0 && total >= r.param("cases"),
                              fmt_short(viol) + " violations over " + fmt_short(total) + " cases"));
  out.push_back(detail::check("euler relation", euler <= 1e-10, "max residual " + fmt_short(euler)));
  out.push_back(detail::check("reconstruction", recon <= tol, "max error " + fmt_short(recon)));
  double hand = 0;
  for (const Row* row : r.select("hand "))
    hand = std::max(hand, std::abs(r.at(*row, "hand_value") - r.at(*row, "hand_expected")));
  out.push_back(detail::check("hand instance", hand <= 1e-12, "max deviation " + fmt_short(hand)));
  return out;
}

// ---------------------------------------------------------------------------
// freeze: sup |u - ubar| against the oscillation mu_1 of the coefficients
// ---------------------------------------------------------------------------

inline Report run_freeze(const Config& cfg, const Context& ctx) {
  const std::string_view sec = "freeze";
  ProblemConfig base;
  base.op = "rough_x";
  base.delta = 0.5;
  base.data = "quadratic";
  base = read_problem(cfg, sec, base);
  Config::require(base.op == "rough_x", sec, "operator", "freezing uses the rough_x family");
  auto amps = cfg.numbers(sec, "amplitudes", std::vector<double>{0.5, 0.25, 0.125, 0.0625, 0.0});
  for (double A : amps) Config::require(A >= 0, sec, "amplitudes", "entries must be nonnegative");
  const double kappa = cfg.number(sec, "kappa", 1.2);
  Config::require(kappa > 1 && kappa < 2, sec, "kappa", "must lie in (1,2)");
  const double h = cfg.number(sec, "h", 1.0 / 64), dt = cfg.number(sec, "dt", 0.0);
  const auto cells = cfg.integer(sec, "frozen_cells", base.dim == 1 ? 400 : 24);
  const std::uint64_t seed = detail::seed_for(cfg, sec, ctx);

  Report r;
  r.experiment = "freeze";
  r.params = {{"kappa", kappa}, {"dim", static_cast<double>(base.dim)}, {"slope_margin", 0.05}, {"scale", base.scale}};
  r.columns = {"amplitude", "mu1", "E"};
  auto rows = parallel_map(amps.size(), ctx.threads, [&](std::size_t i) {
    ProblemConfig c = base;
    c.amplitude = amps[i];
    const ProblemSpec p = build_problem(c);
    SchemeParams sp = scheme_for(c, h, dt, seed);
    sp.frozen_cells = static_cast<std::size_t>(cells);
    const auto u = solve(p, sp);
    const auto ubar = solve_frozen(p, c.scale, sp);
    const double mu = mu_oscillation(p.H.F, c.scale, 0.0, p.domain.center, unit_sphere_net(c.dim));
    return Row{"A=" + detail::tag(amps[i]), {amps[i], mu, sup_distance(u.v, ubar.v)}};
  });
  for (auto& row : rows) r.add(row.label, row.values);
  return r;
}

inline std::vector<Check> gate_freeze(const Report& r) {
  std::vector<const Row*> pos, zero;
  for (const auto& row : r.rows) (r.at(row, "amplitude") > 0 ? pos : zero).push_back(&row);
  std::sort(pos.begin(), pos.end(), [&](auto* a, auto* b) { return r.at(*a, "amplitude") > r.at(*b, "amplitude"); });
  bool decreasing = pos.size() >= 2;
  for (std::size_t i = 1; i < pos.size(); ++i) decreasing = decreasing && r.at(*pos[i], "E") < r.at(*pos[i - 1], "E");
  bool zeros = true;
  for (const Row* z : zero) zeros = zeros && r.at(*z, "E") == 0.0 && r.at(*z, "mu1") == 0.0;
  std::vector<double> mu, E;
  for (const Row* p : pos) mu.push_back(r.at(*p, "mu1")), E.push_back(r.at(*p, "E"));
  const auto fit = fit_loglog(mu, E);
  const double d = r.param("dim"), kappa = r.param("kappa");
  const double floor = kappa / (6 * d + 6) - r.param("slope_margin");
  std::string es;
  for (double e : E) es += (es.empty() ? "" : " ") + fmt_short(e);
  return {detail::check("E strictly decreasing", decreasing, "E = " + es),
          detail::check("E vanishes with the oscillation", zeros && !zero.empty(),
                        std::to_string(zero.size()) + " zero-amplitude rows"),
          detail::check("slope positive", fit.points >= 2 && fit.slope > 0,
                        "slope " + fmt_short(fit.slope) + " (rms residual " + fmt_short(fit.residual) + ")"),
          detail::check("slope vs kappa/(6d+6)", fit.slope >= floor,
                        "slope " + fmt_short(fit.slope) + " >= " + fmt_short(floor))};
}

// ---------------------------------------------------------------------------
// affine: decay of the best affine approximation on shrinking cylinders
// ---------------------------------------------------------------------------

inline Report run_affine(const Config& cfg, const Context& ctx) {
  const std::string_view sec = "affine";
  ProblemConfig base;
  base.delta = 0.5;
  base.data = "abs";
  // Large enough that P - K never wins on these data, so linear families stay linear in g.
  base.K = 1e4;
  base = read_problem(cfg, sec, base);
  const auto instances = cfg.strings(sec, "instances", std::vector<std::string>{"pucci_min", "piecewise_t"});
  const auto radii = detail::positive_list(cfg, sec, "radii", {0.5, 0.25, 0.125, 0.0625});
  Config::require(radii.size() >= 3, sec, "radii", "need at least three radii");
  const double kappa0 = cfg.number(sec, "kappa0", 1.2);
  Config::require(kappa0 > 1 && kappa0 < 2, sec, "kappa0", "must lie in (1,2)");
  const double factor = cfg.number(sec, "factor", 2.0);
  const double h = cfg.number(sec, "h", 1.0 / 64), dt = cfg.number(sec, "dt", 0.0);
  const std::uint64_t seed = detail::seed_for(cfg, sec, ctx);

  Report r;
  r.experiment = "affine";
  r.params = {{"kappa0", kappa0}, {"factor", factor}, {"scale", base.scale}};
  r.columns = {"radius", "error", "ratio", "error_doubled", "linear", "affine_data", "mu1"};

  struct Job {
    ProblemConfig c;
    bool affine_data;
  };
  std::vector<Job> jobs;
  for (const auto& op : instances) {
    ProblemConfig c = base;
    c.op = op;
    c.name = op;
    validate(c);
    Config::require(is_x_independent(c), sec, "instances", "'" + op + "' is not a frozen (x-independent) family");
    jobs.push_back({c, false});
  }
  {
    ProblemConfig c = jobs.front().c;
    c.data = "affine";
    c.name = jobs.front().c.op + "+affine";
    jobs.push_back({c, true});
  }
  auto blocks = parallel_map(jobs.size(), ctx.threads, [&](std::size_t i) {
    const ProblemConfig& c = jobs[i].c;
    const SchemeParams sp = scheme_for(c, h, dt, seed);
    const auto v = solve(build_problem(c), sp).v;
    ProblemConfig c2 = c;
    c2.data_scale = 2.0 * c.data_scale;
    const auto v2 = solve(build_problem(c2), sp).v;
    const double s = c.scale;
    const Point x0 = Domain::box(c.dim, s * c.lower, s * c.upper).center;
    std::vector<Row> out;
    for (double rad : radii) {
      const double rs = s * rad;
      const auto nodes = detail::cylinder(v, 0.0, x0, rs);
      const double e = best_affine(v, nodes).error;
      const double e2 = best_affine(v2, nodes).error;
      out.push_back({c.name + " r=" + detail::tag(rad),
                     {rad, e, e / std::pow(rad, kappa0), e2, is_linear(c) ? 1.0 : 0.0, jobs[i].affine_data ? 1.0 : 0.0,
                      0.0}});
    }
    return out;
  });
  for (auto& b : blocks)
    for (auto& row : b) r.add(row.label, row.values);
  return r;
}

inline std::vector<Check> gate_affine(const Report& r) {
  std::map<std::string, std::vector<const Row*>> by;
  for (const auto& row : r.rows) by[row.label.substr(0, row.label.find(" r="))].push_back(&row);
  std::vector<Check> out;
  const double factor = r.param("factor");
  for (const auto& [name, rows] : by) {
    const bool affine = r.at(*rows.front(), "affine_data") == 1.0;
    if (affine) {
      double worst = 0;
      for (const Row* row : rows) worst = std::max(worst, r.at(*row, "error"));
      out.push_back(detail::check(name + ": affine data", worst <= 1e-10, "max e(r) " + fmt_short(worst)));
      continue;
    }
    const Row* largest = *std::max_element(rows.begin(), rows.end(),
                                           [&](auto* a, auto* b) { return r.at(*a, "radius") < r.at(*b, "radius"); });
    const double ref = r.at(*largest, "ratio");
    double worst = 0;
    bool finite = true;
    for (const Row* row : rows) {
      worst = std::max(worst, r.at(*row, "ratio"));
      finite = finite && std::isfinite(r.at(*row, "ratio"));
    }
    out.push_back(detail::check(name + ": e(r)/r^kappa0 bounded", finite && worst <= factor * ref,
                                "max " + fmt_short(worst) + " vs " + fmt_short(factor) + " x " + fmt_short(ref) +
                                    " at r_max"));
    if (r.at(*rows.front(), "linear") == 1.0) {
      double dev = 0;
      for (const Row* row : rows)
        dev = std::max(dev, std::abs(r.at(*row, "error_doubled") - 2 * r.at(*row, "error")) /
                                (1.0 + r.at(*row, "error_doubled")));
      out.push_back(detail::check(name + ": doubling g doubles e(r)", dev <= 1e-9, "max deviation " + fmt_short(dev)));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// holder: normalized interior C^{1+} ratio Q over a problem family
// ---------------------------------------------------------------------------

struct HolderMeasure {
  double seminorm = 0, sup_v = 0, hbar = 0, Q = 0;
};

/// Q = [v]_{C^kappa(C_r)} / ((R - r)^{-kappa} sup_{C_R} |v| + |Hbar|_{kappa}), all cylinders at (0, center).
inline HolderMeasure holder_measure(const ProblemSpec& p, const GridFunction& v, double kappa, double R, double r,
                                    double R0, std::size_t vertex_stride, std::uint64_t seed) {
  const Point x0 = p.domain.center;
  HolderMeasure m;
  PairPolicy pol;
  pol.seed = seed;
  m.seminorm = holder_high(v, detail::cylinder(v, 0.0, x0, r), kappa, pol).value;
  for (std::size_t n : detail::cylinder(v, 0.0, x0, R)) m.sup_v = std::max(m.sup_v, std::abs(v[n]));
  if (p.H.envelope.Hbar) {
    const auto hb = GridFunction::sample(v.grid(), p.H.envelope.Hbar);
    m.hbar = f_kappa_norm(hb, kappa, R0, vertex_stride);
  }
  m.Q = m.seminorm / (std::pow(R - r, -kappa) * m.sup_v + m.hbar);
  return m;
}

inline Report run_holder(const Config& cfg, const Context& ctx) {
  const std::string_view sec = "holder";
  ProblemConfig base;
  base.delta = 0.5;
  base.data = "cosmix";
  base = read_problem(cfg, sec, base);
  const auto problems = cfg.strings(
      sec, "problems", std::vector<std::string>{"heat", "piecewise_t", "rough_x", "pucci_max", "drift", "isaacs"});
  const double kappa = cfg.number(sec, "kappa", 1.2);
  Config::require(kappa > 1 && kappa < 2, sec, "kappa", "must lie in (1,2)");
  const double R = cfg.number(sec, "R", 1.0), R0 = cfg.number(sec, "R0", 1.0);
  const auto radii = detail::positive_list(cfg, sec, "radii", {0.5, 0.25});
  for (double rr : radii) Config::require(rr < R, sec, "radii", "entries must be below R");
  const auto hs = detail::positive_list(cfg, sec, "h", {1.0 / 32, 1.0 / 64});
  const double factor = cfg.number(sec, "factor", 2.0);
  const auto stride = cfg.integer(sec, "vertex_stride", 4);
  const std::uint64_t seed = detail::seed_for(cfg, sec, ctx);

  Report r;
  r.experiment = "holder";
  r.params = {{"kappa", kappa}, {"R", R}, {"factor", factor}, {"scale", base.scale}};
  r.columns = {"h", "r", "seminorm", "sup_v", "hbar_norm", "Q"};
  struct Job {
    ProblemConfig c;
    double h;
  };
  std::vector<Job> jobs;
  for (const auto& op : problems) {
    ProblemConfig c = base;
    c.op = op;
    c.name = op;
    validate(c);
    for (double h : hs) jobs.push_back({c, h});
  }
  auto blocks = parallel_map(jobs.size(), ctx.threads, [&](std::size_t i) {
    const auto& [c, h] = jobs[i];
    const ProblemSpec p = build_problem(c);
    const auto v = solve(p, scheme_for(c, h, 0.0, seed)).v;
    std::vector<Row> out;
    for (double rr : radii) {
      const double s = c.scale;
      const auto m = holder_measure(p, v, kappa, s * R, s * rr, s * R0, static_cast<std::size_t>(stride), seed);
      out.push_back({c.name + " h=" + detail::tag(h) + " r=" + detail::tag(rr), {h, rr, m.seminorm, m.sup_v, m.hbar, m.Q}});
    }
    return out;
  });
  for (auto& b : blocks)
    for (auto& row : b) r.add(row.label, row.values);
  return r;
}

inline std::vector<Check> gate_holder(const Report& r) {
  std::map<std::string, std::vector<const Row*>> by;
  std::vector<std::string> order;
  for (const auto& row : r.rows) {
    const auto name = row.label.substr(0, row.label.find(" h="));
    if (!by.count(name)) order.push_back(name);
    by[name].push_back(&row);
  }
  const double factor = r.param("factor");
  std::vector<Check> out;
  // Q keyed by (h, r) for each problem; neighbours differ by one refinement or one halving of r.
  std::map<std::pair<double, double>, double> family_max;
  for (const auto& name : order) {
    std::map<std::pair<double, double>, double> Q;
    for (const Row* row : by[name]) {
      const auto key = std::make_pair(r.at(*row, "h"), r.at(*row, "r"));
      Q[key] = r.at(*row, "Q");
      family_max[key] = std::max(family_max[key], Q[key]);
    }
    double worst = 1.0;
    bool finite = true;
    for (const auto& [k, q] : Q) {
      finite = finite && std::isfinite(q);
      for (const auto& [k2, q2] : Q) {
        const bool refine = k2.second == k.second && std::abs(k2.first - k.first / 2) <= 1e-12 * k.first;
        const bool shrink = k2.first == k.first && std::abs(k2.second - k.second / 2) <= 1e-12 * k.second;
        if (refine || shrink) worst = std::max(worst, ratio_spread({q, q2}));
      }
    }
    std::string qs;
    for (const auto& [k, q] : Q) qs += (qs.empty() ? "" : " ") + fmt_short(q);
    out.push_back(detail::check(name + ": Q stable", finite && worst < factor,
                                "Q = " + qs + ", worst neighbour ratio " + fmt_short(worst)));
  }
  double worst = 1.0;
  for (const auto& [k, q] : family_max)
    for (const auto& [k2, q2] : family_max) {
      const bool refine = k2.second == k.second && std::abs(k2.first - k.first / 2) <= 1e-12 * k.first;
      const bool shrink = k2.first == k.first && std::abs(k2.second - k.second / 2) <= 1e-12 * k.second;
      if (refine || shrink) worst = std::max(worst, ratio_spread({q, q2}));
    }
  out.push_back(detail::check("family max Q stable", worst < factor, "worst neighbour ratio " + fmt_short(worst)));
  return out;
}

// ---------------------------------------------------------------------------
// ksat: saturation of the cutoff as K grows
// ---------------------------------------------------------------------------

inline Report run_ksat(const Config& cfg, const Context& ctx) {
  const std::string_view sec = "ksat";
  const auto Ks = cfg.numbers(sec, "K", std::vector<double>{0, 1, 10, 100, 1000, 2000});
  Config::require(Ks.size() >= 2, sec, "K", "need at least two values");
  for (std::size_t i = 1; i < Ks.size(); ++i) Config::require(Ks[i] > Ks[i - 1], sec, "K", "must increase");
  Config::require(Ks.front() >= 0, sec, "K", "must be nonnegative");
  const auto names = cfg.strings(sec, "instances", std::vector<std::string>{"heat_sine", "pucci_quadratic", "heat2d_sine", "affine"});
  const double tol = cfg.number(sec, "tolerance", 1e-10);
  const double scale = cfg.number(sec, "scale", 1.0);
  const std::uint64_t seed = detail::seed_for(cfg, sec, ctx);

  std::vector<std::pair<ProblemConfig, double>> jobs;  // problem and h
  for (const auto& n : names) {
    ProblemConfig c;
    c.name = n;
    c.scale = scale;
    c.delta = 0.5;
    double h = 1.0 / 32;
    if (n == "heat_sine") {
      c.op = "heat", c.data = "sine";
    } else if (n == "pucci_quadratic") {
      c.op = "pucci_max", c.data = "quadratic";
    } else if (n == "heat2d_sine") {
      c.op = "heat", c.data = "sine", c.dim = 2, h = 1.0 / 16;
    } else if (n == "affine") {
      c.op = "pucci_min", c.data = "affine";
    } else {
      throw ConfigError("ksat.instances: unknown instance '" + n + "'");
    }
    validate(c);
    jobs.push_back({c, h});
  }
  Report r;
  r.experiment = "ksat";
  r.params = {{"tolerance", tol}, {"scale", scale}};
  r.columns = {"K_from", "K_to", "gap", "cutoff_fraction", "affine"};
  auto blocks = parallel_map(jobs.size(), ctx.threads, [&](std::size_t i) {
    const auto& [c, h] = jobs[i];
    const ProblemSpec p = build_problem(c);
    std::vector<double> Kscaled;
    for (double K : Ks) Kscaled.push_back(K / (scale * scale));
    const auto rep = k_saturation(p, scheme_for(c, h, 0.0, seed), Kscaled);
    std::vector<Row> out;
    for (std::size_t k = 0; k + 1 < Ks.size(); ++k)
      out.push_back({c.name + " K=" + detail::tag(Ks[k]) + "->" + detail::tag(Ks[k + 1]),
                     {Ks[k], Ks[k + 1], rep.gaps[k], rep.cutoff_fraction[k + 1], c.data == "affine" ? 1.0 : 0.0}});
    return out;
  });
  for (auto& b : blocks)
    for (auto& row : b) r.add(row.label, row.values);
  return r;
}

inline std::vector<Check> gate_ksat(const Report& r) {
  std::map<std::string, std::vector<const Row*>> by;
  for (const auto& row : r.rows) by[row.label.substr(0, row.label.find(" K="))].push_back(&row);
  const double tol = r.param("tolerance");
  std::vector<Check> out;
  for (const auto& [name, rows] : by) {
    const Row* last = *std::max_element(rows.begin(), rows.end(),
                                        [&](auto* a, auto* b) { return r.at(*a, "K_to") < r.at(*b, "K_to"); });
    const double g = r.at(*last, "gap");
    out.push_back(detail::check(name + ": saturated at largest K", g <= tol,
                                "sup|v_K - v_K'| = " + fmt_short(g) + " at K = " + fmt_short(r.at(*last, "K_from"))));
    if (r.at(*last, "affine") == 1.0) {
      double worst = 0;
      for (const Row* row : rows) worst = std::max(worst, r.at(*row, "gap"));
      out.push_back(detail::check(name + ": gaps vanish for all K", worst <= tol, "max gap " + fmt_short(worst)));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// isaacs: a finite differential game, weak duality and envelope ordering
// ---------------------------------------------------------------------------

inline Report run_isaacs(const Config& cfg, const Context& ctx) {
  const std::string_view sec = "isaacs";
  ProblemConfig base;
  base.op = "isaacs";
  base.data = "cosmix";
  base = read_problem(cfg, sec, base);
  Config::require(base.op == "isaacs", sec, "operator", "must be isaacs");
  const double h = cfg.number(sec, "h", 1.0 / 64);
  const double kappa = cfg.number(sec, "kappa", 1.2), rr = cfg.number(sec, "r", 0.5);
  const std::uint64_t seed = detail::seed_for(cfg, sec, ctx);
  const double s = base.scale;

  const ProblemSpec game = build_problem(base);
  const IsaacsSpec& G = *game.H.game;
  auto variant = [&](int kind) {
    // 0: sup-inf, 1: inf-sup, 2: min over all pairs, 3: max over all pairs.
    IsaacsSpec v = G;
    if (kind == 1) v.inf_first = true;
    if (kind >= 2) {
      IsaacsSpec flat = G;
      flat.a.clear();
      flat.G.clear();
      std::vector<CoefficientMap> as;
      std::vector<LowerOrderFunction> gs;
      for (std::size_t i = 0; i < G.n_alpha(); ++i)
        for (std::size_t j = 0; j < G.n_beta(); ++j) as.push_back(G.a[i][j]), gs.push_back(G.G[i][j]);
      if (kind == 2) {
        flat.a = {as};
        flat.G = {gs};
      } else {
        for (std::size_t k = 0; k < as.size(); ++k) flat.a.push_back({as[k]}), flat.G.push_back({gs[k]});
      }
      v = flat;
    }
    ProblemSpec p = game;
    p.H = build_isaacs(v);
    return p;
  };
  const SchemeParams sp = scheme_for(base, h, 0.0, seed);
  auto sols = parallel_map(4, ctx.threads, [&](std::size_t k) { return solve(variant(static_cast<int>(k)), sp).v; });

  // Weak duality of the discrete Hamiltonian at every interior node of the sup-inf solution.
  const auto& v = sols[0];
  double min_gap = INFINITY;
  std::size_t nodes = 0;
  IsaacsSpec upper = G;
  upper.inf_first = true;
  for (std::size_t n = 0; n < v.grid().size(); ++n) {
    const std::size_t sidx = v.grid().spatial_index(n);
    if (v.grid().on_spatial_boundary(sidx)) continue;
    const Jet j = discrete_derivatives(v, n);
    const double t = v.grid().time(v.grid().time_index(n));
    const Point x = v.grid().point(sidx);
    min_gap = std::min(min_gap, ilab::detail::game_value(upper, j, t, x) - ilab::detail::game_value(G, j, t, x));
    ++nodes;
  }
  auto violation = [](const GridFunction& lo, const GridFunction& hi) {
    double w = 0;
    for (std::size_t n = 0; n < lo.grid().size(); ++n) w = std::max(w, lo[n] - hi[n]);
    return w;
  };

  // Degenerate games: a singleton table and a beta-independent table.
  ProblemConfig lin = base;
  lin.op = "heat";
  lin.a = base.a_low;
  const ProblemSpec direct = build_problem(lin);
  ProblemSpec single = direct;
  {
    IsaacsSpec one;
    one.dim = base.dim;
    one.delta = base.delta;
    one.x_dependent = one.t_dependent = false;
    const double a = base.a_low;
    const int d = base.dim;
    one.a = {{[=](double, const Point&) { return SymMat::scalar(d, a); }}};
    single.H = build_isaacs(one);
  }
  ProblemSpec bellman_game = direct, bellman = direct;
  {
    const int d = base.dim;
    IsaacsSpec b;
    b.dim = d;
    b.delta = base.delta;
    b.x_dependent = b.t_dependent = false;
    for (double a : {base.a_low, base.a_high}) {
      auto m = [=](double, const Point&) { return SymMat::scalar(d, a); };
      b.a.push_back({m, m, m});
    }
    bellman_game.H = build_isaacs(b);
    bellman.H = FullOperatorSpec::second_order(HomogOperator::max(
        {HomogOperator::linear(SymMat::scalar(d, base.a_low), base.delta),
         HomogOperator::linear(SymMat::scalar(d, base.a_high), base.delta)}));
  }
  auto degenerate = parallel_map(4, ctx.threads, [&](std::size_t k) {
    const ProblemSpec* ps[4] = {&direct, &single, &bellman, &bellman_game};
    return solve(*ps[k], sp).v;
  });

  const ProblemSpec& p0 = game;
  const auto hm = holder_measure(p0, v, kappa, s * 1.0, s * rr, s * 1.0, 4, seed);

  Report r;
  r.experiment = "isaacs";
  r.params = {{"tolerance", 1e-12}, {"scale", s}};
  r.columns = {"value"};
  r.add("min_duality_gap", {min_gap});
  r.add("duality_nodes", {static_cast<double>(nodes)});
  r.add("order_minmin_supinf", {violation(sols[2], sols[0])});
  r.add("order_supinf_infsup", {violation(sols[0], sols[1])});
  r.add("order_infsup_maxmax", {violation(sols[1], sols[3])});
  r.add("value_gap_infsup_supinf", {sup_distance(sols[0], sols[1])});
  r.add("singleton_vs_direct", {sup_distance(degenerate[0], degenerate[1])});
  r.add("bellman_vs_game", {sup_distance(degenerate[2], degenerate[3])});
  r.add("holder_seminorm", {hm.seminorm});
  r.add("holder_Q", {hm.Q});
  return r;
}

inline std::vector<Check> gate_isaacs(const Report& r) {
  auto val = [&](const std::string& label) {
    for (const auto& row : r.rows)
      if (row.label == label) return row.values.at(0);
    throw InputError("isaacs report: missing row " + label);
  };
  const double tol = r.param("tolerance");
  const double order = std::max({val("order_minmin_supinf"), val("order_supinf_infsup"), val("order_infsup_maxmax")});
  return {detail::check("weak duality at every node", val("min_duality_gap") >= -tol && val("duality_nodes") > 0,
                        "min(infsup - supinf) = " + fmt_short(val("min_duality_gap"))),
          detail::check("envelope ordering", order <= tol, "max violation " + fmt_short(order)),
          detail::check("singleton game is the direct solve", val("singleton_vs_direct") == 0.0,
                        "sup difference " + fmt_short(val("singleton_vs_direct"))),
          detail::check("beta-independent game is Bellman", val("bellman_vs_game") == 0.0,
                        "sup difference " + fmt_short(val("bellman_vs_game"))),
          detail::check("interior Holder ratio finite", std::isfinite(val("holder_Q")),
                        "Q = " + fmt_short(val("holder_Q")))};
}

// ---------------------------------------------------------------------------
// moll: mollifier constants and the barrier constant across epsilon
// ---------------------------------------------------------------------------

inline Report run_moll(const Config& cfg, const Context& ctx) {
  const std::string_view sec = "moll";
  ProblemConfig base;
  base.delta = 0.8;
  base.K = 1000;
  base.op = "heat";
  base = read_problem(cfg, sec, base, false);
  const auto data = cfg.strings(sec, "data", std::vector<std::string>{"abs", "abs15", "sqrt_t"});
  const auto kappas = cfg.numbers(sec, "kappas", std::vector<double>{1.0, 1.5, 1.0});
  Config::require(kappas.size() == data.size(), sec, "kappas", "needs one entry per datum");
  for (double k : kappas) Config::require(k > 0 && k <= 2, sec, "kappas", "entries must lie in (0,2]");
  const auto eps = detail::positive_list(cfg, sec, "eps", {0.25, 0.125, 0.0625, 0.03125, 0.015625});
  const double h = cfg.number(sec, "h", 1.0 / 128), dt = cfg.number(sec, "dt", 1.0 / 8192);
  const double factor = cfg.number(sec, "factor", 2.0);
  const std::uint64_t seed = detail::seed_for(cfg, sec, ctx);
  const double s = base.scale;

  Report r;
  r.experiment = "moll";
  r.params = {{"factor", factor}, {"scale", s}};
  r.columns = {"eps", "kappa", "N1", "N2", "N3", "barrier"};
  auto blocks = parallel_map(data.size(), ctx.threads, [&](std::size_t i) {
    ProblemConfig c = base;
    c.data = data[i];
    c.name = data[i];
    const ProblemSpec p = build_problem(c);
    const auto u = solve(p, scheme_for(c, h, dt, seed)).v;
    const auto g = GridFunction::sample(u.grid(), p.g);
    std::vector<Row> out;
    for (double e : eps) {
      const MollifierSpec spec(s * e, kappas[i]);
      const auto m = mollify(g, spec);
      const double N = barrier_check(u, m.g_eps, spec, p.domain.center, s * 1.0).N;
      out.push_back({c.name + " eps=" + detail::tag(e), {e, kappas[i], m.N1, m.N2, m.N3, N}});
    }
    return out;
  });
  for (auto& b : blocks)
    for (auto& row : b) r.add(row.label, row.values);
  return r;
}

inline std::vector<Check> gate_moll(const Report& r) {
  std::map<std::string, std::vector<const Row*>> by;
  std::vector<std::string> order;
  for (const auto& row : r.rows) {
    const auto name = row.label.substr(0, row.label.find(" eps="));
    if (!by.count(name)) order.push_back(name);
    by[name].push_back(&row);
  }
  const double factor = r.param("factor");
  std::vector<Check> out;
  for (const auto& name : order) {
    for (const char* col : {"N1", "N2", "barrier"}) {
      std::vector<double> xs;
      std::string list;
      for (const Row* row : by[name]) {
        xs.push_back(r.at(*row, col));
        list += (list.empty() ? "" : " ") + fmt_short(xs.back());
      }
      const double sp = ratio_spread(xs);
      out.push_back(detail::check(name + ": " + col + " within factor " + fmt_short(factor), sp < factor,
                                  "spread " + fmt_short(sp) + " [" + list + "]"));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// solve: a single configured problem, exported as CSV and raw grid
// ---------------------------------------------------------------------------

struct SolveOutput {
  Report report;
  GridFunction v;
};

inline SolveOutput run_solve_full(const Config& cfg, const Context& ctx) {
  const std::string_view sec = "solve";
  ProblemConfig c;
  c.op = "heat";
  c.data = "heat_quadratic";
  // The Pucci term of |x|^2 is 2 / delta_hat; K must exceed it for the cutoff to stay idle.
  c.K = 100.0;
  c = read_problem(cfg, sec, c);
  const double h = cfg.number(sec, "h", 1.0 / 32), dt = cfg.number(sec, "dt", 0.0);
  Config::require(h > 0, sec, "h", "must be positive");
  const bool exact = cfg.boolean(sec, "exact", c.data == "heat_quadratic" && c.op == "heat");
  const std::uint64_t seed = detail::seed_for(cfg, sec, ctx);
  const ProblemSpec p = build_problem(c);
  const auto sol = solve(p, scheme_for(c, h, dt, seed));
  const auto& g = sol.v.grid();
  double bnd = 0, sup = 0, err = 0;
  for (std::size_t n = 0; n < g.size(); ++n) {
    const std::size_t k = g.time_index(n), sidx = g.spatial_index(n);
    const double gv = p.g(g.time(k), g.point(sidx));
    if (k + 1 == g.nt() || g.on_spatial_boundary(sidx)) bnd = std::max(bnd, std::abs(sol.v[n] - gv));
    sup = std::max(sup, std::abs(sol.v[n]));
    err = std::max(err, std::abs(sol.v[n] - gv));
  }
  Report r;
  r.experiment = "solve";
  r.params = {{"exact", exact ? 1.0 : 0.0}, {"tolerance", 1e-10}};
  r.columns = {"value"};
  r.add("nodes", {static_cast<double>(g.size())});
  r.add("time_slices", {static_cast<double>(g.nt())});
  r.add("substeps", {static_cast<double>(sol.substeps)});
  r.add("dt_step", {sol.dt_step});
  r.add("max_rate", {sol.max_rate});
  r.add("cutoff_fraction", {sol.cutoff_fraction});
  r.add("sup_abs_v", {sup});
  r.add("boundary_error", {bnd});
  r.add("error_vs_data", {err});
  (void)ctx;
  return {std::move(r), sol.v};
}

inline Report run_solve(const Config& cfg, const Context& ctx) { return run_solve_full(cfg, ctx).report; }

inline std::vector<Check> gate_solve(const Report& r) {
  auto val = [&](const std::string& label) {
    for (const auto& row : r.rows)
      if (row.label == label) return row.values.at(0);
    throw InputError("solve report: missing row " + label);
  };
  std::vector<Check> out{detail::check("boundary identity", val("boundary_error") == 0.0,
                                       "max |v - g| on the parabolic boundary " + fmt_short(val("boundary_error"))),
                         detail::check("finite solution", std::isfinite(val("sup_abs_v")), "sup |v| " + fmt_short(val("sup_abs_v")))};
  if (r.param("exact") == 1.0)
    out.push_back(detail::check("exact solution", val("error_vs_data") <= r.param("tolerance"),
                                "max error " + fmt_short(val("error_vs_data"))));
  return out;
}

// ---------------------------------------------------------------------------
// Registry
// ---------------------------------------------------------------------------

struct Experiment {
  std::string name;
  std::function<Report(const Config&, const Context&)> run;
  std::function<std::vector<Check>(const Report&)> gate;
  std::vector<std::string_view> keys;  // section keys besides the problem keys
  bool problem = true;                 // whether the section also takes problem keys
};

inline const std::vector<Experiment>& experiments() {
  static const std::vector<Experiment> all{
      {"represent", run_represent, gate_represent, {"cases", "reconstruction_cases", "deltas", "seed"}, false},
      {"freeze", run_freeze, gate_freeze, {"amplitudes", "kappa", "h", "dt", "frozen_cells", "seed"}},
      {"affine", run_affine, gate_affine, {"instances", "radii", "kappa0", "factor", "h", "dt", "seed"}},
      {"holder", run_holder, gate_holder, {"problems", "kappa", "R", "R0", "radii", "h", "factor", "vertex_stride", "seed"}},
      {"ksat", run_ksat, gate_ksat, {"K", "instances", "tolerance", "scale", "seed"}, false},
      {"isaacs", run_isaacs, gate_isaacs, {"h", "kappa", "r", "seed"}},
      {"moll", run_moll, gate_moll, {"kappas", "eps", "h", "dt", "factor", "seed"}},
      {"solve", run_solve, gate_solve, {"h", "dt", "exact", "seed"}}};
  return all;
}

/// Throws ConfigError when the experiment's section holds an unrecognized key.
inline void check_section(const Experiment& e, const Config& cfg) {
  std::vector<std::string_view> allowed = e.keys;
  if (e.problem) allowed.insert(allowed.end(), problem_keys().begin(), problem_keys().end());
  cfg.check_keys(e.name, allowed);
}

inline const Experiment& find_experiment(const std::string& name) {
  for (const auto& e : experiments())
    if (e.name == name) return e;
  throw InputError("unknown experiment '" + name + "'");
}

/// Checks recomputed from the stored rows and parameters only.
inline std::vector<Check> regate(const Report& r) { return find_experiment(r.experiment).gate(r); }

/// Runs and gates one experiment.
inline Report run_experiment(const std::string& name, const Config& cfg, const Context& ctx) {
  const auto& e = find_experiment(name);
  check_section(e, cfg);
  const auto t0 = std::chrono::steady_clock::now();
  Report r = e.run(cfg, ctx);
  r.checks = e.gate(r);
  r.notes.push_back("wall time " + fmt_short(detail::elapsed(t0)) + " s");
  return r;
}

}  // namespace ilab::harness
