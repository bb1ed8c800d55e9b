#pragma once

// isaacs-lab command line: one subcommand per experiment plus `all` and
// `regate`. Exit codes: 0 all checks pass, 1 some check fails, 2 bad
// configuration, 3 numerical failure.

#include <chrono>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ilab/harness/experiments.hpp"

namespace ilab::harness {

enum ExitCode : int { kPass = 0, kCheckFailed = 1, kConfigError = 2, kNumericalError = 3 };

struct CliOptions {
  std::string config;
  std::string out = "isaacs-lab-out";
  unsigned threads = 0;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string report;
};

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::function<void(std::ostream&)>& body) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError("cannot write " + path.string());
  body(os);
}

inline int run_named(const std::vector<std::string>& names, const CliOptions& o, std::ostream& out) {
  Config cfg = Config::load(o.config);
  Context ctx;
  ctx.threads = o.threads ? o.threads : default_threads();
  if (o.seed_given) ctx.seed = o.seed, ctx.seed_from_cli = true;
  for (const auto& name : names) check_section(find_experiment(name), cfg);
  std::filesystem::create_directories(o.out);

  bool pass = true;
  for (const auto& name : names) {
    if (name == "solve") {
      const auto t0 = std::chrono::steady_clock::now();
      auto so = run_solve_full(cfg, ctx);
      so.report.checks = gate_solve(so.report);
      so.report.notes.push_back("wall time " + fmt_short(harness::detail::elapsed(t0)) + " s");
      write_file(std::filesystem::path(o.out) / "solution.csv", [&](std::ostream& os) { write_csv(so.v, os); });
      write_file(std::filesystem::path(o.out) / "solution.raw", [&](std::ostream& os) { write_raw(so.v, os); });
      write_file(std::filesystem::path(o.out) / "solve.csv", [&](std::ostream& os) { write_report_csv(so.report, os); });
      print_summary(so.report, out);
      pass = pass && so.report.pass();
      continue;
    }
    const Report r = run_experiment(name, cfg, ctx);
    write_file(std::filesystem::path(o.out) / (name + ".csv"), [&](std::ostream& os) { write_report_csv(r, os); });
    print_summary(r, out);
    pass = pass && r.pass();
  }
  out << (pass ? "OVERALL PASS" : "OVERALL FAIL") << "\n";
  return pass ? kPass : kCheckFailed;
}

inline int run_regate(const CliOptions& o, std::ostream& out) {
  std::ifstream is(o.report);
  if (!is) throw ConfigError("cannot read report " + o.report);
  Report r = read_report_csv(is);
  r.checks = regate(r);
  print_summary(r, out);
  return r.pass() ? kPass : kCheckFailed;
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"isaacs-lab: desk-scale experiments for cutoff Isaacs/HJB equations"};
  app.require_subcommand(1);
  CliOptions o;
  std::string chosen;

  std::vector<CLI::Option*> seed_opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "TOML configuration file")->required();
    sub->add_option("--out", o.out, "output directory for CSV files");
    sub->add_option("--threads", o.threads, "worker threads (default: hardware concurrency)");
    seed_opts.push_back(sub->add_option("--seed", o.seed, "seed overriding every configured seed"));
  };
  std::vector<std::string> names;
  for (const auto& e : experiments()) names.push_back(e.name);
  for (const auto& n : names) {
    auto* sub = app.add_subcommand(n, "run the " + n + " experiment");
    add_common(sub);
    sub->callback([&chosen, n] { chosen = n; });
  }
  auto* all = app.add_subcommand("all", "run every experiment with a section in the config");
  add_common(all);
  all->callback([&chosen] { chosen = "all"; });
  auto* rg = app.add_subcommand("regate", "recompute the checks of a saved report CSV");
  rg->add_option("--report", o.report, "report CSV written by a previous run")->required();
  rg->callback([&chosen] { chosen = "regate"; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kPass : kConfigError;
  }
  for (const auto* opt : seed_opts)
    if (opt->count() > 0) o.seed_given = true;

  try {
    if (chosen == "regate") return detail::run_regate(o, out);
    std::vector<std::string> run;
    if (chosen == "all") {
      const Config cfg = Config::load(o.config);
      for (const auto& n : names)
        if (cfg.has_section(n)) run.push_back(n);
      if (run.empty()) throw ConfigError(o.config + ": no experiment sections");
    } else {
      run.push_back(chosen);
    }
    return detail::run_named(run, o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InputError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const AdmissibilityError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  }
}

}  // namespace ilab::harness
