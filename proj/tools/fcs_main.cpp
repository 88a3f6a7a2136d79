// fcs: command-line front end for energy-variation statistics experiments.
//
//   fcs run <config.yaml> [--max-dim N] [--workers N]
//   fcs check-inequalities --trials N --dim D --seed S
//   fcs sweep <config.yaml> --param t|alpha|C --values v1,v2,...
//
// Exit status: 0 when every check passes, 1 when a bound check fails,
// 2 on errors.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fcs/experiment.hpp"

namespace {

constexpr int kExitFail = 1;
constexpr int kExitError = 2;

void print_summary(const fcs::RunReport& r) {
  std::printf("model %s (dim %zu), alpha_m = %g, R(alpha_m) = %.6g\n", r.model_label.c_str(), r.dim,
              r.config.alpha_m, r.regularity.r_value);
  std::printf("%12s %14s %14s %14s %6s %12s %12s %6s %10s\n", "t", "mean", "exp_moment",
              "2e^R", "thm", "tail", "tail_bound", "tail", "1st-law");
  for (const auto& rec : r.records) {
    std::printf("%12.6g %14.6e %14.6e %14.6e %6s %12.4e %12.4e %6s %10.2e\n", rec.t, rec.mean,
                rec.exp_moment, rec.theorem_bound, rec.theorem_pass ? "ok" : "FAIL",
                rec.tail_empirical, rec.tail_bound, rec.tail_pass ? "ok" : "FAIL",
                rec.first_law_residual);
  }
  std::printf("overall: %s\n", r.pass ? "PASS" : "FAIL");
  std::fprintf(stderr, "timings: setup %.3fs, records %.3fs, total %.3fs\n",
               r.timings.setup_seconds, r.timings.records_seconds, r.timings.total_seconds);
}

fcs::ExperimentConfig load(const std::string& path, std::optional<std::size_t> max_dim) {
  fcs::ExperimentConfig cfg = fcs::load_config(path);
  if (max_dim) cfg.max_dim = *max_dim;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-time measurement statistics of the total energy variation"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::size_t> max_dim;
  unsigned workers = 0;

  auto* run = app.add_subcommand("run", "Run an experiment described by a config file");
  run->add_option("config", config_path, "YAML config file")->required()->check(CLI::ExistingFile);
  run->add_option("--max-dim", max_dim, "Override the Hilbert-space dimension budget");
  run->add_option("--workers", workers, "Worker threads (0 = all cores; FCS_MAX_WORKERS caps)");

  int trials = 100;
  std::size_t dim = 16;
  std::size_t gronwall_dim = 12;
  double max_norm = 3.0;
  std::uint64_t seed = 1;
  auto* ineq = app.add_subcommand("check-inequalities",
                                  "Randomized checks of tr(XY) <= |X|tr(Y) and the Gronwall bound");
  ineq->add_option("--trials", trials, "Random pairs per inequality")->check(CLI::NonNegativeNumber);
  ineq->add_option("--dim", dim, "Maximum dimension for psd pairs")->check(CLI::PositiveNumber);
  ineq->add_option("--gronwall-dim", gronwall_dim, "Maximum dimension for Hermitian pairs")
      ->check(CLI::PositiveNumber);
  ineq->add_option("--max-norm", max_norm, "Maximum operator norm of T and S")
      ->check(CLI::PositiveNumber);
  ineq->add_option("--seed", seed, "Random seed");

  std::string param;
  std::vector<double> values;
  auto* sweep = app.add_subcommand("sweep", "Repeat a config over a grid of t, alpha or C");
  sweep->add_option("config", config_path, "YAML config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("--param", param, "Parameter to override")
      ->required()
      ->check(CLI::IsMember({"t", "alpha", "C"}));
  sweep->add_option("--values", values, "Comma-separated values")->required()->delimiter(',');
  sweep->add_option("--max-dim", max_dim, "Override the Hilbert-space dimension budget");
  sweep->add_option("--workers", workers, "Worker threads (0 = all cores; FCS_MAX_WORKERS caps)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (*run) {
      const auto report = fcs::run_experiment(load(config_path, max_dim), {workers, true});
      print_summary(report);
      return report.pass ? 0 : kExitFail;
    }
    if (*ineq) {
      const auto r = fcs::fuzz_inequalities(trials, dim, gronwall_dim, max_norm, seed);
      std::printf("trace inequality:   %d trials, %d failures, worst tr(XY)/(|X|trY) = %.12f\n",
                  r.trace_trials, r.trace_failures, r.worst_trace_ratio);
      std::printf("gronwall inequality: %d trials, %d failures, worst lhs/rhs = %.12f\n",
                  r.gronwall_trials, r.gronwall_failures, r.worst_gronwall_ratio);
      return r.trace_failures + r.gronwall_failures == 0 ? 0 : kExitFail;
    }
    if (*sweep) {
      const auto cfg = load(config_path, max_dim);
      const auto points = fcs::run_sweep(cfg, param, values, {workers, true});
      const std::string csv = fcs::sweep_csv(param, points);
      const auto path = cfg.output.dir / "sweep.csv";
      std::ofstream(path, std::ios::binary | std::ios::trunc) << csv;
      std::cout << csv;
      bool pass = true;
      for (const auto& p : points) pass = pass && p.report.pass;
      std::printf("overall: %s\n", pass ? "PASS" : "FAIL");
      return pass ? 0 : kExitFail;
    }
  } catch (const fcs::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
