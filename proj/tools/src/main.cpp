#include <iostream>

#include "CLI11.hpp"
#include "dmpath/cli/cli.hpp"

namespace cli = dmpath::cli;

int main(int argc, char** argv) {
  CLI::App app{"Deadline-aware multipath assignment: solve, simulate, sweep, bench"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string csv_path;
  std::optional<std::size_t> attempts;
  app.add_option("--config", config_path, "Scenario JSON (Mbps / ms units)");
  app.add_option("--seed", seed, "Master RNG seed for simulations");
  app.add_option("--csv", csv_path, "Write machine-readable results here");
  app.add_option("--attempts", attempts, "Transmission attempts per datum (m)")
      ->check(CLI::PositiveNumber);

  auto* solve = app.add_subcommand("solve", "Solve the assignment LP");
  std::optional<double> min_quality;
  solve->add_option("--min-quality", min_quality,
                    "Minimize cost subject to this quality instead (0..1)");

  auto* timeouts = app.add_subcommand("timeouts", "Show retransmission timeouts");

  auto* simulate = app.add_subcommand("simulate", "Simulate the solved assignment");
  std::size_t runs = 1;
  simulate->add_option("--runs", runs, "Consecutive seeds to simulate")
      ->check(CLI::PositiveNumber);

  auto* sweep = app.add_subcommand("sweep", "Re-solve and simulate across parameter values");
  std::string axis = "lambda";
  std::vector<double> values;
  std::vector<std::size_t> error_paths;
  bool skip_sim = false;
  sweep->add_option("--axis", axis, "lambda | delta | bandwidth_err | delay_err | loss_err")
      ->check(CLI::IsMember({"lambda", "delta", "bandwidth_err", "delay_err", "loss_err"}));
  sweep->add_option("--values", values, "Mbps for lambda, ms for delta, factors otherwise")
      ->delimiter(',');
  sweep->add_option("--error-path", error_paths, "Paths (1-based) an error axis distorts")
      ->delimiter(',');
  sweep->add_flag("--skip-sim", skip_sim, "Theory columns only");

  auto* bench = app.add_subcommand("bench", "Time LP solves across n and m");
  cli::BenchOptions bench_opts;
  bench->add_option("--n-max", bench_opts.n_max, "Largest path count including the blackhole");
  bench->add_option("--m-max", bench_opts.m_max, "Largest attempt count");
  bench->add_option("--repeats", bench_opts.repeats, "Solves per batch");
  bench->add_option("--batches", bench_opts.batches, "Batches per (n, m); the fastest is kept");

  CLI11_PARSE(app, argc, argv);

  std::optional<std::filesystem::path> csv;
  if (!csv_path.empty()) csv = csv_path;

  return cli::run_guarded(
      [&]() -> int {
        if (bench->parsed()) {
          bench_opts.csv = csv;
          return cli::cmd_bench(bench_opts, std::cout);
        }
        if (config_path.empty()) throw cli::ConfigError("--config is required");
        dmpath::sim::Scenario scenario = cli::load_scenario(config_path);
        if (attempts) {
          scenario.model.set_attempts(*attempts);
          scenario.physical.set_attempts(*attempts);
        }
        if (solve->parsed()) return cli::cmd_solve(scenario, {min_quality, csv}, std::cout);
        if (timeouts->parsed()) return cli::cmd_timeouts(scenario, csv, std::cout);
        if (simulate->parsed()) return cli::cmd_simulate(scenario, {seed, runs, csv}, std::cout);
        cli::SweepOptions opts;
        opts.axis = cli::parse_axis(axis);
        opts.values = values;
        opts.error_paths = error_paths;
        opts.skip_sim = skip_sim;
        opts.seed = seed;
        opts.csv = csv;
        return cli::cmd_sweep(scenario, opts, std::cout);
      },
      std::cerr);
}
