#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dmpath/sim.hpp"

namespace dmpath::cli {

/// Malformed or inconsistent configuration (exit code 1).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The requested program has no feasible point (exit code 2).
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { kOk = 0, kConfigFailure = 1, kInfeasible = 2, kSolverFailure = 3 };

/// Parses a scenario document. File units are Mbps and ms; the result is SI.
sim::Scenario parse_scenario(std::string_view json_text);
sim::Scenario load_scenario(const std::filesystem::path& path);

/// "15/16" when x is a fraction with denominator <= 10^4, else a decimal.
std::string format_fraction(double x);

/// Human-readable combination label, e.g. "(1,2)".
std::string combination_label(const Combination& combo);

struct SolveOptions {
  /// When set, minimize cost subject to quality >= min_quality instead.
  std::optional<double> min_quality;
  std::optional<std::filesystem::path> csv;
};

struct SimulateOptions {
  std::optional<std::uint64_t> seed;
  std::size_t runs = 1;
  std::optional<std::filesystem::path> csv;
};

enum class SweepAxis { kLambda, kDelta, kBandwidthError, kDelayError, kLossError };

SweepAxis parse_axis(std::string_view name);

struct SweepOptions {
  SweepAxis axis = SweepAxis::kLambda;
  std::vector<double> values;
  /// User paths (1-based) an error axis applies to; empty = all.
  std::vector<std::size_t> error_paths;
  bool skip_sim = false;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> csv;
};

struct SweepRow {
  double value = 0.0;
  double theoretical_q = 0.0;
  std::optional<double> simulated_q;
  double single_path_best_q = 0.0;
};

struct BenchOptions {
  std::size_t n_max = 5;
  std::size_t m_max = 3;
  std::size_t repeats = 100;
  std::size_t batches = 5;
  std::optional<std::filesystem::path> csv;
};

struct BenchRow {
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t variables = 0;
  std::size_t repeats = 0;
  double mean_solve_s = 0.0;
  // Blackhole augmentation, program construction and the solve together.
  double mean_plan_s = 0.0;
};

// Each command prints a table to `out` and returns an exit code. Errors are
// reported as exceptions; see run_guarded.
int cmd_solve(const sim::Scenario& scenario, const SolveOptions& options, std::ostream& out);
int cmd_timeouts(const sim::Scenario& scenario, const std::optional<std::filesystem::path>& csv,
                 std::ostream& out);
int cmd_simulate(const sim::Scenario& scenario, const SimulateOptions& options,
                 std::ostream& out);
int cmd_sweep(const sim::Scenario& scenario, const SweepOptions& options, std::ostream& out);
int cmd_bench(const BenchOptions& options, std::ostream& out);

std::vector<SweepRow> sweep_rows(const sim::Scenario& scenario, const SweepOptions& options);

/// Network used by the solve-time benchmark: n paths counting the blackhole.
sim::Scenario bench_scenario(std::size_t n, std::size_t m);
std::vector<BenchRow> bench_rows(const BenchOptions& options);

/// Runs `body`, mapping exceptions to exit codes and messages on `err`.
int run_guarded(const std::function<int()>& body, std::ostream& err);

}  // namespace dmpath::cli
