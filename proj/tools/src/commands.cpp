#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <random>
#include <sstream>

#include "dmpath/cli/cli.hpp"
#include "dmpath/rational.hpp"

namespace dmpath::cli {

namespace {

std::ofstream open_csv(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write " + path.string());
  out << std::setprecision(17);
  return out;
}

std::string percent(double q) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << 100.0 * q << "%";
  return s.str();
}

std::string mbps(double bits_per_s) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(4) << bits_per_s / 1e6 << " Mbps";
  return s.str();
}

std::string ms(double seconds) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(1) << seconds * 1e3 << " ms";
  return s.str();
}

void require_optimal(const Solution& s) {
  if (s.status == SolveStatus::kInfeasible) throw InfeasibleError("linear program is infeasible");
  if (!s.optimal()) {
    throw std::runtime_error(std::string("solver finished with status ") + to_string(s.status));
  }
}

// Paths of a combination as printed: a path index per attempt, blackhole = 0.
std::string path_list(const Combination& c) {
  std::string out;
  for (std::size_t k = 0; k < c.attempts(); ++k) {
    if (k) out += ' ';
    out += std::to_string(c[k]);
  }
  return out;
}

sim::Scenario with_attempts_checked(const sim::Scenario& s) {
  if (s.random_delays() && s.model.attempts() != 2) {
    throw ConfigError("random-delay configs support exactly two attempts");
  }
  return s;
}

}  // namespace

std::string format_fraction(double x) {
  if (auto r = to_rational(x, 10000, 1e-9)) return r->str();
  std::ostringstream s;
  s << std::setprecision(9) << x;
  return s.str();
}

std::string combination_label(const Combination& combo) {
  std::string out = "(";
  for (std::size_t k = 0; k < combo.attempts(); ++k) {
    if (k) out += ',';
    out += std::to_string(combo[k]);
  }
  return out + ")";
}

SweepAxis parse_axis(std::string_view name) {
  if (name == "lambda") return SweepAxis::kLambda;
  if (name == "delta") return SweepAxis::kDelta;
  if (name == "bandwidth_err") return SweepAxis::kBandwidthError;
  if (name == "delay_err") return SweepAxis::kDelayError;
  if (name == "loss_err") return SweepAxis::kLossError;
  throw ConfigError("unknown sweep axis '" + std::string(name) + "'");
}

int cmd_solve(const sim::Scenario& scenario, const SolveOptions& options, std::ostream& out) {
  const sim::Plan plan = sim::make_plan(with_attempts_checked(scenario));
  require_optimal(plan.solution);
  const Network& net = plan.model;

  LpProblem lp = plan.lp;
  Solution sol = plan.solution;
  if (options.min_quality) {
    lp = build_cost_lp(net, scenario.workload, *options.min_quality, plan.coefficients);
    sol = solve(lp);
    require_optimal(sol);
    prefer_fewer_blackhole_attempts(net, lp, sol.x);
  }

  const std::vector<double> x = sol.x;
  const double q = quality(plan.coefficients, x);
  const double c = total_cost(plan.coefficients, x);
  const auto s = sent_rate(plan.coefficients, x);

  out << (options.min_quality ? "minimum-cost assignment" : "maximum-quality assignment")
      << " (" << net.size() - 1 << " paths + blackhole, " << net.attempts() << " attempts, "
      << x.size() << " combinations)\n";
  out << std::left << std::setw(14) << "combination" << std::setw(14) << "x" << "delivery\n";
  for (std::size_t l = 0; l < x.size(); ++l) {
    if (x[l] <= 1e-12) continue;
    out << std::left << std::setw(14) << combination_label(net.combination(l)) << std::setw(14)
        << format_fraction(x[l]) << std::setprecision(6) << plan.coefficients[l].delivery << "\n";
  }
  out << "Q = " << percent(q) << "\n";
  out << "C = " << std::setprecision(9) << c << " per second\n";
  // Row 0 is the blackhole: its bandwidth is the offered rate.
  for (std::size_t i = 0; i < net.size(); ++i) {
    out << "S_" << i << " = " << mbps(s[i]) << " of " << mbps(net.path(i).bandwidth_bits_per_s)
        << (i == 0 ? " (blackhole)" : "") << "\n";
  }
  out << "undelivered = " << mbps(scenario.workload.rate_bits_per_s * (1.0 - q)) << "\n";

  if (options.csv) {
    auto csv = open_csv(*options.csv);
    csv << "combination,paths,x,delivery_prob\n";
    for (std::size_t l = 0; l < x.size(); ++l) {
      csv << l << ',' << path_list(net.combination(l)) << ',' << x[l] << ','
          << plan.coefficients[l].delivery << '\n';
    }
  }
  return kOk;
}

int cmd_timeouts(const sim::Scenario& scenario, const std::optional<std::filesystem::path>& csv_path,
                 std::ostream& out) {
  const sim::Scenario s = with_attempts_checked(scenario);
  s.validate();
  const Network net = augment_blackhole(s.model, s.workload);
  const std::size_t n = net.size();

  struct Row {
    std::size_t first, second;
    stochastic::TimeoutChoice choice;
    double retrans;
  };
  std::vector<Row> rows;

  if (s.random_delays()) {
    const stochastic::StochasticModel sm(net, s.workload, s.stochastic);
    const auto table = sm.optimize_timeouts();
    for (std::size_t i = 1; i < n; ++i) {
      for (std::size_t j = 1; j < n; ++j) {
        const auto& c = table.at(i, j);
        rows.push_back({i, j, c, c.feasible ? sm.retrans_prob(i, c.chosen_s) : 0.0});
      }
    }
    out << "optimized retransmission timeouts (ack path " << sm.ack_path() << ")\n";
  } else {
    // Fixed delays: d_i + d_min + guard, usable when the retransmission on j
    // can still arrive in time.
    const std::size_t dmin = min_delay_path(net);
    for (std::size_t i = 1; i < n; ++i) {
      for (std::size_t j = 1; j < n; ++j) {
        stochastic::TimeoutChoice c;
        const double t = fixed_timeout(net, i, s.guard_s);
        c.chosen_s = c.plateau_lo_s = c.plateau_hi_s = t;
        c.feasible = net.path(i).delay.mean() + net.path(dmin).delay.mean() +
                         net.path(j).delay.mean() <=
                     s.workload.lifetime_s + kDeadlineSlack_s;
        c.objective_max = c.feasible ? 1.0 : 0.0;
        rows.push_back({i, j, c, net.path(i).loss_prob});
      }
    }
    out << "fixed retransmission timeouts (d_i + d_min + guard " << ms(s.guard_s) << ")\n";
  }

  out << std::left << std::setw(10) << "pair" << std::setw(14) << "timeout" << std::setw(26)
      << "plateau" << "P(retrans)\n";
  for (const auto& r : rows) {
    const std::string pair = "(" + std::to_string(r.first) + "," + std::to_string(r.second) + ")";
    out << std::left << std::setw(10) << pair;
    if (!r.choice.feasible) {
      out << "infeasible\n";
      continue;
    }
    out << std::setw(14) << ms(r.choice.chosen_s) << std::setw(26)
        << ("[" + ms(r.choice.plateau_lo_s) + ", " + ms(r.choice.plateau_hi_s) + "]")
        << std::setprecision(6) << r.retrans << "\n";
  }

  if (csv_path) {
    auto csv = open_csv(*csv_path);
    csv << "first_path,second_path,feasible,chosen_s,plateau_lo_s,plateau_hi_s,objective_max,"
           "retrans_prob\n";
    for (const auto& r : rows) {
      csv << r.first << ',' << r.second << ',' << (r.choice.feasible ? 1 : 0) << ','
          << r.choice.chosen_s << ',' << r.choice.plateau_lo_s << ',' << r.choice.plateau_hi_s
          << ',' << r.choice.objective_max << ',' << r.retrans << '\n';
    }
  }
  return kOk;
}

int cmd_simulate(const sim::Scenario& scenario, const SimulateOptions& options,
                 std::ostream& out) {
  const sim::Plan plan = sim::make_plan(with_attempts_checked(scenario));
  require_optimal(plan.solution);
  const std::uint64_t first_seed = options.seed.value_or(scenario.sim.seed);
  const std::size_t n = plan.model.size();

  std::optional<std::ofstream> csv;
  if (options.csv) {
    csv = open_csv(*options.csv);
    *csv << "seed,generated,delivered_in_time,realized_quality,realized_cost";
    for (std::size_t i = 1; i < n; ++i) *csv << ",bits_sent_path_" << i;
    *csv << '\n';
  }

  out << "LP quality " << percent(plan.solution.objective_value) << "\n";
  out << std::left << std::setw(8) << "seed" << std::setw(12) << "generated" << std::setw(12)
      << "in time" << std::setw(12) << "quality" << "cost/s\n";
  for (std::size_t r = 0; r < std::max<std::size_t>(options.runs, 1); ++r) {
    const auto report = sim::simulate(scenario, plan, first_seed + r);
    out << std::left << std::setw(8) << report.seed << std::setw(12) << report.generated
        << std::setw(12) << report.delivered_in_time << std::setw(12)
        << percent(report.realized_quality) << std::setprecision(9) << report.realized_cost
        << "\n";
    if (csv) {
      *csv << report.seed << ',' << report.generated << ',' << report.delivered_in_time << ','
           << report.realized_quality << ',' << report.realized_cost;
      for (std::size_t i = 1; i < n; ++i) *csv << ',' << report.paths[i].bits_sent;
      *csv << '\n';
    }
  }
  return kOk;
}

std::vector<SweepRow> sweep_rows(const sim::Scenario& scenario, const SweepOptions& options) {
  std::vector<SweepRow> rows;
  rows.reserve(options.values.size());
  for (double v : options.values) {
    sim::Scenario s = with_attempts_checked(scenario);
    switch (options.axis) {
      case SweepAxis::kLambda:
        s.workload.rate_bits_per_s = v * 1e6;
        break;
      case SweepAxis::kDelta:
        s.workload.lifetime_s = v * 1e-3;
        break;
      case SweepAxis::kBandwidthError:
        s = sim::distort(s, sim::ErrorAxis::kBandwidth, v, options.error_paths);
        break;
      case SweepAxis::kDelayError:
        s = sim::distort(s, sim::ErrorAxis::kDelay, v, options.error_paths);
        break;
      case SweepAxis::kLossError:
        s = sim::distort(s, sim::ErrorAxis::kLoss, v, options.error_paths);
        break;
    }
    const sim::Plan plan = sim::make_plan(s);
    require_optimal(plan.solution);
    SweepRow row;
    row.value = v;
    row.theoretical_q = plan.solution.objective_value;
    row.single_path_best_q = sim::best_single_path_quality(plan);
    if (!options.skip_sim) row.simulated_q = sim::simulate(s, plan, options.seed).realized_quality;
    rows.push_back(row);
  }
  return rows;
}

int cmd_sweep(const sim::Scenario& scenario, const SweepOptions& options, std::ostream& out) {
  const auto rows = sweep_rows(scenario, options);
  out << std::left << std::setw(12) << "value" << std::setw(14) << "theoretical" << std::setw(14)
      << "simulated" << "single path\n";
  for (const auto& r : rows) {
    out << std::left << std::setw(12) << std::setprecision(6) << r.value << std::setw(14)
        << percent(r.theoretical_q) << std::setw(14)
        << (r.simulated_q ? percent(*r.simulated_q) : std::string("-"))
        << percent(r.single_path_best_q) << "\n";
  }
  if (options.csv) {
    auto csv = open_csv(*options.csv);
    csv << "value,theoretical_q,simulated_q,single_path_best_q\n";
    for (const auto& r : rows) {
      csv << r.value << ',' << r.theoretical_q << ',';
      if (r.simulated_q) csv << *r.simulated_q;
      csv << ',' << r.single_path_best_q << '\n';
    }
  }
  return kOk;
}

sim::Scenario bench_scenario(std::size_t n, std::size_t m) {
  if (n < 2) throw ConfigError("bench needs at least one user path (n >= 2)");
  if (m < 1) throw ConfigError("bench needs at least one attempt");
  // Fixed seed: the instance depends only on (n, m).
  std::mt19937_64 rng(0x5eed0000 + 97 * n + m);
  // The first path alone can carry the rate, which keeps every (n, m)
  // feasible; the rest are narrower so bandwidth rows still bind.
  std::uniform_real_distribution<double> wide(90e6, 135e6);
  std::uniform_real_distribution<double> bw(25e6, 110e6);
  std::uniform_real_distribution<double> delay(0.05, 0.5);
  std::uniform_real_distribution<double> loss(0.0, 0.3);
  std::uniform_real_distribution<double> cost(0.0, 1e-6);
  std::vector<PathSpec> paths(n - 1);
  for (auto& p : paths) {
    p.bandwidth_bits_per_s = &p == &paths.front() ? wide(rng) : bw(rng);
    p.delay = DelayModel::fixed(delay(rng));
    p.loss_prob = loss(rng);
    p.cost_per_bit = cost(rng);
  }
  sim::Scenario s;
  s.model = Network(paths, m);
  s.physical = s.model;
  s.workload.rate_bits_per_s = 90e6;
  s.workload.lifetime_s = 0.8;
  return s;
}

std::vector<BenchRow> bench_rows(const BenchOptions& options) {
  if (options.repeats == 0) throw ConfigError("bench needs at least one repeat");
  if (options.batches == 0) throw ConfigError("bench needs at least one batch");
  struct Cell {
    sim::Scenario scenario;
    LpProblem lp;
  };
  std::vector<Cell> cells;
  std::vector<BenchRow> rows;
  for (std::size_t m = 1; m <= options.m_max; ++m) {
    for (std::size_t n = 2; n <= options.n_max; ++n) {
      sim::Scenario s = bench_scenario(n, m);
      LpProblem lp = build_quality_lp(augment_blackhole(s.model, s.workload), s.workload);
      rows.push_back({n, m, lp.variables(), options.repeats,
                      std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity()});
      cells.push_back({std::move(s), std::move(lp)});
    }
  }
  using Clock = std::chrono::steady_clock;
  const auto per_call = [&](const auto& body) {
    const auto start = Clock::now();
    for (std::size_t r = 0; r < options.repeats; ++r) body();
    const std::chrono::duration<double> elapsed = Clock::now() - start;
    return elapsed.count() / static_cast<double>(options.repeats);
  };
  // Batches sweep every cell in turn so clock drift hits all cells alike;
  // each cell keeps its fastest batch.
  for (std::size_t b = 0; b < options.batches; ++b) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      const Cell& c = cells[k];
      rows[k].mean_solve_s =
          std::min(rows[k].mean_solve_s, per_call([&] { require_optimal(solve(c.lp)); }));
      rows[k].mean_plan_s = std::min(rows[k].mean_plan_s, per_call([&] {
        const Workload& w = c.scenario.workload;
        require_optimal(solve(build_quality_lp(augment_blackhole(c.scenario.model, w), w)));
      }));
    }
  }
  return rows;
}

int cmd_bench(const BenchOptions& options, std::ostream& out) {
  const auto rows = bench_rows(options);
  out << std::left << std::setw(5) << "n" << std::setw(5) << "m" << std::setw(12) << "variables"
      << std::setw(14) << "mean solve" << "mean plan\n";
  for (const auto& r : rows) {
    std::ostringstream solve_cell;
    solve_cell << std::fixed << std::setprecision(2) << r.mean_solve_s * 1e6 << " us";
    out << std::left << std::setw(5) << r.n << std::setw(5) << r.m << std::setw(12)
        << r.variables << std::setw(14) << solve_cell.str() << std::fixed
        << std::setprecision(2) << r.mean_plan_s * 1e6 << " us\n"
        << std::defaultfloat;
  }
  if (options.csv) {
    auto csv = open_csv(*options.csv);
    csv << "n,m,variables,repeats,mean_solve_s,mean_plan_s\n";
    for (const auto& r : rows) {
      csv << r.n << ',' << r.m << ',' << r.variables << ',' << r.repeats << ',' << r.mean_solve_s
          << ',' << r.mean_plan_s << '\n';
    }
  }
  return kOk;
}

int run_guarded(const std::function<int()>& body, std::ostream& err) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const ModelError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigFailure;
  } catch (const InfeasibleError& e) {
    err << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const std::exception& e) {
    err << "solver error: " << e.what() << "\n";
    return kSolverFailure;
  }
}

}  // namespace dmpath::cli
