#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dmpath/lp.hpp"
#include "dmpath/model.hpp"
#include "dmpath/stochastic.hpp"

namespace dmpath::sim {

/// Retransmission timer after each attempt of each combination. An empty
/// entry means no further attempt is scheduled.
class RetransmissionTimers {
 public:
  RetransmissionTimers() = default;
  RetransmissionTimers(std::size_t combinations, std::size_t attempts);

  /// Fixed delays: after attempt k on path p, wait d_p + d_min + guard.
  static RetransmissionTimers fixed(const Network& net, double guard_s);
  /// Two attempts: after the first attempt along (i, j), wait the chosen
  /// t_{i,j}, or never retransmit when that pair is infeasible.
  static RetransmissionTimers from_table(const Network& net,
                                         const stochastic::TimeoutTable& table);

  std::optional<double> after(std::size_t combo, std::size_t attempt) const;
  void set(std::size_t combo, std::size_t attempt, std::optional<double> timeout_s);
  std::size_t combinations() const { return combinations_; }
  std::size_t attempts() const { return attempts_; }

 private:
  std::size_t combinations_ = 0;
  std::size_t attempts_ = 0;
  std::vector<std::optional<double>> timers_;
};

struct SimConfig {
  std::uint64_t seed = 1;
  std::size_t total_packets = 100000;
  /// Drop-tail limit per path counting packets waiting or in service;
  /// 0 means unbounded.
  std::size_t queue_packets = 100;
  std::size_t ack_bits = 64 * 8;
};

struct PathCounters {
  std::uint64_t packets_sent = 0;
  std::uint64_t bits_sent = 0;
  std::uint64_t channel_losses = 0;
  std::uint64_t queue_drops = 0;
  std::uint64_t arrivals = 0;
  /// Serialization window: start of the first and end of the last packet.
  double first_start_s = 0.0;
  double last_finish_s = 0.0;
};

struct SimReport {
  std::uint64_t seed = 0;
  std::uint64_t generated = 0;
  std::uint64_t delivered_in_time = 0;
  double realized_quality = 0.0;
  /// Cost per second of generation time.
  double realized_cost = 0.0;
  std::vector<PathCounters> paths;

  // Per-attempt bookkeeping: every attempt slot of every generated packet is
  // exactly one of made or skipped; every made attempt is exactly one of
  // blackhole drop, queue drop, channel loss, or arrival.
  std::uint64_t attempts_made = 0;
  std::uint64_t attempts_skipped = 0;
  std::uint64_t blackhole_drops = 0;
  std::uint64_t queue_drops = 0;
  std::uint64_t channel_losses = 0;
  std::uint64_t arrivals = 0;
  std::uint64_t duplicate_arrivals = 0;
  std::uint64_t late_arrivals = 0;
  std::uint64_t acks_sent = 0;
  /// Each path saw its arrivals in the order they were sent.
  bool fifo_preserved = true;

  /// Creation-to-first-arrival latency of every packet that reached the
  /// receiver.
  std::vector<double> latency_s;
};

/// Simulates `total_packets` constant-rate packets over the physical network
/// `net` (index 0 is the blackhole). Packets are assigned to combinations by
/// AssignmentState over `solution`; acknowledgments travel losslessly over
/// the minimum-expected-delay path without queuing behind data.
SimReport run(const Network& net, const Workload& workload,
              std::span<const double> solution, const RetransmissionTimers& timers,
              const SimConfig& config);

/// A matched pair of network views. The planner sees `model`; packets
/// travel over `physical`. Both list the same user paths (no blackhole).
struct Scenario {
  Network model;
  Network physical;
  Workload workload;
  /// Extra wait added to fixed retransmission timeouts.
  double guard_s = 0.0;
  /// Per user path factor applied to the sender's estimate of physical
  /// propagation delays when sizing fixed timeouts (1 = exact).
  std::vector<double> timer_delay_error;
  SimConfig sim;
  stochastic::StochasticOptions stochastic;

  void validate() const;
  bool random_delays() const;
};

struct Plan {
  Network model;  // augmented
  LpProblem lp;
  Solution solution;
  RetransmissionTimers timers;
  std::optional<stochastic::TimeoutTable> timeouts;
  std::vector<CombinationCoefficients> coefficients;
};

/// Builds and solves the quality LP for the scenario's model view, and sizes
/// retransmission timers. Random-delay models use the optimized timeout
/// table; fixed-delay models time out after the estimated physical delay +
/// d_min + guard.
Plan make_plan(const Scenario& scenario, const SolverConfig& solver = {});

/// Simulates the plan over the scenario's physical network.
SimReport simulate(const Scenario& scenario, const Plan& plan,
                   std::optional<std::uint64_t> seed = std::nullopt);

/// Best quality achievable with a single user path plus the blackhole.
double best_single_path_quality(const Plan& plan);

enum class ErrorAxis { kBandwidth, kDelay, kLoss };

/// Copy of the scenario whose planner-side estimates of `axis` are
/// multiplied by `factor` on the listed user paths (1-based, as in the
/// augmented network; empty = every path). The physical network is untouched.
Scenario distort(const Scenario& scenario, ErrorAxis axis, double factor,
                 std::span<const std::size_t> paths = {});

struct SweepPoint {
  double factor = 1.0;
  double model_quality = 0.0;
  double realized_quality = 0.0;
};

/// One simulation per factor, re-planning from the distorted estimates each
/// time. Factors must be positive. Rows come back in input order.
std::vector<SweepPoint> sensitivity_sweep(const Scenario& truth, ErrorAxis axis,
                                          std::span<const double> factors,
                                          std::span<const std::size_t> paths = {},
                                          std::optional<std::uint64_t> seed = std::nullopt);

}  // namespace dmpath::sim
