#include "dmpath/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <limits>
#include <mutex>
#include <queue>
#include <random>
#include <string>
#include <thread>

#include "dmpath/scheduler.hpp"

namespace dmpath::sim {

namespace {

enum class Purpose : std::uint32_t { kLoss = 1, kDelay = 2, kAckDelay = 3 };

std::mt19937_64 make_stream(std::uint64_t seed, std::size_t path, Purpose purpose) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(purpose)};
  return std::mt19937_64(seq);
}

class DelaySampler {
 public:
  DelaySampler(const DelayModel& model, std::mt19937_64 rng) : rng_(std::move(rng)) {
    if (model.is_gamma()) {
      const auto& g = model.gamma();
      shift_ = g.shift_s;
      gamma_.emplace(g.shape, g.scale_s);
    } else {
      shift_ = model.fixed_seconds();
    }
  }

  double operator()() { return gamma_ ? shift_ + (*gamma_)(rng_) : shift_; }

 private:
  std::mt19937_64 rng_;
  double shift_ = 0.0;
  std::optional<std::gamma_distribution<double>> gamma_;
};

/// Point-to-point link: drop-tail FIFO, serialization at the path bandwidth,
/// sampled propagation delay, Bernoulli erasures. A packet never overtakes
/// the one sent before it.
class Channel {
 public:
  enum class Fate { kQueueDrop, kLost, kArrives };
  struct Outcome {
    Fate fate;
    double arrival_s;
    std::uint64_t send_index;
  };

  Channel(const PathSpec& spec, std::uint64_t seed, std::size_t index,
          std::size_t queue_limit)
      : spec_(spec),
        loss_rng_(make_stream(seed, index, Purpose::kLoss)),
        delay_(spec.delay, make_stream(seed, index, Purpose::kDelay)),
        queue_limit_(queue_limit) {}

  Outcome transmit(double now, std::size_t bits, PathCounters& counters) {
    while (!in_system_.empty() && in_system_.front() <= now) in_system_.pop_front();
    if (spec_.bandwidth_bits_per_s <= 0.0 ||
        (queue_limit_ > 0 && in_system_.size() >= queue_limit_)) {
      ++counters.queue_drops;
      return {Fate::kQueueDrop, 0.0, 0};
    }
    const double start = std::max(now, busy_until_);
    const double finish = start + static_cast<double>(bits) / spec_.bandwidth_bits_per_s;
    busy_until_ = finish;
    in_system_.push_back(finish);
    if (counters.packets_sent == 0) counters.first_start_s = start;
    counters.last_finish_s = finish;
    ++counters.packets_sent;
    counters.bits_sent += bits;

    const std::uint64_t index = next_index_++;
    if (spec_.loss_prob > 0.0 && uniform_(loss_rng_) < spec_.loss_prob) {
      ++counters.channel_losses;
      return {Fate::kLost, 0.0, index};
    }
    const double arrival = std::max(finish + delay_(), last_arrival_);
    last_arrival_ = arrival;
    return {Fate::kArrives, arrival, index};
  }

 private:
  PathSpec spec_;
  std::mt19937_64 loss_rng_;
  DelaySampler delay_;
  std::uniform_real_distribution<double> uniform_{0.0, 1.0};
  std::size_t queue_limit_;
  std::deque<double> in_system_;
  double busy_until_ = 0.0;
  double last_arrival_ = 0.0;
  std::uint64_t next_index_ = 0;
};

// Lower value is processed first among simultaneous events.
enum class EventKind : std::uint8_t {
  kChannelDeliver = 0,
  kAckDeliver = 1,
  kRetransTimeout = 2,
  kGenerate = 3,
};

struct Event {
  double time_s;
  EventKind kind;
  std::uint64_t order;
  std::uint32_t packet;
  std::uint32_t path;
  std::uint32_t attempt;
  std::uint64_t send_index;
};

struct Later {
  bool operator()(const Event& a, const Event& b) const {
    if (a.time_s != b.time_s) return a.time_s > b.time_s;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.order > b.order;
  }
};

struct PacketState {
  double created_s = 0.0;
  std::uint32_t combo = 0;
  bool acked = false;
  bool arrived = false;
};

class Simulation {
 public:
  Simulation(const Network& net, const Workload& workload,
             std::span<const double> solution, const RetransmissionTimers& timers,
             const SimConfig& config)
      : net_(net), workload_(workload), timers_(timers), config_(config),
        scheduler_(std::vector<double>(solution.begin(), solution.end())),
        ack_delay_(net.path(min_delay_path(net)).delay,
                   make_stream(config.seed, min_delay_path(net), Purpose::kAckDelay)) {
    channels_.reserve(net.size());
    for (std::size_t i = 0; i < net.size(); ++i) {
      channels_.emplace_back(net.path(i), config.seed, i, config.queue_packets);
    }
    report_.seed = config.seed;
    report_.paths.resize(net.size());
    last_arrived_index_.assign(net.size(), -1);
    packets_.resize(config.total_packets);
    report_.latency_s.reserve(config.total_packets);
  }

  SimReport run() {
    interval_s_ = static_cast<double>(workload_.packet_bits) / workload_.rate_bits_per_s;
    if (config_.total_packets > 0) push({0.0, EventKind::kGenerate, 0, 0, 0, 0, 0});
    while (!events_.empty()) {
      const Event e = events_.top();
      events_.pop();
      switch (e.kind) {
        case EventKind::kGenerate:
          on_generate(e);
          break;
        case EventKind::kChannelDeliver:
          on_deliver(e);
          break;
        case EventKind::kAckDeliver:
          packets_[e.packet].acked = true;
          break;
        case EventKind::kRetransTimeout:
          on_timeout(e);
          break;
      }
    }
    finish();
    return std::move(report_);
  }

 private:
  void push(Event e) {
    e.order = order_++;
    events_.push(e);
  }

  void on_generate(const Event& e) {
    const std::uint32_t seq = e.packet;
    PacketState& p = packets_[seq];
    p.created_s = e.time_s;
    p.combo = static_cast<std::uint32_t>(scheduler_.select());
    ++report_.generated;
    attempt(seq, 0, e.time_s);
    if (seq + 1 < config_.total_packets) {
      // Multiply rather than accumulate to keep creation times exact.
      push({static_cast<double>(seq + 1) * interval_s_, EventKind::kGenerate, 0, seq + 1, 0,
            0, 0});
    }
  }

  void attempt(std::uint32_t seq, std::size_t k, double now) {
    const std::size_t m = net_.attempts();
    const Combination combo = net_.combination(packets_[seq].combo);
    const Action action = next_action(combo, k);
    if (std::holds_alternative<Abandon>(action)) return;
    ++report_.attempts_made;
    if (std::holds_alternative<Drop>(action)) {
      ++report_.blackhole_drops;
      report_.attempts_skipped += m - k - 1;
      return;
    }
    const std::size_t path = std::get<Send>(action).path;
    const auto out = channels_[path].transmit(now, workload_.packet_bits, report_.paths[path]);
    switch (out.fate) {
      case Channel::Fate::kQueueDrop:
        ++report_.queue_drops;
        break;
      case Channel::Fate::kLost:
        ++report_.channel_losses;
        break;
      case Channel::Fate::kArrives:
        push({out.arrival_s, EventKind::kChannelDeliver, 0, seq,
              static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(k),
              out.send_index});
        break;
    }
    if (k + 1 >= m) return;
    const auto timeout = timers_.after(packets_[seq].combo, k);
    if (!timeout) {
      report_.attempts_skipped += m - k - 1;
      return;
    }
    push({now + *timeout, EventKind::kRetransTimeout, 0, seq, 0,
          static_cast<std::uint32_t>(k + 1), 0});
  }

  void on_deliver(const Event& e) {
    ++report_.arrivals;
    ++report_.paths[e.path].arrivals;
    auto& last = last_arrived_index_[e.path];
    if (static_cast<std::int64_t>(e.send_index) <= last) report_.fifo_preserved = false;
    last = static_cast<std::int64_t>(e.send_index);

    PacketState& p = packets_[e.packet];
    if (p.arrived) {
      ++report_.duplicate_arrivals;
    } else {
      p.arrived = true;
      report_.latency_s.push_back(e.time_s - p.created_s);
      if (meets_deadline(e.time_s - p.created_s, workload_.lifetime_s)) {
        ++report_.delivered_in_time;
      } else {
        ++report_.late_arrivals;
      }
    }
    ++report_.acks_sent;
    push({e.time_s + ack_delay_(), EventKind::kAckDeliver, 0, e.packet, 0, 0, 0});
  }

  void on_timeout(const Event& e) {
    if (packets_[e.packet].acked) {
      report_.attempts_skipped += net_.attempts() - e.attempt;
      return;
    }
    attempt(e.packet, e.attempt, e.time_s);
  }

  void finish() {
    const double duration =
        static_cast<double>(config_.total_packets) * interval_s_;
    report_.realized_quality =
        report_.generated == 0 ? 0.0
                               : static_cast<double>(report_.delivered_in_time) /
                                     static_cast<double>(report_.generated);
    double cost = 0.0;
    for (std::size_t i = 0; i < net_.size(); ++i) {
      cost += net_.path(i).cost_per_bit * static_cast<double>(report_.paths[i].bits_sent);
    }
    report_.realized_cost = duration > 0.0 ? cost / duration : 0.0;
  }

  const Network& net_;
  const Workload& workload_;
  const RetransmissionTimers& timers_;
  const SimConfig& config_;
  AssignmentState scheduler_;
  DelaySampler ack_delay_;
  std::vector<Channel> channels_;
  std::vector<PacketState> packets_;
  std::vector<std::int64_t> last_arrived_index_;
  std::priority_queue<Event, std::vector<Event>, Later> events_;
  std::uint64_t order_ = 0;
  double interval_s_ = 0.0;
  SimReport report_;
};

Network estimated_timer_network(const Scenario& s) {
  std::vector<PathSpec> paths(s.physical.paths().begin(), s.physical.paths().end());
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const double error = s.timer_delay_error.empty() ? 1.0 : s.timer_delay_error[i];
    paths[i].delay = DelayModel::fixed(paths[i].delay.mean() * error);
  }
  return augment_blackhole(Network(std::move(paths), s.model.attempts()), s.workload);
}

template <typename Fn>
std::vector<SweepPoint> parallel_points(std::size_t count, Fn fn) {
  std::vector<SweepPoint> out(count);
  const std::size_t workers =
      std::max<std::size_t>(1, std::min<std::size_t>(count, std::thread::hardware_concurrency()));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&] {
    for (std::size_t k; (k = next++) < count;) {
      try {
        out[k] = fn(k);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

}  // namespace

RetransmissionTimers::RetransmissionTimers(std::size_t combinations, std::size_t attempts)
    : combinations_(combinations), attempts_(attempts),
      timers_(combinations * (attempts > 0 ? attempts - 1 : 0)) {}

RetransmissionTimers RetransmissionTimers::fixed(const Network& net, double guard_s) {
  RetransmissionTimers t(net.combination_count(), net.attempts());
  for (std::size_t l = 0; l < net.combination_count(); ++l) {
    const Combination c = net.combination(l);
    for (std::size_t k = 0; k + 1 < c.attempts(); ++k) {
      if (net.path(c[k]).is_blackhole()) continue;
      t.set(l, k, fixed_timeout(net, c[k], guard_s));
    }
  }
  return t;
}

RetransmissionTimers RetransmissionTimers::from_table(const Network& net,
                                                      const stochastic::TimeoutTable& table) {
  if (net.attempts() != 2) throw ModelError("timeout tables cover two attempts only");
  const std::size_t n = net.size();
  if (table.paths() != n) throw ModelError("timeout table does not match network");
  RetransmissionTimers t(n * n, 2);
  for (std::size_t l = 0; l < n * n; ++l) {
    const auto& choice = table.at(l % n, l / n);
    if (choice.feasible) t.set(l, 0, choice.chosen_s);
  }
  return t;
}

std::optional<double> RetransmissionTimers::after(std::size_t combo, std::size_t attempt) const {
  if (attempt + 1 >= attempts_) return std::nullopt;
  return timers_.at(combo * (attempts_ - 1) + attempt);
}

void RetransmissionTimers::set(std::size_t combo, std::size_t attempt,
                               std::optional<double> timeout_s) {
  if (attempt + 1 >= attempts_) throw ModelError("no timer after the last attempt");
  timers_.at(combo * (attempts_ - 1) + attempt) = timeout_s;
}

SimReport run(const Network& net, const Workload& workload,
              std::span<const double> solution, const RetransmissionTimers& timers,
              const SimConfig& config) {
  workload.validate();
  if (!net.has_blackhole()) throw ModelError("simulation expects a blackhole-augmented network");
  if (solution.size() != net.combination_count()) {
    throw ModelError("solution has " + std::to_string(solution.size()) +
                     " entries, network has " + std::to_string(net.combination_count()) +
                     " combinations");
  }
  if (timers.combinations() != net.combination_count() || timers.attempts() != net.attempts()) {
    throw ModelError("retransmission timers do not match the network");
  }
  if (config.total_packets > std::numeric_limits<std::uint32_t>::max()) {
    throw ModelError("too many packets");
  }
  return Simulation(net, workload, solution, timers, config).run();
}

void Scenario::validate() const {
  workload.validate();
  model.validate();
  physical.validate();
  if (model.has_blackhole() || physical.has_blackhole()) {
    throw ModelError("scenario networks list user paths only");
  }
  if (model.size() != physical.size()) {
    throw ModelError("model and physical networks differ in path count");
  }
  if (model.attempts() != physical.attempts()) {
    throw ModelError("model and physical networks differ in attempts");
  }
  if (!(guard_s >= 0.0)) throw ModelError("timeout guard must be >= 0");
  if (!timer_delay_error.empty()) {
    if (timer_delay_error.size() != model.size()) {
      throw ModelError("timer delay error list does not match path count");
    }
    for (double f : timer_delay_error) {
      if (!(f > 0.0)) throw ModelError("timer delay error must be positive");
    }
  }
}

bool Scenario::random_delays() const {
  return std::any_of(model.paths().begin(), model.paths().end(),
                     [](const PathSpec& p) { return p.delay.is_gamma(); });
}

Plan make_plan(const Scenario& scenario, const SolverConfig& solver) {
  scenario.validate();
  Plan plan;
  plan.model = augment_blackhole(scenario.model, scenario.workload);
  if (scenario.random_delays()) {
    const stochastic::StochasticModel sm(plan.model, scenario.workload, scenario.stochastic);
    plan.timeouts = sm.optimize_timeouts();
    plan.coefficients = sm.coefficients(*plan.timeouts);
    plan.timers = RetransmissionTimers::from_table(plan.model, *plan.timeouts);
  } else {
    plan.coefficients = combination_coefficients(plan.model, scenario.workload);
    plan.timers = RetransmissionTimers::fixed(estimated_timer_network(scenario), scenario.guard_s);
  }
  plan.lp = build_quality_lp(plan.model, scenario.workload, plan.coefficients);
  plan.solution = solve(plan.lp, solver);
  if (plan.solution.optimal()) {
    prefer_fewer_blackhole_attempts(plan.model, plan.lp, plan.solution.x);
  }
  return plan;
}

SimReport simulate(const Scenario& scenario, const Plan& plan,
                   std::optional<std::uint64_t> seed) {
  if (!plan.solution.optimal()) throw ModelError("cannot simulate a non-optimal plan");
  const Network physical = augment_blackhole(scenario.physical, scenario.workload);
  SimConfig config = scenario.sim;
  if (seed) config.seed = *seed;
  return run(physical, scenario.workload, plan.solution.x, plan.timers, config);
}

double best_single_path_quality(const Plan& plan) {
  double best = 0.0;
  for (std::size_t p = 1; p < plan.model.size(); ++p) {
    const std::size_t allowed[] = {0, p};
    const auto cols = combinations_within(plan.model, allowed);
    const Solution s = solve(restrict_columns(plan.lp, cols));
    if (s.optimal()) best = std::max(best, s.objective_value);
  }
  return best;
}

Scenario distort(const Scenario& scenario, ErrorAxis axis, double factor,
                 std::span<const std::size_t> paths) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw ModelError("distortion factor must be positive");
  }
  Scenario out = scenario;
  const std::size_t n = out.model.size();
  if (out.timer_delay_error.empty()) out.timer_delay_error.assign(n, 1.0);
  std::vector<std::size_t> targets(paths.begin(), paths.end());
  if (targets.empty()) {
    for (std::size_t i = 1; i <= n; ++i) targets.push_back(i);
  }
  for (std::size_t index : targets) {
    if (index < 1 || index > n) {
      throw ModelError("path " + std::to_string(index) + " is not a user path");
    }
    PathSpec& p = out.model.mutable_path(index - 1);
    switch (axis) {
      case ErrorAxis::kBandwidth:
        p.bandwidth_bits_per_s *= factor;
        break;
      case ErrorAxis::kDelay:
        p.delay = p.delay.scaled(factor);
        out.timer_delay_error[index - 1] *= factor;
        break;
      case ErrorAxis::kLoss:
        p.loss_prob = std::min(1.0, p.loss_prob * factor);
        break;
    }
  }
  out.model.validate();
  return out;
}

std::vector<SweepPoint> sensitivity_sweep(const Scenario& truth, ErrorAxis axis,
                                          std::span<const double> factors,
                                          std::span<const std::size_t> paths,
                                          std::optional<std::uint64_t> seed) {
  for (double f : factors) {
    if (!(f > 0.0)) throw ModelError("sweep factors must be positive");
  }
  return parallel_points(factors.size(), [&](std::size_t k) {
    const Scenario s = distort(truth, axis, factors[k], paths);
    const Plan plan = make_plan(s);
    const SimReport report = simulate(s, plan, seed);
    return SweepPoint{factors[k], plan.solution.objective_value, report.realized_quality};
  });
}

}  // namespace dmpath::sim
