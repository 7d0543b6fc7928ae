#pragma once

#include <cstddef>
#include <random>
#include <vector>

#include "dmpath/model.hpp"
#include "dmpath/sim.hpp"
#include "oracles.hpp"

namespace fixtures {

using dmpath::DelayModel;
using dmpath::Network;
using dmpath::PathSpec;
using dmpath::Workload;

constexpr double kMbps = 1e6;
constexpr double kMs = 1e-3;

/// Flat index of the two-attempt combination (i, j) among n paths.
constexpr std::size_t idx(std::size_t i, std::size_t j, std::size_t n = 3) { return i + j * n; }

inline PathSpec fixed_path(double mbps, double delay_ms, double loss, double cost = 0.0) {
  PathSpec p;
  p.bandwidth_bits_per_s = mbps * kMbps;
  p.delay = DelayModel::fixed(delay_ms * kMs);
  p.loss_prob = loss;
  p.cost_per_bit = cost;
  return p;
}

inline PathSpec gamma_path(double mbps, double eta_ms, double alpha, double beta_ms,
                           double loss) {
  PathSpec p;
  p.bandwidth_bits_per_s = mbps * kMbps;
  p.delay = DelayModel::shifted_gamma(eta_ms * kMs, alpha, beta_ms * kMs);
  p.loss_prob = loss;
  return p;
}

/// Two-path fixed-delay network with the given delays.
inline Network two_path_fixed(double d1_ms = 450, double d2_ms = 150) {
  return Network({fixed_path(80, d1_ms, 0.2), fixed_path(20, d2_ms, 0.0)}, 2);
}

/// Two-path shifted-gamma network.
inline Network two_path_gamma() {
  return Network({gamma_path(80, 400, 10, 4, 0.2), gamma_path(20, 100, 5, 2, 0.0)}, 2);
}

inline Workload workload(double mbps, double lifetime_ms) {
  Workload w;
  w.rate_bits_per_s = mbps * kMbps;
  w.lifetime_s = lifetime_ms * kMs;
  return w;
}

/// Fixed delays: the planner sees 450/150 ms, packets see 400/100 ms.
inline dmpath::sim::Scenario fixed_scenario(double mbps = 90, double lifetime_ms = 800) {
  dmpath::sim::Scenario s;
  s.model = two_path_fixed(450, 150);
  s.physical = two_path_fixed(400, 100);
  s.workload = workload(mbps, lifetime_ms);
  s.guard_s = 0.1;
  s.timer_delay_error = {1.0, 1.0};
  return s;
}

/// Gamma delays, physical links fast enough not to queue.
inline dmpath::sim::Scenario gamma_scenario() {
  dmpath::sim::Scenario s;
  s.model = two_path_gamma();
  s.physical = two_path_gamma();
  for (std::size_t i = 0; i < 2; ++i) s.physical.mutable_path(i).bandwidth_bits_per_s = 1e9;
  s.workload = workload(90, 750);
  s.timer_delay_error = {1.0, 1.0};
  return s;
}

/// Oracle view of an augmented fixed-delay network.
inline oracle::TwoAttempt to_oracle(const Network& net, const Workload& w) {
  oracle::TwoAttempt o;
  for (const auto& p : net.paths()) {
    o.delay.push_back(p.delay.is_infinite() ? oracle::kInf : p.delay.fixed_seconds());
    o.tau.push_back(p.loss_prob);
    o.cost.push_back(p.cost_per_bit);
    o.bandwidth.push_back(p.bandwidth_bits_per_s);
  }
  o.lambda = w.rate_bits_per_s;
  o.lifetime = w.lifetime_s;
  return o;
}

/// Random fixed-delay network with `paths` user paths.
inline Network random_fixed_network(std::mt19937_64& rng, std::size_t paths,
                                    std::size_t attempts = 2) {
  std::uniform_real_distribution<double> bw(1, 100), delay(10, 600), loss(0, 0.6),
      cost(0, 3);
  std::bernoulli_distribution lossless(0.25);
  std::vector<PathSpec> ps;
  for (std::size_t k = 0; k < paths; ++k) {
    PathSpec p = fixed_path(bw(rng), std::round(delay(rng)), lossless(rng) ? 0.0 : loss(rng),
                            cost(rng) * 1e-6);
    ps.push_back(p);
  }
  return Network(ps, attempts);
}

inline std::vector<double> random_simplex_point(std::mt19937_64& rng, std::size_t n) {
  std::exponential_distribution<double> e(1.0);
  std::bernoulli_distribution zero(0.3);
  std::vector<double> x(n);
  double s = 0.0;
  for (auto& v : x) {
    v = zero(rng) ? 0.0 : e(rng);
    s += v;
  }
  if (s == 0.0) {
    x[0] = 1.0;
    return x;
  }
  for (auto& v : x) v /= s;
  return x;
}

}  // namespace fixtures
