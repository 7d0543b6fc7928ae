#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "dmpath/lp.hpp"

namespace dmpath {

/// Raised for malformed domain objects (negative bandwidth, loss outside
/// [0,1], non-augmented networks handed to LP builders, ...).
class ModelError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Absolute slack applied to every deadline comparison, so that sums such as
/// 0.45 + 0.15 + 0.45 compare equal to a lifetime of 1.05 s.
inline constexpr double kDeadlineSlack_s = 1e-9;

inline bool meets_deadline(double elapsed_s, double lifetime_s) {
  return elapsed_s <= lifetime_s + kDeadlineSlack_s;
}

struct FixedDelay {
  double seconds = 0.0;  // +inf marks the blackhole
};

/// d = shift + X with X ~ Gamma(shape, scale).
struct ShiftedGammaDelay {
  double shift_s = 0.0;
  double shape = 1.0;
  double scale_s = 1.0;
};

class DelayModel {
 public:
  DelayModel() = default;

  static DelayModel fixed(double seconds);
  static DelayModel shifted_gamma(double shift_s, double shape, double scale_s);
  static DelayModel infinite();

  bool is_fixed() const { return std::holds_alternative<FixedDelay>(model_); }
  bool is_gamma() const {
    return std::holds_alternative<ShiftedGammaDelay>(model_);
  }
  bool is_infinite() const;

  double mean() const;
  double variance() const;
  /// Smallest value in the support (shift for gamma delays).
  double infimum() const;

  /// Throws ModelError unless is_fixed().
  double fixed_seconds() const;
  /// Throws ModelError unless is_gamma().
  const ShiftedGammaDelay& gamma() const;

  /// Multiplies every time-valued parameter by `factor` (shift and scale for
  /// gamma delays, so the mean scales linearly).
  DelayModel scaled(double factor) const;

  void validate() const;

 private:
  std::variant<FixedDelay, ShiftedGammaDelay> model_{FixedDelay{}};
};

struct PathSpec {
  double bandwidth_bits_per_s = 0.0;
  DelayModel delay;
  double loss_prob = 0.0;
  double cost_per_bit = 0.0;

  bool is_blackhole() const { return delay.is_infinite() && loss_prob == 1.0; }
  void validate() const;
};

struct Workload {
  double rate_bits_per_s = 0.0;
  double lifetime_s = 0.0;
  double cost_bound = kInfinity;
  std::size_t packet_bits = 8192;

  void validate() const;
};

/// An ordered path sequence, one entry per transmission attempt.
struct Combination {
  std::vector<std::size_t> paths;

  std::size_t attempts() const { return paths.size(); }
  std::size_t operator[](std::size_t k) const { return paths[k]; }

  /// Little-endian base-n decoding (i = l mod n, j = l / n for two attempts).
  static Combination decode(std::size_t flat, std::size_t n, std::size_t m);
  std::size_t encode(std::size_t n) const;

  bool operator==(const Combination&) const = default;
};

class Network {
 public:
  Network() = default;
  Network(std::vector<PathSpec> paths, std::size_t attempts = 2);

  std::span<const PathSpec> paths() const { return paths_; }
  const PathSpec& path(std::size_t i) const;
  PathSpec& mutable_path(std::size_t i);
  std::size_t size() const { return paths_.size(); }
  std::size_t attempts() const { return attempts_; }
  void set_attempts(std::size_t m);
  bool has_blackhole() const { return has_blackhole_; }

  /// n^m; throws when it would not fit comfortably in memory.
  std::size_t combination_count() const;
  Combination combination(std::size_t flat) const {
    return Combination::decode(flat, size(), attempts_);
  }

  void validate() const;

 private:
  friend Network augment_blackhole(const Network&, const Workload&);

  std::vector<PathSpec> paths_;
  std::size_t attempts_ = 2;
  bool has_blackhole_ = false;
};

/// Index of the path with the smallest expected delay; ties go to the lowest
/// index. Throws ModelError if every path has infinite delay.
std::size_t min_delay_path(const Network& net);

/// Per-combination LP coefficients: probability of in-time delivery, expected
/// traffic put on each path per unit of assignment, and expected cost.
struct CombinationCoefficients {
  double delivery = 0.0;
  std::vector<double> traffic_bits_per_s;
  double cost = 0.0;
};

double delivery_prob(const Network& net, const Workload& workload,
                     const Combination& combo);

/// Fixed-delay coefficients for every combination, in flat-index order.
std::vector<CombinationCoefficients> combination_coefficients(
    const Network& net, const Workload& workload);

std::vector<double> sent_rate(const Network& net, const Workload& workload,
                              std::span<const double> x);
double quality(const Network& net, const Workload& workload,
               std::span<const double> x);
double total_cost(const Network& net, const Workload& workload,
                  std::span<const double> x);

/// Same metrics from precomputed coefficients (used for stochastic models).
std::vector<double> sent_rate(std::span<const CombinationCoefficients> coeffs,
                              std::span<const double> x);
double quality(std::span<const CombinationCoefficients> coeffs,
               std::span<const double> x);
double total_cost(std::span<const CombinationCoefficients> coeffs,
                  std::span<const double> x);

/// Prepends the discard path at index 0: bandwidth = rate, infinite delay,
/// total loss, zero cost. Throws if `net` already has one.
Network augment_blackhole(const Network& net, const Workload& workload);

LpProblem build_quality_lp(const Network& net, const Workload& workload);
LpProblem build_quality_lp(const Network& net, const Workload& workload,
                           std::span<const CombinationCoefficients> coeffs);

/// Minimizes expected cost subject to bandwidth rows and
/// quality >= min_quality (encoded as -quality <= -min_quality).
LpProblem build_cost_lp(const Network& net, const Workload& workload,
                        double min_quality);
LpProblem build_cost_lp(const Network& net, const Workload& workload,
                        double min_quality,
                        std::span<const CombinationCoefficients> coeffs);

/// Among combinations with identical LP columns, moves all of x onto the one
/// with the fewest blackhole attempts, then the fewest distinct paths, then
/// the lowest index. Objective and row activities are unchanged.
void prefer_fewer_blackhole_attempts(const Network& net, const LpProblem& lp,
                                     std::vector<double>& x);

/// Retransmission timeout d_i + d_min + guard for fixed delays.
double fixed_timeout(const Network& net, std::size_t path, double guard_s);

/// Flat indices of the combinations whose every attempt uses a path in
/// `allowed`.
std::vector<std::size_t> combinations_within(
    const Network& net, std::span<const std::size_t> allowed);

}  // namespace dmpath
