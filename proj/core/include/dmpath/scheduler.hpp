#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <variant>
#include <vector>

#include "dmpath/model.hpp"
#include "dmpath/rational.hpp"

namespace dmpath {

/// Discretizes a fractional assignment into a stream of combination choices:
/// the first pick is the largest target entry, every later pick is the
/// combination with a positive target furthest below its share. Ties go to
/// the lowest index.
///
/// Single-owner: one instance per flow.
class AssignmentState {
 public:
  explicit AssignmentState(std::vector<double> target);

  std::size_t select();

  std::span<const std::uint64_t> assigned() const { return assigned_; }
  std::uint64_t total() const { return total_; }
  std::span<const double> target() const { return target_; }
  /// True when every target entry was recognized as a small rational and
  /// deficits are compared exactly.
  bool exact() const { return exact_; }

 private:
  std::size_t select_exact() const;
  std::size_t select_float() const;

  std::vector<double> target_;
  std::vector<Rational> rational_;
  std::vector<std::uint64_t> assigned_;
  std::uint64_t total_ = 0;
  bool exact_ = false;
};

struct Send {
  std::size_t path;
  bool operator==(const Send&) const = default;
};
struct Drop {
  bool operator==(const Drop&) const = default;
};
/// No further transmission is scheduled for the datum.
struct Abandon {
  bool operator==(const Abandon&) const = default;
};
using Action = std::variant<Send, Drop, Abandon>;

/// What to do for attempt `attempt` (0-based) of a datum sent along `combo`.
/// Path 0 is the blackhole.
Action next_action(const Combination& combo, std::size_t attempt);

}  // namespace dmpath
