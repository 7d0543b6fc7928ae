#include "dmpath/scheduler.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dmpath {

namespace {

constexpr double kDeficitEps = 1e-12;
constexpr std::int64_t kMaxExactDen = 10000;
constexpr double kExactTol = 1e-12;
constexpr std::size_t kNone = static_cast<std::size_t>(-1);

}  // namespace

AssignmentState::AssignmentState(std::vector<double> target)
    : target_(std::move(target)), assigned_(target_.size(), 0) {
  if (target_.empty()) throw std::invalid_argument("empty assignment target");
  double sum = 0.0;
  for (double v : target_) {
    if (!(v >= -1e-9)) throw std::invalid_argument("negative assignment target");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-7) {
    throw std::invalid_argument("assignment target must sum to 1");
  }
  exact_ = true;
  for (double v : target_) {
    auto r = to_rational(std::max(v, 0.0), kMaxExactDen, kExactTol);
    if (!r) {
      exact_ = false;
      break;
    }
    rational_.push_back(*r);
  }
  if (!exact_) rational_.clear();
}

std::size_t AssignmentState::select() {
  std::size_t res = 0;
  if (total_ == 0) {
    for (std::size_t i = 1; i < target_.size(); ++i) {
      if (target_[i] > target_[res]) res = i;
    }
  } else {
    res = exact_ ? select_exact() : select_float();
  }
  ++assigned_[res];
  ++total_;
  return res;
}

// Zero-target combinations are never behind their share, so they are left
// out; otherwise a tie at zero deficit would hand them a packet.
//
// Compares assigned[i]/total - p_i/q_i across i without rounding:
// sign of (a_i q_i - p_i T) q_j - (a_j q_j - p_j T) q_i.
std::size_t AssignmentState::select_exact() const {
  using Wide = __int128;
  const Wide total = static_cast<Wide>(total_);
  auto numerator = [&](std::size_t i) {
    return static_cast<Wide>(assigned_[i]) * rational_[i].den -
           static_cast<Wide>(rational_[i].num) * total;
  };
  std::size_t best = kNone;
  Wide best_num = 0;
  for (std::size_t i = 0; i < target_.size(); ++i) {
    if (rational_[i].num == 0) continue;
    const Wide num = numerator(i);
    if (best == kNone || num * rational_[best].den < best_num * rational_[i].den) {
      best = i;
      best_num = num;
    }
  }
  return best;
}

std::size_t AssignmentState::select_float() const {
  const double total = static_cast<double>(total_);
  std::size_t best = kNone;
  double best_deficit = 0.0;
  for (std::size_t i = 0; i < target_.size(); ++i) {
    if (!(target_[i] > 0.0)) continue;
    const double deficit = static_cast<double>(assigned_[i]) / total - target_[i];
    if (best == kNone || deficit < best_deficit - kDeficitEps) {
      best = i;
      best_deficit = deficit;
    }
  }
  return best;
}

Action next_action(const Combination& combo, std::size_t attempt) {
  if (attempt >= combo.attempts()) return Abandon{};
  const std::size_t path = combo[attempt];
  if (path == 0) return Drop{};
  return Send{path};
}

}  // namespace dmpath
