#include "dmpath/model.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

namespace dmpath {

namespace {

constexpr std::size_t kMaxCombinations = std::size_t{1} << 22;

void require(bool ok, const std::string& what) {
  if (!ok) throw ModelError(what);
}

void check_x(const Network& net, std::span<const double> x) {
  require(x.size() == net.combination_count(),
          "assignment vector has " + std::to_string(x.size()) +
              " entries, expected " + std::to_string(net.combination_count()));
}

LpProblem assemble(const Network& net, std::span<const CombinationCoefficients> coeffs) {
  require(net.has_blackhole(),
          "LP construction requires a blackhole-augmented network");
  const std::size_t n = net.size();
  const std::size_t cols = net.combination_count();
  require(coeffs.size() == cols, "coefficient table does not match n^m");
  LpProblem lp;
  lp.eq_row.assign(cols, 1.0);
  lp.ineq_matrix = Matrix(n + 1, cols);
  lp.ineq_rhs.assign(n + 1, 0.0);
  for (std::size_t l = 0; l < cols; ++l) {
    require(coeffs[l].traffic_bits_per_s.size() == n,
            "coefficient traffic vector does not match path count");
    for (std::size_t k = 0; k < n; ++k) {
      lp.ineq_matrix(k, l) = coeffs[l].traffic_bits_per_s[k];
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    lp.ineq_rhs[k] = net.path(k).bandwidth_bits_per_s;
  }
  return lp;
}

}  // namespace

DelayModel DelayModel::fixed(double seconds) {
  DelayModel d;
  d.model_ = FixedDelay{seconds};
  d.validate();
  return d;
}

DelayModel DelayModel::shifted_gamma(double shift_s, double shape, double scale_s) {
  DelayModel d;
  d.model_ = ShiftedGammaDelay{shift_s, shape, scale_s};
  d.validate();
  return d;
}

DelayModel DelayModel::infinite() {
  DelayModel d;
  d.model_ = FixedDelay{kInfinity};
  return d;
}

bool DelayModel::is_infinite() const {
  const auto* f = std::get_if<FixedDelay>(&model_);
  return f != nullptr && std::isinf(f->seconds);
}

double DelayModel::mean() const {
  if (const auto* f = std::get_if<FixedDelay>(&model_)) return f->seconds;
  const auto& g = std::get<ShiftedGammaDelay>(model_);
  return g.shift_s + g.shape * g.scale_s;
}

double DelayModel::variance() const {
  if (is_fixed()) return 0.0;
  const auto& g = std::get<ShiftedGammaDelay>(model_);
  return g.shape * g.scale_s * g.scale_s;
}

double DelayModel::infimum() const {
  if (const auto* f = std::get_if<FixedDelay>(&model_)) return f->seconds;
  return std::get<ShiftedGammaDelay>(model_).shift_s;
}

double DelayModel::fixed_seconds() const {
  const auto* f = std::get_if<FixedDelay>(&model_);
  require(f != nullptr, "delay is not fixed");
  return f->seconds;
}

const ShiftedGammaDelay& DelayModel::gamma() const {
  const auto* g = std::get_if<ShiftedGammaDelay>(&model_);
  require(g != nullptr, "delay is not shifted-gamma");
  return *g;
}

DelayModel DelayModel::scaled(double factor) const {
  require(factor > 0.0, "delay scale factor must be positive");
  if (is_infinite()) return *this;
  if (const auto* f = std::get_if<FixedDelay>(&model_)) {
    return fixed(f->seconds * factor);
  }
  const auto& g = std::get<ShiftedGammaDelay>(model_);
  return shifted_gamma(g.shift_s * factor, g.shape, g.scale_s * factor);
}

void DelayModel::validate() const {
  if (const auto* f = std::get_if<FixedDelay>(&model_)) {
    require(f->seconds >= 0.0 && !std::isnan(f->seconds),
            "fixed delay must be >= 0");
    return;
  }
  const auto& g = std::get<ShiftedGammaDelay>(model_);
  require(std::isfinite(g.shift_s) && g.shift_s >= 0.0,
          "gamma delay shift must be finite and >= 0");
  require(std::isfinite(g.shape) && g.shape > 0.0, "gamma shape must be > 0");
  require(std::isfinite(g.scale_s) && g.scale_s > 0.0, "gamma scale must be > 0");
}

void PathSpec::validate() const {
  require(std::isfinite(bandwidth_bits_per_s) && bandwidth_bits_per_s >= 0.0,
          "path bandwidth must be finite and >= 0");
  require(loss_prob >= 0.0 && loss_prob <= 1.0, "loss probability must lie in [0,1]");
  require(std::isfinite(cost_per_bit) && cost_per_bit >= 0.0,
          "path cost must be finite and >= 0");
  delay.validate();
  require(!delay.is_infinite() || is_blackhole(),
          "only the blackhole path may have infinite delay");
}

void Workload::validate() const {
  require(std::isfinite(rate_bits_per_s) && rate_bits_per_s > 0.0,
          "generated rate must be positive");
  require(std::isfinite(lifetime_s) && lifetime_s > 0.0, "lifetime must be positive");
  require(cost_bound >= 0.0, "cost bound must be >= 0");
  require(packet_bits > 0, "packet size must be positive");
}

Combination Combination::decode(std::size_t flat, std::size_t n, std::size_t m) {
  Combination c;
  c.paths.resize(m);
  for (std::size_t k = 0; k < m; ++k) {
    c.paths[k] = flat % n;
    flat /= n;
  }
  return c;
}

std::size_t Combination::encode(std::size_t n) const {
  std::size_t flat = 0;
  for (std::size_t k = paths.size(); k-- > 0;) {
    require(paths[k] < n, "combination references path " +
                              std::to_string(paths[k]) + " of " + std::to_string(n));
    flat = flat * n + paths[k];
  }
  return flat;
}

Network::Network(std::vector<PathSpec> paths, std::size_t attempts)
    : paths_(std::move(paths)), attempts_(attempts) {
  validate();
}

const PathSpec& Network::path(std::size_t i) const {
  require(i < paths_.size(), "path index " + std::to_string(i) + " out of range");
  return paths_[i];
}

PathSpec& Network::mutable_path(std::size_t i) {
  require(i < paths_.size(), "path index " + std::to_string(i) + " out of range");
  return paths_[i];
}

void Network::set_attempts(std::size_t m) {
  attempts_ = m;
  validate();
}

std::size_t Network::combination_count() const {
  std::size_t count = 1;
  for (std::size_t k = 0; k < attempts_; ++k) {
    require(count <= kMaxCombinations / std::max<std::size_t>(paths_.size(), 1),
            "n^m is too large");
    count *= paths_.size();
  }
  return count;
}

void Network::validate() const {
  require(!paths_.empty(), "network needs at least one path");
  require(attempts_ >= 1, "attempts must be >= 1");
  for (const auto& p : paths_) p.validate();
  (void)combination_count();
  (void)min_delay_path(*this);
}

std::size_t min_delay_path(const Network& net) {
  std::size_t best = net.size();
  double best_mean = kInfinity;
  for (std::size_t i = 0; i < net.size(); ++i) {
    const double m = net.path(i).delay.mean();
    if (m < best_mean) {
      best_mean = m;
      best = i;
    }
  }
  require(best < net.size(), "no path has a finite expected delay");
  return best;
}

double delivery_prob(const Network& net, const Workload& workload,
                     const Combination& combo) {
  require(combo.attempts() == net.attempts(), "combination length differs from attempts");
  for (std::size_t p : combo.paths) {
    require(p < net.size(), "combination references path " + std::to_string(p) +
                                " of " + std::to_string(net.size()));
    require(net.path(p).delay.is_fixed(),
            "delivery_prob needs fixed delays; use the stochastic model");
  }
  const double d_min = net.path(min_delay_path(net)).delay.fixed_seconds();
  double prob = 0.0;
  double all_lost = 1.0;
  double elapsed = 0.0;
  for (std::size_t k = 0; k < combo.attempts(); ++k) {
    const PathSpec& p = net.path(combo[k]);
    elapsed += p.delay.fixed_seconds() + (k > 0 ? d_min : 0.0);
    // Delays are non-negative: once a prefix misses the deadline so do all
    // longer ones. This also keeps +inf out of the arithmetic below.
    if (!meets_deadline(elapsed, workload.lifetime_s)) break;
    prob += all_lost * (1.0 - p.loss_prob);
    all_lost *= p.loss_prob;
  }
  return prob;
}

std::vector<CombinationCoefficients> combination_coefficients(
    const Network& net, const Workload& workload) {
  const std::size_t n = net.size();
  const std::size_t cols = net.combination_count();
  std::vector<CombinationCoefficients> out(cols);
  for (std::size_t l = 0; l < cols; ++l) {
    const Combination combo = net.combination(l);
    auto& c = out[l];
    c.delivery = delivery_prob(net, workload, combo);
    c.traffic_bits_per_s.assign(n, 0.0);
    double reach = 1.0;  // probability that attempt k is transmitted
    for (std::size_t k = 0; k < combo.attempts(); ++k) {
      const PathSpec& p = net.path(combo[k]);
      const double rate = workload.rate_bits_per_s * reach;
      c.traffic_bits_per_s[combo[k]] += rate;
      c.cost += rate * p.cost_per_bit;
      reach *= p.loss_prob;
    }
  }
  return out;
}

std::vector<double> sent_rate(std::span<const CombinationCoefficients> coeffs,
                              std::span<const double> x) {
  require(coeffs.size() == x.size(), "assignment vector length mismatch");
  std::vector<double> s(coeffs.empty() ? 0 : coeffs.front().traffic_bits_per_s.size(), 0.0);
  for (std::size_t l = 0; l < x.size(); ++l) {
    if (x[l] == 0.0) continue;
    for (std::size_t k = 0; k < s.size(); ++k) {
      s[k] += x[l] * coeffs[l].traffic_bits_per_s[k];
    }
  }
  return s;
}

double quality(std::span<const CombinationCoefficients> coeffs,
               std::span<const double> x) {
  require(coeffs.size() == x.size(), "assignment vector length mismatch");
  double q = 0.0;
  for (std::size_t l = 0; l < x.size(); ++l) q += x[l] * coeffs[l].delivery;
  return q;
}

double total_cost(std::span<const CombinationCoefficients> coeffs,
                  std::span<const double> x) {
  require(coeffs.size() == x.size(), "assignment vector length mismatch");
  double c = 0.0;
  for (std::size_t l = 0; l < x.size(); ++l) c += x[l] * coeffs[l].cost;
  return c;
}

std::vector<double> sent_rate(const Network& net, const Workload& workload,
                              std::span<const double> x) {
  check_x(net, x);
  return sent_rate(combination_coefficients(net, workload), x);
}

double quality(const Network& net, const Workload& workload,
               std::span<const double> x) {
  check_x(net, x);
  return quality(combination_coefficients(net, workload), x);
}

double total_cost(const Network& net, const Workload& workload,
                  std::span<const double> x) {
  check_x(net, x);
  const auto s = sent_rate(net, workload, x);
  double c = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) c += net.path(i).cost_per_bit * s[i];
  return c;
}

Network augment_blackhole(const Network& net, const Workload& workload) {
  require(!net.has_blackhole(), "network already has a blackhole path");
  workload.validate();
  PathSpec hole;
  hole.bandwidth_bits_per_s = workload.rate_bits_per_s;
  hole.delay = DelayModel::infinite();
  hole.loss_prob = 1.0;
  hole.cost_per_bit = 0.0;

  Network out;
  out.paths_.reserve(net.size() + 1);
  out.paths_.push_back(hole);
  for (const auto& p : net.paths()) out.paths_.push_back(p);
  out.attempts_ = net.attempts();
  out.has_blackhole_ = true;
  out.validate();
  return out;
}

LpProblem build_quality_lp(const Network& net, const Workload& workload) {
  require(net.has_blackhole(), "LP construction requires a blackhole-augmented network");
  return build_quality_lp(net, workload, combination_coefficients(net, workload));
}

LpProblem build_quality_lp(const Network& net, const Workload& workload,
                           std::span<const CombinationCoefficients> coeffs) {
  workload.validate();
  LpProblem lp = assemble(net, coeffs);
  const std::size_t n = net.size();
  lp.sense = Sense::kMaximize;
  lp.objective.resize(coeffs.size());
  for (std::size_t l = 0; l < coeffs.size(); ++l) {
    lp.objective[l] = coeffs[l].delivery;
    lp.ineq_matrix(n, l) = coeffs[l].cost;
  }
  lp.ineq_rhs[n] = workload.cost_bound;
  return lp;
}

LpProblem build_cost_lp(const Network& net, const Workload& workload,
                        double min_quality) {
  require(net.has_blackhole(), "LP construction requires a blackhole-augmented network");
  return build_cost_lp(net, workload, min_quality,
                       combination_coefficients(net, workload));
}

LpProblem build_cost_lp(const Network& net, const Workload& workload,
                        double min_quality,
                        std::span<const CombinationCoefficients> coeffs) {
  workload.validate();
  require(min_quality >= 0.0 && min_quality <= 1.0, "minimum quality must lie in [0,1]");
  LpProblem lp = assemble(net, coeffs);
  const std::size_t n = net.size();
  lp.sense = Sense::kMinimize;
  lp.objective.resize(coeffs.size());
  for (std::size_t l = 0; l < coeffs.size(); ++l) {
    lp.objective[l] = coeffs[l].cost;
    lp.ineq_matrix(n, l) = -coeffs[l].delivery;
  }
  lp.ineq_rhs[n] = -min_quality;
  return lp;
}

double fixed_timeout(const Network& net, std::size_t path, double guard_s) {
  require(guard_s >= 0.0, "timeout guard must be >= 0");
  const PathSpec& p = net.path(path);
  require(!p.is_blackhole(), "the blackhole path has no retransmission timeout");
  const double d_min = net.path(min_delay_path(net)).delay.fixed_seconds();
  return p.delay.fixed_seconds() + d_min + guard_s;
}

std::vector<std::size_t> combinations_within(const Network& net,
                                             std::span<const std::size_t> allowed) {
  std::vector<std::size_t> out;
  for (std::size_t l = 0; l < net.combination_count(); ++l) {
    const Combination c = net.combination(l);
    const bool ok = std::all_of(c.paths.begin(), c.paths.end(), [&](std::size_t p) {
      return std::find(allowed.begin(), allowed.end(), p) != allowed.end();
    });
    if (ok) out.push_back(l);
  }
  return out;
}

void prefer_fewer_blackhole_attempts(const Network& net, const LpProblem& lp,
                                     std::vector<double>& x) {
  const std::size_t count = lp.variables();
  if (x.size() != count || net.combination_count() != count) {
    throw ModelError("assignment does not match the program");
  }
  auto same_column = [&](std::size_t a, std::size_t b) {
    if (lp.objective[a] != lp.objective[b]) return false;
    if (!lp.eq_row.empty() && lp.eq_row[a] != lp.eq_row[b]) return false;
    for (std::size_t r = 0; r < lp.ineq_matrix.rows(); ++r) {
      if (lp.ineq_matrix(r, a) != lp.ineq_matrix(r, b)) return false;
    }
    return true;
  };
  // (blackhole attempts, distinct paths, index), smaller is preferred.
  auto key = [&](std::size_t l) {
    Combination c = net.combination(l);
    const auto holes = std::count_if(c.paths.begin(), c.paths.end(),
                                     [&](std::size_t p) { return net.path(p).is_blackhole(); });
    std::sort(c.paths.begin(), c.paths.end());
    const auto distinct = std::unique(c.paths.begin(), c.paths.end()) - c.paths.begin();
    return std::tuple(holes, distinct, l);
  };
  for (std::size_t l = 0; l < count; ++l) {
    if (x[l] == 0.0) continue;
    std::size_t best = l;
    for (std::size_t k = 0; k < count; ++k) {
      if (k == l || !same_column(l, k)) continue;
      if (key(k) < key(best)) best = k;
    }
    if (best != l) {
      x[best] += x[l];
      x[l] = 0.0;
    }
  }
}

}  // namespace dmpath
