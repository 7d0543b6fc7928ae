#include "dmpath/stochastic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace dmpath::stochastic {

namespace {

constexpr int kMaxSeriesTerms = 200000;
constexpr int kMaxFractionTerms = 10000;
constexpr double kEps = 1e-15;
constexpr double kTiny = 1e-300;

// Series expansion of P(a, x), valid for x < a + 1.
double lower_series(double a, double x) {
  double ap = a;
  double term = 1.0 / a;
  double sum = term;
  for (int n = 0; n < kMaxSeriesTerms; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::abs(term) < std::abs(sum) * kEps) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz continued fraction for Q(a, x), valid for x >= a + 1.
double upper_fraction(double a, double x) {
  double b = x + 1.0 - a;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxFractionTerms; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double delta = d * c;
    h *= delta;
    if (std::abs(delta - 1.0) < kEps) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double regularized_lower_gamma(double a, double x) {
  if (!(a > 0.0)) throw ModelError("incomplete gamma needs a > 0");
  if (std::isnan(x)) return x;
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  if (x < a + 1.0) return std::clamp(lower_series(a, x), 0.0, 1.0);
  return std::clamp(1.0 - upper_fraction(a, x), 0.0, 1.0);
}

double gamma_cdf(double shape, double scale, double x) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw ModelError("gamma distribution needs shape > 0 and scale > 0");
  }
  if (x <= 0.0) return 0.0;
  return regularized_lower_gamma(shape, x / scale);
}

double gamma_pdf(double shape, double scale, double x) {
  if (!(shape > 0.0) || !(scale > 0.0)) {
    throw ModelError("gamma distribution needs shape > 0 and scale > 0");
  }
  if (x < 0.0 || std::isinf(x)) return 0.0;
  if (x == 0.0) {
    if (shape < 1.0) return std::numeric_limits<double>::infinity();
    return shape == 1.0 ? 1.0 / scale : 0.0;
  }
  const double z = x / scale;
  return std::exp((shape - 1.0) * std::log(z) - z - std::lgamma(shape)) / scale;
}

DelayGrid::DelayGrid(const DelayModel& delay, double step_s) : step_s_(step_s) {
  if (!(step_s > 0.0)) throw ModelError("grid step must be positive");
  if (delay.is_infinite()) {
    never_ = true;
    lo_s_ = hi_s_ = std::numeric_limits<double>::infinity();
    return;
  }
  if (delay.is_fixed()) {
    point_mass_ = true;
    lo_s_ = hi_s_ = delay.fixed_seconds();
    cdf_ = {1.0};
    pdf_ = {std::numeric_limits<double>::infinity()};
    mass_ = {1.0};
    return;
  }
  const auto& g = delay.gamma();
  lo_s_ = g.shift_s;
  const double span = g.shape * g.scale_s + 12.0 * std::sqrt(g.shape) * g.scale_s;
  const auto cells = static_cast<std::size_t>(std::ceil(span / step_s));
  hi_s_ = lo_s_ + static_cast<double>(cells) * step_s;
  cdf_.resize(cells + 1);
  pdf_.resize(cells + 1);
  for (std::size_t k = 0; k <= cells; ++k) {
    const double x = static_cast<double>(k) * step_s;
    cdf_[k] = gamma_cdf(g.shape, g.scale_s, x);
    pdf_[k] = gamma_pdf(g.shape, g.scale_s, x);
  }
  // Whatever lies beyond the table is folded into the last cell.
  cdf_.back() = 1.0;
  mass_.resize(cells);
  for (std::size_t k = 0; k < cells; ++k) mass_[k] = cdf_[k + 1] - cdf_[k];
}

double DelayGrid::cdf(double t) const {
  if (never_) return 0.0;
  if (point_mass_) return t >= lo_s_ ? 1.0 : 0.0;
  if (t <= lo_s_) return 0.0;
  if (t >= hi_s_) return 1.0;
  const double pos = (t - lo_s_) / step_s_;
  const auto k = std::min(static_cast<std::size_t>(pos), cdf_.size() - 2);
  const double u = pos - static_cast<double>(k);
  const double f0 = cdf_[k], f1 = cdf_[k + 1];
  const double d0 = pdf_[k] * step_s_, d1 = pdf_[k + 1] * step_s_;
  if (!std::isfinite(d0) || !std::isfinite(d1)) return f0 + u * (f1 - f0);
  // Cubic Hermite with the density as slope, clamped to keep monotonicity.
  const double u2 = u * u, u3 = u2 * u;
  const double v = (2 * u3 - 3 * u2 + 1) * f0 + (u3 - 2 * u2 + u) * d0 +
                   (-2 * u3 + 3 * u2) * f1 + (u3 - u2) * d1;
  return std::clamp(v, f0, f1);
}

double DelayGrid::cell_mid(std::size_t k) const {
  if (point_mass_) return lo_s_;
  return lo_s_ + (static_cast<double>(k) + 0.5) * step_s_;
}

double sum_cdf(const DelayGrid& a, const DelayGrid& b, double t) {
  if (a.never() || b.never()) return 0.0;
  // Integrate against the point mass when there is one: exact.
  if (a.point_mass()) return b.cdf(t - a.lo_s());
  if (b.point_mass()) return a.cdf(t - b.lo_s());
  if (t <= a.lo_s() + b.lo_s()) return 0.0;
  double total = 0.0;
  const auto mass = b.cell_mass();
  for (std::size_t k = 0; k < mass.size(); ++k) {
    if (mass[k] == 0.0) continue;
    const double fa = a.cdf(t - b.cell_mid(k));
    if (fa == 0.0) break;  // later cells only shift further left
    total += mass[k] * fa;
  }
  return std::min(total, 1.0);
}

StochasticModel::StochasticModel(const Network& net, const Workload& workload,
                                 StochasticOptions options)
    : net_(net), workload_(workload), options_(options) {
  workload_.validate();
  if (!(options_.step_s > 0.0) || !(options_.refine_step_s > 0.0) ||
      !(options_.plateau_eps >= 0.0 && options_.plateau_eps < 1.0)) {
    throw ModelError("invalid stochastic options");
  }
  grids_.reserve(net_.size());
  for (const auto& p : net_.paths()) grids_.emplace_back(p.delay, options_.step_s);
  ack_path_ = min_delay_path(net_);
}

double StochasticModel::ack_return_cdf(std::size_t first, double t) const {
  return sum_cdf(grids_.at(first), grids_.at(ack_path_), t);
}

double StochasticModel::timeout_objective(std::size_t first, std::size_t second,
                                          double t) const {
  const double in_time = grids_.at(second).cdf(workload_.lifetime_s - t + kDeadlineSlack_s);
  if (in_time == 0.0) return 0.0;
  return in_time * ack_return_cdf(first, t);
}

TimeoutChoice StochasticModel::optimize_timeout(std::size_t first,
                                                std::size_t second) const {
  const double h = options_.step_s;
  const double lifetime = workload_.lifetime_s;
  const auto steps = static_cast<std::size_t>(std::floor(lifetime / h + 1e-9));

  std::vector<double> g(steps + 1);
  std::size_t best = 0;
  for (std::size_t k = 0; k <= steps; ++k) {
    g[k] = timeout_objective(first, second, static_cast<double>(k) * h);
    if (g[k] > g[best]) best = k;
  }

  TimeoutChoice out;
  out.objective_max = g[best];
  if (g[best] < options_.min_objective) return out;

  const double threshold = (1.0 - options_.plateau_eps) * g[best];
  std::size_t lo = best;
  std::size_t hi = best;
  while (lo > 0 && g[lo - 1] >= threshold) --lo;
  while (hi < steps && g[hi + 1] >= threshold) ++hi;

  // Refine both edges between the last excluded and first included node.
  const double r = options_.refine_step_s;
  double lo_t = static_cast<double>(lo) * h;
  if (lo > 0) {
    const double start = static_cast<double>(lo - 1) * h;
    for (double t = start + r; t < lo_t; t += r) {
      if (timeout_objective(first, second, t) >= threshold) {
        lo_t = t;
        break;
      }
    }
  }
  double hi_t = static_cast<double>(hi) * h;
  if (hi < steps) {
    const double stop = static_cast<double>(hi + 1) * h;
    for (double t = hi_t + r; t < stop; t += r) {
      if (timeout_objective(first, second, t) < threshold) break;
      hi_t = t;
    }
  }

  out.feasible = true;
  out.plateau_lo_s = lo_t;
  out.plateau_hi_s = hi_t;
  out.chosen_s = 0.5 * (lo_t + hi_t);
  return out;
}

TimeoutTable StochasticModel::optimize_timeouts() const {
  TimeoutTable table(net_.size());
  for (std::size_t j = 0; j < net_.size(); ++j) {
    for (std::size_t i = 0; i < net_.size(); ++i) {
      table.set(i, j, optimize_timeout(i, j));
    }
  }
  return table;
}

double StochasticModel::retrans_prob(std::size_t first, double timeout_s) const {
  const double loss = net_.path(first).loss_prob;
  return 1.0 - ack_return_cdf(first, timeout_s) * (1.0 - loss);
}

std::vector<CombinationCoefficients> StochasticModel::coefficients(
    const TimeoutTable& timeouts) const {
  if (net_.attempts() != 2) {
    throw ModelError("the random-delay model is defined for two attempts only");
  }
  const std::size_t n = net_.size();
  if (timeouts.paths() != n) throw ModelError("timeout table does not match network");
  const double lambda = workload_.rate_bits_per_s;
  const double lifetime = workload_.lifetime_s + kDeadlineSlack_s;

  std::vector<CombinationCoefficients> out(n * n);
  for (std::size_t l = 0; l < n * n; ++l) {
    const std::size_t i = l % n;
    const std::size_t j = l / n;
    const PathSpec& first = net_.path(i);
    const PathSpec& second = net_.path(j);
    auto& c = out[l];
    c.traffic_bits_per_s.assign(n, 0.0);

    const double first_ok = grids_[i].cdf(lifetime) * (1.0 - first.loss_prob);
    c.delivery = first_ok;
    c.traffic_bits_per_s[i] += lambda;
    c.cost = lambda * first.cost_per_bit;

    const TimeoutChoice& t = timeouts.at(i, j);
    if (!t.feasible) continue;
    const double retrans = retrans_prob(i, t.chosen_s);
    const double second_ok =
        grids_[j].cdf(lifetime - t.chosen_s) * (1.0 - second.loss_prob);
    // The retransmission only adds value when the first copy did not make it;
    // a late acknowledgment of a delivered copy still costs bandwidth.
    c.delivery += (1.0 - first_ok) * second_ok;
    c.traffic_bits_per_s[j] += lambda * retrans;
    c.cost += lambda * retrans * second.cost_per_bit;
  }
  return out;
}

TimeoutChoice optimize_timeout(const Network& net, const Workload& workload,
                               std::size_t first, std::size_t second,
                               const StochasticOptions& options) {
  return StochasticModel(net, workload, options).optimize_timeout(first, second);
}

double retrans_prob(const Network& net, std::size_t first, double timeout_s,
                    const StochasticOptions& options) {
  // The lifetime does not enter P(retrans); any positive placeholder works.
  Workload w;
  w.rate_bits_per_s = 1.0;
  w.lifetime_s = 1.0;
  return StochasticModel(net, w, options).retrans_prob(first, timeout_s);
}

std::vector<CombinationCoefficients> stochastic_lp_coefficients(
    const Network& net, const Workload& workload, const TimeoutTable& timeouts,
    const StochasticOptions& options) {
  return StochasticModel(net, workload, options).coefficients(timeouts);
}

}  // namespace dmpath::stochastic
