#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dmpath/model.hpp"

namespace dmpath::stochastic {

/// Regularized lower incomplete gamma P(a, x), accurate to ~1e-12.
double regularized_lower_gamma(double a, double x);

/// CDF of Gamma(shape, scale) at x (scale convention: mean = shape * scale).
/// Returns 0 for x <= 0 and 1 for x = +inf.
double gamma_cdf(double shape, double scale, double x);
double gamma_pdf(double shape, double scale, double x);

/// Tabulated distribution of one path delay.
///
/// Gamma delays are tabulated on [shift, shift + mean + 12 sd] (in absolute
/// time, i.e. the shift is included) at a fixed step. Fixed delays are a
/// single point mass; the blackhole's infinite delay has no mass at all.
class DelayGrid {
 public:
  explicit DelayGrid(const DelayModel& delay, double step_s = 1e-3);

  double step_s() const { return step_s_; }
  double lo_s() const { return lo_s_; }
  double hi_s() const { return hi_s_; }
  bool point_mass() const { return point_mass_; }
  bool never() const { return never_; }

  /// P(d <= t), cubic Hermite interpolation between grid nodes.
  double cdf(double t) const;

  std::span<const double> cdf_values() const { return cdf_; }
  std::span<const double> pdf_values() const { return pdf_; }
  /// Probability mass of cell k = [lo + k h, lo + (k+1) h].
  std::span<const double> cell_mass() const { return mass_; }
  double cell_mid(std::size_t k) const;

 private:
  double step_s_;
  double lo_s_ = 0.0;
  double hi_s_ = 0.0;
  bool point_mass_ = false;
  bool never_ = false;
  std::vector<double> cdf_;
  std::vector<double> pdf_;
  std::vector<double> mass_;
};

/// P(a + b <= t) for independent delays, by midpoint quadrature over the
/// cells of one grid against the interpolated CDF of the other.
double sum_cdf(const DelayGrid& a, const DelayGrid& b, double t);

struct StochasticOptions {
  double step_s = 1e-3;
  double refine_step_s = 1e-4;
  double plateau_eps = 1e-3;
  /// A combination whose best objective stays below this has no usable timeout.
  double min_objective = 1e-6;
};

/// Outcome of the timeout search for one (first, second) path pair.
struct TimeoutChoice {
  bool feasible = false;
  double chosen_s = 0.0;
  double plateau_lo_s = 0.0;
  double plateau_hi_s = 0.0;
  double objective_max = 0.0;
};

class TimeoutTable {
 public:
  TimeoutTable() = default;
  explicit TimeoutTable(std::size_t paths) : paths_(paths), entries_(paths * paths) {}

  std::size_t paths() const { return paths_; }
  const TimeoutChoice& at(std::size_t first, std::size_t second) const {
    return entries_.at(first + second * paths_);
  }
  void set(std::size_t first, std::size_t second, const TimeoutChoice& choice) {
    entries_.at(first + second * paths_) = choice;
  }

 private:
  std::size_t paths_ = 0;
  std::vector<TimeoutChoice> entries_;
};

/// Random-delay view of a two-attempt network. Acknowledgments return on the
/// path with the smallest expected delay; all delays and erasures are
/// independent.
class StochasticModel {
 public:
  StochasticModel(const Network& net, const Workload& workload,
                  StochasticOptions options = {});

  const Network& network() const { return net_; }
  const StochasticOptions& options() const { return options_; }
  const DelayGrid& grid(std::size_t path) const { return grids_.at(path); }
  std::size_t ack_path() const { return ack_path_; }

  /// P(d_first + d_ack <= t).
  double ack_return_cdf(std::size_t first, double t) const;

  /// P(t + d_second <= lifetime) * P(d_first + d_ack <= t).
  double timeout_objective(std::size_t first, std::size_t second, double t) const;

  /// Grid search over t in [0, lifetime]; returns the contiguous set of
  /// timeouts within plateau_eps of the best objective, with refined edges,
  /// and picks its midpoint.
  TimeoutChoice optimize_timeout(std::size_t first, std::size_t second) const;
  TimeoutTable optimize_timeouts() const;

  /// 1 - P(d_first + d_ack <= t) * (1 - loss_first).
  double retrans_prob(std::size_t first, double timeout_s) const;

  /// LP coefficients for every two-attempt combination. Pairs without a
  /// feasible timeout never retransmit.
  std::vector<CombinationCoefficients> coefficients(const TimeoutTable& timeouts) const;

 private:
  Network net_;
  Workload workload_;
  StochasticOptions options_;
  std::vector<DelayGrid> grids_;
  std::size_t ack_path_ = 0;
};

TimeoutChoice optimize_timeout(const Network& net, const Workload& workload,
                               std::size_t first, std::size_t second,
                               const StochasticOptions& options = {});

double retrans_prob(const Network& net, std::size_t first, double timeout_s,
                    const StochasticOptions& options = {});

/// Throws ModelError unless net.attempts() == 2.
std::vector<CombinationCoefficients> stochastic_lp_coefficients(
    const Network& net, const Workload& workload, const TimeoutTable& timeouts,
    const StochasticOptions& options = {});

}  // namespace dmpath::stochastic
