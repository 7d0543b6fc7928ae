#pragma once

// Independent reference implementations used only by tests. Nothing here
// calls into the library's formulas; they are written out directly from the
// two-attempt model definitions, or computed by brute force.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <random>
#include <vector>

#include <boost/math/special_functions/gamma.hpp>

namespace oracle {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// A two-attempt network in plain arrays, index 0 = blackhole.
struct TwoAttempt {
  std::vector<double> delay;  // seconds, +inf for the blackhole
  std::vector<double> tau;
  std::vector<double> cost;
  std::vector<double> bandwidth;
  double lambda = 0.0;
  double lifetime = 0.0;

  std::size_t n() const { return delay.size(); }
  std::size_t i_of(std::size_t l) const { return l % n(); }
  std::size_t j_of(std::size_t l) const { return l / n(); }

  double d_min() const {
    return *std::min_element(delay.begin(), delay.end());
  }

  /// Three-case delivery coefficient.
  double p(std::size_t l) const {
    const std::size_t i = i_of(l), j = j_of(l);
    const double slack = 1e-9;
    if (delay[i] + d_min() + delay[j] <= lifetime + slack) return 1.0 - tau[i] * tau[j];
    if (delay[i] <= lifetime + slack) return 1.0 - tau[i];
    return 0.0;
  }

  /// Four-case bandwidth coefficient of combination l in row k.
  double a(std::size_t k, std::size_t l) const {
    const std::size_t i = i_of(l), j = j_of(l);
    if (i == k && j == k) return lambda + lambda * tau[i];
    if (i != k && j == k) return lambda * tau[i];
    if (j != k && i == k) return lambda;
    return 0.0;
  }

  double r(std::size_t l) const {
    const std::size_t i = i_of(l), j = j_of(l);
    return lambda * cost[i] + lambda * tau[i] * cost[j];
  }

  /// S_i = sum_j x_ij lambda + sum_j x_ji lambda tau_j with x[i][j] = x[i + j n].
  std::vector<double> sent(const std::vector<double>& x) const {
    std::vector<double> s(n(), 0.0);
    for (std::size_t i = 0; i < n(); ++i) {
      for (std::size_t j = 0; j < n(); ++j) {
        s[i] += x[i + j * n()] * lambda;
        s[i] += x[j + i * n()] * lambda * tau[j];
      }
    }
    return s;
  }

  /// Goodput over lambda, summing first-attempt and retransmission terms.
  double quality(const std::vector<double>& x) const {
    const double slack = 1e-9;
    double g = 0.0;
    for (std::size_t i = 0; i < n(); ++i) {
      for (std::size_t j = 0; j < n(); ++j) {
        const double xij = x[i + j * n()];
        if (delay[i] <= lifetime + slack) g += xij * (1.0 - tau[i]) * lambda;
        if (delay[i] + d_min() + delay[j] <= lifetime + slack) {
          g += xij * tau[i] * (1.0 - tau[j]) * lambda;
        }
      }
    }
    return g / lambda;
  }
};

/// Delivery probability of an m-attempt sequence by enumerating which
/// attempts are erased (2^m outcomes). Attempt k is usable when its
/// cumulative send-and-ack schedule fits the lifetime.
inline double delivery_by_enumeration(const std::vector<std::size_t>& seq,
                                      const std::vector<double>& delay,
                                      const std::vector<double>& tau, double d_min,
                                      double lifetime) {
  const std::size_t m = seq.size();
  double total = 0.0;
  for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
    // bit k set = attempt k erased
    double prob = 1.0;
    for (std::size_t k = 0; k < m; ++k) {
      const double t = tau[seq[k]];
      prob *= (mask >> k & 1) ? t : 1.0 - t;
    }
    if (prob == 0.0) continue;
    // The datum arrives on the first non-erased attempt, if it is in time.
    double elapsed = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      elapsed += delay[seq[k]] + (k > 0 ? d_min : 0.0);
      if (!(mask >> k & 1)) {
        if (elapsed <= lifetime + 1e-9) total += prob;
        break;
      }
    }
  }
  return total;
}

/// Small dense LP: optimize c.x s.t. A x <= b, sum-row e.x = 1 (optional),
/// x >= 0. Enumerates every basis of the slack form and keeps the best
/// feasible basic solution.
struct VertexResult {
  bool feasible = false;
  double objective = 0.0;
  std::vector<double> x;
};

namespace detail {

// Solves M y = rhs by Gaussian elimination with partial pivoting. Returns
// nullopt when M is singular.
inline std::optional<std::vector<double>> solve_square(std::vector<std::vector<double>> m,
                                                       std::vector<double> rhs) {
  const std::size_t n = rhs.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(m[r][col]) > std::abs(m[piv][col])) piv = r;
    }
    if (std::abs(m[piv][col]) < 1e-12) return std::nullopt;
    std::swap(m[piv], m[col]);
    std::swap(rhs[piv], rhs[col]);
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double f = m[r][col] / m[col][col];
      if (f == 0.0) continue;
      for (std::size_t c = col; c < n; ++c) m[r][c] -= f * m[col][c];
      rhs[r] -= f * rhs[col];
    }
  }
  for (std::size_t r = 0; r < n; ++r) rhs[r] /= m[r][r];
  return rhs;
}

}  // namespace detail

inline VertexResult enumerate_vertices(const std::vector<double>& c,
                                       const std::vector<std::vector<double>>& a,
                                       const std::vector<double>& b,
                                       const std::vector<double>& eq, bool maximize) {
  const std::size_t n = c.size();
  const std::size_t rows = a.size() + (eq.empty() ? 0 : 1);
  const std::size_t total = n + a.size();  // structural + slacks

  // Column k of the slack form.
  auto column = [&](std::size_t k) {
    std::vector<double> col(rows, 0.0);
    for (std::size_t r = 0; r < a.size(); ++r) col[r] = k < n ? a[r][k] : (k - n == r ? 1.0 : 0.0);
    if (!eq.empty()) col[a.size()] = k < n ? eq[k] : 0.0;
    return col;
  };
  std::vector<double> rhs(b);
  if (!eq.empty()) rhs.push_back(1.0);

  VertexResult best;
  std::vector<std::size_t> pick(rows);
  for (std::size_t r = 0; r < rows; ++r) pick[r] = r;
  if (rows > total) return best;
  for (;;) {
    std::vector<std::vector<double>> m(rows, std::vector<double>(rows));
    for (std::size_t k = 0; k < rows; ++k) {
      const auto col = column(pick[k]);
      for (std::size_t r = 0; r < rows; ++r) m[r][k] = col[r];
    }
    if (auto y = detail::solve_square(m, rhs)) {
      bool ok = true;
      for (double v : *y) ok = ok && v >= -1e-9;
      if (ok) {
        std::vector<double> x(n, 0.0);
        for (std::size_t k = 0; k < rows; ++k) {
          if (pick[k] < n) x[pick[k]] = std::max(0.0, (*y)[k]);
        }
        double obj = 0.0;
        for (std::size_t k = 0; k < n; ++k) obj += c[k] * x[k];
        if (!best.feasible || (maximize ? obj > best.objective : obj < best.objective)) {
          best = {true, obj, x};
        }
      }
    }
    // Next combination of `rows` columns out of `total`.
    std::size_t k = rows;
    while (k > 0 && pick[k - 1] == total - rows + k - 1) --k;
    if (k == 0) break;
    ++pick[k - 1];
    for (std::size_t q = k; q < rows; ++q) pick[q] = pick[q - 1] + 1;
  }
  return best;
}

/// Gamma CDF (scale convention) from Boost.
inline double gamma_cdf(double shape, double scale, double x) {
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p(shape, x / scale);
}

inline double gamma_pdf(double shape, double scale, double x) {
  if (x <= 0.0) return 0.0;
  return boost::math::gamma_p_derivative(shape, x / scale) / scale;
}

struct Gamma {
  double shift, shape, scale;
  double cdf(double t) const { return gamma_cdf(shape, scale, t - shift); }
  double pdf(double t) const { return gamma_pdf(shape, scale, t - shift); }
  double upper() const { return shift + shape * scale + 20.0 * std::sqrt(shape) * scale; }
};

/// P(A + B <= t) by composite Simpson over B's density.
inline double sum_cdf(const Gamma& a, const Gamma& b, double t, int intervals = 20000) {
  const double lo = b.shift;
  const double hi = std::min(b.upper(), t - a.shift);
  if (hi <= lo) return 0.0;
  const double h = (hi - lo) / intervals;
  double s = 0.0;
  for (int k = 0; k <= intervals; ++k) {
    const double y = lo + k * h;
    const double w = (k == 0 || k == intervals) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    s += w * b.pdf(y) * a.cdf(t - y);
  }
  return s * h / 3.0;
}

inline double sample(const Gamma& g, std::mt19937_64& rng) {
  std::gamma_distribution<double> dist(g.shape, g.scale);
  return g.shift + dist(rng);
}

}  // namespace oracle
