#include "dmpath/rational.hpp"

#include <cmath>

namespace dmpath {

std::string Rational::str() const {
  if (den == 1) return std::to_string(num);
  return std::to_string(num) + "/" + std::to_string(den);
}

std::optional<Rational> to_rational(double x, std::int64_t max_den, double tol) {
  if (!std::isfinite(x) || max_den < 1) return std::nullopt;
  const bool negative = x < 0.0;
  const double target = std::abs(x);

  // Convergents h/k of the continued fraction of target.
  std::int64_t h_prev = 1, h = static_cast<std::int64_t>(std::floor(target));
  std::int64_t k_prev = 0, k = 1;
  double rest = target - std::floor(target);
  std::optional<Rational> best;
  if (std::abs(target - static_cast<double>(h)) <= tol) best = Rational{h, 1};
  for (int iter = 0; iter < 64 && !best && rest > 1e-15; ++iter) {
    const double inv = 1.0 / rest;
    const auto a = static_cast<std::int64_t>(std::floor(inv));
    rest = inv - static_cast<double>(a);
    const std::int64_t h_next = a * h + h_prev;
    const std::int64_t k_next = a * k + k_prev;
    if (k_next > max_den) break;
    h_prev = h;
    h = h_next;
    k_prev = k;
    k = k_next;
    if (std::abs(target - static_cast<double>(h) / static_cast<double>(k)) <= tol) {
      best = Rational{h, k};
    }
  }
  if (!best) return std::nullopt;
  if (negative) best->num = -best->num;
  return best;
}

}  // namespace dmpath
