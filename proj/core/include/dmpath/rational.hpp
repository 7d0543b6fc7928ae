#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace dmpath {

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;
};

/// Best continued-fraction approximation of `x` with denominator at most
/// `max_den`, returned only if it is within `tol` of `x`.
std::optional<Rational> to_rational(double x, std::int64_t max_den = 10000,
                                    double tol = 1e-9);

}  // namespace dmpath
