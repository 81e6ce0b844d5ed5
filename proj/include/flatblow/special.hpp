#pragma once

// Error-function family. erf and erfc come from <cmath>; erfcx is the scaled
// complement e^{u^2} erfc(u), evaluated without overflow for large u.

#include <cmath>
#include <limits>
#include <numbers>

namespace flatblow {

inline double erf(double u) { return std::erf(u); }
inline double erfc(double u) { return std::erfc(u); }

namespace detail {

// e^{u^2} with the rounding error of u*u folded back in.
inline double exp_square(double u) {
  const double hi = u * u;
  const double lo = std::fma(u, u, -hi);
  return std::exp(hi) * (1.0 + lo);
}

// Continued fraction erfcx(u) = pi^{-1/2} / (u + (1/2)/(u + 1/(u + (3/2)/(u + ...)))),
// evaluated with the modified Lentz algorithm.
inline double erfcx_cf(double u) {
  constexpr double tiny = 1e-300;
  double f = u;
  double C = f, D = 0.0;
  for (int n = 1; n < 5000; ++n) {
    const double a = 0.5 * n;
    D = u + a * D;
    if (D == 0.0) D = tiny;
    C = u + a / C;
    if (C == 0.0) C = tiny;
    D = 1.0 / D;
    const double delta = C * D;
    f *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return std::numbers::inv_sqrtpi / f;
}

}  // namespace detail

/// Scaled complementary error function e^{u^2} erfc(u).
inline double erfcx(double u) {
  if (std::isnan(u)) return u;
  if (u < 0.0) {
    if (u < -26.7) return std::numeric_limits<double>::infinity();
    return 2.0 * detail::exp_square(u) - erfcx(-u);
  }
  if (u < 5.0) return detail::exp_square(u) * std::erfc(u);
  if (u > 1e8) return std::numbers::inv_sqrtpi / u;
  return detail::erfcx_cf(u);
}

}  // namespace flatblow
