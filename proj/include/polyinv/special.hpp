#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "polyinv/errors.hpp"

namespace polyinv {

namespace detail {

// Modified Lentz evaluation of the incomplete beta continued fraction.
inline double beta_continued_fraction(double x, double a, double b) {
  constexpr double tiny = 1e-300;
  constexpr double eps = 1e-16;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < tiny) d = tiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 10000; ++m) {
    const double m2 = 2.0 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < tiny) d = tiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) return h;
  }
  throw NumericalFailure("incomplete beta continued fraction did not converge");
}

inline double log_beta(double a, double b) {
  return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b);
}

}  // namespace detail

/// Regularized incomplete beta function I(x; a, b).
inline double reg_inc_beta(double x, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw ArgumentError("reg_inc_beta: a and b must be positive");
  if (!(x >= 0.0 && x <= 1.0)) throw ArgumentError("reg_inc_beta: x outside [0, 1]");
  if (x == 0.0) return 0.0;
  if (x == 1.0) return 1.0;
  const double log_front =
      a * std::log(x) + b * std::log1p(-x) - detail::log_beta(a, b);
  // The fraction converges rapidly below the mean-ish switch point; above it
  // use I(x; a, b) = 1 - I(1 - x; b, a).
  if (x < (a + 1.0) / (a + b + 2.0))
    return std::exp(log_front) * detail::beta_continued_fraction(x, a, b) / a;
  return 1.0 - std::exp(log_front) * detail::beta_continued_fraction(1.0 - x, b, a) / b;
}

/// Inverse in x of reg_inc_beta: bisection on a shrinking bracket with
/// Newton steps accepted only when they stay inside it.
inline double reg_inc_beta_inv(double y, double a, double b) {
  if (!(a > 0.0) || !(b > 0.0)) throw ArgumentError("reg_inc_beta_inv: a and b must be positive");
  if (!(y >= 0.0 && y <= 1.0)) throw ArgumentError("reg_inc_beta_inv: y outside [0, 1]");
  if (y == 0.0) return 0.0;
  if (y == 1.0) return 1.0;
  const double lb = detail::log_beta(a, b);
  double lo = 0.0, hi = 1.0;
  double x = 0.5;
  for (int it = 0; it < 200; ++it) {
    const double f = reg_inc_beta(x, a, b) - y;
    if (f == 0.0) return x;
    if (f < 0.0) lo = x; else hi = x;
    if (hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(hi, 1e-300))
      break;
    const double log_pdf = (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x) - lb;
    const double step = f / std::exp(log_pdf);
    const double xn = x - step;
    if (std::isfinite(xn) && xn > lo && xn < hi && std::abs(step) < 0.5 * (hi - lo)) {
      x = xn;
      if (std::abs(step) <= 1e-17 * std::max(x, 1e-300)) break;
    } else {
      x = 0.5 * (lo + hi);
    }
  }
  return x;
}

/// ln C(n, k).
inline double log_binomial(std::uint64_t n, std::uint64_t k) {
  if (k > n) throw ArgumentError("log_binomial: k > n");
  const std::uint64_t kk = std::min(k, n - k);
  if (kk <= 2000) {
    // Direct product is accurate where lgamma differences lose digits.
    double s = 0.0;
    for (std::uint64_t i = 1; i <= kk; ++i)
      s += std::log(static_cast<double>(n - kk + i) / static_cast<double>(i));
    return s;
  }
  const auto nd = static_cast<double>(n), kd = static_cast<double>(kk);
  return std::lgamma(nd + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(nd - kd + 1.0);
}

}  // namespace polyinv
