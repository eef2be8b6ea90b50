#ifndef SAMP_SPECIAL_HPP
#define SAMP_SPECIAL_HPP

#include <cmath>
#include <limits>
#include <stdexcept>

// Scalar special functions shared by the denoisers, the output channels and
// the state-evolution integrands.  Everything here is pure and branch-stable
// for arguments up to |x| ~ 1e8; the error-function helpers avoid forming
// exp(x^2) so nothing overflows where the mathematical result is finite.

namespace samp {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kSqrt2Pi = 2.50662827463100050242;
inline constexpr double kLog2Pi = 1.83787706640934548356;

inline double sq(double x) { return x * x; }

// log(1 + e^x) without overflow.
inline double log1pexp(double x) {
  if (x > 36.0) return x;
  if (x < -700.0) return 0.0;
  return std::log1p(std::exp(x));
}

// log(e^a + e^b).
inline double logaddexp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// 1 / (1 + e^{-x}).
inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  double e = std::exp(x);
  return e / (1.0 + e);
}

// log cosh(x), stable for large |x|.
inline double logcosh(double x) {
  double a = std::fabs(x);
  return a + log1pexp(-2.0 * a) - 0.6931471805599453094;
}

namespace detail {

// Tail of the Mills-ratio continued fraction: tail_k = x + k / tail_{k+1}.
// Used for x >= 4 where it converges to machine precision in ~40 levels.
inline double mills_cf_tail(double x, int first) {
  double t = x;
  for (int k = first + 40; k >= first; --k) t = x + static_cast<double>(k) / t;
  return t;
}

}  // namespace detail

// Scaled complementary error function erfcx(x) = e^{x^2} erfc(x), x >= 0.
// Direct product below the overflow-safe range, Laplace continued fraction
// above it.
inline double erfcx_nonneg(double x) {
  if (!(x >= 0.0)) throw std::domain_error("erfcx_nonneg: negative argument");
  if (x < 12.0) return std::exp(x * x) * std::erfc(x);
  // erfc(x)/phi-like CF: erfcx(x) = 1/(sqrt(pi)) * 1/(x + 1/2/(x + 1/(x + 3/2/(x + ...))))
  double t = x;
  for (int k = 60; k >= 1; --k) t = x + 0.5 * static_cast<double>(k) / t;
  return 1.0 / (1.7724538509055160273 * t);
}

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / kSqrt2Pi; }

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / kSqrt2); }

// log Phi(x), accurate into the deep left tail.
inline double normal_logcdf(double x) {
  if (x > -1.0) return std::log1p(-0.5 * std::erfc(x / kSqrt2));
  double z = -x / kSqrt2;  // positive
  return std::log(0.5 * erfcx_nonneg(z)) - z * z;
}

// Hazard rate of the standard normal: h(x) = phi(x) / (1 - Phi(x)).
// For x >= 4 uses h = x + delta with delta from the continued fraction,
// avoiding the h - x cancellation that plagues the naive form.
inline double normal_hazard(double x) {
  if (x < 4.0) {
    double q = 0.5 * std::erfc(x / kSqrt2);
    return normal_pdf(x) / q;
  }
  return x + 1.0 / detail::mills_cf_tail(x, 2);
}

// h(x) - x for the same hazard rate; stable for large x.
inline double normal_hazard_minus_x(double x) {
  if (x < 4.0) return normal_hazard(x) - x;
  return 1.0 / detail::mills_cf_tail(x, 2);
}

// Variance factor of a standard normal truncated to [x, inf):
//   v(x) = 1 + x h(x) - h(x)^2   (posterior variance = v * s for scale s).
// Rewritten as (2/tail3)/tail2 - delta^2 for x >= 4 so that no leading-order
// cancellation occurs.
inline double truncnorm_var_factor(double x) {
  if (x < 4.0) {
    double h = normal_hazard(x);
    return 1.0 + x * h - h * h;
  }
  double tail3 = detail::mills_cf_tail(x, 3);
  double tail2 = x + 2.0 / tail3;
  double delta = 1.0 / tail2;
  return (2.0 / tail3) / tail2 - delta * delta;
}

// phi(x) / Phi(x), the lower-tail Mills ratio; equals normal_hazard(-x).
inline double normal_mills_lower(double x) { return normal_hazard(-x); }

inline bool all_finite(double a) { return std::isfinite(a); }

template <typename... T>
inline bool all_finite(double a, T... rest) {
  return std::isfinite(a) && all_finite(rest...);
}

}  // namespace samp

#endif  // SAMP_SPECIAL_HPP
