#include "samp/gb_exact.hpp"

#include <cmath>
#include <vector>

#include "samp/detail/panels.hpp"
#include "samp/special.hpp"

namespace samp {

using detail::gaussian_feature_breakpoints;
using detail::half_gaussian_integral;

namespace {

struct GbParams {
  double rho;
  double lambda;
  double s;   // 1 / (1 + lambda)
  double c;   // log(rho/(1-rho)) - log(1+lambda)/2; +inf when rho = 1
  double w1(double b) const {
    if (rho >= 1.0) return 1.0;
    return sigmoid(c + 0.5 * s * b * b);
  }
  // switching radius of w1 (where its argument crosses 0), 0 if none
  double bstar() const {
    if (rho >= 1.0 || c >= 0.0) return 0.0;
    return std::sqrt(-2.0 * c / s);
  }
  double feature_width() const {
    double b = bstar();
    return b > 0.0 ? 1.0 / (s * b) : 0.0;
  }
};

}  // namespace

GbMoments gb_field_moments(double rho, double lambda, double gamma) {
  if (!(rho > 0.0 && rho <= 1.0))
    throw std::domain_error("gb_field_moments: rho must lie in (0, 1]");
  if (!(lambda >= 0.0) || !(gamma >= 0.0))
    throw std::domain_error("gb_field_moments: lambda, gamma must be >= 0");

  GbParams p{rho, lambda, 1.0 / (1.0 + lambda),
             rho >= 1.0 ? std::numeric_limits<double>::infinity()
                        : std::log(rho / (1.0 - rho)) - 0.5 * std::log1p(lambda)};
  const double bstar = p.bstar();
  const double wf = p.feature_width();

  GbMoments out{0.0, 0.0, 0.0};

  // atom component: x = 0, b ~ N(0, gamma)
  if (rho < 1.0) {
    double sb = std::sqrt(gamma);
    double tail;
    auto bps = gaussian_feature_breakpoints(sb, bstar, wf, tail);
    double mse_a = half_gaussian_integral(sb, bps, tail, [&](double b) {
      double w1 = p.w1(b);
      return sq(w1 * p.s * b);
    });
    double v_a = half_gaussian_integral(sb, bps, tail, [&](double b) {
      double w1 = p.w1(b);
      double m = p.s * b;
      return w1 * p.s + w1 * (1.0 - w1) * m * m;
    });
    out.mse += (1.0 - rho) * mse_a;
    out.v += (1.0 - rho) * v_a;
  }

  // gaussian component: x ~ N(0,1), b ~ N(0, lambda^2 + gamma)
  {
    double var_b = lambda * lambda + gamma;
    double sb = std::sqrt(var_b);
    double vx = var_b > 0.0 ? gamma / var_b : 1.0;
    double kx = var_b > 0.0 ? lambda / var_b : 0.0;  // E[x | b] = kx b
    double tail;
    auto bps = gaussian_feature_breakpoints(sb, bstar, wf, tail);
    double mse_g;
    double v_g;
    double m_g;
    if (sb == 0.0) {
      // no field at all: eta = 0, x ~ N(0,1)
      mse_g = 1.0;
      v_g = p.w1(0.0) * p.s;
      m_g = 0.0;
    } else {
      mse_g = vx + half_gaussian_integral(sb, bps, tail, [&](double b) {
                return sq(b) * sq(p.w1(b) * p.s - kx);
              });
      v_g = half_gaussian_integral(sb, bps, tail, [&](double b) {
        double w1 = p.w1(b);
        double m = p.s * b;
        return w1 * p.s + w1 * (1.0 - w1) * m * m;
      });
      m_g = half_gaussian_integral(sb, bps, tail, [&](double b) {
        return p.w1(b) * p.s * kx * b * b;
      });
    }
    out.mse += rho * mse_g;
    out.v += rho * v_g;
    out.m += rho * m_g;
  }
  return out;
}

double gb_expected_log_partition(double rho, double a) {
  if (!(rho > 0.0 && rho <= 1.0))
    throw std::domain_error("gb_expected_log_partition: rho in (0, 1]");
  if (!(a >= 0.0))
    throw std::domain_error("gb_expected_log_partition: a must be >= 0");

  const double s = 1.0 / (1.0 + a);
  const double c2 = std::log(rho) - 0.5 * std::log1p(a);
  if (rho >= 1.0) {
    // log Z = c2 + s b^2 / 2 exactly
    double e_b2 = a * a + a;  // x-component only
    return c2 + 0.5 * s * e_b2;
  }
  const double l0 = std::log1p(-rho);
  const double delta_l = l0 - c2;  // argument offset of the correction term

  // correction integrand log(1 + exp(delta_l - s b^2 / 2)); localized around
  // b2star where the exponent crosses zero
  double bstar = delta_l > 0.0 ? std::sqrt(2.0 * delta_l / s) : 0.0;
  double wf = bstar > 0.0 ? 1.0 / (s * bstar) : std::sqrt(2.0 / s);
  auto correction = [&](double b) { return log1pexp(delta_l - 0.5 * s * b * b); };

  // atom component: b ~ N(0, a)
  double atom;
  {
    double sb = std::sqrt(a);
    double tail;
    auto bps = gaussian_feature_breakpoints(sb, bstar > 0.0 ? bstar : wf, wf, tail);
    double corr = half_gaussian_integral(sb, bps, tail, correction);
    atom = c2 + 0.5 * s * a + corr;
  }
  // gaussian component: b ~ N(0, a^2 + a)
  double gauss;
  {
    double sb = std::sqrt(a * a + a);
    double tail;
    auto bps = gaussian_feature_breakpoints(sb, bstar > 0.0 ? bstar : wf, wf, tail);
    double corr = sb == 0.0 ? correction(0.0)
                            : half_gaussian_integral(sb, bps, tail, correction);
    gauss = c2 + 0.5 * s * (a * a + a) + corr;
  }
  return (1.0 - rho) * atom + rho * gauss;
}

}  // namespace samp
