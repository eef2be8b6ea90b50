#ifndef SAMP_PRIORS_HPP
#define SAMP_PRIORS_HPP

#include <cmath>
#include <stdexcept>
#include <string>

#include "samp/special.hpp"

// Separable scalar priors and their denoisers.  The denoiser eta(A, B) is the
// posterior mean of the prior tilted by exp(-A x^2 / 2 + B x); eta'(A, B) is
// its B-derivative, which equals the posterior variance.  log_partition is
// log Z(A, B) of the same tilted measure, so d/dB log Z = eta and
// d/dB eta = eta'.  All functions are pure, deterministic and reentrant.

namespace samp {

struct DenoiserOutput {
  double mean = 0.0;      // eta(A, B)
  double variance = 0.0;  // eta'(A, B) >= 0
};

struct PriorSpec {
  enum class Kind {
    GaussBernoulli,          // rho * N(0,1) + (1-rho) * delta_0
    Rademacher,              // (delta_{+1} + delta_{-1}) / 2
    Gaussian,                // N(mean, variance)
    TruncatedNonnegGaussian  // 2 N(0, sigma2) restricted to x >= 0
  };

  Kind kind = Kind::Gaussian;
  double rho = 1.0;       // GaussBernoulli sparsity, in (0, 1]
  double mean = 0.0;      // Gaussian location
  double variance = 1.0;  // Gaussian variance
  double sigma2 = 1.0;    // truncated-Gaussian scale^2

  static PriorSpec gauss_bernoulli(double rho) {
    if (!(rho > 0.0 && rho <= 1.0))
      throw std::domain_error("gauss_bernoulli: rho must lie in (0, 1]");
    PriorSpec p;
    p.kind = Kind::GaussBernoulli;
    p.rho = rho;
    return p;
  }
  static PriorSpec rademacher() {
    PriorSpec p;
    p.kind = Kind::Rademacher;
    return p;
  }
  static PriorSpec gaussian(double mean, double variance) {
    if (!(variance > 0.0))
      throw std::domain_error("gaussian prior: variance must be positive");
    PriorSpec p;
    p.kind = Kind::Gaussian;
    p.mean = mean;
    p.variance = variance;
    return p;
  }
  static PriorSpec truncated_nonneg_gaussian(double sigma2) {
    if (!(sigma2 > 0.0))
      throw std::domain_error("truncated prior: sigma2 must be positive");
    PriorSpec p;
    p.kind = Kind::TruncatedNonnegGaussian;
    p.sigma2 = sigma2;
    return p;
  }

  double prior_mean() const {
    switch (kind) {
      case Kind::GaussBernoulli: return 0.0;
      case Kind::Rademacher: return 0.0;
      case Kind::Gaussian: return mean;
      case Kind::TruncatedNonnegGaussian:
        return std::sqrt(2.0 * sigma2 / kPi);
    }
    return 0.0;
  }

  // E[x^2] under the prior.
  double second_moment() const {
    switch (kind) {
      case Kind::GaussBernoulli: return rho;
      case Kind::Rademacher: return 1.0;
      case Kind::Gaussian: return variance + mean * mean;
      case Kind::TruncatedNonnegGaussian: return sigma2;
    }
    return 0.0;
  }

  // Var(x) = E[x^2] - E[x]^2.
  double prior_variance() const {
    double m = prior_mean();
    return second_moment() - m * m;
  }

  std::string name() const {
    switch (kind) {
      case Kind::GaussBernoulli: return "gauss_bernoulli";
      case Kind::Rademacher: return "rademacher";
      case Kind::Gaussian: return "gaussian";
      case Kind::TruncatedNonnegGaussian: return "truncated_nonneg_gaussian";
    }
    return "?";
  }
};

namespace detail {

inline void check_denoiser_args(double A, double B) {
  if (!all_finite(A, B))
    throw std::domain_error("prior denoiser: non-finite (A, B)");
  if (A < 0.0) throw std::domain_error("prior denoiser: A must be >= 0");
}

}  // namespace detail

inline DenoiserOutput prior_denoise(const PriorSpec& p, double A, double B) {
  detail::check_denoiser_args(A, B);
  DenoiserOutput out;
  switch (p.kind) {
    case PriorSpec::Kind::Gaussian: {
      double a = A + 1.0 / p.variance;
      double b = B + p.mean / p.variance;
      out.mean = b / a;
      out.variance = 1.0 / a;
      return out;
    }
    case PriorSpec::Kind::Rademacher: {
      double t = std::tanh(B);
      double e = std::exp(-2.0 * std::fabs(B));
      double sech2 = 4.0 * e / sq(1.0 + e);  // 1 - tanh^2, no overflow
      out.mean = t;
      out.variance = sech2;
      return out;
    }
    case PriorSpec::Kind::GaussBernoulli: {
      double m = B / (1.0 + A);
      double s = 1.0 / (1.0 + A);
      double w1;
      if (p.rho >= 1.0) {
        w1 = 1.0;
      } else {
        // log-odds of the Gaussian component vs the atom at zero
        double lg = std::log(p.rho) - 0.5 * std::log1p(A) +
                    0.5 * B * m;  // B^2 / (2 (1 + A))
        double l0 = std::log1p(-p.rho);
        w1 = sigmoid(lg - l0);
      }
      out.mean = w1 * m;
      out.variance = w1 * s + w1 * (1.0 - w1) * m * m;
      return out;
    }
    case PriorSpec::Kind::TruncatedNonnegGaussian: {
      double a = A + 1.0 / p.sigma2;
      double sa = std::sqrt(a);
      double alpha = -B / sa;  // standardized truncation point
      double lam = normal_hazard(alpha);
      out.mean = (B + lam * sa) / a;  // m + sqrt(s) * h(alpha)
      out.variance = truncnorm_var_factor(alpha) / a;
      return out;
    }
  }
  throw std::logic_error("prior_denoise: unknown prior kind");
}

inline double prior_log_partition(const PriorSpec& p, double A, double B) {
  detail::check_denoiser_args(A, B);
  switch (p.kind) {
    case PriorSpec::Kind::Gaussian: {
      double a = A + 1.0 / p.variance;
      double b = B + p.mean / p.variance;
      return -0.5 * std::log(p.variance * a) + 0.5 * b * b / a -
             0.5 * p.mean * p.mean / p.variance;
    }
    case PriorSpec::Kind::Rademacher:
      return -0.5 * A + logcosh(B);
    case PriorSpec::Kind::GaussBernoulli: {
      double lg = -0.5 * std::log1p(A) + 0.5 * B * B / (1.0 + A);
      if (p.rho >= 1.0) return lg;
      return logaddexp(std::log1p(-p.rho), std::log(p.rho) + lg);
    }
    case PriorSpec::Kind::TruncatedNonnegGaussian: {
      double a = A + 1.0 / p.sigma2;
      double alpha = -B / std::sqrt(a);
      // log[ 2 (sigma2 a)^{-1/2} e^{B^2/(2a)} (1 - Phi(alpha)) ]
      return std::log(2.0) - 0.5 * std::log(p.sigma2 * a) +
             0.5 * B * B / a + normal_logcdf(-alpha);
    }
  }
  throw std::logic_error("prior_log_partition: unknown prior kind");
}

}  // namespace samp

#endif  // SAMP_PRIORS_HPP
