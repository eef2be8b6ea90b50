#ifndef SAMP_GB_EXACT_HPP
#define SAMP_GB_EXACT_HPP

// High-accuracy field expectations for the Gauss-Bernoulli prior
// rho N(0,1) + (1-rho) delta_0.
//
// The generic tensor quadrature fails here at large precision: under the
// field b = lambda x + sqrt(gamma) z the posterior "keep or kill" switch
// sharpens on the 1/sqrt(lambda) scale in x, which no fixed Hermite rule can
// resolve.  These routines instead integrate the one-dimensional b-marginals
// of each mixture component with panels placed analytically around the
// switching radius, which keeps every panel integrand smooth at any
// (lambda, gamma).  Relative accuracy is near machine precision across
// lambda from 0 to 1e15.

namespace samp {

struct GbMoments {
  double mse;  // E (eta(lambda, b) - x)^2
  double v;    // E eta'(lambda, b)
  double m;    // E x eta(lambda, b)
};

// Field b = lambda * x + sqrt(gamma) * z with x ~ GB(rho), z ~ N(0,1).
GbMoments gb_field_moments(double rho, double lambda, double gamma);

// E_{x,z} log Z(a, a x + sqrt(a) z): the matched-form field expectation of
// the prior log partition (the building block of the replica potentials).
double gb_expected_log_partition(double rho, double a);

}  // namespace samp

#endif  // SAMP_GB_EXACT_HPP
