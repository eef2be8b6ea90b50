#ifndef SAMP_TRUNCATED_MF_HPP
#define SAMP_TRUNCATED_MF_HPP

#include <Eigen/Dense>

#include "samp/priors.hpp"

// Mean-field evaluation of the R-dimensional denoiser for the coordinatewise
// nonnegative-Gaussian prior: the coupled tilted density
//   prod_k P0(x_k) exp(-x^T A x / 2 + B^T x)
// is approximated by sequential scalar updates
//   x_k <- eta~(A_kk, B_k - (1/2) sum_{l != k} A_kl x_l)
// swept in ascending k until the largest component change is below tol.
// The 1/2 factor on the cavity field is kept as part of the scheme's
// definition (it is what the linear-response covariance below pairs with).

namespace samp {

struct MeanFieldResult {
  Eigen::VectorXd mean;       // R
  Eigen::VectorXd variances;  // R, from eta~' at the fixed point
  int sweeps = 0;
  bool converged = true;  // false: carry last iterate, caller may warn
};

MeanFieldResult truncated_mean_field_denoise(const PriorSpec& prior,
                                             const Eigen::MatrixXd& A,
                                             const Eigen::VectorXd& B,
                                             const Eigen::VectorXd& warm_start,
                                             double tol = 1e-10,
                                             int max_sweeps = 200);

// Linear-response covariance from componentwise variances (N x R):
//   diag(k)     = sum_i var(i, k)
//   offdiag(k,l)= -(1/2) A_kl sum_i var(i, k) var(i, l)
Eigen::MatrixXd linear_response_covariance(
    const Eigen::MatrixXd& A, const Eigen::MatrixXd& componentwise_variances);

}  // namespace samp

#endif  // SAMP_TRUNCATED_MF_HPP
