#include "samp/truncated_mf.hpp"

#include <cmath>
#include <stdexcept>

namespace samp {

MeanFieldResult truncated_mean_field_denoise(const PriorSpec& prior,
                                             const Eigen::MatrixXd& A,
                                             const Eigen::VectorXd& B,
                                             const Eigen::VectorXd& warm_start,
                                             double tol, int max_sweeps) {
  const Eigen::Index r = B.size();
  if (A.rows() != r || A.cols() != r)
    throw std::invalid_argument("mean_field_denoise: A/B shape mismatch");
  if (!A.isApprox(A.transpose(), 1e-12))
    throw std::invalid_argument("mean_field_denoise: A must be symmetric");
  for (Eigen::Index k = 0; k < r; ++k)
    if (!(A(k, k) >= 0.0))
      throw std::invalid_argument("mean_field_denoise: A diagonal must be >= 0");

  MeanFieldResult res;
  res.mean = warm_start.size() == r ? warm_start : Eigen::VectorXd::Zero(r);
  res.variances.setZero(r);

  res.converged = false;
  int sweep = 0;
  while (sweep < max_sweeps) {
    double max_change = 0.0;
    for (Eigen::Index k = 0; k < r; ++k) {
      double cavity = B[k];
      for (Eigen::Index l = 0; l < r; ++l)
        if (l != k) cavity -= 0.5 * A(k, l) * res.mean[l];
      DenoiserOutput d = prior_denoise(prior, A(k, k), cavity);
      max_change = std::max(max_change, std::fabs(d.mean - res.mean[k]));
      res.mean[k] = d.mean;
      res.variances[k] = d.variance;
    }
    ++sweep;
    if (max_change < tol) {
      res.converged = true;
      break;
    }
  }
  res.sweeps = sweep;
  return res;
}

Eigen::MatrixXd linear_response_covariance(
    const Eigen::MatrixXd& A, const Eigen::MatrixXd& componentwise_variances) {
  const Eigen::Index r = A.rows();
  if (A.cols() != r)
    throw std::invalid_argument("linear_response_covariance: A not square");
  if (componentwise_variances.cols() != r)
    throw std::invalid_argument(
        "linear_response_covariance: variance columns must match A");
  if (!A.allFinite() || !componentwise_variances.allFinite())
    throw std::invalid_argument("linear_response_covariance: non-finite input");

  Eigen::MatrixXd sigma(r, r);
  for (Eigen::Index k = 0; k < r; ++k) {
    sigma(k, k) = componentwise_variances.col(k).sum();
    for (Eigen::Index l = k + 1; l < r; ++l) {
      double s = componentwise_variances.col(k)
                     .cwiseProduct(componentwise_variances.col(l))
                     .sum();
      sigma(k, l) = -0.5 * A(k, l) * s;
      sigma(l, k) = sigma(k, l);
    }
  }
  return sigma;
}

}  // namespace samp
