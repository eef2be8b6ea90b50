#ifndef SAMP_GLM_HPP
#define SAMP_GLM_HPP

#include <Eigen/Dense>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "samp/channels.hpp"
#include "samp/priors.hpp"

// Message-passing inference for generalized linear models y ~ P(y | Phi x):
//  - amp_offline_gaussian: scalar-variance AMP for the Gaussian likelihood
//  - gamp:                 per-component AMP for any supported channel
//  - mini_amp:             streaming AMP over mini-batches, carrying the
//                          accumulated natural parameters (Lambda, Theta)
//                          of the factorized posterior as an effective prior
//  - adf:                  assumed density filtering (one sample per step)
//  - vb_mean_field:        sequential mean-field baseline (Gaussian channel)

namespace samp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct GlmProblem {
  MatrixXd phi;  // M x N design matrix, entries ~ N(0, 1/N) in synthetic runs
  VectorXd y;    // M responses
  PriorSpec prior;
  ChannelSpec channel;
  std::optional<VectorXd> x0;  // ground truth; only read for MSE reporting

  Eigen::Index n() const { return phi.cols(); }
  Eigen::Index m() const { return phi.rows(); }
  double alpha() const {
    return static_cast<double>(phi.rows()) / static_cast<double>(phi.cols());
  }
  void validate() const;
};

// Accumulated natural parameters of the streamed posterior:
//   effective prior  P(x) * exp(-Lambda x^2 / 2 + Theta_i x).
// Lambda is one shared scalar on the Gaussian fast path and per-coordinate
// on the GAMP/ADF path.
struct StreamAccumulator {
  VectorXd lambda;  // size 1 (scalar mode) or N
  VectorXd theta;   // size N
  int batches_processed = 0;

  static StreamAccumulator scalar(Eigen::Index n) {
    StreamAccumulator acc;
    acc.lambda = VectorXd::Zero(1);
    acc.theta = VectorXd::Zero(n);
    return acc;
  }
  static StreamAccumulator per_coordinate(Eigen::Index n) {
    StreamAccumulator acc;
    acc.lambda = VectorXd::Zero(n);
    acc.theta = VectorXd::Zero(n);
    return acc;
  }
  bool scalar_mode() const { return lambda.size() == 1; }
  Eigen::Index n() const { return theta.size(); }
};

struct AmpOptions {
  int t_max = 200;
  double tol = 1e-13;      // on (1/N) ||x_hat^t - x_hat^{t-1}||_1
  double damping = 0.0;    // 0 = plain iteration (default)
  bool record_trajectory = false;
  bool force_gamp = false; // per-coordinate path even on the gaussian channel
};

struct BatchReport {
  int iterations = 0;
  double final_mse = std::numeric_limits<double>::quiet_NaN();
  double final_v = 0.0;      // posterior variance estimate
  double lambda_after = 0.0; // scalar-mode accumulator value (diagnostic)
  double seconds = 0.0;
  std::vector<double> mse_per_iteration;   // empty without ground truth
  std::vector<VectorXd> trajectory;        // filled if record_trajectory
};

struct AmpRunReport {
  std::vector<BatchReport> batches;
  bool converged_all = true;

  const BatchReport& last() const { return batches.back(); }
};

// Raised when an engine produces non-finite state; carries the last finite
// iterate and the partial report.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::string what, VectorXd last_iterate, AmpRunReport report)
      : std::runtime_error(std::move(what)),
        last_iterate_(std::move(last_iterate)),
        report_(std::move(report)) {}
  const VectorXd& last_iterate() const { return last_iterate_; }
  const AmpRunReport& report() const { return report_; }

 private:
  VectorXd last_iterate_;
  AmpRunReport report_;
};

struct GlmResult {
  VectorXd x_hat;
  VectorXd sigma_hat;  // per-coordinate posterior variances (GAMP-style paths)
  StreamAccumulator accumulator;
  AmpRunReport report;
};

// Offline AMP, Gaussian likelihood, scalar variance.
GlmResult amp_offline_gaussian(const GlmProblem& problem,
                               const AmpOptions& opts = {});

// Full GAMP (per-component A, V) for any supported channel.
GlmResult gamp(const GlmProblem& problem, const AmpOptions& opts = {});

// Streaming AMP over row batches sharing prior/channel and N.  The engine
// picks the scalar fast path for the Gaussian channel and the per-coordinate
// GAMP path otherwise; `per_batch_t_max` (if nonempty) overrides t_max batch
// by batch.
GlmResult mini_amp(const std::vector<GlmProblem>& batches,
                   const AmpOptions& opts = {},
                   const std::vector<int>& per_batch_t_max = {});

// Assumed density filtering: one row per step, one denoise per sample.
GlmResult adf(const GlmProblem& samples, const AmpOptions& opts = {});

struct VbOptions {
  int t_max = 200;
  double tol = 1e-13;
  bool learn_noise = false;
  double delta_init = -1.0;  // < 0: use channel delta
  bool jacobi_sweep = false; // parallel update (matches one GAMP V=0 step)
};

// Mean-field VB for the Gaussian channel; offline on one problem.
GlmResult vb_mean_field(const GlmProblem& problem, const VbOptions& opts = {});

// Streaming VB: same (Lambda, Theta) accumulation as mini_amp.
GlmResult vb_mean_field_stream(const std::vector<GlmProblem>& batches,
                               const VbOptions& opts = {});

double mse_to_truth(const VectorXd& x_hat, const VectorXd& x0);

}  // namespace samp

#endif  // SAMP_GLM_HPP
