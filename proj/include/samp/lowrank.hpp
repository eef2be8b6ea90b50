#ifndef SAMP_LOWRANK_HPP
#define SAMP_LOWRANK_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "samp/priors.hpp"
#include "samp/rng.hpp"

// Low-rank matrix-factorization AMP for Gaussian-mixture clustering.  The
// generative convention is the spiked one: a data column is
//   y_j = U0 v_j / sqrt(N) + noise(0, delta),
// which is what makes the effective-channel quantities J = Y / (sqrt(N) delta)
// and beta = 1 / (N delta) order-one and puts the undetectability threshold
// at alpha_c = R^2 delta^2.  U (N x R) is shared across batches; V carries
// one one-hot row per data column and is re-estimated per batch.

namespace samp {

using Eigen::MatrixXd;
using Eigen::VectorXd;

struct LowRankProblem {
  MatrixXd y;  // N x M_b, one data point per column
  int rank = 1;
  PriorSpec prior_u;       // gaussian or truncated_nonneg_gaussian
  double delta = 1.0;      // assumed noise variance
  std::optional<MatrixXd> u0;       // ground truth centroids (N x R)
  std::optional<std::vector<int>> labels0;  // per-column ground truth labels

  Eigen::Index n() const { return y.rows(); }
  Eigen::Index m() const { return y.cols(); }
  void validate() const;
};

// Accumulated natural parameters on the U side.
struct ClusterAccumulator {
  MatrixXd lambda_u;  // R x R
  MatrixXd theta_u;   // N x R
  int batches_processed = 0;

  static ClusterAccumulator zero(Eigen::Index n, int rank) {
    ClusterAccumulator acc;
    acc.lambda_u = MatrixXd::Zero(rank, rank);
    acc.theta_u = MatrixXd::Zero(n, rank);
    return acc;
  }
};

struct LowRankState {
  MatrixXd u_hat;    // N x R
  MatrixXd sigma_u;  // R x R (summed covariance)
  MatrixXd v_hat;    // M_b x R, rows on the simplex
  MatrixXd sigma_v;  // R x R
  MatrixXd a_u, a_v; // R x R
  MatrixXd b_u;      // N x R
  MatrixXd b_v;      // M_b x R
  int iterations = 0;
  bool converged = false;
  bool mean_field_warning = false;  // a mean-field denoise failed to converge
};

struct LowRankOptions {
  int t_max = 50;
  double tol = 1e-7;  // on (1/(NR)) sum|dU| + (1/(MR)) sum|dV|
};

// Posterior over the R one-hot rows of V given natural parameters (A, B):
//   p_k proportional to exp(-A_kk / 2 + B_k).
struct OneHotPosterior {
  VectorXd mean;   // probability vector
  MatrixXd cov;    // diag(p) - p p^T
};
OneHotPosterior onehot_denoise_v(const MatrixXd& A, const VectorXd& B);

// One streaming AMP batch.  init_u / init_labels, when given, override the
// default initialization (U from the accumulated denoiser, V uniform).
LowRankState lowrank_amp_batch(const LowRankProblem& problem,
                               ClusterAccumulator& acc,
                               const LowRankOptions& opts = {},
                               const MatrixXd* init_u = nullptr,
                               const std::vector<int>* init_labels = nullptr);

struct ClusterBatchStats {
  double centroid_mse = std::numeric_limits<double>::quiet_NaN();
  double zero_one_loss = std::numeric_limits<double>::quiet_NaN();
  double delta_hat = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  bool skipped = false;
};

struct ClusterStreamResult {
  MatrixXd u_hat;                        // final centroids (model scale)
  std::vector<std::vector<int>> labels;  // per batch
  std::vector<ClusterBatchStats> stats;  // per batch
  ClusterAccumulator accumulator;
};

// Initialization policy.  KmeansPP seeds the first init_batches batches with
// labels from k-means++-picked data points (and optionally the points
// themselves as centroids); it carries real information about the truth into
// the stream, which is right for data analysis but clouds threshold studies.
// RandomU breaks the permutation symmetry incoherently with a small random
// centroid matrix at the first batch only.
enum class ClusterInit { KmeansPP, RandomU };

struct ClusterStreamOptions {
  LowRankOptions amp;
  bool learn_noise = false;
  ClusterInit init = ClusterInit::KmeansPP;
  int init_batches = 5;   // k-means++ re-initialization window
  bool install_centroids = false;  // also overwrite U with the picked points
  double random_init_scale = 0.3;  // RandomU: entry scale of the U seed
  uint64_t seed = 0;      // drives the initialization choices
};

// Full streaming pipeline: k-means++-style re-init during the first
// init_batches batches, per-batch AMP, argmax labels, optional noise learning.
ClusterStreamResult gmm_stream_cluster(const std::vector<MatrixXd>& batches,
                                       int rank, const PriorSpec& prior_u,
                                       double delta,
                                       const ClusterStreamOptions& opts,
                                       const MatrixXd* u0 = nullptr,
                                       const std::vector<std::vector<int>>*
                                           labels0 = nullptr);

struct KMeansResult {
  MatrixXd centroids;                    // N x R, data scale
  std::vector<std::vector<int>> labels;  // per batch (first pass)
  std::vector<std::vector<int>> labels_second_pass;
};

// Mini-batch K-means baseline: per-sample SGD centroid updates with
// per-centroid counts; centroids initialized N(0, 1e-3).
KMeansResult minibatch_kmeans(const std::vector<MatrixXd>& batches, int rank,
                              uint64_t seed, bool second_pass = false);

struct MatchedLosses {
  double centroid_mse = 0.0;   // per entry, after the best column permutation
  double zero_one_loss = 0.0;  // fraction of mislabeled points
  std::vector<int> permutation;  // estimated column -> truth column
};

// Jointly permutation-matched losses; exhaustive over permutations for
// R <= 8, greedy Hungarian-style assignment on the centroid-distance matrix
// beyond that.
MatchedLosses permutation_matched_losses(const MatrixXd& u_hat,
                                         const std::vector<int>& labels,
                                         const MatrixXd& u0,
                                         const std::vector<int>& labels0);

}  // namespace samp

#endif  // SAMP_LOWRANK_HPP
