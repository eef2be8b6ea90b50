#ifndef SAMP_STATE_EVOLUTION_HPP
#define SAMP_STATE_EVOLUTION_HPP

#include <vector>

#include "samp/channels.hpp"
#include "samp/priors.hpp"
#include "samp/quadrature.hpp"

// Deterministic scalar recursions predicting the N -> infinity behaviour of
// the message-passing engines.  All expectations are quadrature-based
// (Gauss-Hermite in the Gaussian directions, exact sums over discrete
// structure), so repeated evaluations are bit-identical.

namespace samp {

struct SeOptions {
  int t_max = 2000;        // iterations per batch
  double tol = 1e-12;      // on |E^{t+1} - E^t|
  int quad_order = 61;
  double delta_floor = 1e-16;  // replaces delta inside denominators when
                               // the channel is noiseless
};

struct SeBatch {
  double lambda = 0.0;  // accumulated precision after the batch
  double gamma = 0.0;   // accumulated field variance (mismatched case)
  double mse = 0.0;     // E_k
  double v = 0.0;       // V_k
  int iterations = 0;
  std::vector<double> mse_t;  // per-iteration E within the batch
};

struct SETrajectory {
  double alpha_b = 0.0;
  std::vector<SeBatch> batches;

  const SeBatch& last() const { return batches.back(); }
  double final_mse() const { return batches.back().mse; }
};

// Streaming state evolution over num_batches mini-batches of size alpha_b.
// Gaussian channel: the doubly indexed (lambda, gamma, E, V) recursion,
// supporting delta != delta0.  Probit channel: the Bayes-optimal recursion
// in (lambda, m) with the channel expectation -E d_w g; requires
// delta == delta0.
SETrajectory se_mini(const PriorSpec& prior, const ChannelSpec& channel,
                     double alpha_b, int num_batches,
                     const SeOptions& opts = {});

// Offline state evolution = one batch of size alpha.
SETrajectory se_offline(const PriorSpec& prior, const ChannelSpec& channel,
                        double alpha, const SeOptions& opts = {});

// Fixed-point MSE of a single batch processed with Gaussian side information
// of precision lambda_prev (the building block of se_mini; exposed for the
// replica-extrema checks).
SeBatch se_batch_gaussian(const PriorSpec& prior, double delta, double delta0,
                          double alpha_b, double lambda_prev, double gamma_prev,
                          const SeOptions& opts = {});

// Fully online (one-sample) limit: RK4 integration of
//   d lambda / d alpha = -E d_w g(y, w, rho - m(lambda)).
struct AdfOdePoint {
  double alpha;
  double lambda;
  double mse;
};
std::vector<AdfOdePoint> se_adf_ode(const PriorSpec& prior,
                                    const ChannelSpec& channel,
                                    double alpha_max, double step = 1e-3,
                                    int quad_order = 61);

// ---- low-rank (GMM clustering) state evolution ----------------------------

// Overlap matrices in the permutation-symmetric ansatz M = a I + b J.
struct OverlapAnsatz {
  double a = 0.0;
  double b = 0.0;
};

struct LowRankSeBatch {
  OverlapAnsatz m_u;        // E[ U_hat U^T ] per row
  OverlapAnsatz m_v;        // E[ V_hat V^T ] per column (order 1)
  OverlapAnsatz lambda_v;   // accumulated alpha_b-weighted V overlaps
  double centroid_mse = 0.0;   // per entry of U
  double label_overlap = 0.0;  // Tr m_V = E[posterior weight on true label]
  double argmax_accuracy = 0.0;
  int iterations = 0;
};

struct LowRankSeOptions {
  int t_max = 50;
  double tol = 1e-11;
  int quad_order = 24;      // per dimension on the V side
  double seed_overlap = 0.0;  // traceless-sector seed in lambda_V at batch 1;
                              // 0 keeps the symmetric trajectory exactly
  bool use_ansatz = true;   // full-matrix mode is available for R <= 3
};

struct LowRankSeResult {
  std::vector<LowRankSeBatch> batches;
  std::vector<Eigen::MatrixXd> m_u_full;  // full-matrix mode only
};

// Streaming low-rank SE: U side closed-form (Gaussian prior), V side by
// tensor quadrature over the one-hot posterior.  prior_u must be a
// (zero-mean) gaussian; with use_ansatz it must be permutation symmetric.
LowRankSeResult se_lowrank(int rank, double delta, const PriorSpec& prior_u,
                           double alpha_b, int num_batches,
                           const LowRankSeOptions& opts = {});

// E[p_true] of the one-hot posterior at traceless field a_hat:
//   p = softmax(a_hat e_c + sqrt(a_hat) xi). Exposed for tests.
double onehot_se_overlap(int rank, double a_hat, int quad_order = 24);
// P(argmax field = true component) at the same parameters.
double onehot_se_accuracy(int rank, double a_hat, int quad_order = 61);
// E[log sum_k exp(a_hat delta_kc + sqrt(a_hat) xi_k)] (free-energy helper).
double onehot_se_logsumexp(int rank, double a_hat, int quad_order = 24);

// ---- closed-form asymptotics ----------------------------------------------

// Asymptotic streaming MSE for sparse linear regression, noiseless limit:
//   MSE(alpha) = rho * exp(rate * alpha),  rate = log(1 - alpha_b/rho)/alpha_b
// for alpha_b < rho; identically 0 for alpha_b >= rho (exact recovery).
// The prefactor convention is E_0 = rho (the MSE before any data).
double asymptotic_mse_slr(double rho, double alpha_b, double alpha);
double asymptotic_mse_rate(double rho, double alpha_b);

// ---- shared expectation helpers (used by the replica module and tests) ----

struct DenoiserMoments {
  double mse;  // E (eta - x)^2
  double v;    // E eta'
  double m;    // E x eta
};
DenoiserMoments se_denoiser_moments(const PriorSpec& prior, double lambda,
                                    double gamma, const QuadratureRule& q);

struct GoutMoments {
  double e_dg;  // E d_w g
  double e_g2;  // E g^2  (= -E d_w g on the Nishimori line)
};
GoutMoments se_gout_moments(const ChannelSpec& channel, double m_overlap,
                            double v_eff, const QuadratureRule& q);

}  // namespace samp

#endif  // SAMP_STATE_EVOLUTION_HPP
