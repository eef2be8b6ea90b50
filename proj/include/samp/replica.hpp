#ifndef SAMP_REPLICA_HPP
#define SAMP_REPLICA_HPP

#include <Eigen/Dense>
#include <vector>

#include "samp/channels.hpp"
#include "samp/priors.hpp"
#include "samp/quadrature.hpp"

// The theory-side potential: replica mutual information per variable for the
// offline and per-mini-batch settings (Gaussian likelihood), the matching
// free energies, MMSE extraction by global minimization, and landscape
// scanning.  Stationary points of these potentials are exactly the fixed
// points of the state-evolution recursions.

namespace samp {

// i_RS(E) for the offline Gaussian-channel problem at sampling ratio alpha.
// Deterministic: repeated calls return identical bits.
double irs_offline(const PriorSpec& prior, double delta, double alpha,
                   double E, int quad_order = 61);

// Per-mini-batch potential with Gaussian side information of precision
// lambda: i^b_RS(E) with Sigma_b^{-2} = lambda + alpha_b / (delta + E).
// At lambda = 0 it equals irs_offline(alpha = alpha_b) - alpha_b / 2.
double irs_mini(const PriorSpec& prior, double delta, double alpha_b,
                double lambda, double E, int quad_order = 61);

struct GridSpec {
  double e_min = 1e-12;
  double e_max = 0.0;  // <= 0: use 2 * prior second moment
  int points = 400;
};

struct LandscapeScan {
  Eigen::VectorXd e_grid;   // log-spaced
  Eigen::VectorXd irs;      // potential values on the grid
  struct Minimum {
    double e = 0.0;
    double value = 0.0;
    bool boundary = false;  // at a grid edge (not verified by two neighbours)
  };
  std::vector<Minimum> minima;  // interior local minima, sorted by E
  Minimum global;               // over interior minima and boundary candidates
  double lambda = 0.0;          // side-information context
};

LandscapeScan scan_landscape(const PriorSpec& prior, double delta,
                             double alpha_b, double lambda,
                             const GridSpec& grid = {}, int quad_order = 61);

struct MmseStep {
  double lambda_before = 0.0;
  double mmse = 0.0;
  double lambda_after = 0.0;
  int minima_count = 0;  // interior minima of the scanned landscape
};

// Streaming MMSE: per batch, globally minimize i^b_RS on the grid (with
// golden-section refinement) and update lambda with alpha_b/(delta + MMSE).
std::vector<MmseStep> mmse_recursion(const PriorSpec& prior, double delta,
                                     double alpha_b, int num_batches,
                                     const GridSpec& grid = {},
                                     int quad_order = 61);

// Replica free energy for a GLM at overlap m and conjugate m_hat.
double replica_free_energy_glm(const PriorSpec& prior,
                               const ChannelSpec& channel, double m,
                               double m_hat, double alpha,
                               int quad_order = 61);

// Streaming variant parameterized by the accumulated precisions.
double replica_free_energy_glm_stream(const PriorSpec& prior,
                                      const ChannelSpec& channel, double m,
                                      double lambda_k, double lambda_prev,
                                      double alpha_b, int quad_order = 61);

// Low-rank replica free energy, permutation-symmetric ansatz
// M = a I + b J for both overlap matrices; prior_u a zero-mean gaussian.
double replica_free_energy_lowrank_ansatz(double a_u, double b_u, double a_v,
                                          double b_v, int rank, double delta,
                                          double alpha,
                                          double prior_variance = 1.0,
                                          int quad_order = 24);

// Full-matrix variant (rank <= 3), tensor quadrature on the V side.
double replica_free_energy_lowrank(const Eigen::MatrixXd& m_u,
                                   const Eigen::MatrixXd& m_v, double delta,
                                   double alpha, double prior_variance = 1.0,
                                   int quad_order = 24);

// Sample-ratio below which the rank-R Gaussian mixture posterior carries no
// information about the ground truth: alpha_c = R^2 delta^2.
double undetectability_threshold(int rank, double delta);

}  // namespace samp

#endif  // SAMP_REPLICA_HPP
