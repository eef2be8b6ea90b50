#ifndef SAMP_GENERATORS_HPP
#define SAMP_GENERATORS_HPP

#include <vector>

#include "samp/glm.hpp"
#include "samp/lowrank.hpp"

// Synthetic ground-truth instances.  Regeneration from (config, seed) is
// bit-identical: every entry is addressed through the counter RNG.

namespace samp {

struct GlmInstance {
  VectorXd x0;
  MatrixXd phi;  // M x N, entries N(0, 1/N)
  VectorXd y;
  uint64_t seed = 0;

  // Row-range slices [k M_b, (k+1) M_b) sharing prior/channel/x0.
  std::vector<GlmProblem> batches(Eigen::Index m_b, const PriorSpec& prior,
                                  const ChannelSpec& channel) const;
  GlmProblem whole(const PriorSpec& prior, const ChannelSpec& channel) const;
};

// x0 ~ prior (i.i.d.), Phi entries N(0, 1/N), y through the channel with the
// ground-truth noise delta0.
GlmInstance generate_glm(const PriorSpec& prior, const ChannelSpec& channel,
                         Eigen::Index n, Eigen::Index m, uint64_t seed);

struct GmmInstance {
  MatrixXd u0;                   // N x R centroids (model scale)
  std::vector<int> labels;       // per column
  MatrixXd y;                    // N x M, column j = U0 e_{c_j}/sqrt(N) + noise
  uint64_t seed = 0;

  std::vector<MatrixXd> column_batches(Eigen::Index m_b) const;
  std::vector<std::vector<int>> label_batches(Eigen::Index m_b) const;
};

// Centroid columns i.i.d. from prior_u (gaussian or truncated nonnegative),
// labels uniform, spiked data columns with noise variance delta0.
GmmInstance generate_gmm(const PriorSpec& prior_u, int rank, double delta0,
                         Eigen::Index n, Eigen::Index m, uint64_t seed);

}  // namespace samp

#endif  // SAMP_GENERATORS_HPP
