#include "samp/generators.hpp"

#include <cmath>

#include "samp/rng.hpp"

namespace samp {

namespace {

double sample_prior(const PriorSpec& p, const CounterRng& rng, uint64_t idx) {
  switch (p.kind) {
    case PriorSpec::Kind::GaussBernoulli: {
      // two independent streams folded into one counter: parity selects role
      double u = rng.uniform(2 * idx);
      if (u >= p.rho) return 0.0;
      return rng.normal(2 * idx + 1);
    }
    case PriorSpec::Kind::Rademacher:
      return rng.uniform(idx) < 0.5 ? -1.0 : 1.0;
    case PriorSpec::Kind::Gaussian:
      return p.mean + std::sqrt(p.variance) * rng.normal(idx);
    case PriorSpec::Kind::TruncatedNonnegGaussian:
      return std::sqrt(p.sigma2) * std::fabs(rng.normal(idx));
  }
  return 0.0;
}

}  // namespace

GlmInstance generate_glm(const PriorSpec& prior, const ChannelSpec& channel,
                         Eigen::Index n, Eigen::Index m, uint64_t seed) {
  GlmInstance inst;
  inst.seed = seed;

  CounterRng rng_x = CounterRng::keyed("glm_x0", seed, 0);
  inst.x0.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    inst.x0[i] = sample_prior(prior, rng_x, static_cast<uint64_t>(i));

  CounterRng rng_phi = CounterRng::keyed("glm_phi", seed, 0);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  inst.phi.resize(m, n);
  for (Eigen::Index mu = 0; mu < m; ++mu)
    for (Eigen::Index i = 0; i < n; ++i)
      inst.phi(mu, i) =
          scale * rng_phi.normal(static_cast<uint64_t>(mu) * n + i);

  CounterRng rng_noise = CounterRng::keyed("glm_noise", seed, 0);
  VectorXd z = inst.phi * inst.x0;
  inst.y.resize(m);
  const double s0 = std::sqrt(std::max(channel.delta0, 0.0));
  for (Eigen::Index mu = 0; mu < m; ++mu) {
    double zn = z[mu] + s0 * rng_noise.normal(static_cast<uint64_t>(mu));
    if (channel.kind == ChannelSpec::Kind::Gaussian) {
      inst.y[mu] = zn;
    } else {
      inst.y[mu] = zn >= 0.0 ? 1.0 : -1.0;
    }
  }
  return inst;
}

std::vector<GlmProblem> GlmInstance::batches(Eigen::Index m_b,
                                             const PriorSpec& prior,
                                             const ChannelSpec& channel) const {
  if (m_b < 1) throw std::invalid_argument("batches: m_b must be >= 1");
  if (phi.rows() % m_b != 0)
    throw std::invalid_argument(
        "batches: total rows not divisible by the batch size");
  std::vector<GlmProblem> out;
  for (Eigen::Index start = 0; start < phi.rows(); start += m_b) {
    GlmProblem pb;
    pb.phi = phi.middleRows(start, m_b);
    pb.y = y.segment(start, m_b);
    pb.prior = prior;
    pb.channel = channel;
    pb.x0 = x0;
    out.push_back(std::move(pb));
  }
  return out;
}

GlmProblem GlmInstance::whole(const PriorSpec& prior,
                              const ChannelSpec& channel) const {
  GlmProblem pb;
  pb.phi = phi;
  pb.y = y;
  pb.prior = prior;
  pb.channel = channel;
  pb.x0 = x0;
  return pb;
}

GmmInstance generate_gmm(const PriorSpec& prior_u, int rank, double delta0,
                         Eigen::Index n, Eigen::Index m, uint64_t seed) {
  GmmInstance inst;
  inst.seed = seed;

  CounterRng rng_u = CounterRng::keyed("gmm_u0", seed, 0);
  inst.u0.resize(n, rank);
  for (Eigen::Index i = 0; i < n; ++i)
    for (int c = 0; c < rank; ++c)
      inst.u0(i, c) = sample_prior(prior_u, rng_u,
                                   static_cast<uint64_t>(i) * rank + c);

  CounterRng rng_l = CounterRng::keyed("gmm_labels", seed, 0);
  inst.labels.resize(static_cast<size_t>(m));
  for (Eigen::Index j = 0; j < m; ++j)
    inst.labels[static_cast<size_t>(j)] = static_cast<int>(
        rng_l.uniform_index(static_cast<uint64_t>(j), rank));

  CounterRng rng_noise = CounterRng::keyed("gmm_noise", seed, 0);
  const double s0 = std::sqrt(std::max(delta0, 0.0));
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  inst.y.resize(n, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    int c = inst.labels[static_cast<size_t>(j)];
    for (Eigen::Index i = 0; i < n; ++i) {
      double noise = s0 * rng_noise.normal(static_cast<uint64_t>(j) * n + i);
      inst.y(i, j) = inst.u0(i, c) * inv_sqrt_n + noise;
    }
  }
  return inst;
}

std::vector<MatrixXd> GmmInstance::column_batches(Eigen::Index m_b) const {
  if (m_b < 1 || y.cols() % m_b != 0)
    throw std::invalid_argument("column_batches: bad batch size");
  std::vector<MatrixXd> out;
  for (Eigen::Index start = 0; start < y.cols(); start += m_b)
    out.push_back(y.middleCols(start, m_b));
  return out;
}

std::vector<std::vector<int>> GmmInstance::label_batches(Eigen::Index m_b) const {
  std::vector<std::vector<int>> out;
  for (Eigen::Index start = 0; start < y.cols(); start += m_b) {
    out.emplace_back(labels.begin() + start, labels.begin() + start + m_b);
  }
  return out;
}

}  // namespace samp
