#include "samp/lowrank.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "samp/truncated_mf.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace samp {

namespace {

// Hungarian assignment (minimum-cost perfect matching) on a square cost
// matrix; O(R^3) potentials formulation.  Fallback for rank > 8.
std::vector<int> hungarian(const MatrixXd& cost) {
  const int n = static_cast<int>(cost.rows());
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
    std::vector<char> used(n + 1, false);
    do {
      used[j0] = true;
      int i0 = p[j0], j1 = -1;
      double delta = std::numeric_limits<double>::infinity();
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<int> match(n);  // row -> column
  for (int j = 1; j <= n; ++j)
    if (p[j] > 0) match[p[j] - 1] = j - 1;
  return match;
}

// Denoise all rows of U at natural parameters (A, B): posterior of the
// coordinatewise prior tilted by exp(-u^T A u / 2 + b^T u).
struct UDenoiseResult {
  MatrixXd mean;     // N x R
  MatrixXd sigma;    // R x R, summed covariance over rows
  bool mf_warning = false;
};

UDenoiseResult denoise_u_rows(const PriorSpec& prior, const MatrixXd& a,
                              const MatrixXd& b, const MatrixXd& warm) {
  const Eigen::Index n = b.rows();
  const Eigen::Index r = b.cols();
  UDenoiseResult res;
  res.mean.resize(n, r);

  if (prior.kind == PriorSpec::Kind::Gaussian) {
    MatrixXd prec = a + MatrixXd::Identity(r, r) / prior.variance;
    Eigen::LLT<MatrixXd> llt(prec);
    if (llt.info() != Eigen::Success)
      throw std::runtime_error("denoise_u_rows: precision not SPD");
    MatrixXd rhs = b;
    if (prior.mean != 0.0) rhs.array() += prior.mean / prior.variance;
    res.mean = llt.solve(rhs.transpose()).transpose();
    MatrixXd cov = llt.solve(MatrixXd::Identity(r, r));
    res.sigma = static_cast<double>(n) * cov;
    return res;
  }
  if (prior.kind == PriorSpec::Kind::TruncatedNonnegGaussian) {
    MatrixXd vars(n, r);
    bool warned = false;
    bool failed = false;
#pragma omp parallel for schedule(static) reduction(|| : warned, failed)
    for (Eigen::Index i = 0; i < n; ++i) {
      try {
        MeanFieldResult mf = truncated_mean_field_denoise(
            prior, a, b.row(i).transpose(), warm.row(i).transpose());
        res.mean.row(i) = mf.mean.transpose();
        vars.row(i) = mf.variances.transpose();
        warned = warned || !mf.converged;
      } catch (...) {
        failed = true;  // exceptions must not unwind through the omp region
      }
    }
    if (failed)
      throw std::runtime_error("denoise_u_rows: mean-field denoiser failed");
    res.sigma = linear_response_covariance(a, vars);
    res.mf_warning = warned;
    return res;
  }
  throw std::invalid_argument(
      "low-rank denoiser: prior_u must be gaussian or truncated nonnegative");
}

std::vector<int> argmax_labels(const MatrixXd& v_hat) {
  std::vector<int> labels(static_cast<size_t>(v_hat.rows()));
  for (Eigen::Index j = 0; j < v_hat.rows(); ++j) {
    int best = 0;
    double best_val = v_hat(j, 0);
    for (int k = 1; k < v_hat.cols(); ++k)
      if (v_hat(j, k) > best_val) {  // ties keep the lowest index
        best_val = v_hat(j, k);
        best = k;
      }
    labels[static_cast<size_t>(j)] = best;
  }
  return labels;
}

}  // namespace

void LowRankProblem::validate() const {
  if (rank < 1) throw std::invalid_argument("LowRankProblem: rank must be >= 1");
  if (!y.allFinite()) throw std::invalid_argument("LowRankProblem: Y not finite");
  if (!(delta > 0.0))
    throw std::invalid_argument("LowRankProblem: delta must be > 0");
  if (u0 && (u0->rows() != y.rows() || u0->cols() != rank))
    throw std::invalid_argument("LowRankProblem: u0 shape mismatch");
}

OneHotPosterior onehot_denoise_v(const MatrixXd& A, const VectorXd& B) {
  const Eigen::Index r = B.size();
  if (A.rows() != r || A.cols() != r)
    throw std::invalid_argument("onehot_denoise_v: A/B shape mismatch");
  if (!A.allFinite() || !B.allFinite())
    throw std::invalid_argument("onehot_denoise_v: non-finite input");
  VectorXd score(r);
  for (Eigen::Index k = 0; k < r; ++k) score[k] = B[k] - 0.5 * A(k, k);
  double mx = score.maxCoeff();
  VectorXd p = (score.array() - mx).exp();
  p /= p.sum();
  OneHotPosterior out;
  out.mean = p;
  out.cov = p.asDiagonal();
  out.cov.noalias() -= p * p.transpose();
  return out;
}

LowRankState lowrank_amp_batch(const LowRankProblem& problem,
                               ClusterAccumulator& acc,
                               const LowRankOptions& opts,
                               const MatrixXd* init_u,
                               const std::vector<int>* init_labels) {
  problem.validate();
  const Eigen::Index n = problem.n();
  const Eigen::Index m = problem.m();
  const int r = problem.rank;
  if (acc.theta_u.rows() != n || acc.lambda_u.rows() != r)
    throw std::invalid_argument("lowrank_amp_batch: accumulator shape mismatch");

  const double beta = 1.0 / (static_cast<double>(n) * problem.delta);
  const MatrixXd j_eff =
      problem.y / (std::sqrt(static_cast<double>(n)) * problem.delta);

  LowRankState st;

  // U from the accumulated effective prior unless an explicit init is given.
  {
    UDenoiseResult d0 = denoise_u_rows(problem.prior_u, acc.lambda_u,
                                       acc.theta_u, MatrixXd::Zero(n, r));
    st.u_hat = init_u ? *init_u : d0.mean;
    st.sigma_u = d0.sigma;
  }
  // V uniform unless labels are given (hard one-hot rows, zero covariance).
  if (init_labels) {
    if (init_labels->size() != static_cast<size_t>(m))
      throw std::invalid_argument("lowrank_amp_batch: init label count");
    st.v_hat = MatrixXd::Zero(m, r);
    for (Eigen::Index j = 0; j < m; ++j)
      st.v_hat(j, (*init_labels)[static_cast<size_t>(j)]) = 1.0;
    st.sigma_v = MatrixXd::Zero(r, r);
  } else {
    st.v_hat = MatrixXd::Constant(m, r, 1.0 / r);
    MatrixXd unit = MatrixXd::Identity(r, r) / r -
                    MatrixXd::Constant(r, r, 1.0 / (r * r));
    st.sigma_v = static_cast<double>(m) * unit;
  }

  MatrixXd u_new, v_new(m, r), sigma_v_new(r, r), b_v(m, r);
  int t = 0;
  for (t = 1; t <= opts.t_max; ++t) {
    st.b_u.noalias() = j_eff * st.v_hat;
    st.b_u.noalias() -= beta * st.u_hat * st.sigma_v;
    st.a_u.noalias() = beta * st.v_hat.transpose() * st.v_hat;

    UDenoiseResult du = denoise_u_rows(problem.prior_u, acc.lambda_u + st.a_u,
                                       acc.theta_u + st.b_u, st.u_hat);
    u_new = std::move(du.mean);
    st.mean_field_warning = st.mean_field_warning || du.mf_warning;

    b_v.noalias() = j_eff.transpose() * u_new;
    b_v.noalias() -= beta * st.v_hat * du.sigma;
    st.a_v.noalias() = beta * u_new.transpose() * u_new;

    sigma_v_new.setZero();
    for (Eigen::Index j = 0; j < m; ++j) {
      OneHotPosterior post = onehot_denoise_v(st.a_v, b_v.row(j).transpose());
      v_new.row(j) = post.mean.transpose();
      sigma_v_new += post.cov;
    }

    double diff =
        (u_new - st.u_hat).cwiseAbs().sum() / static_cast<double>(n * r) +
        (v_new - st.v_hat).cwiseAbs().sum() / static_cast<double>(m * r);

    st.u_hat.swap(u_new);
    st.sigma_u = du.sigma;
    st.v_hat.swap(v_new);
    st.sigma_v = sigma_v_new;
    st.b_v = b_v;

    if (!(st.u_hat.allFinite() && st.v_hat.allFinite()))
      throw std::runtime_error("lowrank_amp_batch: non-finite state");
    if (diff < opts.tol) {
      st.converged = true;
      break;
    }
  }
  st.iterations = std::min(t, opts.t_max);

  acc.lambda_u += st.a_u;
  acc.theta_u += st.b_u;
  acc.batches_processed += 1;
  return st;
}

namespace {

// k-means++-style pick of `rank` centroid columns from a data batch.
std::vector<int> kmeanspp_pick(const MatrixXd& y, int rank,
                               const CounterRng& rng, uint64_t ctr_base) {
  const Eigen::Index m = y.cols();
  std::vector<int> picks;
  picks.push_back(static_cast<int>(rng.uniform_index(ctr_base, m)));
  VectorXd d2 =
      (y.colwise() - y.col(picks[0])).colwise().squaredNorm().transpose();
  for (int c = 1; c < rank; ++c) {
    double total = d2.sum();
    int pick = 0;
    if (total > 0.0) {
      double target = rng.uniform(ctr_base + c) * total;
      double run = 0.0;
      for (Eigen::Index j = 0; j < m; ++j) {
        run += d2[j];
        if (run >= target) {
          pick = static_cast<int>(j);
          break;
        }
      }
    } else {
      pick = static_cast<int>(rng.uniform_index(ctr_base + c, m));
    }
    picks.push_back(pick);
    VectorXd dn =
        (y.colwise() - y.col(pick)).colwise().squaredNorm().transpose();
    d2 = d2.cwiseMin(dn);
  }
  return picks;
}

std::vector<int> nearest_labels(const MatrixXd& y, const MatrixXd& centroids) {
  std::vector<int> labels(static_cast<size_t>(y.cols()));
  for (Eigen::Index j = 0; j < y.cols(); ++j) {
    int best = 0;
    double best_d = (y.col(j) - centroids.col(0)).squaredNorm();
    for (int c = 1; c < centroids.cols(); ++c) {
      double d = (y.col(j) - centroids.col(c)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = c;
      }
    }
    labels[static_cast<size_t>(j)] = best;
  }
  return labels;
}

}  // namespace

ClusterStreamResult gmm_stream_cluster(
    const std::vector<MatrixXd>& batches, int rank, const PriorSpec& prior_u,
    double delta, const ClusterStreamOptions& opts, const MatrixXd* u0,
    const std::vector<std::vector<int>>* labels0) {
  if (batches.empty()) throw std::invalid_argument("gmm_stream_cluster: no batches");
  const Eigen::Index n = batches.front().rows();
  const double sqrt_n = std::sqrt(static_cast<double>(n));

  ClusterStreamResult res;
  res.accumulator = ClusterAccumulator::zero(n, rank);
  CounterRng rng = CounterRng::keyed("gmm_stream_cluster", opts.seed, 0);

  double delta_hat = delta;
  for (size_t k = 0; k < batches.size(); ++k) {
    const MatrixXd& y = batches[k];
    ClusterBatchStats stats;
    if (y.cols() == 0) {
      std::fprintf(stderr, "warning: skipping empty batch %zu\n", k);
      stats.skipped = true;
      res.labels.emplace_back();
      res.stats.push_back(stats);
      continue;
    }
    if (y.rows() != n)
      throw std::invalid_argument("gmm_stream_cluster: batch N mismatch");

    LowRankProblem pb;
    pb.y = y;
    pb.rank = rank;
    pb.prior_u = prior_u;
    pb.delta = delta_hat;

    MatrixXd init_u;
    std::vector<int> init_labels;
    bool have_u = false, have_labels = false;
    if (opts.init == ClusterInit::KmeansPP) {
      const bool reinit = static_cast<int>(k) < opts.init_batches &&
                          y.cols() >= rank;
      if (reinit) {
        auto picks = kmeanspp_pick(y, rank, rng, 1000 * (k + 1));
        MatrixXd centroids(n, rank);
        for (int c = 0; c < rank; ++c) centroids.col(c) = y.col(picks[c]);
        init_labels = nearest_labels(y, centroids);
        have_labels = true;
        if (opts.install_centroids) {
          init_u = sqrt_n * centroids;  // model scale
          have_u = true;
        }
      }
    } else if (k == 0) {
      // incoherent symmetry breaking: random centroid seed, uniform labels
      init_u.resize(n, rank);
      for (Eigen::Index i = 0; i < n; ++i)
        for (int c = 0; c < rank; ++c)
          init_u(i, c) = opts.random_init_scale *
                         rng.normal(static_cast<uint64_t>(i) * rank + c);
      have_u = true;
    }

    LowRankState st = lowrank_amp_batch(pb, res.accumulator, opts.amp,
                                        have_u ? &init_u : nullptr,
                                        have_labels ? &init_labels : nullptr);

    res.u_hat = st.u_hat;
    res.labels.push_back(argmax_labels(st.v_hat));
    stats.iterations = st.iterations;

    if (opts.learn_noise) {
      MatrixXd resid = y - (st.u_hat * st.v_hat.transpose()) / sqrt_n;
      delta_hat = std::max(resid.squaredNorm() /
                               static_cast<double>(y.size()),
                           1e-12);
      stats.delta_hat = delta_hat;
    }
    if (u0 && labels0 && k < labels0->size()) {
      MatchedLosses ml = permutation_matched_losses(
          st.u_hat, res.labels.back(), *u0, (*labels0)[k]);
      stats.centroid_mse = ml.centroid_mse;
      stats.zero_one_loss = ml.zero_one_loss;
    }
    res.stats.push_back(stats);
  }
  return res;
}

KMeansResult minibatch_kmeans(const std::vector<MatrixXd>& batches, int rank,
                              uint64_t seed, bool second_pass) {
  if (batches.empty()) throw std::invalid_argument("minibatch_kmeans: no batches");
  const Eigen::Index n = batches.front().rows();
  CounterRng rng = CounterRng::keyed("minibatch_kmeans", seed, 0);

  KMeansResult res;
  res.centroids.resize(n, rank);
  const double init_sd = std::sqrt(1e-3);
  for (int c = 0; c < rank; ++c)
    for (Eigen::Index i = 0; i < n; ++i)
      res.centroids(i, c) =
          init_sd * rng.normal(static_cast<uint64_t>(c) * n + i);

  std::vector<int64_t> counts(static_cast<size_t>(rank), 0);
  for (const MatrixXd& y : batches) {
    std::vector<int> labels = nearest_labels(y, res.centroids);
    for (Eigen::Index j = 0; j < y.cols(); ++j) {
      int c = labels[static_cast<size_t>(j)];
      counts[static_cast<size_t>(c)] += 1;
      double lr = 1.0 / static_cast<double>(counts[static_cast<size_t>(c)]);
      res.centroids.col(c) += lr * (y.col(j) - res.centroids.col(c));
    }
    res.labels.push_back(std::move(labels));
  }
  if (second_pass) {
    for (const MatrixXd& y : batches)
      res.labels_second_pass.push_back(nearest_labels(y, res.centroids));
  }
  return res;
}

MatchedLosses permutation_matched_losses(const MatrixXd& u_hat,
                                         const std::vector<int>& labels,
                                         const MatrixXd& u0,
                                         const std::vector<int>& labels0) {
  const int r = static_cast<int>(u_hat.cols());
  if (u0.cols() != r || u0.rows() != u_hat.rows())
    throw std::invalid_argument("permutation_matched_losses: U shape mismatch");
  if (labels.size() != labels0.size())
    throw std::invalid_argument("permutation_matched_losses: label count mismatch");

  MatrixXd dist(r, r);  // estimated column c vs truth column c'
  for (int c = 0; c < r; ++c)
    for (int cp = 0; cp < r; ++cp)
      dist(c, cp) = (u_hat.col(c) - u0.col(cp)).squaredNorm();

  auto losses_for = [&](const std::vector<int>& perm) {
    double mse = 0.0;
    for (int c = 0; c < r; ++c) mse += dist(c, perm[c]);
    mse /= static_cast<double>(u_hat.rows() * r);
    double zl = 0.0;
    for (size_t j = 0; j < labels.size(); ++j)
      if (perm[static_cast<size_t>(labels[j])] != labels0[j]) zl += 1.0;
    if (!labels.empty()) zl /= static_cast<double>(labels.size());
    return std::make_pair(mse, zl);
  };

  MatchedLosses best;
  if (r <= 8) {
    std::vector<int> perm(static_cast<size_t>(r));
    std::iota(perm.begin(), perm.end(), 0);
    bool first = true;
    do {
      auto [mse, zl] = losses_for(perm);
      if (first || mse < best.centroid_mse ||
          (mse == best.centroid_mse && zl < best.zero_one_loss)) {
        best.centroid_mse = mse;
        best.zero_one_loss = zl;
        best.permutation = perm;
        first = false;
      }
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    best.permutation = hungarian(dist);
    auto [mse, zl] = losses_for(best.permutation);
    best.centroid_mse = mse;
    best.zero_one_loss = zl;
  }
  return best;
}

}  // namespace samp
