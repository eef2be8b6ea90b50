#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "samp/generators.hpp"
#include "samp/lowrank.hpp"
#include "samp/rng.hpp"
#include "samp/state_evolution.hpp"

using namespace samp;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("one-hot posterior basics") {
  SUBCASE("no evidence gives the uniform simplex point") {
    OneHotPosterior p = onehot_denoise_v(MatrixXd::Zero(4, 4), VectorXd::Zero(4));
    for (int k = 0; k < 4; ++k)
      CHECK(p.mean[k] == doctest::Approx(0.25).epsilon(1e-14));
  }
  SUBCASE("a dominant field concentrates on that component") {
    VectorXd b = VectorXd::Zero(3);
    b[1] = 50.0;
    OneHotPosterior p = onehot_denoise_v(MatrixXd::Zero(3, 3), b);
    CHECK(p.mean[1] > 1.0 - 1e-12);
  }
  SUBCASE("matches exhaustive enumeration over the outcomes") {
    CounterRng rng = CounterRng::keyed("onehot_test", 1, 0);
    for (int rep = 0; rep < 30; ++rep) {
      MatrixXd a(3, 3);
      VectorXd b(3);
      for (int i = 0; i < 3; ++i) {
        b[i] = 4.0 * (rng.uniform(100 * rep + i) - 0.5);
        for (int j = 0; j < 3; ++j)
          a(i, j) = 2.0 * (rng.uniform(100 * rep + 10 + 3 * i + j) - 0.5);
      }
      a = ((a + a.transpose()) / 2).eval();
      OneHotPosterior p = onehot_denoise_v(a, b);
      // brute force over the three one-hot outcomes
      VectorXd w(3);
      for (int k = 0; k < 3; ++k) w[k] = std::exp(-0.5 * a(k, k) + b[k]);
      w /= w.sum();
      for (int k = 0; k < 3; ++k)
        CHECK(p.mean[k] == doctest::Approx(w[k]).epsilon(1e-12));
      // covariance is diag(p) - p p^T
      MatrixXd cov = MatrixXd(w.asDiagonal()) - w * w.transpose();
      CHECK((p.cov - cov).cwiseAbs().maxCoeff() < 1e-14);
    }
  }
  SUBCASE("the mean is always a probability vector") {
    CounterRng rng = CounterRng::keyed("onehot_simplex", 2, 0);
    for (int rep = 0; rep < 100; ++rep) {
      VectorXd b(5);
      for (int i = 0; i < 5; ++i)
        b[i] = 100.0 * (rng.uniform(10 * rep + i) - 0.5);
      OneHotPosterior p = onehot_denoise_v(MatrixXd::Zero(5, 5), b);
      CHECK(p.mean.minCoeff() >= 0.0);
      CHECK(p.mean.sum() == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("single batch equals offline low-rank AMP") {
  GmmInstance inst = generate_gmm(PriorSpec::gaussian(0.0, 1.0), 3, 0.05, 200, 80, 3);
  LowRankProblem pb;
  pb.y = inst.y;
  pb.rank = 3;
  pb.prior_u = PriorSpec::gaussian(0.0, 1.0);
  pb.delta = 0.05;

  ClusterAccumulator acc1 = ClusterAccumulator::zero(200, 3);
  ClusterAccumulator acc2 = ClusterAccumulator::zero(200, 3);
  LowRankState a = lowrank_amp_batch(pb, acc1);
  LowRankState b = lowrank_amp_batch(pb, acc2);
  CHECK((a.u_hat - b.u_hat).cwiseAbs().maxCoeff() == 0.0);
  CHECK(acc1.batches_processed == 1);
}

TEST_CASE("V rows stay on the simplex at every iteration") {
  GmmInstance inst = generate_gmm(PriorSpec::gaussian(0.0, 1.0), 4, 0.1, 150, 60, 5);
  LowRankProblem pb;
  pb.y = inst.y;
  pb.rank = 4;
  pb.prior_u = PriorSpec::gaussian(0.0, 1.0);
  pb.delta = 0.1;
  ClusterAccumulator acc = ClusterAccumulator::zero(150, 4);
  LowRankOptions opts;
  opts.t_max = 7;  // stop mid-flight: rows must already be simplex points
  opts.tol = 0.0;
  LowRankState st = lowrank_amp_batch(pb, acc, opts);
  for (int j = 0; j < st.v_hat.rows(); ++j) {
    CHECK(st.v_hat.row(j).minCoeff() >= 0.0);
    CHECK(st.v_hat.row(j).sum() == doctest::Approx(1.0).epsilon(1e-9));
  }
  CHECK(st.sigma_v.isApprox(st.sigma_v.transpose(), 1e-12));
  CHECK(st.sigma_u.diagonal().minCoeff() >= 0.0);
}

TEST_CASE("well separated clusters are recovered") {
  // delta = 0.01, R = 3: far above the detectability threshold
  const int n = 400;
  const double delta = 0.01;
  GmmInstance inst = generate_gmm(PriorSpec::gaussian(0.0, 1.0), 3, delta, n, 600, 7);
  auto batches = inst.column_batches(120);  // alpha_b = 0.3, 5 batches
  auto labels = inst.label_batches(120);
  ClusterStreamOptions opts;
  opts.seed = 7;
  ClusterStreamResult res = gmm_stream_cluster(batches, 3,
                                               PriorSpec::gaussian(0.0, 1.0),
                                               delta, opts, &inst.u0, &labels);
  CHECK(res.stats.back().zero_one_loss < 0.02);
  CHECK(res.stats.back().centroid_mse < 0.2);
}

TEST_CASE("rank one degenerates to streaming mean estimation") {
  const int n = 300;
  GmmInstance inst = generate_gmm(PriorSpec::gaussian(0.0, 1.0), 1, 0.2, n, 300, 9);
  auto batches = inst.column_batches(100);
  ClusterStreamOptions opts;
  opts.init_batches = 0;
  ClusterStreamResult res = gmm_stream_cluster(batches, 1,
                                               PriorSpec::gaussian(0.0, 1.0),
                                               0.2, opts, &inst.u0, nullptr);
  // the single centroid estimates the scaled data mean increasingly well
  double err = (res.u_hat.col(0) - inst.u0.col(0)).squaredNorm() / n;
  CHECK(err < 0.2);
  for (const auto& l : res.labels)
    for (int v : l) CHECK(v == 0);
}

TEST_CASE("noise learning tracks the true noise") {
  const int n = 400;
  GmmInstance inst = generate_gmm(PriorSpec::gaussian(0.0, 1.0), 3, 0.08, n, 480, 11);
  auto batches = inst.column_batches(120);
  ClusterStreamOptions opts;
  opts.learn_noise = true;
  opts.seed = 11;
  ClusterStreamResult res = gmm_stream_cluster(
      batches, 3, PriorSpec::gaussian(0.0, 1.0), 0.5 /* bad initial guess */,
      opts, &inst.u0, nullptr);
  CHECK(res.stats.back().delta_hat == doctest::Approx(0.08).epsilon(0.05));
}

TEST_CASE("empty batches are skipped with a warning") {
  GmmInstance inst = generate_gmm(PriorSpec::gaussian(0.0, 1.0), 2, 0.1, 100, 40, 13);
  std::vector<MatrixXd> batches = inst.column_batches(20);
  batches.insert(batches.begin() + 1, MatrixXd(100, 0));
  ClusterStreamOptions opts;
  ClusterStreamResult res = gmm_stream_cluster(batches, 2,
                                               PriorSpec::gaussian(0.0, 1.0),
                                               0.1, opts, nullptr, nullptr);
  REQUIRE(res.stats.size() == 3);
  CHECK(res.stats[1].skipped);
  CHECK_FALSE(res.stats[0].skipped);
}

TEST_CASE("truncated nonnegative prior runs through the mean-field denoiser") {
  // the label-relevant signal is only the traceless variance of the
  // half-normal (a third of its second moment), so the noise must sit well
  // below the zero-mean-equivalent threshold
  const int n = 150;
  auto prior = PriorSpec::truncated_nonneg_gaussian(0.1);
  GmmInstance inst = generate_gmm(prior, 3, 0.003, n, 300, 15);
  auto batches = inst.column_batches(100);
  auto labels = inst.label_batches(100);
  ClusterStreamOptions opts;
  opts.learn_noise = true;
  opts.seed = 15;
  ClusterStreamResult res =
      gmm_stream_cluster(batches, 3, prior, 0.01, opts, &inst.u0, &labels);
  CHECK(res.u_hat.minCoeff() >= 0.0);  // support respected
  CHECK(res.stats.back().zero_one_loss < 0.1);
  CHECK(res.stats.back().delta_hat == doctest::Approx(0.003).epsilon(0.1));
}

// ---- mini-batch k-means baseline -------------------------------------------

TEST_CASE("k-means recovers repeated distinct points") {
  MatrixXd batch(4, 30);
  MatrixXd centers(4, 3);
  centers << 1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 1, 0;
  for (int j = 0; j < 30; ++j) batch.col(j) = centers.col(j % 3);
  KMeansResult km = minibatch_kmeans(std::vector<MatrixXd>(8, batch), 3, 1);
  // every centroid converges to one of the three points
  for (int c = 0; c < 3; ++c) {
    double best = 1e300;
    for (int k = 0; k < 3; ++k)
      best = std::min(best, (km.centroids.col(c) - centers.col(k)).norm());
    CHECK(best < 0.05);
  }
}

TEST_CASE("a second pass with final centroids does not hurt") {
  GmmInstance inst = generate_gmm(PriorSpec::gaussian(0.0, 1.0), 3, 0.005, 300, 600, 17);
  auto batches = inst.column_batches(100);
  auto labels = inst.label_batches(100);
  KMeansResult km = minibatch_kmeans(batches, 3, 17, true);
  double sqrt_n = std::sqrt(300.0);
  double pass1 = 0.0, pass2 = 0.0;
  std::vector<int> all1, all2, truth;
  for (size_t k = 0; k < batches.size(); ++k) {
    all1.insert(all1.end(), km.labels[k].begin(), km.labels[k].end());
    all2.insert(all2.end(), km.labels_second_pass[k].begin(),
                km.labels_second_pass[k].end());
    truth.insert(truth.end(), labels[k].begin(), labels[k].end());
  }
  pass1 = permutation_matched_losses(sqrt_n * km.centroids, all1, inst.u0, truth)
              .zero_one_loss;
  pass2 = permutation_matched_losses(sqrt_n * km.centroids, all2, inst.u0, truth)
              .zero_one_loss;
  CHECK(pass2 <= pass1 + 1e-12);
}

TEST_CASE("identical seeds give identical runs") {
  GmmInstance inst = generate_gmm(PriorSpec::gaussian(0.0, 1.0), 3, 0.1, 100, 200, 19);
  auto batches = inst.column_batches(50);
  KMeansResult a = minibatch_kmeans(batches, 3, 23);
  KMeansResult b = minibatch_kmeans(batches, 3, 23);
  CHECK((a.centroids - b.centroids).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.labels == b.labels);
}

// ---- permutation-matched losses ---------------------------------------------

TEST_CASE("permuted ground truth scores zero") {
  CounterRng rng = CounterRng::keyed("perm_test", 5, 0);
  MatrixXd u0(40, 4);
  for (int i = 0; i < 40; ++i)
    for (int c = 0; c < 4; ++c) u0(i, c) = rng.normal(4 * i + c);
  std::vector<int> perm = {2, 0, 3, 1};
  MatrixXd u_perm(40, 4);
  for (int c = 0; c < 4; ++c) u_perm.col(c) = u0.col(perm[(size_t)c]);
  std::vector<int> labels0 = {0, 1, 2, 3, 1, 0, 2};
  std::vector<int> labels(labels0.size());
  // estimated label c corresponds to truth perm[c]
  for (size_t j = 0; j < labels0.size(); ++j) {
    for (int c = 0; c < 4; ++c)
      if (perm[(size_t)c] == labels0[j]) labels[j] = c;
  }
  MatchedLosses ml = permutation_matched_losses(u_perm, labels, u0, labels0);
  CHECK(ml.centroid_mse == doctest::Approx(0.0).scale(1.0).epsilon(1e-14));
  CHECK(ml.zero_one_loss == 0.0);
}

TEST_CASE("random labels sit at chance level") {
  CounterRng rng = CounterRng::keyed("chance_test", 6, 0);
  MatrixXd u0(30, 3), u_hat(30, 3);
  for (int i = 0; i < 30; ++i)
    for (int c = 0; c < 3; ++c) {
      u0(i, c) = rng.normal(1000 + 3 * i + c);
      u_hat(i, c) = rng.normal(5000 + 3 * i + c);
    }
  const int m = 6000;
  std::vector<int> labels(m), labels0(m);
  for (int j = 0; j < m; ++j) {
    labels[(size_t)j] = static_cast<int>(rng.uniform_index(10000 + j, 3));
    labels0[(size_t)j] = static_cast<int>(rng.uniform_index(20000 + j, 3));
  }
  MatchedLosses ml = permutation_matched_losses(u_hat, labels, u0, labels0);
  CHECK(ml.zero_one_loss == doctest::Approx(2.0 / 3).epsilon(0.05));
}

TEST_CASE("two-cluster instance against brute force over both permutations") {
  MatrixXd u0(3, 2), u_hat(3, 2);
  u0 << 1, 0, 0, 1, 0, 0;
  u_hat << 0.1, 0.9, 0.9, 0.1, 0.0, 0.1;
  std::vector<int> labels = {0, 0, 1};
  std::vector<int> labels0 = {1, 1, 0};
  // identity: mse = (0.9^2*2 + ... ), swap: small
  double mse_id = ((u_hat.col(0) - u0.col(0)).squaredNorm() +
                   (u_hat.col(1) - u0.col(1)).squaredNorm()) / 6.0;
  double mse_sw = ((u_hat.col(0) - u0.col(1)).squaredNorm() +
                   (u_hat.col(1) - u0.col(0)).squaredNorm()) / 6.0;
  MatchedLosses ml = permutation_matched_losses(u_hat, labels, u0, labels0);
  CHECK(ml.centroid_mse == doctest::Approx(std::min(mse_id, mse_sw)).epsilon(1e-14));
  CHECK(ml.zero_one_loss == 0.0);  // swapped labels match under the swap
}

TEST_CASE("joint permutation invariance") {
  CounterRng rng = CounterRng::keyed("perm_inv", 8, 0);
  MatrixXd u0(20, 3), u_hat(20, 3);
  for (int i = 0; i < 20; ++i)
    for (int c = 0; c < 3; ++c) {
      u0(i, c) = rng.normal(3 * i + c);
      u_hat(i, c) = u0(i, c) + 0.3 * rng.normal(900 + 3 * i + c);
    }
  std::vector<int> labels = {0, 1, 2, 2, 1, 0, 0};
  std::vector<int> labels0 = {0, 1, 2, 1, 1, 0, 2};
  MatchedLosses base = permutation_matched_losses(u_hat, labels, u0, labels0);
  // permute the estimate's columns and labels together
  std::vector<int> perm = {1, 2, 0};
  MatrixXd up(20, 3);
  for (int c = 0; c < 3; ++c) up.col(perm[(size_t)c]) = u_hat.col(c);
  std::vector<int> lp(labels.size());
  for (size_t j = 0; j < labels.size(); ++j) lp[j] = perm[(size_t)labels[j]];
  MatchedLosses moved = permutation_matched_losses(up, lp, u0, labels0);
  CHECK(base.centroid_mse == doctest::Approx(moved.centroid_mse).epsilon(1e-14));
  CHECK(base.zero_one_loss == doctest::Approx(moved.zero_one_loss).epsilon(1e-14));
}

TEST_CASE("large rank falls back to assignment matching") {
  const int r = 10;
  CounterRng rng = CounterRng::keyed("hungarian", 9, 0);
  MatrixXd u0(15, r);
  for (int i = 0; i < 15; ++i)
    for (int c = 0; c < r; ++c) u0(i, c) = rng.normal(r * i + c);
  std::vector<int> perm(r);
  for (int c = 0; c < r; ++c) perm[(size_t)c] = (c + 3) % r;
  MatrixXd u_perm(15, r);
  for (int c = 0; c < r; ++c) u_perm.col(c) = u0.col(perm[(size_t)c]);
  std::vector<int> l0 = {0, 5, 9, 2};
  std::vector<int> l(l0.size());
  for (size_t j = 0; j < l0.size(); ++j)
    for (int c = 0; c < r; ++c)
      if (perm[(size_t)c] == l0[j]) l[j] = c;
  MatchedLosses ml = permutation_matched_losses(u_perm, l, u0, l0);
  CHECK(ml.centroid_mse == doctest::Approx(0.0).scale(1.0).epsilon(1e-12));
  CHECK(ml.zero_one_loss == 0.0);
}

// ---- empirical vs theory spot check -----------------------------------------

TEST_CASE("far below threshold the labels stay near chance") {
  // alpha_b = 0.1 << alpha_c = 0.25 at R = 5, delta = 0.1; with incoherent
  // random initialization the finite-size susceptibility still leaves the
  // loss close to (R-1)/R = 0.8 over a short stream
  const int n = 500;
  GmmInstance inst = generate_gmm(PriorSpec::gaussian(0.0, 1.0), 5, 0.1, n, 250, 21);
  auto batches = inst.column_batches(50);
  auto labels = inst.label_batches(50);
  ClusterStreamOptions opts;
  opts.seed = 21;
  opts.init = ClusterInit::RandomU;
  ClusterStreamResult res = gmm_stream_cluster(batches, 5,
                                               PriorSpec::gaussian(0.0, 1.0),
                                               0.1, opts, &inst.u0, &labels);
  CHECK(res.stats.front().zero_one_loss > 0.55);
  CHECK(res.stats.back().zero_one_loss > 0.45);
}
