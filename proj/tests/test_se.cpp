#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "samp/state_evolution.hpp"

using namespace samp;

namespace {

const PriorSpec kGb03 = PriorSpec::gauss_bernoulli(0.3);

double fit_log_slope(const std::vector<double>& alpha,
                     const std::vector<double>& log_e) {
  double n = static_cast<double>(alpha.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < alpha.size(); ++i) {
    sx += alpha[i];
    sy += log_e[i];
    sxx += alpha[i] * alpha[i];
    sxy += alpha[i] * log_e[i];
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace

TEST_CASE("quadrature rule integrates 1 and z^2 exactly") {
  for (int order : {61, 121}) {
    const QuadratureRule& q = gauss_hermite(order);
    CHECK(q.expect([](double) { return 1.0; }) ==
          doctest::Approx(1.0).epsilon(1e-13));
    CHECK(q.expect([](double z) { return z * z; }) ==
          doctest::Approx(1.0).epsilon(1e-12));
    CHECK(q.expect([](double z) { return z; }) ==
          doctest::Approx(0.0).scale(1.0).epsilon(1e-13));
  }
}

TEST_CASE("no data leaves the error at the prior variance") {
  auto t = se_offline(kGb03, ChannelSpec::gaussian(1e-8), 0.0);
  CHECK(t.final_mse() == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("offline SLR at alpha=2 reaches a near-zero fixed point") {
  auto t = se_offline(kGb03, ChannelSpec::gaussian(1e-8), 2.0);
  CHECK(t.final_mse() < 1e-7);
  CHECK(t.final_mse() > 0.0);
}

TEST_CASE("61 vs 121 quadrature nodes move the answer by less than 1e-9") {
  SeOptions o61, o121;
  o121.quad_order = 121;
  for (double ab : {0.1, 0.35, 0.5}) {
    auto a = se_mini(kGb03, ChannelSpec::gaussian(1e-8), ab, 4, o61);
    auto b = se_mini(kGb03, ChannelSpec::gaussian(1e-8), ab, 4, o121);
    for (size_t k = 0; k < a.batches.size(); ++k)
      CHECK(std::fabs(a.batches[k].mse - b.batches[k].mse) < 1e-9);
  }
}

TEST_CASE("Bayes-optimal inputs collapse the mismatched recursion") {
  // gamma tracks lambda and V tracks E when delta = delta0 and the prior
  // matches the generator
  auto t = se_mini(kGb03, ChannelSpec::gaussian(1e-3), 0.4, 6);
  for (const auto& b : t.batches) {
    CHECK(b.gamma == doctest::Approx(b.lambda).epsilon(1e-10));
    CHECK(b.v == doctest::Approx(b.mse).epsilon(1e-9).scale(b.mse + 1e-12));
  }
}

TEST_CASE("mismatched noise is tracked separately and hurts") {
  ChannelSpec mism = ChannelSpec::gaussian(1e-3, 0.1);  // assumed < true
  auto t = se_mini(kGb03, mism, 0.4, 4);
  auto matched = se_mini(kGb03, ChannelSpec::gaussian(0.1), 0.4, 4);
  CHECK(t.batches.back().gamma > t.batches.back().lambda);
  CHECK(t.final_mse() > matched.final_mse());
}

TEST_CASE("single batch reduces to the offline recursion") {
  auto a = se_mini(kGb03, ChannelSpec::gaussian(1e-8), 0.7, 1);
  auto b = se_offline(kGb03, ChannelSpec::gaussian(1e-8), 0.7);
  CHECK(a.final_mse() == b.final_mse());
  CHECK(a.batches[0].lambda == b.batches[0].lambda);
}

TEST_CASE("streaming SLR at alpha_b=0.35 shows a sudden drop") {
  auto t = se_mini(kGb03, ChannelSpec::gaussian(1e-8), 0.35, 12);
  int drop_batch = -1;
  for (size_t k = 0; k < t.batches.size(); ++k) {
    if (t.batches[k].mse < 1e-6) {
      drop_batch = static_cast<int>(k);
      break;
    }
  }
  REQUIRE(drop_batch > 1);  // not immediate
  // a genuine jump: four-plus orders of magnitude within one batch
  double before = t.batches[static_cast<size_t>(drop_batch - 1)].mse;
  double after = t.batches[static_cast<size_t>(drop_batch)].mse;
  CHECK(before > 1e-4);
  CHECK(after / before < 1e-3);
}

TEST_CASE("noiseless decay ratio approaches 1 - alpha_b/rho") {
  auto t = se_mini(kGb03, ChannelSpec::gaussian(0.0), 0.15, 40);
  double ratio = t.batches[39].mse / t.batches[38].mse;
  CHECK(ratio == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("lambda never decreases along the stream") {
  auto t = se_mini(kGb03, ChannelSpec::gaussian(1e-8), 0.35, 10);
  double prev = 0.0;
  for (const auto& b : t.batches) {
    CHECK(b.lambda >= prev);
    prev = b.lambda;
  }
}

TEST_CASE("capping the per-batch iterations degrades every batch") {
  SeOptions capped;
  capped.t_max = 2;
  capped.tol = 0.0;
  auto t2 = se_mini(kGb03, ChannelSpec::gaussian(1e-8), 0.35, 10, capped);
  auto tc = se_mini(kGb03, ChannelSpec::gaussian(1e-8), 0.35, 10);
  for (size_t k = 0; k < 10; ++k)
    CHECK(t2.batches[k].mse >= tc.batches[k].mse - 1e-12);
}

TEST_CASE("adf ode: no data point") {
  auto tr = se_adf_ode(kGb03, ChannelSpec::gaussian(0.0), 0.0);
  REQUIRE(tr.size() == 1);
  CHECK(tr[0].mse == doctest::Approx(0.3).epsilon(1e-12));
}

TEST_CASE("adf ode reproduces the exponential SLR decay rate") {
  auto tr = se_adf_ode(kGb03, ChannelSpec::gaussian(0.0), 9.0, 2e-3);
  std::vector<double> alpha, log_e;
  for (const auto& p : tr) {
    if (p.alpha < 6.0) continue;  // the law is asymptotic in alpha
    alpha.push_back(p.alpha);
    log_e.push_back(std::log(p.mse));
  }
  double slope = fit_log_slope(alpha, log_e);
  CHECK(slope == doctest::Approx(-1.0 / 0.3).epsilon(0.02));
}

TEST_CASE("adf ode agrees with tiny mini-batches") {
  auto ode = se_adf_ode(kGb03, ChannelSpec::gaussian(1e-8), 1.0, 1e-3);
  auto mini = se_mini(kGb03, ChannelSpec::gaussian(1e-8), 1e-3, 1000);
  double scale = std::max(mini.final_mse(), 1e-4);
  CHECK(std::fabs(ode.back().mse - mini.final_mse()) < 1e-4 * scale + 1e-4);
}

TEST_CASE("perceptron thresholds bracket the known transitions") {
  PriorSpec rad = PriorSpec::rademacher();
  ChannelSpec perc = ChannelSpec::probit(1e-10);
  SUBCASE("offline transition near alpha = 1.5") {
    CHECK(se_offline(rad, perc, 1.6).final_mse() < 1e-3);
    CHECK(se_offline(rad, perc, 1.4).final_mse() > 1e-3);
  }
  SUBCASE("fully online transition near alpha = 4.4") {
    auto tr = se_adf_ode(rad, perc, 4.8, 2e-3);
    double alpha_cross = -1.0;
    for (const auto& p : tr)
      if (p.mse < 1e-3) {
        alpha_cross = p.alpha;
        break;
      }
    REQUIRE(alpha_cross > 0.0);
    CHECK(alpha_cross > 4.2);
    CHECK(alpha_cross < 4.6);
  }
}

TEST_CASE("probit channel moments satisfy E g^2 = -E dg") {
  // identity of the y-marginalized output expectations, holding pointwise in
  // w; a strong cross-check of the two quadrature routes
  ChannelSpec probit = ChannelSpec::probit(0.05);
  const QuadratureRule& q = gauss_hermite(61);
  for (double m : {0.0, 0.2, 0.7})
    for (double v : {0.05, 0.3, 1.0}) {
      GoutMoments g = se_gout_moments(probit, m, v, q);
      CHECK(g.e_g2 == doctest::Approx(-g.e_dg).epsilon(1e-10));
    }
}

TEST_CASE("probit mini-batch SE improves with data") {
  auto t = se_mini(PriorSpec::rademacher(), ChannelSpec::probit(1e-10), 0.5, 6);
  for (size_t k = 1; k < t.batches.size(); ++k)
    CHECK(t.batches[k].mse <= t.batches[k - 1].mse + 1e-12);
  CHECK(t.final_mse() < t.batches[0].mse);
}

// ---- low-rank --------------------------------------------------------------

TEST_CASE("one-hot SE overlap basics") {
  CHECK(onehot_se_overlap(5, 0.0) == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(onehot_se_overlap(5, 50.0) > 0.98);
  CHECK(onehot_se_overlap(3, 0.0) == doctest::Approx(1.0 / 3).epsilon(1e-12));
  double prev = 0.0;
  for (double a : {0.0, 0.5, 2.0, 8.0, 32.0}) {
    double q = onehot_se_overlap(5, a);
    CHECK(q >= prev);
    prev = q;
  }
  for (double a : {0.3, 3.0})
    CHECK(onehot_se_overlap(5, a, 24) ==
          doctest::Approx(onehot_se_overlap(5, a, 48)).epsilon(1e-9));
  // the noise-sum rule converges more slowly in the crossover regime
  for (double a : {10.0, 30.0})
    CHECK(onehot_se_overlap(5, a, 32) ==
          doctest::Approx(onehot_se_overlap(5, a, 48)).epsilon(5e-7));
  CHECK(onehot_se_accuracy(5, 0.0) == doctest::Approx(0.2).epsilon(1e-10));
  CHECK(onehot_se_accuracy(5, 100.0) > 0.99);
}

TEST_CASE("below the undetectability threshold the seed dies, above it grows") {
  // R = 5, delta = 0.1: alpha_c = 0.25
  LowRankSeOptions seeded;
  seeded.seed_overlap = 1e-3;
  SUBCASE("alpha_b = 0.3 > alpha_c: overlap grows") {
    auto r = se_lowrank(5, 0.1, PriorSpec::gaussian(0.0, 1.0), 0.3, 10, seeded);
    CHECK(r.batches.back().m_u.a > 0.3);
    CHECK(r.batches.back().centroid_mse < r.batches.front().centroid_mse);
    for (size_t k = 1; k < r.batches.size(); ++k)
      CHECK(r.batches[k].m_u.a >= r.batches[k - 1].m_u.a - 1e-9);
  }
  SUBCASE("alpha_b = 0.2 < alpha_c with a zero seed stays at zero") {
    LowRankSeOptions zero;
    auto r = se_lowrank(5, 0.1, PriorSpec::gaussian(0.0, 1.0), 0.2, 50, zero);
    for (const auto& b : r.batches) {
      CHECK(b.m_u.a == 0.0);
      CHECK(b.label_overlap == doctest::Approx(0.2).epsilon(1e-12));
    }
    // the uniform-label direction is still learned
    CHECK(r.batches.back().m_u.b > 0.0);
  }
  SUBCASE("alpha_b = 0.2: the response to a tiny seed is linear, no runaway") {
    LowRankSeOptions tiny = seeded;
    tiny.seed_overlap = 1e-8;
    LowRankSeOptions tinier = seeded;
    tinier.seed_overlap = 1e-9;
    auto r1 = se_lowrank(5, 0.1, PriorSpec::gaussian(0.0, 1.0), 0.2, 1, tiny);
    auto r2 = se_lowrank(5, 0.1, PriorSpec::gaussian(0.0, 1.0), 0.2, 1, tinier);
    CHECK(r1.batches[0].m_u.a ==
          doctest::Approx(10.0 * r2.batches[0].m_u.a).epsilon(1e-3));
    CHECK(r1.batches[0].m_u.a < 1e-6);  // stays microscopic below threshold
  }
}

TEST_CASE("restarting from a converged accumulator is a fixed point") {
  LowRankSeOptions seeded;
  seeded.seed_overlap = 1e-3;
  auto r = se_lowrank(5, 0.1, PriorSpec::gaussian(0.0, 1.0), 0.3, 12, seeded);
  const auto& last = r.batches.back();
  LowRankSeOptions cont;
  cont.seed_overlap = last.lambda_v.a;
  auto r2 = se_lowrank(5, 0.1, PriorSpec::gaussian(0.0, 1.0), 0.3, 1, cont);
  CHECK(r2.batches[0].m_u.a == doctest::Approx(last.m_u.a).epsilon(0.02));
}

TEST_CASE("rank-1 stream degenerates to mean estimation") {
  auto r = se_lowrank(1, 0.5, PriorSpec::gaussian(0.0, 1.0), 0.5, 5);
  for (const auto& b : r.batches) CHECK(b.label_overlap == 1.0);
  CHECK(r.batches.back().centroid_mse < r.batches.front().centroid_mse);
}

TEST_CASE("se_lowrank rejects unsupported priors") {
  CHECK_THROWS_AS(
      se_lowrank(3, 0.1, PriorSpec::truncated_nonneg_gaussian(0.1), 0.3, 2),
      std::invalid_argument);
}

// ---- asymptotics -----------------------------------------------------------

TEST_CASE("asymptotic SLR law") {
  CHECK(asymptotic_mse_slr(0.3, 0.15, 0.0) == doctest::Approx(0.3));
  // per-batch decay factor at alpha_b = rho/2 is exactly 1/2
  double r1 = asymptotic_mse_slr(0.3, 0.15, 1.0);
  double r2 = asymptotic_mse_slr(0.3, 0.15, 1.0 + 0.15);
  CHECK(r2 / r1 == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(asymptotic_mse_slr(0.3, 0.35, 2.0) == 0.0);
  CHECK(asymptotic_mse_slr(0.3, 0.3, 1.0) == 0.0);
}

TEST_CASE("se guards") {
  CHECK_THROWS_AS(se_mini(kGb03, ChannelSpec::gaussian(1e-8), 0.0, 3),
                  std::invalid_argument);
  CHECK_THROWS_AS(se_mini(kGb03, ChannelSpec::probit(0.1, 0.2), 0.5, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(se_adf_ode(kGb03, ChannelSpec::gaussian(0.0), 1.0, 0.0),
                  std::invalid_argument);
}
