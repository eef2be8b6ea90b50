#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracle_quadrature.hpp"
#include "samp/priors.hpp"
#include "samp/rng.hpp"

using namespace samp;
using samp_test::tilted_moments_oracle;

namespace {

// randomized but reproducible parameter draws
struct ParamGen {
  CounterRng rng{CounterRng::keyed("denoiser_props", 7, 0)};
  uint64_t i = 0;
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * rng.uniform(i++);
  }
};

std::vector<PriorSpec> all_priors() {
  return {PriorSpec::gauss_bernoulli(0.3), PriorSpec::gauss_bernoulli(0.85),
          PriorSpec::rademacher(), PriorSpec::gaussian(0.0, 1.0),
          PriorSpec::gaussian(-0.7, 2.5),
          PriorSpec::truncated_nonneg_gaussian(0.1),
          PriorSpec::truncated_nonneg_gaussian(1.0)};
}

}  // namespace

TEST_CASE("gaussian conjugacy") {
  auto p = PriorSpec::gaussian(0.0, 1.0);
  DenoiserOutput d = prior_denoise(p, 1.0, 2.0);
  CHECK(d.mean == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d.variance == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(prior_log_partition(p, 0.0, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("rademacher symmetry and log partition") {
  auto p = PriorSpec::rademacher();
  for (double a : {0.0, 1.0, 17.0}) {
    DenoiserOutput d = prior_denoise(p, a, 0.0);
    CHECK(d.mean == 0.0);
    CHECK(d.variance == doctest::Approx(1.0).epsilon(1e-14));
  }
  CHECK(prior_log_partition(p, 0.0, 1.0) ==
        doctest::Approx(std::log(std::cosh(1.0))).epsilon(1e-14));
}

TEST_CASE("gauss-bernoulli prior moments at zero tilt") {
  auto p = PriorSpec::gauss_bernoulli(0.3);
  DenoiserOutput d = prior_denoise(p, 0.0, 0.0);
  CHECK(d.mean == 0.0);
  CHECK(d.variance == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("closed forms match the integration oracle") {
  // frozen spec instances first
  {
    auto p = PriorSpec::gauss_bernoulli(0.3);
    auto o = tilted_moments_oracle(p, 2.0, 1.5);
    DenoiserOutput d = prior_denoise(p, 2.0, 1.5);
    CHECK(d.mean == doctest::Approx(o.mean).epsilon(1e-10));
    CHECK(d.variance == doctest::Approx(o.variance).epsilon(1e-10));
    CHECK(prior_log_partition(p, 1.0, 2.0) ==
          doctest::Approx(tilted_moments_oracle(p, 1.0, 2.0).log_z)
              .epsilon(1e-10));
  }
  // randomized sweep across priors
  ParamGen gen;
  for (const auto& p : all_priors()) {
    for (int rep = 0; rep < 20; ++rep) {
      double a = gen.uniform(0.0, 30.0);
      double b = gen.uniform(-12.0, 12.0);
      auto o = tilted_moments_oracle(p, a, b);
      DenoiserOutput d = prior_denoise(p, a, b);
      INFO(p.name(), " A=", a, " B=", b);
      CHECK(d.mean == doctest::Approx(o.mean).epsilon(1e-9));
      CHECK(d.variance ==
            doctest::Approx(o.variance).epsilon(1e-8).scale(o.variance + 1e-12));
      CHECK(prior_log_partition(p, a, b) ==
            doctest::Approx(o.log_z).epsilon(1e-10));
    }
  }
}

TEST_CASE("dB log Z = eta and dB eta = eta' (finite differences)") {
  ParamGen gen;
  for (const auto& p : all_priors()) {
    for (int rep = 0; rep < 25; ++rep) {
      double a = gen.uniform(0.0, 50.0);
      double b = gen.uniform(-20.0, 20.0);
      double h = 1e-6 * std::max(1.0, std::fabs(b));
      DenoiserOutput d = prior_denoise(p, a, b);
      double dlogz = (prior_log_partition(p, a, b + h) -
                      prior_log_partition(p, a, b - h)) /
                     (2.0 * h);
      double deta = (prior_denoise(p, a, b + h).mean -
                     prior_denoise(p, a, b - h).mean) /
                    (2.0 * h);
      INFO(p.name(), " A=", a, " B=", b);
      CHECK(dlogz == doctest::Approx(d.mean).epsilon(1e-6).scale(
                         std::max(1.0, std::fabs(d.mean))));
      CHECK(deta == doctest::Approx(d.variance)
                        .epsilon(1e-6)
                        .scale(std::max(1.0, d.variance)));
    }
  }
}

TEST_CASE("posterior variance is nonnegative everywhere") {
  ParamGen gen;
  for (const auto& p : all_priors()) {
    for (int rep = 0; rep < 200; ++rep) {
      double a = gen.uniform(0.0, 200.0);
      double b = gen.uniform(-50.0, 50.0);
      CHECK(prior_denoise(p, a, b).variance >= 0.0);
    }
  }
}

TEST_CASE("strong data concentrates the posterior on the truth") {
  // A -> inf with B = A x0: eta -> x0 clipped to the support
  for (double x0 : {-1.5, -0.2, 0.0, 0.4, 2.0}) {
    double a = 1e10;
    CHECK(prior_denoise(PriorSpec::gauss_bernoulli(0.3), a, a * x0).mean ==
          doctest::Approx(x0).epsilon(1e-4));
    CHECK(prior_denoise(PriorSpec::gaussian(0.0, 1.0), a, a * x0).mean ==
          doctest::Approx(x0).epsilon(1e-9));
    double clipped = std::max(x0, 0.0);
    CHECK(prior_denoise(PriorSpec::truncated_nonneg_gaussian(1.0), a, a * x0)
              .mean == doctest::Approx(clipped).epsilon(1e-4).scale(1.0));
    if (x0 != 0.0) {
      double sgn = x0 > 0.0 ? 1.0 : -1.0;
      CHECK(prior_denoise(PriorSpec::rademacher(), a, a * x0).mean ==
            doctest::Approx(sgn).epsilon(1e-12));
    }
  }
}

TEST_CASE("stability at extreme fields") {
  for (const auto& p : all_priors()) {
    for (double b : {-1e3, -31.0, 31.0, 1e3}) {
      for (double a : {0.0, 1.0, 1e4}) {
        DenoiserOutput d = prior_denoise(p, a, b);
        CHECK(std::isfinite(d.mean));
        CHECK(std::isfinite(d.variance));
        CHECK(d.variance >= 0.0);
        CHECK(std::isfinite(prior_log_partition(p, a, b)));
      }
    }
  }
}

TEST_CASE("non-finite or negative-precision inputs are rejected") {
  auto p = PriorSpec::gauss_bernoulli(0.3);
  CHECK_THROWS_AS(prior_denoise(p, -1.0, 0.0), std::domain_error);
  CHECK_THROWS_AS(prior_denoise(p, std::nan(""), 0.0), std::domain_error);
  CHECK_THROWS_AS(prior_log_partition(p, 0.0, std::nan("")), std::domain_error);
  CHECK_THROWS_AS(PriorSpec::gauss_bernoulli(0.0), std::domain_error);
  CHECK_THROWS_AS(PriorSpec::gaussian(0.0, -1.0), std::domain_error);
}

TEST_CASE("second moments") {
  CHECK(PriorSpec::gauss_bernoulli(0.3).second_moment() == 0.3);
  CHECK(PriorSpec::rademacher().second_moment() == 1.0);
  CHECK(PriorSpec::gaussian(2.0, 0.5).second_moment() ==
        doctest::Approx(4.5).epsilon(1e-15));
  CHECK(PriorSpec::truncated_nonneg_gaussian(0.1).second_moment() ==
        doctest::Approx(0.1).epsilon(1e-15));
  // half-normal mean
  CHECK(PriorSpec::truncated_nonneg_gaussian(1.0).prior_mean() ==
        doctest::Approx(std::sqrt(2.0 / samp::kPi)).epsilon(1e-15));
}
