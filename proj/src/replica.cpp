#include "samp/replica.hpp"

#include <cmath>
#include <stdexcept>

#include "samp/detail/panels.hpp"
#include "samp/gb_exact.hpp"
#include "samp/state_evolution.hpp"

namespace samp {

namespace {

void check_landscape_args(double delta, double E) {
  if (!(delta > 0.0))
    throw std::domain_error(
        "replica potential: delta must be > 0 (use a small floor for the "
        "noiseless landscape)");
  if (!(E > 0.0)) throw std::domain_error("replica potential: E must be > 0");
}

// E_{x,z} log Z_x(A, A x + sqrt(A) z) with x from the prior.
double expected_log_partition(const PriorSpec& prior, double a_field,
                              const QuadratureRule& q) {
  if (prior.kind == PriorSpec::Kind::GaussBernoulli)
    return gb_expected_log_partition(prior.rho, a_field);
  return prior_field_expect(
      prior, a_field, a_field,
      [&](double, double b) { return prior_log_partition(prior, a_field, b); },
      q);
}

// Channel term of a potential at overlap m: the channel-side precision is
// alpha_eff / (delta + E); the bracket is chosen so that stationary points
// coincide with the state-evolution fixed points.
double channel_bracket(double alpha_eff, double delta, double E) {
  return 0.5 * alpha_eff * (std::log1p(E / delta) - E / (delta + E));
}

double irs_common(const PriorSpec& prior, double delta, double alpha_b,
                  double lambda, double E, double trailing_const,
                  int quad_order) {
  check_landscape_args(delta, E);
  if (!(lambda >= 0.0))
    throw std::domain_error("replica potential: lambda must be >= 0");
  const QuadratureRule& q = gauss_hermite(quad_order);
  const double rho2 = prior.second_moment();
  const double a_b = lambda + alpha_b / (delta + E);
  return channel_bracket(alpha_b, delta, E) -
         expected_log_partition(prior, a_b, q) + 0.5 * (a_b * rho2 + 1.0) +
         trailing_const;
}

}  // namespace

double irs_offline(const PriorSpec& prior, double delta, double alpha,
                   double E, int quad_order) {
  return irs_common(prior, delta, alpha, 0.0, E, -0.5, quad_order);
}

double irs_mini(const PriorSpec& prior, double delta, double alpha_b,
                double lambda, double E, int quad_order) {
  return irs_common(prior, delta, alpha_b, lambda, E, -0.5 * (1.0 + alpha_b),
                    quad_order);
}

namespace {

// Golden-section refinement of a minimum bracketed by [lo, hi] (log scale).
template <typename F>
double golden_min(F&& f, double lo, double hi, double rel_tol) {
  const double gr = 0.61803398874989484820;
  double a = std::log(lo), b = std::log(hi);
  double c = b - gr * (b - a);
  double d = a + gr * (b - a);
  double fc = f(std::exp(c)), fd = f(std::exp(d));
  while ((b - a) > rel_tol) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - gr * (b - a);
      fc = f(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + gr * (b - a);
      fd = f(std::exp(d));
    }
  }
  return std::exp(0.5 * (a + b));
}

}  // namespace

LandscapeScan scan_landscape(const PriorSpec& prior, double delta,
                             double alpha_b, double lambda,
                             const GridSpec& grid, int quad_order) {
  if (grid.points < 8)
    throw std::invalid_argument("scan_landscape: need at least 8 grid points");
  double e_max = grid.e_max > 0.0 ? grid.e_max : 2.0 * prior.second_moment();
  if (!(grid.e_min > 0.0 && e_max > grid.e_min))
    throw std::invalid_argument("scan_landscape: bad grid range");

  LandscapeScan scan;
  scan.lambda = lambda;
  scan.e_grid.resize(grid.points);
  scan.irs.resize(grid.points);
  const double l0 = std::log(grid.e_min), l1 = std::log(e_max);
  for (int i = 0; i < grid.points; ++i) {
    scan.e_grid[i] =
        std::exp(l0 + (l1 - l0) * static_cast<double>(i) / (grid.points - 1));
    scan.irs[i] = irs_mini(prior, delta, alpha_b, lambda, scan.e_grid[i],
                           quad_order);
  }

  auto value_at = [&](double e) {
    return irs_mini(prior, delta, alpha_b, lambda, e, quad_order);
  };
  // d i / dE vanishes exactly where E is a fixed point of the denoiser map,
  // so the golden-section bracket (limited to ~sqrt(eps) localization by the
  // flatness of the minimum) is polished by bisecting the residual
  //   T(E) - E,  T(E) = E_{x,z}(eta - x)^2 at A_b = lambda + alpha_b/(delta+E)
  const QuadratureRule& q = gauss_hermite(quad_order);
  auto fp_residual = [&](double e) {
    double a_b = lambda + alpha_b / (delta + e);
    return se_denoiser_moments(prior, a_b, a_b, q).mse - e;
  };
  auto polish = [&](double e_star, double lo, double hi) {
    double a = std::max(lo, e_star * 0.7);
    double b = std::min(hi, e_star * 1.4);
    double fa = fp_residual(a), fb = fp_residual(b);
    if (!(fa > 0.0 && fb < 0.0)) return e_star;  // not a clean stable bracket
    for (int it = 0; it < 200; ++it) {
      double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      if (fp_residual(mid) > 0.0) a = mid;
      else b = mid;
    }
    return 0.5 * (a + b);
  };

  for (int i = 1; i + 1 < grid.points; ++i) {
    if (scan.irs[i] < scan.irs[i - 1] && scan.irs[i] < scan.irs[i + 1]) {
      double e_star = golden_min(value_at, scan.e_grid[i - 1],
                                 scan.e_grid[i + 1], 1e-10);
      e_star = polish(e_star, scan.e_grid[i - 1], scan.e_grid[i + 1]);
      scan.minima.push_back({e_star, value_at(e_star), false});
    }
  }

  // Global minimum over interior minima and grid-edge candidates.
  scan.global = {scan.e_grid[0], scan.irs[0], true};
  if (scan.irs[grid.points - 1] < scan.global.value)
    scan.global = {scan.e_grid[grid.points - 1], scan.irs[grid.points - 1],
                   true};
  for (const auto& m : scan.minima)
    if (m.value < scan.global.value) scan.global = m;
  return scan;
}

std::vector<MmseStep> mmse_recursion(const PriorSpec& prior, double delta,
                                     double alpha_b, int num_batches,
                                     const GridSpec& grid, int quad_order) {
  std::vector<MmseStep> out;
  double lambda = 0.0;
  for (int k = 0; k < num_batches; ++k) {
    LandscapeScan scan =
        scan_landscape(prior, delta, alpha_b, lambda, grid, quad_order);
    MmseStep step;
    step.lambda_before = lambda;
    step.mmse = scan.global.e;
    step.minima_count = static_cast<int>(scan.minima.size());
    lambda += alpha_b / (delta + step.mmse);
    step.lambda_after = lambda;
    out.push_back(step);
  }
  return out;
}

namespace {

// E_{w, y} log Z_z(y, w, V) with w ~ N(0, m) and y drawn through the channel.
double expected_channel_log_partition(const ChannelSpec& channel, double m,
                                      double v_eff, const QuadratureRule& q) {
  if (channel.kind == ChannelSpec::Kind::Gaussian) {
    double dv = channel.delta + v_eff;
    return -0.5 * (channel.delta0 + v_eff) / dv -
           0.5 * std::log(2.0 * kPi * dv);
  }
  (void)q;
  double sm = std::sqrt(std::max(m, 0.0));
  double sd = std::sqrt(channel.delta + v_eff);
  auto at_w = [&](double w) {
    double acc = 0.0;
    for (double y : {1.0, -1.0}) {
      double lz = channel_log_partition(channel, y, w, v_eff);
      acc += std::exp(lz) * lz;
    }
    return acc;
  };
  if (sm == 0.0) return at_w(0.0);
  std::vector<double> bps;
  for (double r : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) bps.push_back(r * sd);
  for (double r : {0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.5, 6.0, 8.0, 10.0, 12.0})
    bps.push_back(r * sm);
  double tail = std::max(14.0 * sm, 10.0 * sd);
  return detail::half_gaussian_integral(sm, bps, tail, at_w);
}

}  // namespace

double replica_free_energy_glm(const PriorSpec& prior,
                               const ChannelSpec& channel, double m,
                               double m_hat, double alpha, int quad_order) {
  const double rho2 = prior.second_moment();
  if (!(m >= -1e-12 && m <= rho2 + 1e-9))
    throw std::domain_error("replica_free_energy_glm: overlap m out of range");
  if (!(m_hat >= 0.0))
    throw std::domain_error("replica_free_energy_glm: m_hat must be >= 0");
  const QuadratureRule& q = gauss_hermite(quad_order);
  double v_eff = std::max(rho2 - m, 1e-14);
  return 0.5 * m * m_hat - expected_log_partition(prior, m_hat, q) -
         alpha * expected_channel_log_partition(channel, m, v_eff, q);
}

double replica_free_energy_glm_stream(const PriorSpec& prior,
                                      const ChannelSpec& channel, double m,
                                      double lambda_k, double lambda_prev,
                                      double alpha_b, int quad_order) {
  const double rho2 = prior.second_moment();
  if (!(m >= -1e-12 && m <= rho2 + 1e-9))
    throw std::domain_error("replica_free_energy_glm_stream: m out of range");
  const QuadratureRule& q = gauss_hermite(quad_order);
  double v_eff = std::max(rho2 - m, 1e-14);
  return 0.5 * m * (lambda_k - lambda_prev) -
         expected_log_partition(prior, lambda_k, q) -
         alpha_b * expected_channel_log_partition(channel, m, v_eff, q);
}

namespace {

// E log Z_U for the zero-mean gaussian U prior at A = m_v_hat:
//   -1/2 logdet(I + sigma0^2 A) + (sigma0^2 / 2) Tr A.
double e_log_zu(const Eigen::MatrixXd& a, double sigma0sq) {
  Eigen::MatrixXd m =
      Eigen::MatrixXd::Identity(a.rows(), a.cols()) + sigma0sq * a;
  return -0.5 * std::log(m.determinant()) + 0.5 * sigma0sq * a.trace();
}

double e_log_zu_ansatz(double a, double b, int rank, double sigma0sq) {
  // eigenvalues: a (multiplicity R-1) and a + R b (multiplicity 1)
  double e1 = a, e2 = a + rank * b;
  double logdet = (rank - 1) * std::log1p(sigma0sq * e1) +
                  std::log1p(sigma0sq * e2);
  double trace = rank * a + rank * b;
  return -0.5 * logdet + 0.5 * sigma0sq * trace;
}

// E log Z_V at A_hat = a I + b J (one-hot prior): the xi-bar direction drops
// out in expectation, leaving log(1/R) + (b - a)/2 + E logsumexp.
double e_log_zv_ansatz(double a_hat, double b_hat, int rank, int quad_order) {
  return -std::log(static_cast<double>(rank)) + 0.5 * (b_hat - a_hat) +
         onehot_se_logsumexp(rank, std::max(a_hat, 0.0), quad_order);
}

// Full-matrix E log Z_V by tensor quadrature (rank <= 3).
double e_log_zv_full(const Eigen::MatrixXd& a_hat, int quad_order) {
  const int r = static_cast<int>(a_hat.rows());
  if (r > 3)
    throw std::invalid_argument("replica_free_energy_lowrank: rank > 3 needs "
                                "the ansatz form");
  Eigen::LLT<Eigen::MatrixXd> llt(
      a_hat + 1e-14 * Eigen::MatrixXd::Identity(r, r));
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("e_log_zv_full: A_hat not PSD");
  Eigen::MatrixXd l = llt.matrixL();
  const QuadratureRule& q = gauss_hermite(quad_order);

  double acc = 0.0;
  Eigen::VectorXd xi(r), b(r), score(r);
  std::vector<int> idx(static_cast<size_t>(r), 0);
  for (int c = 0; c < r; ++c) {
    // tensor loop over xi
    std::fill(idx.begin(), idx.end(), 0);
    while (true) {
      double w = 1.0;
      for (int d = 0; d < r; ++d) {
        xi[d] = q.nodes[idx[static_cast<size_t>(d)]];
        w *= q.weights[idx[static_cast<size_t>(d)]];
      }
      b = a_hat.col(c) + l * xi;
      for (int k = 0; k < r; ++k) score[k] = b[k] - 0.5 * a_hat(k, k);
      double mx = score.maxCoeff();
      double lse = mx + std::log((score.array() - mx).exp().sum());
      acc += w * lse / r;
      int d = 0;
      while (d < r && ++idx[static_cast<size_t>(d)] == q.order()) {
        idx[static_cast<size_t>(d)] = 0;
        ++d;
      }
      if (d == r) break;
    }
  }
  return acc - std::log(static_cast<double>(r));
}

}  // namespace

double replica_free_energy_lowrank_ansatz(double a_u, double b_u, double a_v,
                                          double b_v, int rank, double delta,
                                          double alpha, double prior_variance,
                                          int quad_order) {
  if (!(delta > 0.0))
    throw std::domain_error("replica_free_energy_lowrank: delta must be > 0");
  const double beta = 1.0 / delta;
  // Tr(M_U M_V^T) for M = aI + bJ pairs
  double tr = rank * (a_u * a_v) + rank * (a_u * b_v + b_u * a_v) +
              rank * rank * b_u * b_v;
  double a_hat_u = beta * a_v, b_hat_u = beta * b_v;
  double a_hat_v = beta * a_u, b_hat_v = beta * b_u;
  return 0.5 * beta * tr - e_log_zu_ansatz(a_hat_u, b_hat_u, rank, prior_variance) -
         alpha * e_log_zv_ansatz(a_hat_v, b_hat_v, rank, quad_order);
}

double replica_free_energy_lowrank(const Eigen::MatrixXd& m_u,
                                   const Eigen::MatrixXd& m_v, double delta,
                                   double alpha, double prior_variance,
                                   int quad_order) {
  if (!(delta > 0.0))
    throw std::domain_error("replica_free_energy_lowrank: delta must be > 0");
  const double beta = 1.0 / delta;
  double tr = (m_u.cwiseProduct(m_v)).sum();
  return 0.5 * beta * tr - e_log_zu(beta * m_v, prior_variance) -
         alpha * e_log_zv_full(beta * m_u, quad_order);
}

double undetectability_threshold(int rank, double delta) {
  if (rank < 1)
    throw std::domain_error("undetectability_threshold: rank must be >= 1");
  if (!(delta >= 0.0))
    throw std::domain_error("undetectability_threshold: delta must be >= 0");
  return static_cast<double>(rank) * static_cast<double>(rank) * delta * delta;
}

}  // namespace samp
