#include "samp/state_evolution.hpp"

#include <cmath>
#include <stdexcept>

#include "samp/detail/panels.hpp"
#include "samp/gb_exact.hpp"

namespace samp {

DenoiserMoments se_denoiser_moments(const PriorSpec& prior, double lambda,
                                    double gamma, const QuadratureRule& q) {
  if (prior.kind == PriorSpec::Kind::GaussBernoulli) {
    // tensor Hermite rules cannot track the sparsity switch at large
    // precision; use the dedicated panel integration instead
    GbMoments gb = gb_field_moments(prior.rho, lambda, gamma);
    return {gb.mse, gb.v, gb.m};
  }
  DenoiserMoments out{0.0, 0.0, 0.0};
  prior_field_visit(
      prior, lambda, gamma,
      [&](double x, double b, double w) {
        DenoiserOutput d = prior_denoise(prior, lambda, b);
        out.mse += w * sq(d.mean - x);
        out.v += w * d.variance;
        out.m += w * x * d.mean;
      },
      q);
  return out;
}

GoutMoments se_gout_moments(const ChannelSpec& channel, double m_overlap,
                            double v_eff, const QuadratureRule& q) {
  (void)q;
  GoutMoments out{0.0, 0.0};
  if (channel.kind == ChannelSpec::Kind::Gaussian) {
    // closed form: g = (y - w)/(delta + V), E (y - w)^2 = delta0 + V
    double dv = channel.delta + v_eff;
    out.e_dg = -1.0 / dv;
    out.e_g2 = (channel.delta0 + v_eff) / (dv * dv);
    return out;
  }
  // probit: w ~ N(0, m), y in {+-1} weighted by Z(y, w, V).  The integrand
  // concentrates on the sqrt(delta + V) scale once V << m, which needs
  // explicit panels rather than a Hermite rule.
  double sm = std::sqrt(std::max(m_overlap, 0.0));
  double sd = std::sqrt(channel.delta + v_eff);
  auto both_y = [&](double w) {
    GoutMoments acc{0.0, 0.0};
    for (double y : {1.0, -1.0}) {
      double z = std::exp(channel_log_partition(channel, y, w, v_eff));
      GoutResult r = channel_gout(channel, y, w, v_eff);
      acc.e_dg += z * r.dg;
      acc.e_g2 += z * r.g * r.g;
    }
    return acc;
  };
  if (sm == 0.0) return both_y(0.0);

  std::vector<double> bps;
  for (double r : {0.25, 0.5, 1.0, 2.0, 4.0, 8.0}) bps.push_back(r * sd);
  for (double r : {0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.5, 6.0, 8.0, 10.0, 12.0})
    bps.push_back(r * sm);
  double tail = std::max(14.0 * sm, 10.0 * sd);
  out.e_dg = detail::half_gaussian_integral(
      sm, bps, tail, [&](double w) { return both_y(w).e_dg; });
  out.e_g2 = detail::half_gaussian_integral(
      sm, bps, tail, [&](double w) { return both_y(w).e_g2; });
  return out;
}

namespace {

double effective_delta(const ChannelSpec& channel, const SeOptions& opts) {
  return std::max(channel.delta, opts.delta_floor);
}

}  // namespace

SeBatch se_batch_gaussian(const PriorSpec& prior, double delta, double delta0,
                          double alpha_b, double lambda_prev, double gamma_prev,
                          const SeOptions& opts) {
  const QuadratureRule& q = gauss_hermite(opts.quad_order);
  SeBatch batch;

  DenoiserMoments d0 = se_denoiser_moments(prior, lambda_prev, gamma_prev, q);
  double e_cur = d0.mse;
  double v_cur = d0.v;
  double lambda_t = lambda_prev;
  double gamma_t = gamma_prev;
  batch.mse_t.push_back(e_cur);

  int t = 1;
  for (; t <= opts.t_max; ++t) {
    lambda_t = lambda_prev + alpha_b / (delta + v_cur);
    gamma_t = gamma_prev + alpha_b * (delta0 + e_cur) / sq(delta + v_cur);
    DenoiserMoments d = se_denoiser_moments(prior, lambda_t, gamma_t, q);
    double diff = std::fabs(d.mse - e_cur);
    e_cur = d.mse;
    v_cur = d.v;
    batch.mse_t.push_back(e_cur);
    if (diff < opts.tol) break;
  }
  batch.iterations = std::min(t, opts.t_max);
  batch.lambda = lambda_t;
  batch.gamma = gamma_t;
  batch.mse = e_cur;
  batch.v = v_cur;
  return batch;
}

namespace {

// Bayes-optimal general-channel batch: iterate lambda_t from the channel
// expectation, m from the prior side; E = E(eta - x)^2 = rho - m on the
// Nishimori line.
SeBatch se_batch_general(const PriorSpec& prior, const ChannelSpec& channel,
                         double alpha_b, double lambda_prev,
                         const SeOptions& opts) {
  if (channel.delta != channel.delta0)
    throw std::invalid_argument(
        "se: mismatched noise is supported for the gaussian channel only");
  const QuadratureRule& q = gauss_hermite(opts.quad_order);
  SeBatch batch;

  DenoiserMoments d0 = se_denoiser_moments(prior, lambda_prev, lambda_prev, q);
  double e_cur = d0.mse;
  double m_cur = d0.m;
  double lambda_t = lambda_prev;
  const double rho2 = prior.second_moment();
  batch.mse_t.push_back(e_cur);

  int t = 1;
  for (; t <= opts.t_max; ++t) {
    double v_eff = std::max(rho2 - m_cur, 1e-14);
    GoutMoments gm = se_gout_moments(channel, m_cur, v_eff, q);
    lambda_t = lambda_prev - alpha_b * gm.e_dg;
    DenoiserMoments d = se_denoiser_moments(prior, lambda_t, lambda_t, q);
    double diff = std::fabs(d.mse - e_cur);
    e_cur = d.mse;
    m_cur = d.m;
    batch.mse_t.push_back(e_cur);
    if (diff < opts.tol) break;
  }
  batch.iterations = std::min(t, opts.t_max);
  batch.lambda = lambda_t;
  batch.gamma = lambda_t;
  batch.mse = e_cur;
  batch.v = e_cur;
  return batch;
}

}  // namespace

SETrajectory se_mini(const PriorSpec& prior, const ChannelSpec& channel,
                     double alpha_b, int num_batches, const SeOptions& opts) {
  if (!(alpha_b > 0.0)) throw std::invalid_argument("se_mini: alpha_b must be > 0");
  SETrajectory traj;
  traj.alpha_b = alpha_b;
  const bool gaussian = channel.kind == ChannelSpec::Kind::Gaussian;
  const double delta = effective_delta(channel, opts);
  const double delta0 = std::max(channel.delta0, 0.0);

  double lambda = 0.0, gamma = 0.0;
  for (int k = 0; k < num_batches; ++k) {
    SeBatch b = gaussian ? se_batch_gaussian(prior, delta, delta0, alpha_b,
                                             lambda, gamma, opts)
                         : se_batch_general(prior, channel, alpha_b, lambda,
                                            opts);
    lambda = b.lambda;
    gamma = b.gamma;
    traj.batches.push_back(std::move(b));
  }
  return traj;
}

SETrajectory se_offline(const PriorSpec& prior, const ChannelSpec& channel,
                        double alpha, const SeOptions& opts) {
  if (alpha == 0.0) {
    SETrajectory traj;
    traj.alpha_b = 0.0;
    SeBatch b;
    const QuadratureRule& q = gauss_hermite(opts.quad_order);
    DenoiserMoments d0 = se_denoiser_moments(prior, 0.0, 0.0, q);
    b.mse = d0.mse;
    b.v = d0.v;
    traj.batches.push_back(b);
    return traj;
  }
  return se_mini(prior, channel, alpha, 1, opts);
}

std::vector<AdfOdePoint> se_adf_ode(const PriorSpec& prior,
                                    const ChannelSpec& channel,
                                    double alpha_max, double step,
                                    int quad_order) {
  if (!(step > 0.0)) throw std::invalid_argument("se_adf_ode: step must be > 0");
  const QuadratureRule& q = gauss_hermite(quad_order);
  const double rho2 = prior.second_moment();
  const double delta_floor = 1e-16;

  // d lambda / d alpha = -E d_w g at the current MSE
  auto rhs = [&](double lambda) {
    DenoiserMoments d = se_denoiser_moments(prior, lambda, lambda, q);
    if (channel.kind == ChannelSpec::Kind::Gaussian)
      return 1.0 / (std::max(channel.delta, delta_floor) + d.mse);
    double v_eff = std::max(rho2 - d.m, 1e-14);
    GoutMoments gm = se_gout_moments(channel, d.m, v_eff, q);
    return -gm.e_dg;
  };

  std::vector<AdfOdePoint> out;
  double lambda = 0.0;
  int n_steps = static_cast<int>(std::ceil(alpha_max / step));
  DenoiserMoments d0 = se_denoiser_moments(prior, 0.0, 0.0, q);
  out.push_back({0.0, 0.0, d0.mse});
  for (int i = 0; i < n_steps; ++i) {
    double h = std::min(step, alpha_max - i * step);
    if (h <= 0.0) break;
    double k1 = rhs(lambda);
    double k2 = rhs(lambda + 0.5 * h * k1);
    double k3 = rhs(lambda + 0.5 * h * k2);
    double k4 = rhs(lambda + h * k3);
    lambda += h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    DenoiserMoments d = se_denoiser_moments(prior, lambda, lambda, q);
    out.push_back({(i + 1) * step, lambda, d.mse});
  }
  return out;
}

// ---- low-rank SE -----------------------------------------------------------

namespace {

// Multiset iteration over (rank-1) i.i.d. quadrature nodes.  For each
// combination the callback receives the scaled sum of exp(s_i) terms
// (common factor exp(max_s) removed) and the combination weight.
template <typename F>
void foreach_noise_multiset(const QuadratureRule& q, int count,
                            const std::vector<double>& scaled_exp, F&& f) {
  // Enumerate non-decreasing node-index tuples; the running weight carries
  // the multinomial factor C(remaining, m) per node so that the sum over
  // combinations equals the full tensor product.
  struct Rec {
    const QuadratureRule& q;
    const std::vector<double>& se;
    F& f;
    void go(int start, int remaining, double sum_exp, double weight) const {
      if (remaining == 0) {
        f(sum_exp, weight);
        return;
      }
      for (int i = start; i < q.order(); ++i) {
        double w = weight;
        double s = sum_exp;
        for (int m = 1; m <= remaining; ++m) {
          w *= q.weights[i] * static_cast<double>(remaining - m + 1) /
               static_cast<double>(m);
          s += se[static_cast<size_t>(i)];
          go(i + 1, remaining - m, s, w);
        }
      }
    }
  };
  Rec rec{q, scaled_exp, f};
  rec.go(0, count, 0.0, 1.0);
}

struct VSideMoments {
  double q_overlap;   // E p_true
  double logsumexp;   // E log sum_k exp(score_k)
};

VSideMoments vside_moments(int rank, double a_hat, const QuadratureRule& q) {
  VSideMoments out{1.0, 0.0};
  if (rank == 1) {
    out.q_overlap = 1.0;
    out.logsumexp = a_hat;
    return out;
  }
  if (a_hat <= 0.0) {
    // exactly uniform: keep the symmetric trajectory free of rounding dust
    out.q_overlap = 1.0 / rank;
    out.logsumexp = std::log(static_cast<double>(rank));
    return out;
  }
  const double sa = std::sqrt(a_hat);
  const int n = q.order();
  std::vector<double> s(static_cast<size_t>(n));
  double smax = -1e300;
  for (int i = 0; i < n; ++i) {
    s[static_cast<size_t>(i)] = sa * q.nodes[i];
    smax = std::max(smax, s[static_cast<size_t>(i)]);
  }
  std::vector<double> scaled(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i)
    scaled[static_cast<size_t>(i)] = std::exp(s[static_cast<size_t>(i)] - smax);

  // The true-component coordinate needs panels around the decision point
  // t* = (log S - a_hat)/sqrt(a_hat), whose width 1/sqrt(a_hat) shrinks below
  // any fixed Hermite spacing once a_hat is large.  Both t-integrals depend
  // on the combination only through t*, so they are tabulated once on a fine
  // t* grid and interpolated (Catmull-Rom).
  const detail::LegendreRule& gl = detail::legendre16();
  auto t_integrals_exact = [&](double tstar, double& q_part, double& lse_part) {
    double wf = 1.0 / sa;
    double lo = -10.0, hi = 10.0;
    std::vector<double> tb = {lo, -6.0, -3.0, -1.0, 0.0, 1.0, 3.0, 6.0, hi};
    for (double r : {-8.0, -4.0, -1.5, 0.0, 1.5, 4.0, 8.0}) {
      double t = tstar + r * wf;
      if (t > lo && t < hi) tb.push_back(t);
    }
    std::sort(tb.begin(), tb.end());
    tb.erase(std::unique(tb.begin(), tb.end()), tb.end());
    q_part = 0.0;
    lse_part = 0.0;
    for (size_t p = 0; p + 1 < tb.size(); ++p) {
      double mid = 0.5 * (tb[p] + tb[p + 1]);
      double half = 0.5 * (tb[p + 1] - tb[p]);
      if (half <= 0.0) continue;
      for (int i = 0; i < gl.x.size(); ++i) {
        double t = mid + half * gl.x[i];
        double wgt = gl.w[i] * half * normal_pdf(t);
        // sigma and softplus of sa * (t - tstar), referenced to the shared
        // offset so that score - log_s = sa * (t - tstar)
        double u = sa * (t - tstar);
        q_part += wgt * sigmoid(u);
        lse_part += wgt * log1pexp(u);
      }
    }
  };

  // t* range implied by the achievable log S values
  double s_lo = sa * q.nodes[0] + std::log(static_cast<double>(rank - 1));
  double s_hi = sa * q.nodes[n - 1] + std::log(static_cast<double>(rank - 1));
  double t_lo = (std::min(s_lo, sa * q.nodes[0]) - a_hat) / sa - 1.0;
  double t_hi = (s_hi - a_hat) / sa + 1.0;
  const int grid_n = 1600;
  std::vector<double> grid_q(grid_n), grid_p(grid_n);
  double dt = (t_hi - t_lo) / (grid_n - 1);
  for (int i = 0; i < grid_n; ++i)
    t_integrals_exact(t_lo + i * dt, grid_q[static_cast<size_t>(i)],
                      grid_p[static_cast<size_t>(i)]);
  auto interp = [&](const std::vector<double>& g, double t) {
    double x = (t - t_lo) / dt;
    int i = std::clamp(static_cast<int>(x), 1, grid_n - 3);
    double f = x - i;
    double a0 = g[static_cast<size_t>(i - 1)], a1 = g[static_cast<size_t>(i)];
    double a2 = g[static_cast<size_t>(i + 1)], a3 = g[static_cast<size_t>(i + 2)];
    return a1 + 0.5 * f * (a2 - a0 +
                           f * (2.0 * a0 - 5.0 * a1 + 4.0 * a2 - a3 +
                                f * (3.0 * (a1 - a2) + a3 - a0)));
  };

  double acc_q = 0.0, acc_lse = 0.0;
  foreach_noise_multiset(q, rank - 1, scaled, [&](double sum_exp, double w) {
    double log_s = std::log(sum_exp) + smax;  // log sum_{k != c} e^{s_k}
    double tstar = (log_s - a_hat) / sa;
    acc_q += w * interp(grid_q, tstar);
    acc_lse += w * (log_s + interp(grid_p, tstar));
  });
  out.q_overlap = acc_q;
  out.logsumexp = acc_lse;
  return out;
}

struct Sectors {
  double a = 0.0;  // traceless eigenvalue coefficient: M = a I + b J
  double b = 0.0;
};

// Gaussian U prior: M_U sector map x -> sigma0^2 x / (x sigma0^2 + 1) applied
// to the eigenvalues a and a + R b of A_hat.
Sectors u_side_ansatz(const Sectors& a_hat, int rank, double sigma0sq) {
  auto f = [&](double x) { return sigma0sq * x / (x * sigma0sq + 1.0); };
  double fa = f(a_hat.a);
  double f1 = f(a_hat.a + rank * a_hat.b);
  return {fa, (f1 - fa) / rank};
}

}  // namespace

double onehot_se_overlap(int rank, double a_hat, int quad_order) {
  return vside_moments(rank, a_hat, gauss_hermite(quad_order)).q_overlap;
}

double onehot_se_logsumexp(int rank, double a_hat, int quad_order) {
  return vside_moments(rank, a_hat, gauss_hermite(quad_order)).logsumexp;
}

double onehot_se_accuracy(int rank, double a_hat, int quad_order) {
  if (rank == 1) return 1.0;
  const QuadratureRule& q = gauss_hermite(quad_order);
  double sa = std::sqrt(std::max(a_hat, 0.0));
  return q.expect([&](double t) {
    return std::exp((rank - 1) * normal_logcdf(t + sa));
  });
}

LowRankSeResult se_lowrank(int rank, double delta, const PriorSpec& prior_u,
                           double alpha_b, int num_batches,
                           const LowRankSeOptions& opts) {
  if (rank < 1) throw std::invalid_argument("se_lowrank: rank must be >= 1");
  if (!(delta > 0.0)) throw std::invalid_argument("se_lowrank: delta must be > 0");
  if (prior_u.kind != PriorSpec::Kind::Gaussian || prior_u.mean != 0.0)
    throw std::invalid_argument(
        "se_lowrank: prior_u must be a zero-mean gaussian");
  if (!opts.use_ansatz && rank > 3)
    throw std::invalid_argument("se_lowrank: full-matrix mode is limited to R <= 3");

  const QuadratureRule& q = gauss_hermite(opts.quad_order);
  const double sigma0sq = prior_u.variance;

  LowRankSeResult res;
  Sectors lambda_v{opts.seed_overlap, 0.0};

  for (int k = 0; k < num_batches; ++k) {
    LowRankSeBatch batch;
    // V initialized uniform: m_V = J / R^2
    Sectors m_v{0.0, 1.0 / (rank * rank)};
    Sectors m_u{0.0, 0.0};
    double q_overlap = 1.0 / rank;

    int t = 1;
    for (; t <= opts.t_max; ++t) {
      Sectors a_hat_u{(lambda_v.a + alpha_b * m_v.a) / delta,
                      (lambda_v.b + alpha_b * m_v.b) / delta};
      m_u = u_side_ansatz(a_hat_u, rank, sigma0sq);
      double a_hat_v = m_u.a / delta;
      double q_new = vside_moments(rank, a_hat_v, q).q_overlap;
      Sectors m_v_new;
      if (rank == 1) {
        m_v_new = {0.0, q_new};
      } else {
        m_v_new.a = (q_new * rank - 1.0) / (rank * (rank - 1.0));
        m_v_new.b = (1.0 - q_new) / (rank * (rank - 1.0));
      }
      double diff = std::fabs(m_v_new.a - m_v.a) + std::fabs(m_v_new.b - m_v.b);
      m_v = m_v_new;
      q_overlap = q_new;
      if (diff < opts.tol) break;
    }
    batch.iterations = std::min(t, opts.t_max);

    lambda_v.a += alpha_b * m_v.a;
    lambda_v.b += alpha_b * m_v.b;

    batch.m_u = {m_u.a, m_u.b};
    batch.m_v = {m_v.a, m_v.b};
    batch.lambda_v = {lambda_v.a, lambda_v.b};
    batch.centroid_mse = sigma0sq - m_u.a - m_u.b;
    batch.label_overlap = q_overlap;
    batch.argmax_accuracy =
        onehot_se_accuracy(rank, m_u.a / delta, std::max(opts.quad_order, 61));
    res.batches.push_back(batch);
  }
  return res;
}

// ---- asymptotics -----------------------------------------------------------

double asymptotic_mse_rate(double rho, double alpha_b) {
  if (!(alpha_b > 0.0) || !(rho > 0.0 && rho <= 1.0))
    throw std::domain_error("asymptotic_mse_rate: need alpha_b > 0, rho in (0,1]");
  if (alpha_b >= rho) return -std::numeric_limits<double>::infinity();
  return std::log1p(-alpha_b / rho) / alpha_b;
}

double asymptotic_mse_slr(double rho, double alpha_b, double alpha) {
  if (alpha == 0.0) return rho;  // prefactor E_0
  if (alpha_b >= rho) return 0.0;
  return rho * std::exp(asymptotic_mse_rate(rho, alpha_b) * alpha);
}

}  // namespace samp
