#include "samp/glm.hpp"

#include <chrono>
#include <cmath>

#include "samp/kernels.hpp"

namespace samp {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

void record_iter(BatchReport& rep, const GlmProblem& pb, const VectorXd& x_hat,
                 bool record_traj) {
  if (pb.x0) rep.mse_per_iteration.push_back(mse_to_truth(x_hat, *pb.x0));
  if (record_traj) rep.trajectory.push_back(x_hat);
}

void finish_batch(BatchReport& rep, const GlmProblem& pb, const VectorXd& x_hat,
                  double v, Clock::time_point t0) {
  if (pb.x0) rep.final_mse = mse_to_truth(x_hat, *pb.x0);
  rep.final_v = v;
  rep.seconds = seconds_since(t0);
}

[[noreturn]] void throw_divergence(const char* engine, int batch,
                                   const VectorXd& last, AmpRunReport report) {
  report.converged_all = false;
  throw DivergenceError(std::string(engine) + ": non-finite state in batch " +
                            std::to_string(batch),
                        last, std::move(report));
}

bool finite_state(const VectorXd& x, double v) {
  return std::isfinite(v) && x.allFinite();
}

// One Gaussian-channel fast-path batch in the streaming scheme.  With an
// all-zero accumulator this is exactly offline AMP.
void run_gaussian_batch(const GlmProblem& pb, StreamAccumulator& acc,
                        const AmpOptions& opts, int t_max, int batch_index,
                        VectorXd& x_hat, VectorXd& sigma_hat,
                        AmpRunReport& report) {
  const Eigen::Index n = pb.n();
  const Eigen::Index m = pb.m();
  const double alpha = pb.alpha();
  const double delta = pb.channel.delta;
  const double lambda_prev = acc.lambda[0];

  auto t0 = Clock::now();
  BatchReport rep;

  // x_hat^{(1)} from the effective prior; z^{(0)} = 0 so the first Onsager
  // term vanishes.
  VectorXd a_eff = VectorXd::Constant(1, lambda_prev);
  kernels::denoise_vec(pb.prior, a_eff, acc.theta, x_hat, sigma_hat);
  double v = kernels::mean(sigma_hat);
  record_iter(rep, pb, x_hat, opts.record_trajectory);

  VectorXd z = VectorXd::Zero(m);
  VectorXd z_prev = VectorXd::Zero(m);
  double a_prev = 0.0;
  double a_cur = 0.0;
  VectorXd b_cur = VectorXd::Zero(n);
  VectorXd phi_x(m), phit_z(n), x_new(n), sig_new(n);

  int t = 1;
  for (; t <= t_max; ++t) {
    kernels::matvec(pb.phi, x_hat, phi_x);
    z = pb.y - phi_x + (a_prev * v / alpha) * z_prev;

    a_cur = alpha / (delta + v);
    kernels::matvec_t(pb.phi, z, phit_z);
    b_cur = a_cur * x_hat + (a_cur / alpha) * phit_z;

    a_eff[0] = lambda_prev + a_cur;
    VectorXd theta_eff = acc.theta + b_cur;
    kernels::denoise_vec(pb.prior, a_eff, theta_eff, x_new, sig_new);
    double v_new = kernels::mean(sig_new);

    if (opts.damping > 0.0 && t > 1) {
      x_new = (1.0 - opts.damping) * x_new + opts.damping * x_hat;
      v_new = (1.0 - opts.damping) * v_new + opts.damping * v;
    }

    double diff = (x_new - x_hat).lpNorm<1>() / static_cast<double>(n);
    x_hat.swap(x_new);
    sigma_hat.swap(sig_new);
    v = v_new;
    z_prev = z;
    a_prev = a_cur;

    if (!finite_state(x_hat, v)) {
      rep.iterations = t;
      report.batches.push_back(std::move(rep));
      throw_divergence("amp", batch_index, x_new, std::move(report));
    }
    record_iter(rep, pb, x_hat, opts.record_trajectory);
    if (diff < opts.tol) {
      ++t;
      break;
    }
  }
  rep.iterations = std::min(t, t_max);

  acc.lambda[0] = lambda_prev + a_cur;
  acc.theta += b_cur;
  acc.batches_processed += 1;
  rep.lambda_after = acc.lambda[0];

  finish_batch(rep, pb, x_hat, v, t0);
  report.batches.push_back(std::move(rep));
}

// One GAMP batch (per-component A and V) with per-coordinate accumulator.
void run_gamp_batch(const GlmProblem& pb, StreamAccumulator& acc,
                    const AmpOptions& opts, int t_max, int batch_index,
                    VectorXd& x_hat, VectorXd& sigma_hat,
                    AmpRunReport& report) {
  const Eigen::Index n = pb.n();
  const Eigen::Index m = pb.m();

  auto t0 = Clock::now();
  BatchReport rep;

  kernels::denoise_vec(pb.prior, acc.lambda, acc.theta, x_hat, sigma_hat);
  record_iter(rep, pb, x_hat, opts.record_trajectory);

  VectorXd g = VectorXd::Zero(m);
  VectorXd dg = VectorXd::Zero(m);
  VectorXd a_cur = VectorXd::Zero(n);
  VectorXd b_cur = VectorXd::Zero(n);
  VectorXd v_mu(m), omega(m), phi_x(m), x_new(n), sig_new(n);

  int t = 1;
  for (; t <= t_max; ++t) {
    kernels::sq_matvec(pb.phi, sigma_hat, v_mu);
    kernels::matvec(pb.phi, x_hat, phi_x);
    omega = phi_x - v_mu.cwiseProduct(g);

    for (Eigen::Index mu = 0; mu < m; ++mu) {
      GoutResult r = channel_gout(pb.channel, pb.y[mu], omega[mu], v_mu[mu]);
      g[mu] = r.g;
      dg[mu] = r.dg;
    }

    kernels::sq_matvec_t(pb.phi, dg, a_cur);
    a_cur = -a_cur;
    kernels::matvec_t(pb.phi, g, b_cur);
    b_cur += a_cur.cwiseProduct(x_hat);

    VectorXd a_eff = acc.lambda + a_cur;
    VectorXd theta_eff = acc.theta + b_cur;
    kernels::denoise_vec(pb.prior, a_eff, theta_eff, x_new, sig_new);

    if (opts.damping > 0.0 && t > 1) {
      x_new = (1.0 - opts.damping) * x_new + opts.damping * x_hat;
      sig_new = (1.0 - opts.damping) * sig_new + opts.damping * sigma_hat;
    }

    double diff = (x_new - x_hat).lpNorm<1>() / static_cast<double>(n);
    x_hat.swap(x_new);
    sigma_hat.swap(sig_new);

    if (!(x_hat.allFinite() && sigma_hat.allFinite())) {
      rep.iterations = t;
      report.batches.push_back(std::move(rep));
      throw_divergence("gamp", batch_index, x_new, std::move(report));
    }
    record_iter(rep, pb, x_hat, opts.record_trajectory);
    if (diff < opts.tol) {
      ++t;
      break;
    }
  }
  rep.iterations = std::min(t, t_max);

  acc.lambda += a_cur;
  acc.theta += b_cur;
  acc.batches_processed += 1;
  rep.lambda_after = kernels::mean(acc.lambda);

  finish_batch(rep, pb, x_hat, kernels::mean(sigma_hat), t0);
  report.batches.push_back(std::move(rep));
}

void check_column_scaling(const GlmProblem& pb) {
  // i.i.d. N(0, 1/N) design: column squared norms should hover around 1.
  if (pb.m() < 32) return;
  double mean_sq = pb.phi.squaredNorm() /
                   static_cast<double>(pb.m() * pb.n()) *
                   static_cast<double>(pb.n());
  if (mean_sq < 0.5 || mean_sq > 2.0) {
    // Not fatal: user-supplied matrices are allowed, but the scalar-variance
    // reduction assumes the 1/N scaling.
    std::fprintf(stderr,
                 "warning: design matrix variance is %.3g/N; the AMP "
                 "fast path assumes entries with variance 1/N\n",
                 mean_sq);
  }
}

}  // namespace

void GlmProblem::validate() const {
  if (phi.rows() != y.size())
    throw std::invalid_argument("GlmProblem: Phi rows and y length differ");
  if (phi.cols() < 1) throw std::invalid_argument("GlmProblem: empty Phi");
  if (x0 && x0->size() != phi.cols())
    throw std::invalid_argument("GlmProblem: x0 length mismatch");
}

double mse_to_truth(const VectorXd& x_hat, const VectorXd& x0) {
  return (x_hat - x0).squaredNorm() / static_cast<double>(x0.size());
}

GlmResult amp_offline_gaussian(const GlmProblem& problem,
                               const AmpOptions& opts) {
  problem.validate();
  if (problem.channel.kind != ChannelSpec::Kind::Gaussian)
    throw std::invalid_argument(
        "amp_offline_gaussian: requires the gaussian channel (use gamp)");
  check_column_scaling(problem);

  GlmResult res;
  res.accumulator = StreamAccumulator::scalar(problem.n());
  run_gaussian_batch(problem, res.accumulator, opts, opts.t_max, 0, res.x_hat,
                     res.sigma_hat, res.report);
  return res;
}

GlmResult gamp(const GlmProblem& problem, const AmpOptions& opts) {
  problem.validate();
  GlmResult res;
  res.accumulator = StreamAccumulator::per_coordinate(problem.n());
  if (problem.m() == 0) {
    // no data: the estimate is the prior mean
    res.x_hat.resize(problem.n());
    res.sigma_hat.resize(problem.n());
    kernels::denoise_vec(problem.prior, res.accumulator.lambda,
                         res.accumulator.theta, res.x_hat, res.sigma_hat);
    BatchReport rep;
    if (problem.x0) rep.final_mse = mse_to_truth(res.x_hat, *problem.x0);
    res.report.batches.push_back(rep);
    return res;
  }
  run_gamp_batch(problem, res.accumulator, opts, opts.t_max, 0, res.x_hat,
                 res.sigma_hat, res.report);
  return res;
}

GlmResult mini_amp(const std::vector<GlmProblem>& batches,
                   const AmpOptions& opts,
                   const std::vector<int>& per_batch_t_max) {
  if (batches.empty()) throw std::invalid_argument("mini_amp: no batches");
  const Eigen::Index n = batches.front().n();
  const bool gaussian =
      batches.front().channel.kind == ChannelSpec::Kind::Gaussian &&
      !opts.force_gamp;
  for (const auto& b : batches) {
    b.validate();
    if (b.n() != n) throw std::invalid_argument("mini_amp: N differs across batches");
  }

  GlmResult res;
  res.accumulator = gaussian ? StreamAccumulator::scalar(n)
                             : StreamAccumulator::per_coordinate(n);
  for (size_t k = 0; k < batches.size(); ++k) {
    int t_max = k < per_batch_t_max.size() ? per_batch_t_max[k] : opts.t_max;
    if (gaussian) {
      run_gaussian_batch(batches[k], res.accumulator, opts, t_max,
                         static_cast<int>(k), res.x_hat, res.sigma_hat,
                         res.report);
    } else {
      run_gamp_batch(batches[k], res.accumulator, opts, t_max,
                     static_cast<int>(k), res.x_hat, res.sigma_hat,
                     res.report);
    }
  }
  return res;
}

GlmResult adf(const GlmProblem& samples, const AmpOptions& opts) {
  samples.validate();
  const Eigen::Index n = samples.n();
  const Eigen::Index m = samples.m();
  (void)opts;

  GlmResult res;
  res.accumulator = StreamAccumulator::per_coordinate(n);
  VectorXd& lambda = res.accumulator.lambda;
  VectorXd& theta = res.accumulator.theta;

  res.x_hat.resize(n);
  res.sigma_hat.resize(n);
  kernels::denoise_vec(samples.prior, lambda, theta, res.x_hat, res.sigma_hat);

  auto t0 = Clock::now();
  BatchReport rep;
  VectorXd a_k(n), b_k(n), a_eff(n), theta_eff(n);
  for (Eigen::Index k = 0; k < m; ++k) {
    auto row = samples.phi.row(k);
    double omega = row.dot(res.x_hat);
    double v = row.cwiseAbs2().dot(res.sigma_hat);
    if (v <= 0.0) {
      // zero-information sample (e.g. an all-zero row): state unchanged
      if (samples.x0) rep.mse_per_iteration.push_back(
          mse_to_truth(res.x_hat, *samples.x0));
      continue;
    }
    GoutResult r = channel_gout(samples.channel, samples.y[k], omega, v);
    a_k = -r.dg * row.cwiseAbs2().transpose();
    b_k = r.g * row.transpose() + a_k.cwiseProduct(res.x_hat);
    a_eff = lambda + a_k;
    theta_eff = theta + b_k;
    kernels::denoise_vec(samples.prior, a_eff, theta_eff, res.x_hat,
                         res.sigma_hat);
    if (!res.x_hat.allFinite()) {
      res.report.batches.push_back(std::move(rep));
      throw_divergence("adf", static_cast<int>(k), res.x_hat,
                       std::move(res.report));
    }
    lambda += a_k;
    theta += b_k;
    res.accumulator.batches_processed += 1;
    if (samples.x0)
      rep.mse_per_iteration.push_back(mse_to_truth(res.x_hat, *samples.x0));
  }
  rep.iterations = static_cast<int>(m);
  finish_batch(rep, samples, res.x_hat, kernels::mean(res.sigma_hat), t0);
  res.report.batches.push_back(std::move(rep));
  return res;
}

namespace {

// One VB pass over all coordinates; Gauss-Seidel unless jacobi is set.
// r is the residual y - Phi x_hat, updated in place on sequential sweeps.
double vb_sweep(const GlmProblem& pb, const StreamAccumulator& acc,
                double delta, const VectorXd& col_sq, bool jacobi,
                VectorXd& x_hat, VectorXd& sigma_hat, VectorXd& r) {
  const Eigen::Index n = pb.n();
  double diff = 0.0;
  if (jacobi) {
    VectorXd x_old = x_hat;
    for (Eigen::Index i = 0; i < n; ++i) {
      double a = col_sq[i] / delta;
      double b = (pb.phi.col(i).dot(r) + col_sq[i] * x_old[i]) / delta;
      double a_eff = (acc.lambda.size() == 1 ? acc.lambda[0] : acc.lambda[i]) + a;
      DenoiserOutput d = prior_denoise(pb.prior, a_eff, acc.theta[i] + b);
      diff += std::fabs(d.mean - x_old[i]);
      x_hat[i] = d.mean;
      sigma_hat[i] = d.variance;
    }
    r = pb.y - pb.phi * x_hat;
  } else {
    for (Eigen::Index i = 0; i < n; ++i) {
      double a = col_sq[i] / delta;
      double b = (pb.phi.col(i).dot(r) + col_sq[i] * x_hat[i]) / delta;
      double a_eff = (acc.lambda.size() == 1 ? acc.lambda[0] : acc.lambda[i]) + a;
      DenoiserOutput d = prior_denoise(pb.prior, a_eff, acc.theta[i] + b);
      double delta_x = d.mean - x_hat[i];
      diff += std::fabs(delta_x);
      if (delta_x != 0.0) r -= delta_x * pb.phi.col(i);
      x_hat[i] = d.mean;
      sigma_hat[i] = d.variance;
    }
  }
  return diff / static_cast<double>(n);
}

void run_vb_batch(const GlmProblem& pb, StreamAccumulator& acc,
                  const VbOptions& opts, int batch_index, double& delta,
                  VectorXd& x_hat, VectorXd& sigma_hat, AmpRunReport& report) {
  const Eigen::Index n = pb.n();
  auto t0 = Clock::now();
  BatchReport rep;

  kernels::denoise_vec(pb.prior, acc.lambda, acc.theta, x_hat, sigma_hat);
  VectorXd col_sq(n);
  for (Eigen::Index i = 0; i < n; ++i) col_sq[i] = pb.phi.col(i).squaredNorm();
  VectorXd r = pb.y - pb.phi * x_hat;

  int t = 1;
  for (; t <= opts.t_max; ++t) {
    double diff =
        vb_sweep(pb, acc, delta, col_sq, opts.jacobi_sweep, x_hat, sigma_hat, r);
    if (!x_hat.allFinite()) {
      rep.iterations = t;
      report.batches.push_back(std::move(rep));
      throw_divergence("vb", batch_index, x_hat, std::move(report));
    }
    if (pb.x0) rep.mse_per_iteration.push_back(mse_to_truth(x_hat, *pb.x0));
    if (diff < opts.tol) break;
  }
  rep.iterations = std::min(t, opts.t_max);

  // accumulate the batch's natural parameters
  const double a_scale = 1.0 / delta;
  VectorXd a_batch = col_sq * a_scale;
  VectorXd b_batch(n);
  for (Eigen::Index i = 0; i < n; ++i)
    b_batch[i] = (pb.phi.col(i).dot(r) + col_sq[i] * x_hat[i]) * a_scale;
  acc.lambda += a_batch;
  acc.theta += b_batch;
  acc.batches_processed += 1;

  if (opts.learn_noise) {
    VectorXd resid = pb.y - pb.phi * x_hat;
    delta = std::max(resid.squaredNorm() / static_cast<double>(pb.m()), 1e-12);
  }

  finish_batch(rep, pb, x_hat, kernels::mean(sigma_hat), t0);
  report.batches.push_back(std::move(rep));
}

}  // namespace

GlmResult vb_mean_field(const GlmProblem& problem, const VbOptions& opts) {
  return vb_mean_field_stream({problem}, opts);
}

GlmResult vb_mean_field_stream(const std::vector<GlmProblem>& batches,
                               const VbOptions& opts) {
  if (batches.empty()) throw std::invalid_argument("vb: no batches");
  if (batches.front().channel.kind != ChannelSpec::Kind::Gaussian)
    throw std::invalid_argument("vb_mean_field: gaussian channel only");
  const Eigen::Index n = batches.front().n();

  GlmResult res;
  res.accumulator = StreamAccumulator::per_coordinate(n);
  double delta =
      opts.delta_init > 0.0 ? opts.delta_init : batches.front().channel.delta;
  delta = std::max(delta, 1e-12);
  for (size_t k = 0; k < batches.size(); ++k) {
    batches[k].validate();
    run_vb_batch(batches[k], res.accumulator, opts, static_cast<int>(k), delta,
                 res.x_hat, res.sigma_hat, res.report);
  }
  return res;
}

}  // namespace samp
