#ifndef SAMP_KERNELS_HPP
#define SAMP_KERNELS_HPP

#include <Eigen/Dense>
#include <vector>

#include "samp/priors.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

// Data-parallel inner kernels of the message-passing engines.  Each kernel
// has a serial reference implementation (kernels::serial) kept for testing
// and benchmarking; the OpenMP versions parallelize over independent output
// elements only, so results are bitwise identical to the serial ones for any
// thread count.  Reductions go through block_sum, which always accumulates
// fixed-size blocks in index order.

namespace samp::kernels {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr int kBlock = 4096;

// The serial namespace holds reference implementations: the exact same
// per-element computations as the parallel kernels, minus the pragma, so the
// two must agree bit for bit.
namespace serial {

// out_mu = sum_i Phi(mu, i) x_i
inline void matvec(const MatrixXd& phi, const VectorXd& x, VectorXd& out) {
  const Eigen::Index m = phi.rows();
  out.resize(m);
  for (Eigen::Index mu = 0; mu < m; ++mu) out[mu] = phi.row(mu).dot(x);
}

// out_i = sum_mu Phi(mu, i) g_mu
inline void matvec_t(const MatrixXd& phi, const VectorXd& g, VectorXd& out) {
  const Eigen::Index n = phi.cols();
  out.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) out[i] = phi.col(i).dot(g);
}

// out_mu = sum_i Phi(mu, i)^2 v_i
inline void sq_matvec(const MatrixXd& phi, const VectorXd& v, VectorXd& out) {
  const Eigen::Index m = phi.rows();
  out.resize(m);
  for (Eigen::Index mu = 0; mu < m; ++mu)
    out[mu] = phi.row(mu).cwiseAbs2().dot(v);
}

// out_i = sum_mu Phi(mu, i)^2 w_mu
inline void sq_matvec_t(const MatrixXd& phi, const VectorXd& w, VectorXd& out) {
  const Eigen::Index n = phi.cols();
  out.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    out[i] = phi.col(i).cwiseAbs2().dot(w);
}

inline void denoise_vec(const PriorSpec& prior, const VectorXd& a,
                        const VectorXd& b, VectorXd& mean, VectorXd& var) {
  const Eigen::Index n = b.size();
  mean.resize(n);
  var.resize(n);
  const bool scalar_a = a.size() == 1;
  for (Eigen::Index i = 0; i < n; ++i) {
    double ai = scalar_a ? a[0] : a[i];
    if (std::isfinite(ai) && std::isfinite(b[i]) && ai >= 0.0) {
      DenoiserOutput d = prior_denoise(prior, ai, b[i]);
      mean[i] = d.mean;
      var[i] = d.variance;
    } else {
      mean[i] = std::numeric_limits<double>::quiet_NaN();
      var[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }
}

inline double block_sum(const double* x, Eigen::Index n) {
  double total = 0.0;
  for (Eigen::Index b = 0; b < n; b += kBlock) {
    double part = 0.0;
    Eigen::Index end = std::min<Eigen::Index>(b + kBlock, n);
    for (Eigen::Index i = b; i < end; ++i) part += x[i];
    total += part;
  }
  return total;
}

}  // namespace serial

inline void matvec(const MatrixXd& phi, const VectorXd& x, VectorXd& out) {
  const Eigen::Index m = phi.rows();
  out.resize(m);
#pragma omp parallel for schedule(static) if (m >= 64)
  for (Eigen::Index mu = 0; mu < m; ++mu) out[mu] = phi.row(mu).dot(x);
}

inline void matvec_t(const MatrixXd& phi, const VectorXd& g, VectorXd& out) {
  const Eigen::Index n = phi.cols();
  out.resize(n);
#pragma omp parallel for schedule(static) if (n >= 64)
  for (Eigen::Index i = 0; i < n; ++i) out[i] = phi.col(i).dot(g);
}

inline void sq_matvec(const MatrixXd& phi, const VectorXd& v, VectorXd& out) {
  const Eigen::Index m = phi.rows();
  out.resize(m);
#pragma omp parallel for schedule(static) if (m >= 64)
  for (Eigen::Index mu = 0; mu < m; ++mu)
    out[mu] = phi.row(mu).cwiseAbs2().dot(v);
}

inline void sq_matvec_t(const MatrixXd& phi, const VectorXd& w, VectorXd& out) {
  const Eigen::Index n = phi.cols();
  out.resize(n);
#pragma omp parallel for schedule(static) if (n >= 64)
  for (Eigen::Index i = 0; i < n; ++i)
    out[i] = phi.col(i).cwiseAbs2().dot(w);
}

// Componentwise denoiser sweep; a is either one shared A (size 1) or
// per-coordinate.  A non-finite input becomes a NaN output rather than an
// exception (nothing may unwind through the omp region); the engines treat
// NaN state as divergence.
inline void denoise_vec(const PriorSpec& prior, const VectorXd& a,
                        const VectorXd& b, VectorXd& mean, VectorXd& var) {
  const Eigen::Index n = b.size();
  mean.resize(n);
  var.resize(n);
  const bool scalar_a = a.size() == 1;
#pragma omp parallel for schedule(static) if (n >= 256)
  for (Eigen::Index i = 0; i < n; ++i) {
    double ai = scalar_a ? a[0] : a[i];
    if (std::isfinite(ai) && std::isfinite(b[i]) && ai >= 0.0) {
      DenoiserOutput d = prior_denoise(prior, ai, b[i]);
      mean[i] = d.mean;
      var[i] = d.variance;
    } else {
      mean[i] = std::numeric_limits<double>::quiet_NaN();
      var[i] = std::numeric_limits<double>::quiet_NaN();
    }
  }
}

// Deterministic sum: fixed blocks are reduced independently (possibly in
// parallel) and combined in index order, so the value does not depend on the
// number of threads.
inline double block_sum(const double* x, Eigen::Index n) {
  const Eigen::Index nblocks = (n + kBlock - 1) / kBlock;
  if (nblocks <= 1) return serial::block_sum(x, n);
  std::vector<double> parts(static_cast<size_t>(nblocks), 0.0);
#pragma omp parallel for schedule(static)
  for (Eigen::Index b = 0; b < nblocks; ++b) {
    double part = 0.0;
    Eigen::Index begin = b * kBlock;
    Eigen::Index end = std::min<Eigen::Index>(begin + kBlock, n);
    for (Eigen::Index i = begin; i < end; ++i) part += x[i];
    parts[static_cast<size_t>(b)] = part;
  }
  double total = 0.0;
  for (double p : parts) total += p;
  return total;
}

inline double block_sum(const VectorXd& x) { return block_sum(x.data(), x.size()); }

inline double mean(const VectorXd& x) {
  return x.size() ? block_sum(x) / static_cast<double>(x.size()) : 0.0;
}

}  // namespace samp::kernels

#endif  // SAMP_KERNELS_HPP
