#ifndef SAMP_QUADRATURE_HPP
#define SAMP_QUADRATURE_HPP

#include <Eigen/Dense>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <vector>

#include "samp/priors.hpp"

// Gauss-Hermite quadrature in the probabilists' normalization: the rule
// integrates f against the standard normal density, sum_i w_i f(x_i) with
// sum w_i = 1.  Rules are built once per order (Golub-Welsch on the Jacobi
// matrix) and cached.

namespace samp {

struct QuadratureRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;

  int order() const { return static_cast<int>(nodes.size()); }

  template <typename F>
  double expect(F&& f) const {
    double acc = 0.0;
    for (int i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
    return acc;
  }
};

namespace detail {

inline QuadratureRule build_gauss_hermite(int n) {
  if (n < 1) throw std::invalid_argument("gauss_hermite: order must be >= 1");
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    double b = std::sqrt(static_cast<double>(k));  // probabilists' recurrence
    J(k, k - 1) = b;
    J(k - 1, k) = b;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
  QuadratureRule rule;
  rule.nodes = es.eigenvalues();
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) rule.weights[i] = sq(es.eigenvectors()(0, i));
  rule.weights /= rule.weights.sum();
  return rule;
}

}  // namespace detail

inline const QuadratureRule& gauss_hermite(int n) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<QuadratureRule>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it == cache.end()) {
    it = cache.emplace(n, std::make_unique<QuadratureRule>(
                              detail::build_gauss_hermite(n))).first;
  }
  return *it->second;
}

// Visit the joint (x, b) grid of E_{x ~ prior, z ~ N(0,1)} with
// b = lambda * x + sqrt(gamma) * z; calls visit(x, b, weight) with weights
// summing to 1.  The x-average uses the prior's exact mixture structure
// (atom + component, two-point sum, folded normal), the Gaussian parts use
// the tensor rule.
template <typename F>
void prior_field_visit(const PriorSpec& p, double lambda, double gamma,
                       F&& visit, const QuadratureRule& q) {
  double sg = std::sqrt(std::max(gamma, 0.0));
  auto field_sweep = [&](double x, double wx) {
    if (wx == 0.0) return;
    if (sg == 0.0) {
      visit(x, lambda * x, wx);
      return;
    }
    for (int j = 0; j < q.nodes.size(); ++j)
      visit(x, lambda * x + sg * q.nodes[j], wx * q.weights[j]);
  };
  switch (p.kind) {
    case PriorSpec::Kind::GaussBernoulli: {
      field_sweep(0.0, 1.0 - p.rho);
      for (int i = 0; i < q.nodes.size(); ++i)
        field_sweep(q.nodes[i], p.rho * q.weights[i]);
      return;
    }
    case PriorSpec::Kind::Rademacher:
      field_sweep(1.0, 0.5);
      field_sweep(-1.0, 0.5);
      return;
    case PriorSpec::Kind::Gaussian: {
      double sx = std::sqrt(p.variance);
      for (int i = 0; i < q.nodes.size(); ++i)
        field_sweep(p.mean + sx * q.nodes[i], q.weights[i]);
      return;
    }
    case PriorSpec::Kind::TruncatedNonnegGaussian: {
      // x = sigma |g| with g standard normal
      double sx = std::sqrt(p.sigma2);
      for (int i = 0; i < q.nodes.size(); ++i)
        field_sweep(sx * std::fabs(q.nodes[i]), q.weights[i]);
      return;
    }
  }
  throw std::logic_error("prior_field_visit: unknown prior kind");
}

// E_{x ~ prior, z ~ N(0,1)} f(x, lambda * x + sqrt(gamma) * z).
template <typename F>
double prior_field_expect(const PriorSpec& p, double lambda, double gamma,
                          F&& f, const QuadratureRule& q) {
  double acc = 0.0;
  prior_field_visit(
      p, lambda, gamma, [&](double x, double b, double w) { acc += w * f(x, b); },
      q);
  return acc;
}

}  // namespace samp

#endif  // SAMP_QUADRATURE_HPP
