#ifndef SAMP_DETAIL_PANELS_HPP
#define SAMP_DETAIL_PANELS_HPP

// Panel-based one-dimensional integration against a centered Gaussian
// density.  Integrands produced by the denoiser/channel expectations are
// even with features whose location and width are known analytically; panels
// are placed so every piece is smooth, which keeps fixed-order
// Gauss-Legendre near machine accuracy at any precision scale.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "samp/special.hpp"

namespace samp::detail {

struct LegendreRule {
  Eigen::VectorXd x, w;
  explicit LegendreRule(int n) {
    Eigen::MatrixXd j = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k) {
      double b = k / std::sqrt(4.0 * k * k - 1.0);
      j(k, k - 1) = b;
      j(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(j);
    x = es.eigenvalues();
    w.resize(n);
    for (int i = 0; i < n; ++i) w[i] = 2.0 * sq(es.eigenvectors()(0, i));
  }
};

inline const LegendreRule& legendre48() {
  static const LegendreRule rule(48);
  return rule;
}

inline const LegendreRule& legendre16() {
  static const LegendreRule rule(16);
  return rule;
}

// 2 * int_0^inf f(b) N(b; 0, sb^2) db for even f; breakpoints are sorted,
// deduplicated and clipped to [0, tail].
template <typename F>
double half_gaussian_integral(double sb, std::vector<double> bps, double tail,
                              F&& f) {
  if (sb == 0.0) return f(0.0);
  bps.push_back(0.0);
  bps.push_back(tail);
  for (double& b : bps) b = std::clamp(b, 0.0, tail);
  std::sort(bps.begin(), bps.end());
  bps.erase(std::unique(bps.begin(), bps.end(),
                        [&](double a, double b) { return b - a < 1e-14 * tail; }),
            bps.end());
  const LegendreRule& gl = legendre48();
  const double inv_sb = 1.0 / sb;
  double acc = 0.0;
  for (size_t p = 0; p + 1 < bps.size(); ++p) {
    double mid = 0.5 * (bps[p] + bps[p + 1]);
    double half = 0.5 * (bps[p + 1] - bps[p]);
    if (half <= 0.0) continue;
    double panel = 0.0;
    for (int i = 0; i < gl.x.size(); ++i) {
      double b = mid + half * gl.x[i];
      panel += gl.w[i] * f(b) * normal_pdf(b * inv_sb);
    }
    acc += panel * half * inv_sb;
  }
  return 2.0 * acc;
}

// Breakpoints covering the Gaussian bulk of scale sb plus, when bstar > 0, a
// feature at bstar of half-width wf.
inline std::vector<double> gaussian_feature_breakpoints(double sb, double bstar,
                                                        double wf,
                                                        double& tail) {
  std::vector<double> bps;
  for (double r : {0.25, 0.5, 1.0, 1.5, 2.0, 3.0, 4.5, 6.0, 8.0, 10.0, 12.0})
    bps.push_back(r * sb);
  tail = 14.0 * sb;
  if (bstar > 0.0) {
    for (double r : {-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0}) {
      double b = bstar + r * wf;
      if (b > 0.0) bps.push_back(b);
    }
    bps.push_back(0.5 * bstar);
    bps.push_back(2.0 * bstar);
    tail = std::max(tail, bstar + 12.0 * wf);
  }
  return bps;
}

}  // namespace samp::detail

#endif  // SAMP_DETAIL_PANELS_HPP
