#ifndef SAMP_CHANNELS_HPP
#define SAMP_CHANNELS_HPP

#include <cmath>
#include <stdexcept>
#include <string>

#include "samp/special.hpp"

// Output channels for generalized linear models.  channel_gout returns the
// output function g_out(y, w, V) = d/dw log Z_z(y, w, V) together with its
// w-derivative, where Z_z(y, w, V) = int P(y|z) N(z; w, V) dz.

namespace samp {

struct ChannelSpec {
  enum class Kind {
    Gaussian,  // P(y|z) = N(y; z, delta)
    Probit     // P(y=+-1|z) = Phi(y z / sqrt(delta)); delta -> 0 is the sign channel
  };

  Kind kind = Kind::Gaussian;
  double delta = 1.0;   // assumed noise variance (>= 0)
  double delta0 = 1.0;  // ground-truth noise variance used for generation

  static ChannelSpec gaussian(double delta, double delta0_ = -1.0) {
    if (!(delta >= 0.0))
      throw std::domain_error("gaussian channel: delta must be >= 0");
    ChannelSpec c;
    c.kind = Kind::Gaussian;
    c.delta = delta;
    c.delta0 = delta0_ < 0.0 ? delta : delta0_;
    return c;
  }
  static ChannelSpec probit(double delta, double delta0_ = -1.0) {
    if (!(delta >= 0.0))
      throw std::domain_error("probit channel: delta must be >= 0");
    ChannelSpec c;
    c.kind = Kind::Probit;
    c.delta = delta;
    c.delta0 = delta0_ < 0.0 ? delta : delta0_;
    return c;
  }

  bool bayes_optimal() const { return delta == delta0; }

  // Differential entropy of the Gaussian likelihood, 0.5 log(2 pi e delta).
  double entropy() const {
    if (kind != Kind::Gaussian)
      throw std::domain_error("entropy: defined for the gaussian channel only");
    if (!(delta > 0.0))
      throw std::domain_error("entropy: requires delta > 0");
    return 0.5 * (kLog2Pi + 1.0 + std::log(delta));
  }

  std::string name() const {
    return kind == Kind::Gaussian ? "gaussian" : "probit";
  }
};

struct GoutResult {
  double g = 0.0;   // g_out(y, w, V)
  double dg = 0.0;  // d/dw g_out, always <= 0 for these channels
};

inline GoutResult channel_gout(const ChannelSpec& c, double y, double w,
                               double V) {
  if (!all_finite(y, w, V))
    throw std::domain_error("channel_gout: non-finite input");
  double dv = c.delta + V;
  if (!(dv > 0.0)) throw std::domain_error("channel_gout: delta + V <= 0");
  GoutResult r;
  switch (c.kind) {
    case ChannelSpec::Kind::Gaussian: {
      r.g = (y - w) / dv;
      r.dg = -1.0 / dv;
      return r;
    }
    case ChannelSpec::Kind::Probit: {
      double sv = std::sqrt(dv);
      double u = y * w / sv;
      // g = y h(u) / sv with h the lower Mills ratio phi/Phi; the derivative
      // needs u + h(u), which cancels catastrophically for u << 0 and is
      // taken from the continued fraction instead.
      double h = normal_hazard(-u);
      double uph = (u <= -4.0) ? normal_hazard_minus_x(-u) : (u + h);
      r.g = y * h / sv;
      r.dg = -h * uph / dv;
      return r;
    }
  }
  throw std::logic_error("channel_gout: unknown channel kind");
}

// log Z_z(y, w, V) = log int P(y|z) N(z; w, V) dz.
inline double channel_log_partition(const ChannelSpec& c, double y, double w,
                                    double V) {
  if (!all_finite(y, w, V))
    throw std::domain_error("channel_log_partition: non-finite input");
  double dv = c.delta + V;
  if (!(dv > 0.0))
    throw std::domain_error("channel_log_partition: delta + V <= 0");
  switch (c.kind) {
    case ChannelSpec::Kind::Gaussian:
      return -0.5 * sq(y - w) / dv - 0.5 * std::log(2.0 * kPi * dv);
    case ChannelSpec::Kind::Probit:
      return normal_logcdf(y * w / std::sqrt(dv));
  }
  throw std::logic_error("channel_log_partition: unknown channel kind");
}

}  // namespace samp

#endif  // SAMP_CHANNELS_HPP
