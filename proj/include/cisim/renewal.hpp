#ifndef CISIM_RENEWAL_HPP
#define CISIM_RENEWAL_HPP

#include <cmath>

#include "cisim/errors.hpp"

namespace cisim {

// Event intensity lambda(s) = delta * s^(alpha-1), s being the time since
// the last event. alpha < 1 concentrates events right after each jump,
// which tames the incremental-weight variance; alpha = 1 gives a constant
// rate (needed for the constant-rate ablation and WGR1) but offers no such
// protection.
struct RenewalRate {
  double delta;
  double alpha;

  RenewalRate(double delta_, double alpha_) : delta(delta_), alpha(alpha_) {
    if (!(delta > 0.0)) throw ConfigError("RenewalRate: delta must be > 0");
    if (!(alpha > 0.0 && alpha <= 1.0))
      throw ConfigError("RenewalRate: alpha must be in (0, 1]");
  }

  double operator()(double s) const {
    if (alpha == 1.0) return delta;
    return delta * std::pow(s, alpha - 1.0);
  }
};

// Inverse-transform interarrival sampler: the integrated rate over (0,s]
// is delta*s^alpha/alpha, so tau = (-alpha*log(u)/delta)^(1/alpha).
inline double sample_interarrival(const RenewalRate& rate, double u) {
  return std::pow(-rate.alpha * std::log(u) / rate.delta, 1.0 / rate.alpha);
}

// P(tau <= s) = 1 - exp(-delta*s^alpha/alpha).
inline double interarrival_cdf(const RenewalRate& rate, double s) {
  if (s <= 0.0) return 0.0;
  return -std::expm1(-rate.delta * std::pow(s, rate.alpha) / rate.alpha);
}

inline double interarrival_pdf(const RenewalRate& rate, double s) {
  if (s <= 0.0) return 0.0;
  return rate(s) *
         std::exp(-rate.delta * std::pow(s, rate.alpha) / rate.alpha);
}

}  // namespace cisim

#endif  // CISIM_RENEWAL_HPP
