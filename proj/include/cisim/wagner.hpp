#ifndef CISIM_WAGNER_HPP
#define CISIM_WAGNER_HPP

#include <cmath>
#include <cstdint>
#include <optional>

#include "cisim/cis.hpp"
#include "cisim/errors.hpp"
#include "cisim/model.hpp"
#include "cisim/proposal.hpp"
#include "cisim/renewal.hpp"
#include "cisim/rng.hpp"
#include "cisim/weight.hpp"

namespace cisim {

enum class WagnerVariant { WGR1, WGR2 };

struct WagnerConfig {
  WagnerVariant variant = WagnerVariant::WGR2;
  double delta = 1.0;
  double alpha = 0.5;

  RenewalRate rate() const { return RenewalRate(delta, alpha); }
};

namespace detail {

// Reciprocal Mittag-Leffler-type series sum_m delta^m Gamma(alpha)^m
// t^{m alpha} / Gamma(m alpha + 1), truncated at 1e-15 relative.
inline double wgr1_series(double delta, double alpha, double t) {
  double sum = 1.0;
  double log_num = 0.0;
  const double log_dga = std::log(delta) + std::lgamma(alpha);
  for (int m = 1; m < 500; ++m) {
    log_num += log_dga + alpha * std::log(t);
    const double term = std::exp(log_num - std::lgamma(m * alpha + 1.0));
    sum += term;
    if (term < 1e-15 * sum) break;
  }
  return sum;
}

}  // namespace detail

// Probability that the time-point simulation is absorbed at t. WGR1 with
// alpha = 1 reduces to e^{-delta t}; WGR2 uses exp(-delta t^alpha / alpha),
// the survival function of the CIS renewal interarrival.
inline double absorption_prob(const WagnerConfig& cfg, double t) {
  if (t <= 0.0) return 1.0;
  if (cfg.variant == WagnerVariant::WGR1) {
    if (cfg.alpha == 1.0) return std::exp(-cfg.delta * t);
    return 1.0 / detail::wgr1_series(cfg.delta, cfg.alpha, t);
  }
  return std::exp(-cfg.delta * std::pow(t, cfg.alpha) / cfg.alpha);
}

// Backward time kernel q_u(t, s), s in (0, t).
inline double time_kernel(const WagnerConfig& cfg, double t, double s) {
  if (!(s > 0.0 && s < t)) return 0.0;
  if (cfg.variant == WagnerVariant::WGR1) {
    return cfg.delta * std::pow(t - s, cfg.alpha - 1.0) *
           absorption_prob(cfg, t) /
           (absorption_prob(cfg, s) * (1.0 - absorption_prob(cfg, t)));
  }
  return cfg.delta * std::pow(t - s, cfg.alpha - 1.0) *
         absorption_prob(cfg, t - s) / (1.0 - absorption_prob(cfg, t));
}

// One time step: absorbed with probability p_u(t_prev), otherwise the next
// point t_prev - g with g ~ q_u. For both variants p_u(t) equals the
// probability that a renewal interarrival overshoots t, so a single
// uniform drives both the absorption decision and the decrement: draw the
// unconditional interarrival and absorb on overshoot. This makes the WGR2
// time points t - tau_k for the CIS renewal stream with the same uniforms.
inline std::optional<double> sample_time_step(const WagnerConfig& cfg,
                                              double t_prev, RngStream& rng) {
  if (cfg.variant == WagnerVariant::WGR1 && cfg.alpha != 1.0)
    throw ConfigError("WGR1 time-point sampling requires alpha = 1");
  const double g = sample_interarrival(cfg.rate(), rng.uniform());
  if (g > t_prev) return std::nullopt;  // absorbed
  return t_prev - g;
}

struct WgrOutput {
  double estimate = 0.0;
  int point_count = 0;  // simulated time points before absorption
  std::int64_t eval_count = 0;
  bool aborted = false;
};

// Wagner's unbiased transition-density estimator. The reference process is
// the constant-coefficient Gaussian frozen at x0 and the expansion kernel
// C(y, z, v) = (L - L_theta0) ptilde(y, z, v) applies the backward-operator
// difference to the frozen Gaussian in its first argument. Intermediate
// states follow Brownian bridge dynamics pinned at the previous time point.
inline WgrOutput wgr_density_estimate(const DiffusionModel& model,
                                      const Vec& x0, const Vec& x_t, double t,
                                      const WagnerConfig& cfg,
                                      RngStream& rng) {
  WgrOutput out;
  const CoefficientBundle c0 = eval_model(model, x0);
  const ProposalParams params0(c0.b, c0.gamma);
  out.eval_count = 1;

  double weight = 1.0;
  double t_prev = t;
  Vec x_prev = x_t;
  for (;;) {
    const std::optional<double> t_next = sample_time_step(cfg, t_prev, rng);
    if (!t_next) {
      out.estimate = weight *
                     copycat_density(params0, x0, x_prev, t_prev) /
                     absorption_prob(cfg, t_prev);
      return out;
    }
    const double g = t_prev - *t_next;
    BridgeProposal bridge{x_prev, t_prev, params0.gamma()};
    const Vec x_next = bridge.sample(0.0, x0, *t_next, rng);
    // C(x_next, x_prev, g) = (L - L_theta0) ptilde(x_next, x_prev, g),
    // the backward-operator difference applied to the frozen Gaussian
    const double kernel =
        copycat_density(params0, x_next, x_prev, g) *
        backward_difference_ratio(model, params0, x_next, x_prev, g);
    ++out.eval_count;
    weight *= kernel / (bridge.density(0.0, x0, *t_next, x_next) *
                        time_kernel(cfg, t_prev, *t_next) *
                        (1.0 - absorption_prob(cfg, t_prev)));
    t_prev = *t_next;
    x_prev = x_next;
    ++out.point_count;
  }
}

}  // namespace cisim

#endif  // CISIM_WAGNER_HPP
