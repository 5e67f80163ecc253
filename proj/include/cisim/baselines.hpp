#ifndef CISIM_BASELINES_HPP
#define CISIM_BASELINES_HPP

#include <cmath>
#include <functional>
#include <utility>

#include "cisim/model.hpp"
#include "cisim/proposal.hpp"
#include "cisim/rng.hpp"

namespace cisim {

// Euler-Maruyama: X_{i+1} = X_i + h b(X_i) + sqrt(h) sigma(X_i) Z.
inline Vec euler_simulate(const DiffusionModel& model, const Vec& x0, double T,
                          int m_steps, RngStream& rng) {
  const double h = T / m_steps;
  Vec x = x0;
  for (int i = 0; i < m_steps; ++i) {
    model.require_in_domain(x);
    const Vec b = model.drift(x);
    const Mat s = model.diffusion(x);
    Vec z(model.dim);
    for (int k = 0; k < model.dim; ++k) z[k] = rng.normal();
    x = x + h * b + std::sqrt(h) * (s * z);
  }
  model.require_in_domain(x);
  return x;
}

// One Durham-Gallant replicate: impute x at the interior grid points from
// the modified Brownian bridge pinned at x_T, then form the ratio of
// one-step Euler (copycat) densities to bridge densities. The bridge scale
// is gamma at the running imputed point by default; fixed_anchor_scale
// freezes it at gamma(x0) for ablation.
inline double dg_density_replicate(const DiffusionModel& model, const Vec& x0,
                                   const Vec& x_T, double T, int m_steps,
                                   RngStream& rng,
                                   bool fixed_anchor_scale = false) {
  const double h = T / m_steps;
  Vec x = x0;
  const Mat gamma0 = model.gamma(x0);
  double log_w = 0.0;
  for (int i = 0; i < m_steps - 1; ++i) {
    model.require_in_domain(x);
    const CoefficientBundle c = eval_model(model, x);
    const ProposalParams q(c.b, c.gamma);
    BridgeProposal bridge{x_T, T, fixed_anchor_scale ? gamma0 : c.gamma};
    const double t_here = i * h;
    const Vec x_next = bridge.sample(t_here, x, t_here + h, rng);
    log_w += log_copycat_density(q, x, x_next, h) -
             bridge.log_density(t_here, x, t_here + h, x_next);
    x = x_next;
  }
  model.require_in_domain(x);
  const CoefficientBundle c = eval_model(model, x);
  const ProposalParams q(c.b, c.gamma);
  log_w += log_copycat_density(q, x, x_T, h);
  return std::exp(log_w);
}

// Exact target transition density (x, y, t) -> p, available only for the
// models the discrete-time SIS baseline applies to.
using TransitionDensity =
    std::function<double(const Vec&, const Vec&, double)>;

inline TransitionDensity ou1d_transition_density(double rho, double mu,
                                                 double sigma) {
  return [rho, mu, sigma](const Vec& x, const Vec& y, double t) {
    const double mean = mu + (x[0] - mu) * std::exp(-rho * t);
    const double var =
        sigma * sigma * (1.0 - std::exp(-2.0 * rho * t)) / (2.0 * rho);
    const double r = y[0] - mean;
    return std::exp(-0.5 * r * r / var) / std::sqrt(2.0 * M_PI * var);
  };
}

inline TransitionDensity constant_coeff_transition_density(const Vec& b0,
                                                           const Mat& sigma0) {
  const ProposalParams q(b0, sigma0 * sigma0.transpose());
  return [q](const Vec& x, const Vec& y, double t) {
    return copycat_density(q, x, y, t);
  };
}

// Discrete-time sequential importance sampler with exact-density weights:
// per step the copycat Gaussian proposes, and the weight picks up the
// exact ratio p/q. Unbiased for any number of steps.
inline std::pair<Vec, double> sis_known_density(
    const TransitionDensity& target_density, const DiffusionModel& model,
    const Vec& x0, double T, int m_steps, RngStream& rng) {
  const double h = T / m_steps;
  Vec x = x0;
  double w = 1.0;
  for (int i = 0; i < m_steps; ++i) {
    const CoefficientBundle c = eval_model(model, x);
    const ProposalParams q(c.b, c.gamma);
    const Vec y = copycat_sample(q, x, h, rng);
    w *= target_density(x, y, h) / copycat_density(q, x, y, h);
    x = y;
  }
  return {x, w};
}

}  // namespace cisim

#endif  // CISIM_BASELINES_HPP
