#ifndef CISIM_RESAMPLING_HPP
#define CISIM_RESAMPLING_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "cisim/cis.hpp"
#include "cisim/errors.hpp"

namespace cisim {

// (sum |w|)^2 / sum w^2, as printed in the resampling algorithms. Invariant
// under global sign flips and positive scaling; lies in [1, N].
inline double ess(const std::vector<double>& weights) {
  double abs_sum = 0.0, sq_sum = 0.0;
  for (double w : weights) {
    abs_sum += std::abs(w);
    sq_sum += w * w;
  }
  if (sq_sum == 0.0)
    throw AllZeroWeights("all particle weights are zero");
  return abs_sum * abs_sum / sq_sum;
}

// N particles propagated between the uniform checkpoints t_j = jT/M. Each
// particle owns its RNG stream so that, with resampling disabled, the
// system is bitwise identical to N independent plain CIS runs.
struct ParticleSystem {
  std::vector<CisState> particles;
  std::vector<RngStream> streams;
  double horizon = 0.0;
  int n_checkpoints = 0;  // M
  double ess_threshold = 0.0;
  std::int64_t resample_eval_count = 0;  // density evaluations in R2 steps
  int resample_count = 0;

  double checkpoint(int j) const { return horizon * j / n_checkpoints; }

  std::vector<double> weights() const {
    std::vector<double> w(particles.size());
    for (std::size_t i = 0; i < particles.size(); ++i)
      w[i] = particles[i].weight;
    return w;
  }

  std::int64_t total_eval_count() const {
    std::int64_t n = resample_eval_count;
    for (const CisState& p : particles) n += p.eval_count;
    return n;
  }
};

inline ParticleSystem make_particle_system(const DiffusionModel& model,
                                           const Vec& x0, double T, int n,
                                           int m, double ess_threshold,
                                           std::uint64_t seed,
                                           std::uint64_t stream_offset = 0) {
  ParticleSystem ps;
  ps.horizon = T;
  ps.n_checkpoints = m;
  ps.ess_threshold = ess_threshold;
  ps.particles.reserve(n);
  ps.streams.reserve(n);
  for (int i = 0; i < n; ++i) {
    ps.particles.push_back(
        init_cis_state(model, x0, AdaptationPolicy::FullCopycat));
    ps.streams.emplace_back(seed, stream_offset + static_cast<std::uint64_t>(i));
  }
  return ps;
}

// Signed mixture density p_hat_j(y) = (1/N) sum_i w_i q(x_i, y, t_j - s_i),
// the unbiased density estimate the particle system carries at time t_j.
inline double mixture_density_hat(const ParticleSystem& ps, int j,
                                  const Vec& y) {
  const double t_j = ps.checkpoint(j);
  double sum = 0.0;
  for (const CisState& p : ps.particles)
    sum += p.weight *
           copycat_density(p.params, p.anchor, y, t_j - p.event_time);
  return sum / static_cast<double>(ps.particles.size());
}

// Nonnegative mixture p_bar_j(y) = a_j^{-1} sum |w_i| q(x_i, y, t_j - s_i);
// integrates to one and is the resampling proposal of the marginal scheme.
inline double mixture_density_bar(const ParticleSystem& ps, int j,
                                  const Vec& y) {
  const double t_j = ps.checkpoint(j);
  double abs_sum = 0.0, sum = 0.0;
  for (const CisState& p : ps.particles) {
    abs_sum += std::abs(p.weight);
    sum += std::abs(p.weight) *
           copycat_density(p.params, p.anchor, y, t_j - p.event_time);
  }
  return sum / abs_sum;
}

// Draw y ~ p_bar_j: pick a component with probability proportional to |w|,
// then a Gaussian draw from that component.
inline Vec sample_mixture_bar(const ParticleSystem& ps, int j,
                              RngStream& rng) {
  const double t_j = ps.checkpoint(j);
  double abs_sum = 0.0;
  for (const CisState& p : ps.particles) abs_sum += std::abs(p.weight);
  const double target = rng.uniform() * abs_sum;
  double acc = 0.0;
  std::size_t pick = ps.particles.size() - 1;
  for (std::size_t i = 0; i < ps.particles.size(); ++i) {
    acc += std::abs(ps.particles[i].weight);
    if (target <= acc) {
      pick = i;
      break;
    }
  }
  const CisState& p = ps.particles[pick];
  return copycat_sample(p.params, p.anchor, t_j - p.event_time, rng);
}

namespace detail {

inline std::size_t multinomial_pick(const std::vector<double>& abs_w,
                                    double abs_sum, double u) {
  const double target = u * abs_sum;
  double acc = 0.0;
  for (std::size_t k = 0; k < abs_w.size(); ++k) {
    acc += abs_w[k];
    if (target <= acc) return k;
  }
  return abs_w.size() - 1;
}

}  // namespace detail

// One CIS-R1 step: multinomial resampling on |w| with reassigned weight
// sign(w_k) a_j / N when ESS drops below the threshold, then propagation of
// every particle to the next checkpoint. resample_rng drives only the
// resampling indices so that particle streams stay aligned with plain CIS.
inline void cis_r1_step(ParticleSystem& ps, int j, const DiffusionModel& model,
                        const RenewalRate& rate, RngStream& resample_rng) {
  const std::size_t n = ps.particles.size();
  const std::vector<double> w = ps.weights();
  // j = 0 is time zero, where all particles coincide at x0 and the
  // mixtures are degenerate; resampling starts at the first checkpoint.
  if (j > 0 && ess(w) < ps.ess_threshold) {
    std::vector<double> abs_w(n);
    double abs_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      abs_w[i] = std::abs(w[i]);
      abs_sum += abs_w[i];
    }
    std::vector<CisState> resampled(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t k =
          detail::multinomial_pick(abs_w, abs_sum, resample_rng.uniform());
      resampled[i] = ps.particles[k];
      resampled[i].eval_count = 0;  // cost stays with the original particle
      resampled[i].weight =
          (w[k] < 0.0 ? -1.0 : 1.0) * abs_sum / static_cast<double>(n);
    }
    // Copied trajectories keep their pending event: the renewal clock of
    // the surviving particle continues unchanged.
    std::int64_t carried = 0;
    for (const CisState& p : ps.particles) carried += p.eval_count;
    ps.resample_eval_count += carried;
    ps.particles = std::move(resampled);
    ++ps.resample_count;
  }
  const double t_next = ps.checkpoint(j + 1);
  for (std::size_t i = 0; i < n; ++i)
    advance_cis(model, ps.particles[i], t_next, rate,
                AdaptationPolicy::FullCopycat, ps.streams[i]);
}

// One CIS-R2 step: fresh particles are drawn from p_bar_j and reweighted by
// p_hat_j / p_bar_j, marginalising out the pre-checkpoint trajectory. Costs
// Theta(N^2) density evaluations per triggered resample.
inline void cis_r2_step(ParticleSystem& ps, int j, const DiffusionModel& model,
                        const RenewalRate& rate, RngStream& resample_rng) {
  const std::size_t n = ps.particles.size();
  const std::vector<double> w = ps.weights();
  if (j > 0 && ess(w) < ps.ess_threshold) {
    const double t_j = ps.checkpoint(j);
    std::vector<CisState> fresh(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec y = sample_mixture_bar(ps, j, resample_rng);
      const double bar = mixture_density_bar(ps, j, y);
      if (bar <= 0.0)
        throw ZeroBarDensity("p_bar underflowed at a resampled point");
      const double hat = mixture_density_hat(ps, j, y);
      CisState st;
      st.anchor = y;
      st.event_time = t_j;
      st.weight = hat / bar;
      st.params = make_proposal_params(model, y, AdaptationPolicy::FullCopycat,
                                       ProposalParams(), true);
      st.eval_count = 1;
      fresh[i] = std::move(st);
    }
    ps.resample_eval_count += static_cast<std::int64_t>(2 * n * n);
    std::int64_t carried = 0;
    for (const CisState& p : ps.particles) carried += p.eval_count;
    ps.resample_eval_count += carried;
    ps.particles = std::move(fresh);
    ++ps.resample_count;
  }
  const double t_next = ps.checkpoint(j + 1);
  for (std::size_t i = 0; i < n; ++i)
    advance_cis(model, ps.particles[i], t_next, rate,
                AdaptationPolicy::FullCopycat, ps.streams[i]);
}

}  // namespace cisim

#endif  // CISIM_RESAMPLING_HPP
