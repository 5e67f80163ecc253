#ifndef CISIM_CIS_HPP
#define CISIM_CIS_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "cisim/model.hpp"
#include "cisim/proposal.hpp"
#include "cisim/renewal.hpp"
#include "cisim/rng.hpp"
#include "cisim/weight.hpp"

namespace cisim {

// How the proposal parameters theta are refreshed at each renewal event.
// FullCopycat re-anchors both drift and diffusion (the stable default);
// DriftOnly freezes the diffusion at x0; Frozen never re-anchors.
enum class AdaptationPolicy { FullCopycat, DriftOnly, Frozen };

struct CisState {
  int event_index = 0;
  double event_time = 0.0;   // time of the most recent event
  Vec anchor;                // process value at that event
  double weight = 1.0;       // signed
  ProposalParams params;
  // Absolute time of the next renewal event, already drawn but not yet
  // reached. Carrying it across checkpoint boundaries keeps the event
  // process identical to an uninterrupted run, so checkpointing is
  // weight-transparent. Negative means not drawn yet.
  double pending_event = -1.0;
  std::int64_t eval_count = 0;  // model coefficient evaluations
};

struct CisOutput {
  double last_event_time = 0.0;
  Vec anchor;
  double weight = 1.0;
  ProposalParams params;
  double horizon = 0.0;
  int event_count = 0;
  std::int64_t eval_count = 0;
};

inline ProposalParams make_proposal_params(const DiffusionModel& model,
                                           const Vec& x,
                                           AdaptationPolicy policy,
                                           const ProposalParams& previous,
                                           bool first) {
  const CoefficientBundle c = eval_model(model, x);
  switch (policy) {
    case AdaptationPolicy::FullCopycat:
      return ProposalParams(c.b, c.gamma);
    case AdaptationPolicy::DriftOnly:
      return first ? ProposalParams(c.b, c.gamma)
                   : ProposalParams(c.b, previous.gamma());
    case AdaptationPolicy::Frozen:
      return first ? ProposalParams(c.b, c.gamma) : previous;
  }
  return previous;
}

inline CisState init_cis_state(const DiffusionModel& model, const Vec& x0,
                               AdaptationPolicy policy) {
  CisState st;
  st.anchor = x0;
  st.params = make_proposal_params(model, x0, policy, ProposalParams(),
                                   /*first=*/true);
  st.eval_count = 1;
  return st;
}

// Runs the event loop from the current state up to absolute time t_end.
// Events strictly beyond t_end stay pending; the state can be advanced
// again later and behaves exactly as one uninterrupted run.
inline void advance_cis(const DiffusionModel& model, CisState& st,
                        double t_end, const RenewalRate& rate,
                        AdaptationPolicy policy, RngStream& rng) {
  for (;;) {
    if (st.pending_event < 0.0)
      st.pending_event =
          st.event_time + sample_interarrival(rate, rng.uniform());
    if (st.pending_event > t_end) return;

    const double u = st.pending_event - st.event_time;
    const Vec y = copycat_sample(st.params, st.anchor, u, rng);
    st.weight *= incremental_weight(model, st.params, st.anchor, y, u, rate);
    st.params = make_proposal_params(model, y, policy, st.params,
                                     /*first=*/false);
    ++st.eval_count;
    st.anchor = y;
    st.event_time = st.pending_event;
    st.pending_event = -1.0;
    ++st.event_index;
  }
}

inline CisOutput finish_cis(const CisState& st, double horizon) {
  return CisOutput{st.event_time, st.anchor,   st.weight, st.params,
                   horizon,       st.event_index, st.eval_count};
}

inline CisOutput run_cis(const DiffusionModel& model, const Vec& x0, double T,
                         const RenewalRate& rate, AdaptationPolicy policy,
                         RngStream& rng) {
  CisState st = init_cis_state(model, x0, policy);
  advance_cis(model, st, T, rate, policy, rng);
  return finish_cis(st, T);
}

// Signed single-replicate estimate of the transition density p(x0, y, T).
inline double density_estimate(const CisOutput& out, const Vec& y) {
  return out.weight * copycat_density(out.params, out.anchor, y,
                                      out.horizon - out.last_event_time);
}

// Functional f(x) = c + a.x + x^T Q x, the Gaussian-integrable family used
// by Rao-Blackwellised expectations; the sampled mode accepts any f.
struct FunctionalSpec {
  double constant = 0.0;
  Vec linear;     // empty means zero
  Mat quadratic;  // empty means zero

  static FunctionalSpec coordinate(int d, int i) {
    FunctionalSpec f;
    f.linear = Vec::Zero(d);
    f.linear[i] = 1.0;
    return f;
  }

  static FunctionalSpec one() {
    FunctionalSpec f;
    f.constant = 1.0;
    return f;
  }

  double operator()(const Vec& x) const {
    double v = constant;
    if (linear.size() > 0) v += linear.dot(x);
    if (quadratic.size() > 0) v += x.dot(quadratic * x);
    return v;
  }

  // E[f(X)] for X ~ N(mean, cov).
  double gaussian_expectation(const Vec& mean, const Mat& cov) const {
    double v = constant;
    if (linear.size() > 0) v += linear.dot(mean);
    if (quadratic.size() > 0)
      v += (quadratic.array() * cov.array()).sum() + mean.dot(quadratic * mean);
    return v;
  }
};

enum class ExpectationMode { RaoBlackwell, Sampled };

struct Estimate {
  double value = 0.0;
  double stderr_ = 0.0;
};

// Per-replicate summand for eq-style estimates: either the closed-form
// Gaussian integral w * Int f q dy, or the sampled w * f(x_T).
inline double replicate_functional(const CisOutput& out,
                                   const FunctionalSpec& f,
                                   ExpectationMode mode, RngStream& rng) {
  const double u = out.horizon - out.last_event_time;
  if (mode == ExpectationMode::RaoBlackwell) {
    const Vec mean = out.anchor + u * out.params.drift();
    return out.weight * f.gaussian_expectation(mean, u * out.params.gamma());
  }
  const Vec x_T = copycat_sample(out.params, out.anchor, u, rng);
  return out.weight * f(x_T);
}

inline Estimate expectation_estimate(const std::vector<CisOutput>& outputs,
                                     const FunctionalSpec& f,
                                     ExpectationMode mode, RngStream& rng) {
  if (outputs.empty()) throw EmptyInput("expectation_estimate: no replicates");
  const auto n = static_cast<double>(outputs.size());
  double sum = 0.0, sumsq = 0.0;
  for (const CisOutput& out : outputs) {
    const double v = replicate_functional(out, f, mode, rng);
    sum += v;
    sumsq += v * v;
  }
  Estimate e;
  e.value = sum / n;
  const double var = outputs.size() > 1
                         ? (sumsq - n * e.value * e.value) / (n - 1.0)
                         : 0.0;
  e.stderr_ = std::sqrt(std::max(0.0, var) / n);
  return e;
}

struct GcisOutput {
  double estimate = 0.0;  // signed density estimate of p(x0, x_T, T)
  int event_count = 0;
  std::int64_t eval_count = 0;
};

// Guided CIS: each event value is drawn from the modified Brownian bridge
// pinned at x_T with scale gamma(x_k); the importance correction
// q_theta / g_bb multiplies each incremental weight, and the terminal
// factor is the copycat density of x_T from the last anchor.
inline GcisOutput run_gcis(const DiffusionModel& model, const Vec& x0,
                           const Vec& x_T, double T, const RenewalRate& rate,
                           RngStream& rng) {
  CisState st = init_cis_state(model, x0, AdaptationPolicy::FullCopycat);
  GcisOutput out;
  for (;;) {
    const double next =
        st.event_time + sample_interarrival(rate, rng.uniform());
    if (next > T) break;
    const double u = next - st.event_time;
    BridgeProposal bridge{x_T, T, st.params.gamma()};
    const Vec y = bridge.sample(st.event_time, st.anchor, next, rng);
    const double rho =
        incremental_weight(model, st.params, st.anchor, y, u, rate);
    const double log_correction =
        log_copycat_density(st.params, st.anchor, y, u) -
        bridge.log_density(st.event_time, st.anchor, next, y);
    st.weight *= rho * std::exp(log_correction);
    st.params = make_proposal_params(model, y, AdaptationPolicy::FullCopycat,
                                     st.params, false);
    ++st.eval_count;
    st.anchor = y;
    st.event_time = next;
    ++st.event_index;
  }
  out.estimate = st.weight * copycat_density(st.params, st.anchor, x_T,
                                             T - st.event_time);
  out.event_count = st.event_index;
  out.eval_count = st.eval_count;
  return out;
}

}  // namespace cisim

#endif  // CISIM_CIS_HPP
