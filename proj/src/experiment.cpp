#include "cisim/harness/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "cisim/baselines.hpp"
#include "cisim/cis.hpp"
#include "cisim/errors.hpp"
#include "cisim/resampling.hpp"
#include "cisim/stats.hpp"
#include "cisim/wagner.hpp"

namespace cisim::harness {

namespace {

Vec to_vec(const std::vector<double>& v) {
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
  return out;
}

int resolve_workers(const ExperimentConfig& cfg) {
  if (cfg.workers > 0) return cfg.workers;
  if (const char* env = std::getenv("CISIM_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return n;
  }
  return 1;
}

const Vec& require_target(const ExperimentConfig& cfg, const Vec& x_target) {
  if (x_target.size() == 0)
    throw ConfigError("method '" + method_name(cfg.method) +
                      "' requires x_target");
  return x_target;
}

// One replicate; everything a worker needs is value-captured or const.
ReplicateRow run_replicate(const ExperimentConfig& cfg,
                           const DiffusionModel& model, const Vec& x0,
                           const Vec& x_target, int i) {
  ReplicateRow row;
  row.replicate = i;
  RngStream rng(cfg.seed, static_cast<std::uint64_t>(i));
  try {
    switch (cfg.method) {
      case Method::Cis: {
        const RenewalRate rate(cfg.delta, cfg.alpha);
        const CisOutput out =
            run_cis(model, x0, cfg.horizon, rate, cfg.policy, rng);
        row.weight = out.weight;
        row.n_events = out.event_count;
        row.eval_count = out.eval_count;
        if (cfg.estimator == Estimator::Density)
          row.estimate = density_estimate(out, require_target(cfg, x_target));
        else
          row.estimate = replicate_functional(
              out, FunctionalSpec::coordinate(model.dim, cfg.coord),
              cfg.estimator == Estimator::RaoBlackwell
                  ? ExpectationMode::RaoBlackwell
                  : ExpectationMode::Sampled,
              rng);
        break;
      }
      case Method::Gcis: {
        const RenewalRate rate(cfg.delta, cfg.alpha);
        const GcisOutput out = run_gcis(model, x0, require_target(cfg, x_target),
                                        cfg.horizon, rate, rng);
        row.estimate = out.estimate;
        row.weight = out.estimate;
        row.n_events = out.event_count;
        row.eval_count = out.eval_count;
        break;
      }
      case Method::CisR1:
      case Method::CisR2: {
        const RenewalRate rate(cfg.delta, cfg.alpha);
        // Each "replicate" is an independent particle-system run; particle
        // streams are derived from (seed, run * n_particles + particle) and
        // the resampling stream from a disjoint block.
        const auto base =
            static_cast<std::uint64_t>(i) * (cfg.n_particles + 1);
        ParticleSystem ps = make_particle_system(
            model, x0, cfg.horizon, cfg.n_particles, cfg.n_checkpoints,
            cfg.ess_threshold, cfg.seed, base);
        RngStream resample_rng(cfg.seed ^ 0x5151515151515151ULL, base);
        for (int j = 0; j < cfg.n_checkpoints; ++j) {
          if (cfg.method == Method::CisR1)
            cis_r1_step(ps, j, model, rate, resample_rng);
          else
            cis_r2_step(ps, j, model, rate, resample_rng);
        }
        const FunctionalSpec f = FunctionalSpec::coordinate(model.dim, cfg.coord);
        double sum = 0.0, wsum = 0.0;
        int events = 0;
        for (const CisState& p : ps.particles) {
          const CisOutput out = finish_cis(p, cfg.horizon);
          sum += replicate_functional(out, f,
                                      cfg.estimator == Estimator::Sampled
                                          ? ExpectationMode::Sampled
                                          : ExpectationMode::RaoBlackwell,
                                      ps.streams[static_cast<std::size_t>(
                                          &p - ps.particles.data())]);
          wsum += p.weight;
          events += p.event_index;
        }
        row.estimate = sum / cfg.n_particles;
        row.weight = wsum / cfg.n_particles;
        row.n_events = events;
        row.eval_count = ps.total_eval_count();
        break;
      }
      case Method::Wgr1:
      case Method::Wgr2: {
        WagnerConfig wcfg;
        wcfg.variant = cfg.method == Method::Wgr1 ? WagnerVariant::WGR1
                                                  : WagnerVariant::WGR2;
        wcfg.delta = cfg.delta;
        wcfg.alpha = cfg.alpha;
        const WgrOutput out = wgr_density_estimate(
            model, x0, require_target(cfg, x_target), cfg.horizon, wcfg, rng);
        row.estimate = out.estimate;
        row.weight = out.estimate;
        row.n_events = out.point_count;
        row.eval_count = out.eval_count;
        break;
      }
      case Method::Euler: {
        const Vec x_T = euler_simulate(model, x0, cfg.horizon, cfg.m_steps, rng);
        row.estimate = x_T[cfg.coord];
        row.weight = 1.0;
        row.n_events = cfg.m_steps;
        row.eval_count = cfg.m_steps;
        break;
      }
      case Method::Dg: {
        row.estimate = dg_density_replicate(
            model, x0, require_target(cfg, x_target), cfg.horizon, cfg.m_steps,
            rng);
        row.weight = row.estimate;
        row.n_events = cfg.m_steps;
        row.eval_count = cfg.m_steps;
        break;
      }
      case Method::Sis: {
        TransitionDensity target;
        if (cfg.model == "ou1d")
          target = ou1d_transition_density(cfg.model_params[0],
                                           cfg.model_params[1],
                                           cfg.model_params[2]);
        else if (cfg.model == "constant")
          target = [&model](const Vec& x, const Vec& y, double t) {
            const ProposalParams q(model.drift(x), model.gamma(x));
            return copycat_density(q, x, y, t);
          };
        else
          throw ConfigError("sis requires a model with known density");
        const auto [x_T, w] =
            sis_known_density(target, model, x0, cfg.horizon, cfg.m_steps, rng);
        row.weight = w;
        row.estimate = w * x_T[cfg.coord];
        row.n_events = cfg.m_steps;
        row.eval_count = cfg.m_steps;
        break;
      }
    }
  } catch (const DomainError&) {
    row.aborted = true;
    row.estimate = std::nan("");
    row.weight = std::nan("");
  }
  return row;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  const DiffusionModel model = cfg.build_model();
  const Vec x0 = to_vec(cfg.x0);
  const Vec x_target =
      cfg.x_target ? to_vec(*cfg.x_target) : Vec();

  ExperimentResult result;
  result.rows.resize(cfg.n_replicates);
  const int workers = std::min(resolve_workers(cfg), cfg.n_replicates);
  if (workers <= 1) {
    for (int i = 0; i < cfg.n_replicates; ++i)
      result.rows[i] = run_replicate(cfg, model, x0, x_target, i);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const int i = next.fetch_add(1);
          if (i >= cfg.n_replicates) return;
          result.rows[i] = run_replicate(cfg, model, x0, x_target, i);
        }
      });
    }
    for (std::thread& t : pool) t.join();
  }

  RunSummary& s = result.summary;
  std::vector<double> estimates, weights, abs_weights;
  double events = 0.0;
  for (const ReplicateRow& r : result.rows) {
    s.cost += r.eval_count;
    if (r.aborted) {
      ++s.aborted_count;
      continue;
    }
    estimates.push_back(r.estimate);
    weights.push_back(r.weight);
    abs_weights.push_back(std::abs(r.weight));
    events += r.n_events;
  }
  if (!estimates.empty()) {
    const SampleStats es = stats(estimates);
    s.estimate = es.mean;
    s.stderr_ = es.stderr_;
    const SampleStats ws = stats(weights);
    s.weight_mean = ws.mean;
    s.weight_min = *std::min_element(weights.begin(), weights.end());
    s.weight_max = *std::max_element(weights.begin(), weights.end());
    std::sort(abs_weights.begin(), abs_weights.end());
    s.abs_weight_q50 = abs_weights[abs_weights.size() / 2];
    s.abs_weight_q99 =
        abs_weights[static_cast<std::size_t>(0.99 * (abs_weights.size() - 1))];
    s.mean_event_count = events / static_cast<double>(estimates.size());
  }
  s.wall_seconds = std::chrono::duration<double>(
                       std::chrono::steady_clock::now() - start)
                       .count();
  return result;
}

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void write_csv(const std::string& path,
               const std::vector<ReplicateRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  out << "replicate,estimate,weight,n_events,eval_count,aborted\n";
  for (const ReplicateRow& r : rows) {
    out << r.replicate << ',' << fmt(r.estimate) << ',' << fmt(r.weight) << ','
        << r.n_events << ',' << r.eval_count << ',' << (r.aborted ? 1 : 0)
        << '\n';
  }
}

void write_summary_json(const std::string& path, const ExperimentConfig& cfg,
                        const RunSummary& s) {
  nlohmann::ordered_json j;
  j["config"] = {
      {"model", cfg.model},
      {"model_params", cfg.model_params},
      {"x0", cfg.x0},
      {"method", method_name(cfg.method)},
      {"estimator", estimator_name(cfg.estimator)},
      {"policy", policy_name(cfg.policy)},
      {"coord", cfg.coord},
      {"t", cfg.horizon},
      {"delta", cfg.delta},
      {"alpha", cfg.alpha},
      {"n", cfg.n_replicates},
      {"n_particles", cfg.n_particles},
      {"n_checkpoints", cfg.n_checkpoints},
      {"ess_threshold", cfg.ess_threshold},
      {"m_steps", cfg.m_steps},
      {"seed", cfg.seed},
      {"preset", cfg.preset},
  };
  if (cfg.x_target) j["config"]["x_target"] = *cfg.x_target;
  j["summary"] = {
      {"estimate", s.estimate},
      {"stderr", s.stderr_},
      {"cost", s.cost},
      {"mean_event_count", s.mean_event_count},
      {"aborted_count", s.aborted_count},
      {"weight_mean", s.weight_mean},
      {"weight_min", s.weight_min},
      {"weight_max", s.weight_max},
      {"abs_weight_q50", s.abs_weight_q50},
      {"abs_weight_q99", s.abs_weight_q99},
      {"wall_seconds", s.wall_seconds},
  };
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  out << j.dump(2) << '\n';
}

CheckReport run_self_checks(std::uint64_t seed) {
  CheckReport report;
  std::ostringstream os;
  RngStream rng(seed, 0);
  auto fail = [&](const std::string& what) {
    report.ok = false;
    os << "FAIL  " << what << '\n';
  };

  struct NamedModel {
    std::string name;
    DiffusionModel model;
    std::function<Vec(RngStream&)> sample_point;
  };
  const Cir2dParams cir{0.6, 2.5, 0.45, 0.3, 3.0, 0.35, 0.5};
  std::vector<NamedModel> models;
  models.push_back({"ou1d", ou1d(0.5, 1.0, 0.4), [](RngStream& r) {
                      return Vec::Constant(1, 2.0 * r.normal()).eval();
                    }});
  models.push_back({"sv", sv_model(1.0, 0.5), [](RngStream& r) {
                      Vec x(2);
                      x << r.normal(), r.normal();
                      return x;
                    }});
  models.push_back({"cir2d", cir2d(cir), [](RngStream& r) {
                      Vec x(2);
                      x << 1.5 + 2.0 * r.uniform(), 1.5 + 2.0 * r.uniform();
                      return x;
                    }});
  models.push_back({"log_cir2d", log_cir2d(cir), [](RngStream& r) {
                      Vec x(2);
                      x << r.normal(), r.normal();
                      return x;
                    }});

  for (const NamedModel& nm : models) {
    double worst = 0.0;
    for (int i = 0; i < 100; ++i) {
      const Vec x = nm.sample_point(rng);
      worst = std::max(worst, check_derivatives(nm.model, x, 1e-5));
      const Mat g = nm.model.gamma(x);
      if ((g - g.transpose()).cwiseAbs().maxCoeff() > 1e-12 * g.norm())
        fail(nm.name + ": gamma not symmetric");
      const Mat ssT =
          nm.model.diffusion(x) * nm.model.diffusion(x).transpose();
      if ((g - ssT).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, g.norm()))
        fail(nm.name + ": gamma != sigma sigma^T");
    }
    os << (worst < 1e-6 ? "ok    " : "FAIL  ") << nm.name
       << " derivative bundles, max rel err " << worst << '\n';
    if (worst >= 1e-6) report.ok = false;
  }

  // Univariate closed form against the matrix form.
  const RenewalRate rate(1.0, 0.5);
  const DiffusionModel& scalar = models[0].model;
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const Vec x = Vec::Constant(1, 2.0 * rng.normal());
    const double u = 0.01 + rng.uniform();
    const CoefficientBundle c = eval_model(scalar, x);
    const ProposalParams params(c.b, c.gamma);
    const Vec y = copycat_sample(params, x, u, rng);
    const double a = incremental_weight(scalar, params, x, y, u, rate);
    const double b = incremental_weight_1d(scalar, params, x, y, u, rate);
    worst = std::max(worst, std::abs(a - b));
  }
  os << (worst <= 1e-10 ? "ok    " : "FAIL  ")
     << "matrix vs univariate incremental weight, max |diff| " << worst
     << '\n';
  if (worst > 1e-10) report.ok = false;

  // Constant-coefficient model: every incremental weight is exactly one.
  {
    Vec b0(2);
    b0 << 0.3, -0.1;
    Mat s0(2, 2);
    s0 << 1.0, 0.0, 0.4, 0.8;
    const DiffusionModel cc = constant_coeff(b0, s0);
    const ProposalParams params(b0, s0 * s0.transpose());
    bool exact = true;
    for (int i = 0; i < 100; ++i) {
      Vec x(2), y(2);
      x << rng.normal(), rng.normal();
      y << rng.normal(), rng.normal();
      const double u = 0.01 + rng.uniform();
      if (incremental_weight(cc, params, x, y, u, rate) != 1.0) exact = false;
    }
    os << (exact ? "ok    " : "FAIL  ")
       << "constant-coefficient incremental weight == 1" << '\n';
    if (!exact) report.ok = false;
  }

  report.text = os.str();
  return report;
}

}  // namespace cisim::harness
