#ifndef CISIM_HARNESS_CONFIG_HPP
#define CISIM_HARNESS_CONFIG_HPP

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cisim/cis.hpp"
#include "cisim/model.hpp"

namespace cisim::harness {

enum class Method { Cis, Gcis, CisR1, CisR2, Wgr1, Wgr2, Euler, Dg, Sis };

// What the per-replicate estimate column holds.
enum class Estimator {
  Density,      // signed density estimate at x_target
  RaoBlackwell, // w * closed-form Gaussian mean of coordinate `coord`
  Sampled       // w * f(x_T) with x_T drawn from the terminal proposal
};

struct ExperimentConfig {
  std::string model = "sv";
  std::vector<double> model_params = {1.0, 0.5};
  std::vector<double> x0 = {1.0, 0.0};
  std::optional<std::vector<double>> x_target;
  Method method = Method::Cis;
  Estimator estimator = Estimator::Sampled;
  AdaptationPolicy policy = AdaptationPolicy::FullCopycat;
  int coord = 0;
  double horizon = 1.0;
  double delta = 1.0;
  double alpha = 0.5;
  int n_replicates = 1000;
  int n_particles = 1000;
  int n_checkpoints = 10;
  double ess_threshold = 0.0;
  int m_steps = 16;
  std::uint64_t seed = 1;
  int workers = 0;  // 0: CISIM_THREADS env var, else 1
  std::string out;  // CSV path; JSON sidecar gets ".json" appended
  std::string preset;  // name the config was resolved from, if any

  DiffusionModel build_model() const;
};

Method parse_method(const std::string& name);
std::string method_name(Method m);
Estimator parse_estimator(const std::string& name);
std::string estimator_name(Estimator e);
AdaptationPolicy parse_policy(const std::string& name);
std::string policy_name(AdaptationPolicy p);

// key = value file, '#' comments. Unknown keys raise ConfigError.
ExperimentConfig load_config_file(const std::string& path);
void apply_key_value(ExperimentConfig& cfg, const std::string& key,
                     const std::string& value);

struct Preset {
  std::string name;
  std::string description;
  ExperimentConfig config;
};

const std::vector<Preset>& presets();
ExperimentConfig preset_config(const std::string& name);

}  // namespace cisim::harness

#endif  // CISIM_HARNESS_CONFIG_HPP
