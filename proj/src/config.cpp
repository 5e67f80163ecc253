#include "cisim/harness/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "cisim/errors.hpp"

namespace cisim::harness {

namespace {

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    out.push_back(std::stod(item));
  }
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

Cir2dParams cir_params(const std::vector<double>& p) {
  if (p.size() != 7)
    throw ConfigError(
        "cir2d/log_cir2d take 7 parameters: rho1,mu1,sigma1,rho2,mu2,sigma2,rho");
  return Cir2dParams{p[0], p[1], p[2], p[3], p[4], p[5], p[6]};
}

}  // namespace

DiffusionModel ExperimentConfig::build_model() const {
  const auto& p = model_params;
  if (model == "sv") {
    if (p.size() != 2) throw ConfigError("sv takes 2 parameters: sigma1,sigma2");
    return sv_model(p[0], p[1]);
  }
  if (model == "ou1d") {
    if (p.size() != 3)
      throw ConfigError("ou1d takes 3 parameters: rho,mu,sigma");
    return ou1d(p[0], p[1], p[2]);
  }
  if (model == "cir2d") return cir2d(cir_params(p));
  if (model == "log_cir2d") return log_cir2d(cir_params(p));
  if (model == "constant") {
    // d drift entries followed by a d*d diffusion matrix, row-major.
    const auto d = static_cast<int>(x0.size());
    if (static_cast<int>(p.size()) != d + d * d)
      throw ConfigError("constant takes d + d*d parameters");
    Vec b0(d);
    for (int i = 0; i < d; ++i) b0[i] = p[i];
    Mat s0(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) s0(i, j) = p[d + i * d + j];
    return constant_coeff(b0, s0);
  }
  throw ConfigError("unknown model '" + model + "'");
}

Method parse_method(const std::string& name) {
  if (name == "cis") return Method::Cis;
  if (name == "gcis") return Method::Gcis;
  if (name == "cis_r1") return Method::CisR1;
  if (name == "cis_r2") return Method::CisR2;
  if (name == "wgr1") return Method::Wgr1;
  if (name == "wgr2") return Method::Wgr2;
  if (name == "euler") return Method::Euler;
  if (name == "dg") return Method::Dg;
  if (name == "sis") return Method::Sis;
  throw ConfigError("unknown method '" + name + "'");
}

std::string method_name(Method m) {
  switch (m) {
    case Method::Cis: return "cis";
    case Method::Gcis: return "gcis";
    case Method::CisR1: return "cis_r1";
    case Method::CisR2: return "cis_r2";
    case Method::Wgr1: return "wgr1";
    case Method::Wgr2: return "wgr2";
    case Method::Euler: return "euler";
    case Method::Dg: return "dg";
    case Method::Sis: return "sis";
  }
  return "?";
}

Estimator parse_estimator(const std::string& name) {
  if (name == "density") return Estimator::Density;
  if (name == "rao_blackwell") return Estimator::RaoBlackwell;
  if (name == "sampled") return Estimator::Sampled;
  throw ConfigError("unknown estimator '" + name + "'");
}

std::string estimator_name(Estimator e) {
  switch (e) {
    case Estimator::Density: return "density";
    case Estimator::RaoBlackwell: return "rao_blackwell";
    case Estimator::Sampled: return "sampled";
  }
  return "?";
}

AdaptationPolicy parse_policy(const std::string& name) {
  if (name == "copycat") return AdaptationPolicy::FullCopycat;
  if (name == "drift_only") return AdaptationPolicy::DriftOnly;
  if (name == "frozen") return AdaptationPolicy::Frozen;
  throw ConfigError("unknown policy '" + name + "'");
}

std::string policy_name(AdaptationPolicy p) {
  switch (p) {
    case AdaptationPolicy::FullCopycat: return "copycat";
    case AdaptationPolicy::DriftOnly: return "drift_only";
    case AdaptationPolicy::Frozen: return "frozen";
  }
  return "?";
}

namespace {

void apply_key_value_impl(ExperimentConfig& cfg, const std::string& key,
                          const std::string& value) {
  if (key == "model") cfg.model = value;
  else if (key == "model_params") cfg.model_params = parse_list(value);
  else if (key == "x0") cfg.x0 = parse_list(value);
  else if (key == "x_target") cfg.x_target = parse_list(value);
  else if (key == "method") cfg.method = parse_method(value);
  else if (key == "estimator") cfg.estimator = parse_estimator(value);
  else if (key == "policy") cfg.policy = parse_policy(value);
  else if (key == "coord") cfg.coord = std::stoi(value);
  else if (key == "t") cfg.horizon = std::stod(value);
  else if (key == "delta") cfg.delta = std::stod(value);
  else if (key == "alpha") cfg.alpha = std::stod(value);
  else if (key == "n") cfg.n_replicates = std::stoi(value);
  else if (key == "n_particles") cfg.n_particles = std::stoi(value);
  else if (key == "n_checkpoints") cfg.n_checkpoints = std::stoi(value);
  else if (key == "ess_threshold") cfg.ess_threshold = std::stod(value);
  else if (key == "m_steps") cfg.m_steps = std::stoi(value);
  else if (key == "seed") cfg.seed = std::stoull(value);
  else if (key == "workers") cfg.workers = std::stoi(value);
  else if (key == "out") cfg.out = value;
  else throw ConfigError("unknown config key '" + key + "'");
}

}  // namespace

void apply_key_value(ExperimentConfig& cfg, const std::string& key,
                     const std::string& value) {
  try {
    apply_key_value_impl(cfg, key, value);
  } catch (const std::invalid_argument&) {
    throw ConfigError("invalid value '" + value + "' for key '" + key + "'");
  } catch (const std::out_of_range&) {
    throw ConfigError("value '" + value + "' out of range for key '" + key +
                      "'");
  }
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + ":" + std::to_string(lineno) +
                        ": expected key = value");
    apply_key_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

const std::vector<Preset>& presets() {
  static const std::vector<Preset> kPresets = [] {
    std::vector<Preset> v;

    {
      // Mean vector of the SV model at T=1, x0=(1,0), sigma=(1,1/2).
      ExperimentConfig c;
      c.model = "sv";
      c.model_params = {1.0, 0.5};
      c.x0 = {1.0, 0.0};
      c.method = Method::Cis;
      c.estimator = Estimator::Sampled;
      c.coord = 0;
      c.horizon = 1.0;
      c.delta = 1.0;
      c.alpha = 0.5;
      c.n_replicates = 10000;
      c.preset = "sv_mean";
      v.push_back({"sv_mean",
                   "SV model, E[X_1 at T=1] by plain CIS (sampled integral)",
                   c});
    }
    {
      // Long-horizon SV with CIS-R2 resampling.
      ExperimentConfig c;
      c.model = "sv";
      c.model_params = {1.0, 0.5};
      c.x0 = {1.0, 0.0};
      c.method = Method::CisR2;
      c.estimator = Estimator::RaoBlackwell;
      c.coord = 1;
      c.horizon = 5.0;
      c.delta = 1.0;
      c.alpha = 0.5;
      c.n_replicates = 50;
      c.n_particles = 1000;
      c.n_checkpoints = 10;
      c.ess_threshold = 500.0;
      c.preset = "sv_resample";
      v.push_back({"sv_resample",
                   "SV model, E[X_2 at T=5] by CIS-R2 (50 particle runs)", c});
    }
    {
      // Transition density of the log-transformed bivariate CIR at the
      // K5-equivalent budget (about 6.1 events per guided trajectory).
      ExperimentConfig c;
      c.model = "log_cir2d";
      c.model_params = {0.6, 2.5, 0.45, 0.3, 3.0, 0.35, 0.5};
      c.x0 = {std::log(2.5), std::log(3.0)};
      c.x_target = {{std::log(2.5), std::log(3.0)}};
      c.method = Method::Gcis;
      c.estimator = Estimator::Density;
      c.horizon = 1.0;
      c.delta = 1.0;
      c.alpha = 0.5;
      c.n_replicates = 5373;
      c.preset = "cir_density";
      v.push_back({"cir_density",
                   "log-CIR transition density by GCIS at the K5 budget", c});
    }
    {
      ExperimentConfig c;
      c.model = "log_cir2d";
      c.model_params = {0.6, 2.5, 0.45, 0.3, 3.0, 0.35, 0.5};
      c.x0 = {std::log(2.5), std::log(3.0)};
      c.x_target = {{std::log(2.5), std::log(3.0)}};
      c.method = Method::Dg;
      c.estimator = Estimator::Density;
      c.horizon = 1.0;
      c.m_steps = 16;
      c.n_replicates = 256;
      c.preset = "cir_density_dg";
      v.push_back({"cir_density_dg",
                   "log-CIR transition density by Durham-Gallant, M=16 N=256",
                   c});
    }
    {
      ExperimentConfig c;
      c.model = "ou1d";
      c.model_params = {0.5, 1.0, 0.4};
      c.x0 = {2.0};
      c.method = Method::Cis;
      c.estimator = Estimator::RaoBlackwell;
      c.coord = 0;
      c.horizon = 1.0;
      c.delta = 1.0;
      c.alpha = 0.5;
      c.n_replicates = 100000;
      c.preset = "ou_mean";
      v.push_back({"ou_mean",
                   "OU process, E[X at T=1] by Rao-Blackwellised CIS", c});
    }
    {
      ExperimentConfig c;
      c.model = "sv";
      c.model_params = {1.0, 0.5};
      c.x0 = {1.0, 0.0};
      c.x_target = {{1.0, 0.0}};
      c.method = Method::Wgr2;
      c.estimator = Estimator::Density;
      c.horizon = 1.0;
      c.delta = 0.5;
      c.alpha = 0.5;
      c.n_replicates = 10000;
      c.preset = "sv_density_wgr2";
      v.push_back({"sv_density_wgr2",
                   "SV transition density at x0 by Wagner's estimator (WGR2)",
                   c});
    }
    return v;
  }();
  return kPresets;
}

ExperimentConfig preset_config(const std::string& name) {
  for (const Preset& p : presets())
    if (p.name == name) return p.config;
  throw ConfigError("unknown preset '" + name + "'");
}

}  // namespace cisim::harness
