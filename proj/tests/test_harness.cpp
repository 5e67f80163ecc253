#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "cisim/harness/config.hpp"
#include "cisim/harness/experiment.hpp"
#include "cisim/stats.hpp"

using namespace cisim;
using namespace cisim::harness;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
  const std::string path = "/tmp/" + name;
  std::ofstream f(path);
  f << body;
  return path;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("sample statistics: pinned spot values") {
  // values {0, 2} with reference 1: rmse = 1, mean = 1, median = 1
  const SampleStats a = stats({0.0, 2.0}, 1.0);
  CHECK(a.mean == 1.0);
  CHECK(a.rmse == 1.0);
  CHECK(a.stderr_ == doctest::Approx(1.0));  // sd = sqrt(2), se = 1

  // values {1, 2, 100}: median 2, abs deviations {1, 0, 98} -> mad 1
  const SampleStats b = stats({1.0, 2.0, 100.0});
  CHECK(b.mad == 1.0);
  CHECK(median({1.0, 2.0, 100.0}) == 2.0);
  CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
  CHECK_THROWS_AS(stats({}), EmptyInput);
}

TEST_CASE("config file parsing round trip") {
  const std::string path = write_temp(
      "cisim_cfg_ok.cfg",
      "# sample configuration\n"
      "model = ou1d\n"
      "model_params = 0.5, 1.0, 0.4\n"
      "x0 = 2.0\n"
      "x_target = 1.4\n"
      "method = gcis\n"
      "estimator = density\n"
      "t = 1.0\n"
      "delta = 1.0\n"
      "alpha = 0.5\n"
      "n = 250\n"
      "seed = 9\n");
  const ExperimentConfig cfg = load_config_file(path);
  CHECK(cfg.model == "ou1d");
  REQUIRE(cfg.model_params.size() == 3);
  CHECK(cfg.model_params[1] == 1.0);
  CHECK(cfg.method == Method::Gcis);
  CHECK(cfg.estimator == Estimator::Density);
  REQUIRE(cfg.x_target.has_value());
  CHECK((*cfg.x_target)[0] == 1.4);
  CHECK(cfg.horizon == 1.0);
  CHECK(cfg.n_replicates == 250);
  CHECK(cfg.seed == 9);
  CHECK(cfg.build_model().dim == 1);
  std::remove(path.c_str());
}

TEST_CASE("unknown keys and bad values raise ConfigError") {
  ExperimentConfig cfg;
  CHECK_THROWS_AS(apply_key_value(cfg, "no_such_key", "1"), ConfigError);
  CHECK_THROWS_AS(apply_key_value(cfg, "method", "warp_drive"), ConfigError);
  CHECK_THROWS_AS(apply_key_value(cfg, "estimator", "psychic"), ConfigError);
  CHECK_THROWS_AS(apply_key_value(cfg, "n", "many"), ConfigError);
  const std::string path =
      write_temp("cisim_cfg_bad.cfg", "model = sv\nbogus = 1\n");
  CHECK_THROWS_AS(load_config_file(path), ConfigError);
  std::remove(path.c_str());
}

TEST_CASE("model construction validates parameter counts") {
  ExperimentConfig cfg;
  cfg.model = "ou1d";
  cfg.model_params = {0.5};  // needs rho, mu, sigma
  CHECK_THROWS_AS(cfg.build_model(), ConfigError);
  cfg.model = "unobtainium";
  CHECK_THROWS_AS(cfg.build_model(), ConfigError);
}

TEST_CASE("every preset builds and resolves") {
  CHECK(presets().size() >= 4);
  for (const Preset& p : presets()) {
    const ExperimentConfig cfg = preset_config(p.name);
    CHECK(cfg.build_model().dim >= 1);
    CHECK(cfg.n_replicates > 0);
  }
  CHECK_THROWS_AS(preset_config("does-not-exist"), ConfigError);
}

TEST_CASE("worker count does not change the output bytes") {
  ExperimentConfig cfg;
  cfg.model = "sv";
  cfg.model_params = {1.0, 0.5};
  cfg.x0 = {1.0, 0.0};
  cfg.method = Method::Cis;
  cfg.estimator = Estimator::Sampled;
  cfg.horizon = 1.0;
  cfg.delta = 1.0;
  cfg.alpha = 0.5;
  cfg.n_replicates = 400;
  cfg.seed = 7;

  cfg.workers = 1;
  const ExperimentResult one = run_experiment(cfg);
  cfg.workers = 8;
  const ExperimentResult eight = run_experiment(cfg);

  const std::string p1 = "/tmp/cisim_w1.csv", p8 = "/tmp/cisim_w8.csv";
  write_csv(p1, one.rows);
  write_csv(p8, eight.rows);
  CHECK(slurp(p1) == slurp(p8));
  CHECK(slurp(p1).rfind("replicate,estimate,weight,n_events,eval_count,aborted",
                        0) == 0);
  CHECK(one.summary.estimate == eight.summary.estimate);
  CHECK(one.summary.cost == eight.summary.cost);
  std::remove(p1.c_str());
  std::remove(p8.c_str());
}

TEST_CASE("aborted replicates are counted, not crashed") {
  ExperimentConfig cfg;
  cfg.model = "cir2d";
  cfg.model_params = {0.1, 2.0, 0.4, 0.2, 3.0, 0.3, 0.5};
  cfg.x0 = {0.05, 0.05};  // near the boundary: some proposals will exit
  cfg.method = Method::Cis;
  cfg.estimator = Estimator::Sampled;
  cfg.horizon = 2.0;
  cfg.delta = 2.0;
  cfg.alpha = 0.5;
  cfg.n_replicates = 2000;
  cfg.seed = 11;
  cfg.workers = 1;
  const ExperimentResult res = run_experiment(cfg);
  CHECK(res.summary.aborted_count > 0);
  CHECK(res.summary.aborted_count < cfg.n_replicates);
  int flagged = 0;
  for (const ReplicateRow& r : res.rows)
    if (r.aborted) ++flagged;
  CHECK(flagged == res.summary.aborted_count);
}

TEST_CASE("JSON sidecar echoes the resolved configuration") {
  ExperimentConfig cfg = preset_config("ou_mean");
  cfg.n_replicates = 50;
  cfg.workers = 1;
  const ExperimentResult res = run_experiment(cfg);
  const std::string path = "/tmp/cisim_summary.csv";
  write_summary_json(path + ".json", cfg, res.summary);
  const std::string body = slurp(path + ".json");
  CHECK(body.find("\"model\": \"ou1d\"") != std::string::npos);
  CHECK(body.find("\"n\": 50") != std::string::npos);
  CHECK(body.find("\"estimate\"") != std::string::npos);
  CHECK(body.find("\"cost\"") != std::string::npos);
  std::remove((path + ".json").c_str());
}

TEST_CASE("self checks pass") {
  const CheckReport report = run_self_checks();
  INFO(report.text);
  CHECK(report.ok);
}
