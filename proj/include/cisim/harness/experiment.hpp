#ifndef CISIM_HARNESS_EXPERIMENT_HPP
#define CISIM_HARNESS_EXPERIMENT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cisim/harness/config.hpp"

namespace cisim::harness {

struct ReplicateRow {
  int replicate = 0;
  double estimate = 0.0;
  double weight = 0.0;
  int n_events = 0;
  std::int64_t eval_count = 0;
  bool aborted = false;
};

struct RunSummary {
  double estimate = 0.0;
  double stderr_ = 0.0;
  std::int64_t cost = 0;          // total model evaluations K
  double mean_event_count = 0.0;
  int aborted_count = 0;
  double weight_mean = 0.0;
  double weight_min = 0.0;
  double weight_max = 0.0;
  double abs_weight_q50 = 0.0;
  double abs_weight_q99 = 0.0;
  double wall_seconds = 0.0;
};

struct ExperimentResult {
  std::vector<ReplicateRow> rows;
  RunSummary summary;
};

// Runs cfg.n_replicates independent replicates (or particle-system runs for
// the resampling methods). Replicate i draws from the stream keyed by
// (seed, i), so results are identical at any worker count.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// CSV with one row per replicate, plus a JSON sidecar (<path>.json) holding
// the fully resolved config and the summary. Byte-stable formatting.
void write_csv(const std::string& path, const std::vector<ReplicateRow>& rows);
void write_summary_json(const std::string& path, const ExperimentConfig& cfg,
                        const RunSummary& summary);

// Model self-checks used by the `check` subcommand and the test suite:
// derivative bundles against finite differences and the univariate weight
// formula against the matrix form. Returns a human-readable report;
// `ok` is false if any check exceeded its tolerance.
struct CheckReport {
  bool ok = true;
  std::string text;
};
CheckReport run_self_checks(std::uint64_t seed = 42);

}  // namespace cisim::harness

#endif  // CISIM_HARNESS_EXPERIMENT_HPP
