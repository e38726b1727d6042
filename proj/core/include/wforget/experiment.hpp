#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wforget/config.hpp"

namespace wforget::harness {

struct SeedRun {
  uint64_t seed = 0;
  std::string dir;           // per-seed output directory
  std::string metrics_path;  // the seed's metrics JSON
};

struct ExperimentOutcome {
  std::string fingerprint;  // canonical-config hash
  std::string out_dir;
  std::vector<SeedRun> seeds;
  std::string aggregate_path;
};

// Runs the full pipeline for every configured seed: dataset generation,
// original training, the two unlearning stages, the enabled baselines and
// ablations, membership-inference and certificate checks. Everything lands
// under cfg.out_dir: a canonical config copy, then per seed a directory with
// the dataset, parameter snapshots, loss histograms, a deterministic
// metrics JSON (bit-identical across reruns of the same config), and a
// timings file kept separate so wall-clock noise never touches the metrics.
// A cross-seed aggregate (mean and population std per method and cell) is
// written last.
//
// method_filter, when nonempty, restricts the run to the listed methods
// (any of "wpgd", "pgd", "ga", "ft", "retrain"; baselines must also be
// configured) and skips all ablations.
//
// Hard mid-run invariants (dataset partition, projection orthogonality)
// throw DomainError with phase context.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg,
                                 const std::vector<std::string>& method_filter = {});

}  // namespace wforget::harness
