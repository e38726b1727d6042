#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wforget/auglag.hpp"
#include "wforget/generator.hpp"
#include "wforget/mlp.hpp"
#include "wforget/optimizer.hpp"

namespace wforget::harness {

// One standard training phase (original model, or a baseline).
struct PhaseConfig {
  unlearn::OptKind optimizer = unlearn::OptKind::kSgd;
  double lr = 0.0;
  size_t epochs = 0;
  size_t batch_size = 0;
};

struct Stage2Config {
  double alpha = 0.5;
  double eta2 = 0.0;
  size_t epochs = 0;
  size_t forget_batch_size = 0;
  size_t adjacent_batch_size = 0;
  size_t remote_batch_size = 0;
  size_t accumulation_batches = 10;
  double projection_tolerance = 1e-8;
};

// Full experiment description, parsed from a strict sectioned key=value file.
// Unknown sections, unknown keys, duplicates, and malformed values are all
// hard errors naming the offending key and line; defaults exist only for the
// knobs whose defaults are part of the method's definition.
struct ExperimentConfig {
  datagen::GeneratorConfig dataset;  // seed is owned by the run, not the file

  std::vector<size_t> hidden;
  Activation activation = Activation::kRelu;

  PhaseConfig original;

  // Stage-1 knobs (seed filled in per run). clip_cap defaults by scenario:
  // 10 for superclass, 5 for biased labels.
  unlearn::ForgettingConfig stage1;

  Stage2Config stage2;

  // Enabled baseline methods: any of "pgd", "ga", "ft", "retrain".
  std::vector<std::string> baseline_methods;
  PhaseConfig ga, ft, retrain;

  // Enabled ablations: any of "alpha_grid", "mu_grid", "joint_constraint",
  // "adjacency_noise", "knn_adjacency".
  std::vector<std::string> ablations;
  std::vector<double> alpha_grid = {0.0, 0.5, 1.0};
  std::vector<double> mu_grid = {5.0, 10.0, 20.0};
  double adjacency_noise_fraction = 0.2;
  size_t knn_k = 20;
  double knn_top_fraction = 0.1;

  std::vector<uint64_t> seeds;
  std::string out_dir;  // may be empty; the CLI then requires --out
  size_t histogram_bins = 20;
};

// Parses and validates path. Throws ConfigError with key and line context.
ExperimentConfig parse_config(const std::string& path);

// Same parser over in-memory text (name appears in error messages).
ExperimentConfig parse_config_text(const std::string& text, const std::string& name);

// Canonical rendering: every section and key in schema order with all
// defaults resolved. parse(canonical(c)) reproduces c exactly.
std::string canonical_config(const ExperimentConfig& cfg);

// FNV-1a fingerprint of the canonical rendering, as 16 hex digits. The
// output directory is excluded: it locates artifacts without being part of
// the experiment's identity.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace wforget::harness
