#pragma once

#include <cstdint>
#include <vector>

#include "wforget/dataset.hpp"
#include "wforget/mlp.hpp"
#include "wforget/optimizer.hpp"

namespace wforget::unlearn {

struct TrainConfig {
  double lr = 1e-2;
  size_t epochs = 1;
  size_t batch_size = 32;
  OptKind optimizer = OptKind::kSgd;
  uint64_t seed = 0;  // batch order
};

// Minimizes mean cross entropy over the given rows starting from theta.
// forbid_forget turns the retain-only contract into a hard runtime assertion:
// any forget-tagged row reaching a batch throws instead of training on it.
// loss_trace, when given, receives each batch objective before its step.
ParamVector train_on_rows(const Mlp& mlp, ParamVector theta, const datagen::Dataset& ds,
                          const std::vector<size_t>& rows, const TrainConfig& cfg,
                          bool forbid_forget = false, std::vector<double>* loss_trace = nullptr);

// Standard training on the full train split (all three subsets, training
// labels): produces the "original" model the unlearning methods start from.
ParamVector train_original(const Mlp& mlp, ParamVector theta_init, const datagen::Dataset& ds,
                           const TrainConfig& cfg, std::vector<double>* loss_trace = nullptr);

// Ascent on the unclipped forget loss.
ParamVector baseline_gradient_ascent(const Mlp& mlp, ParamVector theta,
                                     const datagen::Dataset& ds, const TrainConfig& cfg);

// Descent on the retained data (adjacent + remote train).
ParamVector baseline_finetune(const Mlp& mlp, ParamVector theta, const datagen::Dataset& ds,
                              const TrainConfig& cfg);

// Fresh initialization trained on the retained data only; the forget set is
// provably never visited (see forbid_forget above).
ParamVector baseline_retrain(const Mlp& mlp, const datagen::Dataset& ds, const TrainConfig& cfg,
                             uint64_t init_seed);

}  // namespace wforget::unlearn
