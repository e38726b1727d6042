#pragma once

#include <cstdint>
#include <vector>

#include "wforget/dataset.hpp"
#include "wforget/loss_samples.hpp"
#include "wforget/mlp.hpp"

namespace wforget::unlearn {

struct RecoveryConfig {
  // Blend between the mean forget loss (0) and the squared transport distance
  // to the anchored loss profile (1) in the protected forget gradient.
  double alpha = 0.5;
  double eta2 = 1e-2;
  size_t steps = 0;
  size_t forget_batch_size = 32;
  size_t adjacent_batch_size = 32;
  size_t remote_batch_size = 64;
  // The remote gradient is averaged over this many consecutive batches.
  size_t accumulation_batches = 10;
  double projection_tolerance = 1e-8;
  uint64_t seed = 0;
  // When nonzero, a parameter copy is stored after every snapshot_every-th
  // step (checkpointing for downstream evaluation).
  size_t snapshot_every = 0;
};

// Full train-split state of the three subsets: mean cross entropy against
// training labels, accuracy against scoring labels, and the squared transport
// distance of the forget losses to the anchored profile.
struct RecoverySnapshot {
  double forget_loss = 0.0;
  double adjacent_loss = 0.0;
  double remote_loss = 0.0;
  double forget_acc = 0.0;
  double adjacent_acc = 0.0;
  double remote_acc = 0.0;
  double w2sq_reference = 0.0;
};

struct RecoveryStep {
  RecoverySnapshot after;  // state at the updated parameters
  size_t basis_rank = 0;
  // Worst relative alignment of the applied update with the protected
  // gradients and the retained basis vectors at this step.
  double ortho_ratio = 0.0;
};

struct RecoveryResult {
  ParamVector theta_final;
  lossdist::LossAnchor reference;  // forget-loss profile frozen at theta_bar
  RecoverySnapshot initial;        // state at theta_bar
  std::vector<RecoveryStep> trace;
  double max_ortho_ratio = 0.0;
  // One entry per snapshot_every steps, paired with the 1-based step index.
  std::vector<std::pair<size_t, ParamVector>> snapshots;
};

// Accuracy of the model on the given rows, scored against scoring labels.
double subset_accuracy(const Mlp& mlp, const ParamVector& theta, const datagen::Dataset& ds,
                       const std::vector<size_t>& rows);

// Recovery from a post-forgetting model: each step removes from the adjacent
// gradient its components along the anchored forget gradient and the
// (accumulated) remote gradient, then descends along the remainder, so
// adjacent accuracy can recover while the forgotten and remote behavior stay
// pinned.
RecoveryResult run_recovery_stage(const Mlp& mlp, const ParamVector& theta_bar,
                                  const datagen::Dataset& ds, const RecoveryConfig& cfg);

// The same loop with the transport anchor disabled (alpha = 0): the classical
// projection baseline that protects only the mean forget loss.
RecoveryResult run_recovery_stage_classical(const Mlp& mlp, const ParamVector& theta_bar,
                                            const datagen::Dataset& ds, RecoveryConfig cfg);

}  // namespace wforget::unlearn
