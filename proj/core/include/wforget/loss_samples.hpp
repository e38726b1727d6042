#pragma once

#include <limits>
#include <vector>

#include "wforget/dataset.hpp"
#include "wforget/mlp.hpp"
#include "wforget/tape.hpp"

namespace wforget::lossdist {

// Per-sample cross entropy (training labels, no clipping) for the given
// dataset rows at the given parameters.
std::vector<double> per_sample_losses(const Mlp& mlp, const ParamVector& theta,
                                      const datagen::Dataset& ds,
                                      const std::vector<size_t>& rows);

// Mean cross entropy over rows as a differentiable node; cap < inf clips each
// per-sample loss from above before averaging.
ad::NodeId mean_ce(ad::Tape& tape, const Mlp& mlp, const ParamVector& theta,
                   const datagen::Dataset& ds, const std::vector<size_t>& rows,
                   std::vector<ad::NodeId>* param_nodes = nullptr,
                   double cap = std::numeric_limits<double>::infinity());

// Tape-free value of the same quantity.
double mean_ce_value(const Mlp& mlp, const ParamVector& theta, const datagen::Dataset& ds,
                     const std::vector<size_t>& rows,
                     double cap = std::numeric_limits<double>::infinity());

// Frozen loss profile of a fixed row set, captured once at the anchor
// parameters. Later batches look up the reference value of each row by id, so
// the transport pairing always compares a sample with its own anchored loss
// distribution rather than with whatever happens to share a batch.
class LossAnchor {
 public:
  LossAnchor() = default;
  // rows and losses are parallel; rows need not arrive sorted.
  LossAnchor(std::vector<size_t> rows, std::vector<double> losses);

  bool empty() const { return rows_.empty(); }
  size_t size() const { return rows_.size(); }
  const std::vector<size_t>& rows() const { return rows_; }
  const std::vector<double>& losses() const { return losses_; }

  // Anchored loss of one row; throws DomainError for rows outside the anchor.
  double loss_for(size_t row) const;
  std::vector<double> losses_for(const std::vector<size_t>& rows) const;
  double min_loss() const;

 private:
  std::vector<size_t> rows_;    // ascending
  std::vector<double> losses_;  // losses_[i] is the loss of rows_[i]
};

// Captures the anchor over the train split of the forget subset.
LossAnchor capture_anchor(const Mlp& mlp, const ParamVector& theta, const datagen::Dataset& ds);

struct AnchoredLossNodes {
  ad::NodeId loss;     // (1 - alpha) * mean_ce + alpha * w2sq
  ad::NodeId mean_ce;  // unclipped mean cross entropy of the batch
  ad::NodeId w2sq;     // squared transport distance to the anchored profile
};

// Builds the distribution-anchored batch loss on the tape: the batch's mean
// cross entropy blended with the squared Wasserstein distance between the
// batch's per-sample losses and the anchor values of the same rows. alpha in
// [0, 1]; alpha = 0 reduces the gradient to the plain mean.
AnchoredLossNodes anchored_loss(ad::Tape& tape, const Mlp& mlp, const ParamVector& theta,
                                const datagen::Dataset& ds, const std::vector<size_t>& rows,
                                const LossAnchor& anchor, double alpha,
                                std::vector<ad::NodeId>* param_nodes = nullptr);

struct AnchoredLossValue {
  double loss = 0.0;
  double mean_ce = 0.0;
  double w2sq = 0.0;
};

// Tape-free evaluation of the same quantity.
AnchoredLossValue anchored_loss_value(const Mlp& mlp, const ParamVector& theta,
                                      const datagen::Dataset& ds, const std::vector<size_t>& rows,
                                      const LossAnchor& anchor, double alpha);

}  // namespace wforget::lossdist
