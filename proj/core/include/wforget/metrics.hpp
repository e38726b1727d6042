#pragma once

#include <array>
#include <cstddef>
#include <optional>

#include "wforget/dataset.hpp"
#include "wforget/mlp.hpp"

namespace wforget::eval {

// Metrics for one (subset, split) cell. Accuracy scores argmax logits against
// the scoring label (the corrected label where one exists); mean_loss is the
// cross entropy against the training label, i.e. the quantity the optimizers
// actually move. Ties in the argmax go to the lowest class index.
struct MetricCell {
  double accuracy = 0.0;
  double mean_loss = 0.0;
  std::size_t count = 0;
};

// One optional cell per subset tag x split; an absent cell marks an empty
// subset explicitly instead of reporting a fake zero.
struct SubsetMetrics {
  std::array<std::array<std::optional<MetricCell>, 2>, 3> cells;

  const std::optional<MetricCell>& at(datagen::Subset s, datagen::Split sp) const {
    return cells[static_cast<std::size_t>(s)][static_cast<std::size_t>(sp)];
  }
  std::optional<MetricCell>& at(datagen::Subset s, datagen::Split sp) {
    return cells[static_cast<std::size_t>(s)][static_cast<std::size_t>(sp)];
  }
};

// Evaluates every (subset, split) cell of the dataset at theta.
SubsetMetrics evaluate(const Mlp& mlp, const ParamVector& theta, const datagen::Dataset& ds);

}  // namespace wforget::eval
