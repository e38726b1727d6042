#pragma once

#include "wforget/dataset.hpp"
#include "wforget/mlp.hpp"

namespace wforget::datagen {

struct KnnConfig {
  size_t k = 20;
  double top_fraction = 0.10;
};

// Model-driven re-partition of the retained samples. Every forget sample
// votes for its k nearest retained samples (Euclidean distance in the model's
// last-hidden-layer feature space); the round(top_fraction * |retained|)
// samples with the most votes become Adjacent and the rest Remote. Votes
// depend only on geometry, so the result is invariant to sample order; exact
// distance ties and equal vote counts break by ascending sample index.
Dataset knn_adjacency(const Dataset& ds, const Mlp& mlp, const ParamVector& theta,
                      const KnnConfig& cfg);

}  // namespace wforget::datagen
