#pragma once

#include <cstdint>

#include "wforget/dataset.hpp"

namespace wforget::datagen {

enum class Scenario { kSuperclass, kBiasedLabel };

struct GeneratorConfig {
  Scenario scenario = Scenario::kSuperclass;
  size_t num_superclasses = 5;
  size_t subclasses_per_superclass = 4;
  size_t samples_per_subclass = 150;
  size_t feature_dim = 20;
  double superclass_center_scale = 6.0;
  double subclass_offset_scale = 1.5;
  double noise_sigma = 0.6;
  // Subclass of superclass 0 designated for forgetting; for the biased-label
  // scenario this picks the subgroup whose positives are mislabeled.
  size_t forget_subclass = 0;
  double test_fraction = 0.2;
  // Biased-label scenario only: fraction of the designated subgroup's
  // positives that receive the wrong label.
  double mislabel_fraction = 1.0;
  uint64_t seed = 0;
};

// Two-scale Gaussian mixture: well separated superclass centers, one cluster
// per subclass around each center. Labels are superclass ids. The designated
// subclass of superclass 0 is tagged Forget, its sibling subclasses Adjacent,
// all other superclasses Remote.
Dataset generate_superclass(const GeneratorConfig& cfg);

// Binary classification over subgroups. In the designated subgroup a fraction
// of true positives is labeled 0 and tagged Forget; the subgroup's correctly
// labeled samples are Adjacent, everything else Remote. Scoring labels carry
// the corrected targets for the forget samples.
Dataset generate_biased_label(const GeneratorConfig& cfg);

Dataset generate(const GeneratorConfig& cfg);

enum class NoiseMode { kAdjacentToRemote, kRemoteToAdjacent };

// Re-tags round(fraction * |source subset|) uniformly chosen samples from the
// source subset into the other retain subset. Forget samples are never moved.
void perturb_adjacency(Dataset& ds, NoiseMode mode, double fraction, uint64_t seed);

}  // namespace wforget::datagen
