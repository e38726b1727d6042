#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "wforget/tensor.hpp"

namespace wforget::datagen {

enum class Subset : uint8_t { kForget = 0, kAdjacent = 1, kRemote = 2 };
enum class Split : uint8_t { kTrain = 0, kTest = 1 };

const char* subset_name(Subset s);
const char* split_name(Split s);

struct GeneratorMeta {
  std::string scenario;
  uint64_t seed = 0;
  // Ordered key/value pairs; order is part of the serialized form.
  std::vector<std::pair<std::string, std::string>> params;
};

// Labeled feature vectors where every sample carries exactly one subset tag
// (forget / adjacent-retain / remote-retain) and one split tag (train / test).
struct Dataset {
  size_t feature_dim = 0;
  size_t num_classes = 0;
  std::vector<double> features;        // n() x feature_dim, row-major
  std::vector<int32_t> labels;         // labels the model is trained on
  std::vector<int32_t> eval_labels;    // scoring labels; empty means same as labels
  std::vector<Subset> subset;
  std::vector<Split> split;
  GeneratorMeta meta;

  size_t n() const { return labels.size(); }
  const double* row(size_t i) const { return features.data() + i * feature_dim; }

  // Label used when scoring predictions. Differs from the training label only
  // for forget samples in the biased-label scenario.
  int32_t scoring_label(size_t i) const {
    return eval_labels.empty() ? labels[i] : eval_labels[i];
  }

  std::vector<size_t> indices(Subset s) const;
  std::vector<size_t> indices(Subset s, Split sp) const;
  std::vector<size_t> train_indices() const;
  std::vector<size_t> retain_train_indices() const;  // adjacent + remote, train split
  size_t count(Subset s, Split sp) const;
  size_t count(Subset s) const;

  Tensor gather_features(const std::vector<size_t>& idx) const;
  std::vector<int> gather_labels(const std::vector<size_t>& idx) const;

  // Structural contract: consistent array sizes, labels in range, and every
  // subset nonempty in the train split. Throws DomainError on violation.
  void validate() const;
};

}  // namespace wforget::datagen
