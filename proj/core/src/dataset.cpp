#include "wforget/dataset.hpp"

#include "wforget/errors.hpp"

namespace wforget::datagen {

const char* subset_name(Subset s) {
  switch (s) {
    case Subset::kForget:
      return "forget";
    case Subset::kAdjacent:
      return "adjacent";
    case Subset::kRemote:
      return "remote";
  }
  return "?";
}

const char* split_name(Split s) {
  return s == Split::kTrain ? "train" : "test";
}

std::vector<size_t> Dataset::indices(Subset s) const {
  std::vector<size_t> out;
  for (size_t i = 0; i < n(); ++i) {
    if (subset[i] == s) out.push_back(i);
  }
  return out;
}

std::vector<size_t> Dataset::indices(Subset s, Split sp) const {
  std::vector<size_t> out;
  for (size_t i = 0; i < n(); ++i) {
    if (subset[i] == s && split[i] == sp) out.push_back(i);
  }
  return out;
}

std::vector<size_t> Dataset::train_indices() const {
  std::vector<size_t> out;
  for (size_t i = 0; i < n(); ++i) {
    if (split[i] == Split::kTrain) out.push_back(i);
  }
  return out;
}

std::vector<size_t> Dataset::retain_train_indices() const {
  std::vector<size_t> out;
  for (size_t i = 0; i < n(); ++i) {
    if (subset[i] != Subset::kForget && split[i] == Split::kTrain) out.push_back(i);
  }
  return out;
}

size_t Dataset::count(Subset s, Split sp) const {
  size_t c = 0;
  for (size_t i = 0; i < n(); ++i) {
    if (subset[i] == s && split[i] == sp) ++c;
  }
  return c;
}

size_t Dataset::count(Subset s) const {
  size_t c = 0;
  for (size_t i = 0; i < n(); ++i) {
    if (subset[i] == s) ++c;
  }
  return c;
}

Tensor Dataset::gather_features(const std::vector<size_t>& idx) const {
  Tensor t = Tensor::matrix(idx.size(), feature_dim);
  for (size_t k = 0; k < idx.size(); ++k) {
    const double* src = row(idx[k]);
    std::copy(src, src + feature_dim, t.data.begin() + k * feature_dim);
  }
  return t;
}

std::vector<int> Dataset::gather_labels(const std::vector<size_t>& idx) const {
  std::vector<int> out(idx.size());
  for (size_t k = 0; k < idx.size(); ++k) out[k] = labels[idx[k]];
  return out;
}

void Dataset::validate() const {
  const size_t N = labels.size();
  if (feature_dim == 0) throw DomainError("dataset: feature_dim is zero");
  if (num_classes < 2) throw DomainError("dataset: needs at least 2 classes");
  if (features.size() != N * feature_dim) {
    throw DomainError("dataset: feature buffer holds " + std::to_string(features.size()) +
                      " values, expected " + std::to_string(N * feature_dim));
  }
  if (subset.size() != N || split.size() != N) {
    throw DomainError("dataset: tag arrays do not match sample count");
  }
  if (!eval_labels.empty() && eval_labels.size() != N) {
    throw DomainError("dataset: scoring label array does not match sample count");
  }
  for (size_t i = 0; i < N; ++i) {
    if (labels[i] < 0 || static_cast<size_t>(labels[i]) >= num_classes) {
      throw DomainError("dataset: label out of range at sample " + std::to_string(i));
    }
    if (!eval_labels.empty() &&
        (eval_labels[i] < 0 || static_cast<size_t>(eval_labels[i]) >= num_classes)) {
      throw DomainError("dataset: scoring label out of range at sample " + std::to_string(i));
    }
    if (static_cast<uint8_t>(subset[i]) > 2) {
      throw DomainError("dataset: bad subset tag at sample " + std::to_string(i));
    }
    if (static_cast<uint8_t>(split[i]) > 1) {
      throw DomainError("dataset: bad split tag at sample " + std::to_string(i));
    }
  }
  for (Subset s : {Subset::kForget, Subset::kAdjacent, Subset::kRemote}) {
    if (count(s, Split::kTrain) == 0) {
      throw DomainError(std::string("dataset: subset '") + subset_name(s) +
                        "' is empty in the train split");
    }
  }
}

}  // namespace wforget::datagen
