#pragma once

#include <cstdint>
#include <vector>

#include "wforget/mlp.hpp"

namespace wforget::unlearn {

enum class OptKind { kSgd, kAdam };

// First-order stepper over a flat parameter vector. Sgd applies the plain
// update theta -= lr * g; Adam keeps per-coordinate moment estimates with the
// usual bias correction (beta1 0.9, beta2 0.999, eps 1e-8).
class Optimizer {
 public:
  Optimizer(OptKind kind, double lr, size_t dim);

  void step(ParamVector& theta, const GradVector& grad);

  OptKind kind() const { return kind_; }
  double lr() const { return lr_; }

 private:
  OptKind kind_;
  double lr_;
  size_t dim_;
  uint64_t t_ = 0;
  std::vector<double> m_, v_;  // Adam moments, allocated lazily
};

}  // namespace wforget::unlearn
