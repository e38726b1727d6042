#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wforget/tape.hpp"
#include "wforget/tensor.hpp"

namespace wforget {

// Flat f64 parameter and gradient vectors; the shape table lives in ParamLayout.
using ParamVector = std::vector<double>;
using GradVector = std::vector<double>;

struct ParamLayout {
  struct Entry {
    std::string name;
    size_t offset;
    std::vector<size_t> shape;
    size_t count;
  };
  std::vector<Entry> entries;
  size_t total = 0;
};

// Splits a flat vector into per-entry tensors; exact elementwise copy.
std::vector<Tensor> unflatten(const ParamLayout& layout, const ParamVector& flat);
// Inverse of unflatten; flatten(unflatten(v)) == v bitwise.
ParamVector flatten(const ParamLayout& layout, const std::vector<Tensor>& parts);

enum class Activation { kRelu, kTanh };

struct MlpSpec {
  size_t input_dim = 0;
  std::vector<size_t> hidden;
  size_t num_classes = 0;
  Activation activation = Activation::kRelu;
};

// Fully connected classifier. Layer l maps width[l] -> width[l+1] via
// x * W + b with the configured activation between hidden layers and raw
// logits at the output.
class Mlp {
 public:
  explicit Mlp(MlpSpec spec);

  const MlpSpec& spec() const { return spec_; }
  const ParamLayout& layout() const { return layout_; }
  size_t num_params() const { return layout_.total; }

  // Glorot-style uniform draws in +-sqrt(6 / (fan_in + fan_out)) for both
  // weights and biases, in layout order, so the result is bit-identical for a
  // given seed.
  ParamVector init_params(uint64_t seed) const;

  // Builds the forward graph for a batch [N x input_dim] and returns the
  // logits node [N x num_classes]. Parameter leaf ids are appended to
  // param_nodes in layout order when given; hidden_nodes receives the
  // post-activation node of each hidden layer; preact_nodes the pre-activation
  // node of each hidden layer.
  ad::NodeId forward(ad::Tape& tape, const ParamVector& theta, const Tensor& batch,
                     std::vector<ad::NodeId>* param_nodes = nullptr,
                     std::vector<ad::NodeId>* hidden_nodes = nullptr,
                     std::vector<ad::NodeId>* preact_nodes = nullptr) const;

  Tensor logits(const ParamVector& theta, const Tensor& batch) const;

  // Activations of the last hidden layer, the embedding used for neighbor
  // searches. Falls back to logits when the net has no hidden layer.
  Tensor hidden_features(const ParamVector& theta, const Tensor& batch) const;

  // Reads the gradients of the leaves created by forward() back into a flat
  // vector in layout order.
  GradVector collect_grad(const ad::Tape& tape, const std::vector<ad::NodeId>& param_nodes) const;

 private:
  MlpSpec spec_;
  ParamLayout layout_;
  std::vector<size_t> widths_;  // input_dim, hidden..., num_classes
};

}  // namespace wforget
