#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "wforget/tensor.hpp"

namespace wforget::ad {

using NodeId = int;

// Per-sample softmax cross-entropy for a batch of logits, computed with
// max-subtraction. Shared by the tape op and the plain evaluation paths.
std::vector<double> per_sample_cross_entropy(const Tensor& logits, const std::vector<int>& labels);

// Row argmax with ties broken toward the lowest class index.
std::vector<int> argmax_rows(const Tensor& logits);

// Eager reverse-mode tape over small dense tensors. Nodes are created with
// their values already computed; backward() walks the creation order in
// reverse and accumulates exact gradients for every node that can reach a
// parameter leaf.
class Tape {
 public:
  // Leaves.
  NodeId input(Tensor v);      // constant tensor, no gradient tracked
  NodeId param(Tensor v);      // differentiable leaf
  NodeId constant(double v);   // scalar constant

  // [N x K] * [K x M] -> [N x M]
  NodeId matmul(NodeId a, NodeId b);
  // [N x M] + row [M] broadcast over rows
  NodeId add_row(NodeId m, NodeId row);
  NodeId relu(NodeId a);
  NodeId tanh(NodeId a);

  // Per-sample softmax cross-entropy against integer labels: [N x C] -> [N].
  NodeId softmax_xent(NodeId logits, std::vector<int> labels);

  // Elementwise min(x, cap). Gradient passes through where x <= cap and is
  // zero where x > cap.
  NodeId clip_max(NodeId a, double cap);

  NodeId mean(NodeId a);         // any rank -> scalar
  NodeId sum_squares(NodeId a);  // any rank -> scalar

  // Squared 2-Wasserstein distance between the entries of the rank-1 node `a`
  // and fixed reference values: both sides are sorted ascending and paired by
  // rank. Ties in `a` break by ascending sample id so the subgradient choice
  // is canonical.
  NodeId w2sq_ref(NodeId a, std::vector<double> ref, std::vector<int64_t> sample_ids);

  // Scalar / same-shape elementwise algebra.
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  NodeId mul(NodeId a, NodeId b);
  NodeId scale(NodeId a, double c);
  NodeId add_const(NodeId a, double c);
  NodeId square(NodeId a);

  const Tensor& value(NodeId id) const { return node(id).val; }
  // Root must be scalar. May be called once per tape.
  void backward(NodeId root);
  // Valid after backward(); zero tensor for nodes the root does not reach.
  const Tensor& grad(NodeId id) const;

  size_t size() const { return nodes_.size(); }

 private:
  enum class Op {
    kInput,
    kParam,
    kConstant,
    kMatmul,
    kAddRow,
    kRelu,
    kTanh,
    kSoftmaxXent,
    kClipMax,
    kMean,
    kSumSquares,
    kW2SqRef,
    kAdd,
    kSub,
    kMul,
    kScale,
    kAddConst,
    kSquare,
  };

  struct Node {
    Op op;
    std::array<NodeId, 2> in{-1, -1};
    Tensor val;
    Tensor grad;
    bool needs_grad = false;
    double c = 0.0;                 // scale factor / clip cap / additive constant
    std::vector<int> labels;        // softmax_xent
    std::vector<double> aux;        // softmax probs or sorted reference values
    std::vector<size_t> perm;       // w2sq_ref: ascending order of `a`
  };

  const Node& node(NodeId id) const { return nodes_[static_cast<size_t>(id)]; }
  Node& node(NodeId id) { return nodes_[static_cast<size_t>(id)]; }
  NodeId push(Node n);
  void ensure_grad(Node& n);
  void check_id(NodeId id) const;

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

}  // namespace wforget::ad
