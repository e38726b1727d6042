#include "wforget/mlp.hpp"

#include <cmath>
#include <cstring>

#include "wforget/errors.hpp"
#include "wforget/rng.hpp"

namespace wforget {

std::vector<Tensor> unflatten(const ParamLayout& layout, const ParamVector& flat) {
  if (flat.size() != layout.total) {
    throw ShapeError("unflatten: got " + std::to_string(flat.size()) + " values, layout needs " +
                     std::to_string(layout.total));
  }
  std::vector<Tensor> parts;
  parts.reserve(layout.entries.size());
  for (const auto& e : layout.entries) {
    Tensor t = Tensor::zeros(e.shape);
    std::memcpy(t.data.data(), flat.data() + e.offset, e.count * sizeof(double));
    parts.push_back(std::move(t));
  }
  return parts;
}

ParamVector flatten(const ParamLayout& layout, const std::vector<Tensor>& parts) {
  if (parts.size() != layout.entries.size()) {
    throw ShapeError("flatten: got " + std::to_string(parts.size()) + " tensors, layout has " +
                     std::to_string(layout.entries.size()) + " entries");
  }
  ParamVector flat(layout.total, 0.0);
  for (size_t i = 0; i < parts.size(); ++i) {
    const auto& e = layout.entries[i];
    if (parts[i].size() != e.count) {
      throw ShapeError("flatten: entry " + e.name + " expects " + std::to_string(e.count) +
                       " values, got " + std::to_string(parts[i].size()));
    }
    std::memcpy(flat.data() + e.offset, parts[i].data.data(), e.count * sizeof(double));
  }
  return flat;
}

Mlp::Mlp(MlpSpec spec) : spec_(std::move(spec)) {
  if (spec_.input_dim == 0) throw DomainError("mlp: input_dim must be positive");
  if (spec_.num_classes < 2) throw DomainError("mlp: need at least 2 classes");
  for (size_t h : spec_.hidden) {
    if (h == 0) throw DomainError("mlp: hidden width must be positive");
  }
  widths_.push_back(spec_.input_dim);
  for (size_t h : spec_.hidden) widths_.push_back(h);
  widths_.push_back(spec_.num_classes);

  size_t off = 0;
  for (size_t l = 0; l + 1 < widths_.size(); ++l) {
    const size_t in = widths_[l], out = widths_[l + 1];
    layout_.entries.push_back({"w" + std::to_string(l), off, {in, out}, in * out});
    off += in * out;
    layout_.entries.push_back({"b" + std::to_string(l), off, {out}, out});
    off += out;
  }
  layout_.total = off;
}

ParamVector Mlp::init_params(uint64_t seed) const {
  ParamVector theta(layout_.total);
  Rng rng(seed);
  size_t pos = 0;
  for (size_t l = 0; l + 1 < widths_.size(); ++l) {
    const size_t in = widths_[l], out = widths_[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    for (size_t i = 0; i < in * out; ++i) theta[pos++] = rng.uniform(-limit, limit);
    for (size_t i = 0; i < out; ++i) theta[pos++] = rng.uniform(-limit, limit);
  }
  return theta;
}

ad::NodeId Mlp::forward(ad::Tape& tape, const ParamVector& theta, const Tensor& batch,
                        std::vector<ad::NodeId>* param_nodes,
                        std::vector<ad::NodeId>* hidden_nodes,
                        std::vector<ad::NodeId>* preact_nodes) const {
  if (batch.rank() != 2 || batch.cols() != spec_.input_dim) {
    throw ShapeError("mlp forward: batch " + batch.shape_str() + " does not match input_dim " +
                     std::to_string(spec_.input_dim));
  }
  std::vector<Tensor> parts = unflatten(layout_, theta);
  ad::NodeId x = tape.input(batch);
  for (size_t l = 0; l + 1 < widths_.size(); ++l) {
    ad::NodeId w = tape.param(std::move(parts[2 * l]));
    ad::NodeId b = tape.param(std::move(parts[2 * l + 1]));
    if (param_nodes) {
      param_nodes->push_back(w);
      param_nodes->push_back(b);
    }
    ad::NodeId z = tape.add_row(tape.matmul(x, w), b);
    const bool last = (l + 2 == widths_.size());
    if (last) {
      x = z;
    } else {
      if (preact_nodes) preact_nodes->push_back(z);
      x = spec_.activation == Activation::kRelu ? tape.relu(z) : tape.tanh(z);
      if (hidden_nodes) hidden_nodes->push_back(x);
    }
  }
  return x;
}

Tensor Mlp::logits(const ParamVector& theta, const Tensor& batch) const {
  ad::Tape tape;
  return tape.value(forward(tape, theta, batch));
}

Tensor Mlp::hidden_features(const ParamVector& theta, const Tensor& batch) const {
  ad::Tape tape;
  std::vector<ad::NodeId> hidden;
  ad::NodeId out = forward(tape, theta, batch, nullptr, &hidden);
  return hidden.empty() ? tape.value(out) : tape.value(hidden.back());
}

GradVector Mlp::collect_grad(const ad::Tape& tape, const std::vector<ad::NodeId>& param_nodes) const {
  if (param_nodes.size() != layout_.entries.size()) {
    throw ShapeError("collect_grad: got " + std::to_string(param_nodes.size()) +
                     " leaves, layout has " + std::to_string(layout_.entries.size()));
  }
  GradVector g(layout_.total, 0.0);
  for (size_t i = 0; i < param_nodes.size(); ++i) {
    const Tensor& t = tape.grad(param_nodes[i]);
    const auto& e = layout_.entries[i];
    if (t.size() != e.count) {
      throw ShapeError("collect_grad: entry " + e.name + " gradient size mismatch");
    }
    std::memcpy(g.data() + e.offset, t.data.data(), e.count * sizeof(double));
  }
  return g;
}

}  // namespace wforget
