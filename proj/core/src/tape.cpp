#include "wforget/tape.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "wforget/errors.hpp"

namespace wforget::ad {

std::vector<double> per_sample_cross_entropy(const Tensor& logits, const std::vector<int>& labels) {
  const size_t n = logits.rows();
  const size_t c = logits.cols();
  if (labels.size() != n) {
    throw ShapeError("cross entropy: " + std::to_string(n) + " rows but " +
                     std::to_string(labels.size()) + " labels");
  }
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) {
    if (labels[i] < 0 || static_cast<size_t>(labels[i]) >= c) {
      throw DomainError("cross entropy: label " + std::to_string(labels[i]) +
                        " out of range for " + std::to_string(c) + " classes");
    }
    const double* row = &logits.data[i * c];
    double m = row[0];
    for (size_t j = 1; j < c; ++j) m = std::max(m, row[j]);
    double sum = 0.0;
    for (size_t j = 0; j < c; ++j) sum += std::exp(row[j] - m);
    out[i] = std::log(sum) - (row[static_cast<size_t>(labels[i])] - m);
  }
  return out;
}

std::vector<int> argmax_rows(const Tensor& logits) {
  const size_t n = logits.rows();
  const size_t c = logits.cols();
  std::vector<int> out(n);
  for (size_t i = 0; i < n; ++i) {
    const double* row = &logits.data[i * c];
    size_t best = 0;
    for (size_t j = 1; j < c; ++j) {
      if (row[j] > row[best]) best = j;
    }
    out[i] = static_cast<int>(best);
  }
  return out;
}

void Tape::check_id(NodeId id) const {
  if (id < 0 || static_cast<size_t>(id) >= nodes_.size()) {
    throw DomainError("tape: bad node id " + std::to_string(id));
  }
}

NodeId Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size() - 1);
}

NodeId Tape::input(Tensor v) {
  Node n;
  n.op = Op::kInput;
  n.val = std::move(v);
  return push(std::move(n));
}

NodeId Tape::param(Tensor v) {
  Node n;
  n.op = Op::kParam;
  n.val = std::move(v);
  n.needs_grad = true;
  return push(std::move(n));
}

NodeId Tape::constant(double v) {
  Node n;
  n.op = Op::kConstant;
  n.val = Tensor::scalar(v);
  return push(std::move(n));
}

NodeId Tape::matmul(NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  const Tensor& ta = node(a).val;
  const Tensor& tb = node(b).val;
  if (ta.rank() != 2 || tb.rank() != 2 || ta.cols() != tb.rows()) {
    throw ShapeError("matmul: incompatible shapes " + ta.shape_str() + " and " + tb.shape_str());
  }
  const size_t n = ta.rows(), k = ta.cols(), m = tb.cols();
  Node out;
  out.op = Op::kMatmul;
  out.in = {a, b};
  out.needs_grad = node(a).needs_grad || node(b).needs_grad;
  out.val = Tensor::matrix(n, m);
  for (size_t i = 0; i < n; ++i) {
    const double* arow = &ta.data[i * k];
    double* orow = &out.val.data[i * m];
    for (size_t kk = 0; kk < k; ++kk) {
      const double av = arow[kk];
      const double* brow = &tb.data[kk * m];
      for (size_t j = 0; j < m; ++j) orow[j] += av * brow[j];
    }
  }
  return push(std::move(out));
}

NodeId Tape::add_row(NodeId m, NodeId row) {
  check_id(m);
  check_id(row);
  const Tensor& tm = node(m).val;
  const Tensor& tr = node(row).val;
  if (tm.rank() != 2 || tr.rank() != 1 || tm.cols() != tr.shape[0]) {
    throw ShapeError("add_row: incompatible shapes " + tm.shape_str() + " and " + tr.shape_str());
  }
  Node out;
  out.op = Op::kAddRow;
  out.in = {m, row};
  out.needs_grad = node(m).needs_grad || node(row).needs_grad;
  out.val = tm;
  const size_t rows = tm.rows(), cols = tm.cols();
  for (size_t i = 0; i < rows; ++i) {
    for (size_t j = 0; j < cols; ++j) out.val.data[i * cols + j] += tr.data[j];
  }
  return push(std::move(out));
}

NodeId Tape::relu(NodeId a) {
  check_id(a);
  Node out;
  out.op = Op::kRelu;
  out.in = {a, -1};
  out.needs_grad = node(a).needs_grad;
  out.val = node(a).val;
  for (double& v : out.val.data) v = v > 0.0 ? v : 0.0;
  return push(std::move(out));
}

NodeId Tape::tanh(NodeId a) {
  check_id(a);
  Node out;
  out.op = Op::kTanh;
  out.in = {a, -1};
  out.needs_grad = node(a).needs_grad;
  out.val = node(a).val;
  for (double& v : out.val.data) v = std::tanh(v);
  return push(std::move(out));
}

NodeId Tape::softmax_xent(NodeId logits, std::vector<int> labels) {
  check_id(logits);
  const Tensor& tl = node(logits).val;
  std::vector<double> losses = per_sample_cross_entropy(tl, labels);
  const size_t n = tl.rows(), c = tl.cols();
  Node out;
  out.op = Op::kSoftmaxXent;
  out.in = {logits, -1};
  out.needs_grad = node(logits).needs_grad;
  out.val = Tensor::vec(n);
  out.val.data = std::move(losses);
  out.labels = std::move(labels);
  out.aux.resize(n * c);  // softmax probabilities for backward
  for (size_t i = 0; i < n; ++i) {
    const double* row = &tl.data[i * c];
    double m = row[0];
    for (size_t j = 1; j < c; ++j) m = std::max(m, row[j]);
    double sum = 0.0;
    for (size_t j = 0; j < c; ++j) sum += std::exp(row[j] - m);
    for (size_t j = 0; j < c; ++j) out.aux[i * c + j] = std::exp(row[j] - m) / sum;
  }
  return push(std::move(out));
}

NodeId Tape::clip_max(NodeId a, double cap) {
  check_id(a);
  Node out;
  out.op = Op::kClipMax;
  out.in = {a, -1};
  out.needs_grad = node(a).needs_grad;
  out.c = cap;
  out.val = node(a).val;
  for (double& v : out.val.data) v = std::min(v, cap);
  return push(std::move(out));
}

NodeId Tape::mean(NodeId a) {
  check_id(a);
  const Tensor& ta = node(a).val;
  if (ta.size() == 0) throw DomainError("mean: empty tensor");
  Node out;
  out.op = Op::kMean;
  out.in = {a, -1};
  out.needs_grad = node(a).needs_grad;
  double s = 0.0;
  for (double v : ta.data) s += v;
  out.val = Tensor::scalar(s / static_cast<double>(ta.size()));
  return push(std::move(out));
}

NodeId Tape::sum_squares(NodeId a) {
  check_id(a);
  Node out;
  out.op = Op::kSumSquares;
  out.in = {a, -1};
  out.needs_grad = node(a).needs_grad;
  double s = 0.0;
  for (double v : node(a).val.data) s += v * v;
  out.val = Tensor::scalar(s);
  return push(std::move(out));
}

NodeId Tape::w2sq_ref(NodeId a, std::vector<double> ref, std::vector<int64_t> sample_ids) {
  check_id(a);
  const Tensor& ta = node(a).val;
  if (ta.rank() != 1) throw ShapeError("w2sq_ref: expected rank-1 node, got " + ta.shape_str());
  const size_t n = ta.shape[0];
  if (n == 0) throw DomainError("w2sq_ref: empty batch");
  if (ref.size() != n || sample_ids.size() != n) {
    throw ShapeError("w2sq_ref: batch of " + std::to_string(n) + " with " +
                     std::to_string(ref.size()) + " reference values and " +
                     std::to_string(sample_ids.size()) + " ids");
  }
  Node out;
  out.op = Op::kW2SqRef;
  out.in = {a, -1};
  out.needs_grad = node(a).needs_grad;
  out.perm.resize(n);
  std::iota(out.perm.begin(), out.perm.end(), size_t{0});
  std::sort(out.perm.begin(), out.perm.end(), [&](size_t x, size_t y) {
    if (ta.data[x] != ta.data[y]) return ta.data[x] < ta.data[y];
    return sample_ids[x] < sample_ids[y];
  });
  std::sort(ref.begin(), ref.end());
  double s = 0.0;
  for (size_t k = 0; k < n; ++k) {
    const double d = ta.data[out.perm[k]] - ref[k];
    s += d * d;
  }
  out.val = Tensor::scalar(s / static_cast<double>(n));
  out.aux = std::move(ref);
  return push(std::move(out));
}

NodeId Tape::add(NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  if (!node(a).val.same_shape(node(b).val)) {
    throw ShapeError("add: shape mismatch " + node(a).val.shape_str() + " vs " +
                     node(b).val.shape_str());
  }
  Node out;
  out.op = Op::kAdd;
  out.in = {a, b};
  out.needs_grad = node(a).needs_grad || node(b).needs_grad;
  out.val = node(a).val;
  for (size_t i = 0; i < out.val.data.size(); ++i) out.val.data[i] += node(b).val.data[i];
  return push(std::move(out));
}

NodeId Tape::sub(NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  if (!node(a).val.same_shape(node(b).val)) {
    throw ShapeError("sub: shape mismatch " + node(a).val.shape_str() + " vs " +
                     node(b).val.shape_str());
  }
  Node out;
  out.op = Op::kSub;
  out.in = {a, b};
  out.needs_grad = node(a).needs_grad || node(b).needs_grad;
  out.val = node(a).val;
  for (size_t i = 0; i < out.val.data.size(); ++i) out.val.data[i] -= node(b).val.data[i];
  return push(std::move(out));
}

NodeId Tape::mul(NodeId a, NodeId b) {
  check_id(a);
  check_id(b);
  if (!node(a).val.same_shape(node(b).val)) {
    throw ShapeError("mul: shape mismatch " + node(a).val.shape_str() + " vs " +
                     node(b).val.shape_str());
  }
  Node out;
  out.op = Op::kMul;
  out.in = {a, b};
  out.needs_grad = node(a).needs_grad || node(b).needs_grad;
  out.val = node(a).val;
  for (size_t i = 0; i < out.val.data.size(); ++i) out.val.data[i] *= node(b).val.data[i];
  return push(std::move(out));
}

NodeId Tape::scale(NodeId a, double c) {
  check_id(a);
  Node out;
  out.op = Op::kScale;
  out.in = {a, -1};
  out.needs_grad = node(a).needs_grad;
  out.c = c;
  out.val = node(a).val;
  for (double& v : out.val.data) v *= c;
  return push(std::move(out));
}

NodeId Tape::add_const(NodeId a, double c) {
  check_id(a);
  Node out;
  out.op = Op::kAddConst;
  out.in = {a, -1};
  out.needs_grad = node(a).needs_grad;
  out.c = c;
  out.val = node(a).val;
  for (double& v : out.val.data) v += c;
  return push(std::move(out));
}

NodeId Tape::square(NodeId a) {
  check_id(a);
  Node out;
  out.op = Op::kSquare;
  out.in = {a, -1};
  out.needs_grad = node(a).needs_grad;
  out.val = node(a).val;
  for (double& v : out.val.data) v *= v;
  return push(std::move(out));
}

void Tape::ensure_grad(Node& n) {
  if (n.grad.data.empty() && !n.val.data.empty()) {
    n.grad = n.val;
    std::fill(n.grad.data.begin(), n.grad.data.end(), 0.0);
  }
}

const Tensor& Tape::grad(NodeId id) const {
  check_id(id);
  if (!backward_done_) throw DomainError("tape: grad() before backward()");
  const Node& n = node(id);
  if (n.grad.data.empty()) {
    throw DomainError("tape: grad() of a node that does not track gradients");
  }
  return n.grad;
}

void Tape::backward(NodeId root) {
  check_id(root);
  if (backward_done_) throw DomainError("tape: backward() called twice");
  if (!node(root).val.is_scalar()) {
    throw ShapeError("backward: root must be scalar, got " + node(root).val.shape_str());
  }
  backward_done_ = true;
  // Zero grads for every tracked node so unreached parameters read as zero.
  for (Node& n : nodes_) {
    if (n.needs_grad) ensure_grad(n);
  }
  ensure_grad(node(root));
  node(root).grad.data[0] = 1.0;

  for (NodeId id = root; id >= 0; --id) {
    Node& n = node(id);
    if (!n.needs_grad || n.grad.data.empty()) continue;
    const Tensor& g = n.grad;
    switch (n.op) {
      case Op::kInput:
      case Op::kParam:
      case Op::kConstant:
        break;
      case Op::kMatmul: {
        Node& a = node(n.in[0]);
        Node& b = node(n.in[1]);
        const size_t nn = a.val.rows(), k = a.val.cols(), m = b.val.cols();
        if (a.needs_grad) {
          ensure_grad(a);
          for (size_t i = 0; i < nn; ++i) {
            for (size_t kk = 0; kk < k; ++kk) {
              double s = 0.0;
              const double* grow = &g.data[i * m];
              const double* brow = &b.val.data[kk * m];
              for (size_t j = 0; j < m; ++j) s += grow[j] * brow[j];
              a.grad.data[i * k + kk] += s;
            }
          }
        }
        if (b.needs_grad) {
          ensure_grad(b);
          for (size_t kk = 0; kk < k; ++kk) {
            for (size_t i = 0; i < nn; ++i) {
              const double av = a.val.data[i * k + kk];
              const double* grow = &g.data[i * m];
              double* brow = &b.grad.data[kk * m];
              for (size_t j = 0; j < m; ++j) brow[j] += av * grow[j];
            }
          }
        }
        break;
      }
      case Op::kAddRow: {
        Node& a = node(n.in[0]);
        Node& r = node(n.in[1]);
        const size_t rows = n.val.rows(), cols = n.val.cols();
        if (a.needs_grad) {
          ensure_grad(a);
          for (size_t i = 0; i < g.data.size(); ++i) a.grad.data[i] += g.data[i];
        }
        if (r.needs_grad) {
          ensure_grad(r);
          for (size_t i = 0; i < rows; ++i) {
            for (size_t j = 0; j < cols; ++j) r.grad.data[j] += g.data[i * cols + j];
          }
        }
        break;
      }
      case Op::kRelu: {
        Node& a = node(n.in[0]);
        if (a.needs_grad) {
          ensure_grad(a);
          for (size_t i = 0; i < g.data.size(); ++i) {
            if (a.val.data[i] > 0.0) a.grad.data[i] += g.data[i];
          }
        }
        break;
      }
      case Op::kTanh: {
        Node& a = node(n.in[0]);
        if (a.needs_grad) {
          ensure_grad(a);
          for (size_t i = 0; i < g.data.size(); ++i) {
            const double t = n.val.data[i];
            a.grad.data[i] += (1.0 - t * t) * g.data[i];
          }
        }
        break;
      }
      case Op::kSoftmaxXent: {
        Node& a = node(n.in[0]);
        if (a.needs_grad) {
          ensure_grad(a);
          const size_t nn = a.val.rows(), c = a.val.cols();
          for (size_t i = 0; i < nn; ++i) {
            const double gi = g.data[i];
            if (gi == 0.0) continue;
            for (size_t j = 0; j < c; ++j) {
              double p = n.aux[i * c + j];
              if (static_cast<size_t>(n.labels[i]) == j) p -= 1.0;
              a.grad.data[i * c + j] += gi * p;
            }
          }
        }
        break;
      }
      case Op::kClipMax: {
        Node& a = node(n.in[0]);
        if (a.needs_grad) {
          ensure_grad(a);
          for (size_t i = 0; i < g.data.size(); ++i) {
            if (a.val.data[i] <= n.c) a.grad.data[i] += g.data[i];
          }
        }
        break;
      }
      case Op::kMean: {
        Node& a = node(n.in[0]);
        if (a.needs_grad) {
          ensure_grad(a);
          const double gi = g.data[0] / static_cast<double>(a.val.size());
          for (double& v : a.grad.data) v += gi;
        }
        break;
      }
      case Op::kSumSquares: {
        Node& a = node(n.in[0]);
        if (a.needs_grad) {
          ensure_grad(a);
          const double gi = g.data[0];
          for (size_t i = 0; i < a.val.data.size(); ++i) {
            a.grad.data[i] += 2.0 * a.val.data[i] * gi;
          }
        }
        break;
      }
      case Op::kW2SqRef: {
        Node& a = node(n.in[0]);
        if (a.needs_grad) {
          ensure_grad(a);
          const double gi = g.data[0];
          const size_t nn = a.val.size();
          for (size_t k = 0; k < nn; ++k) {
            const size_t src = n.perm[k];
            a.grad.data[src] += gi * 2.0 * (a.val.data[src] - n.aux[k]) / static_cast<double>(nn);
          }
        }
        break;
      }
      case Op::kAdd: {
        for (int s = 0; s < 2; ++s) {
          Node& a = node(n.in[s]);
          if (!a.needs_grad) continue;
          ensure_grad(a);
          for (size_t i = 0; i < g.data.size(); ++i) a.grad.data[i] += g.data[i];
        }
        break;
      }
      case Op::kSub: {
        Node& a = node(n.in[0]);
        Node& b = node(n.in[1]);
        if (a.needs_grad) {
          ensure_grad(a);
          for (size_t i = 0; i < g.data.size(); ++i) a.grad.data[i] += g.data[i];
        }
        if (b.needs_grad) {
          ensure_grad(b);
          for (size_t i = 0; i < g.data.size(); ++i) b.grad.data[i] -= g.data[i];
        }
        break;
      }
      case Op::kMul: {
        Node& a = node(n.in[0]);
        Node& b = node(n.in[1]);
        if (a.needs_grad) {
          ensure_grad(a);
          for (size_t i = 0; i < g.data.size(); ++i) a.grad.data[i] += g.data[i] * b.val.data[i];
        }
        if (b.needs_grad) {
          ensure_grad(b);
          for (size_t i = 0; i < g.data.size(); ++i) b.grad.data[i] += g.data[i] * a.val.data[i];
        }
        break;
      }
      case Op::kScale: {
        Node& a = node(n.in[0]);
        if (a.needs_grad) {
          ensure_grad(a);
          for (size_t i = 0; i < g.data.size(); ++i) a.grad.data[i] += n.c * g.data[i];
        }
        break;
      }
      case Op::kAddConst: {
        Node& a = node(n.in[0]);
        if (a.needs_grad) {
          ensure_grad(a);
          for (size_t i = 0; i < g.data.size(); ++i) a.grad.data[i] += g.data[i];
        }
        break;
      }
      case Op::kSquare: {
        Node& a = node(n.in[0]);
        if (a.needs_grad) {
          ensure_grad(a);
          for (size_t i = 0; i < g.data.size(); ++i) {
            a.grad.data[i] += 2.0 * a.val.data[i] * g.data[i];
          }
        }
        break;
      }
    }
  }
}

}  // namespace wforget::ad
