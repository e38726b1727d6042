#include "wforget/loss_samples.hpp"

#include <algorithm>
#include <numeric>

#include "wforget/errors.hpp"

namespace wforget::lossdist {

std::vector<double> per_sample_losses(const Mlp& mlp, const ParamVector& theta,
                                      const datagen::Dataset& ds,
                                      const std::vector<size_t>& rows) {
  if (rows.empty()) throw DomainError("per_sample_losses: empty row set");
  const Tensor logits = mlp.logits(theta, ds.gather_features(rows));
  return ad::per_sample_cross_entropy(logits, ds.gather_labels(rows));
}

ad::NodeId mean_ce(ad::Tape& tape, const Mlp& mlp, const ParamVector& theta,
                   const datagen::Dataset& ds, const std::vector<size_t>& rows,
                   std::vector<ad::NodeId>* param_nodes, double cap) {
  if (rows.empty()) throw DomainError("mean_ce: empty row set");
  const ad::NodeId logits = mlp.forward(tape, theta, ds.gather_features(rows), param_nodes);
  ad::NodeId ps = tape.softmax_xent(logits, ds.gather_labels(rows));
  if (cap < std::numeric_limits<double>::infinity()) ps = tape.clip_max(ps, cap);
  return tape.mean(ps);
}

double mean_ce_value(const Mlp& mlp, const ParamVector& theta, const datagen::Dataset& ds,
                     const std::vector<size_t>& rows, double cap) {
  const std::vector<double> ps = per_sample_losses(mlp, theta, ds, rows);
  double sum = 0.0;
  for (double v : ps) sum += std::min(v, cap);
  return sum / static_cast<double>(ps.size());
}

LossAnchor::LossAnchor(std::vector<size_t> rows, std::vector<double> losses) {
  if (rows.size() != losses.size()) {
    throw ShapeError("LossAnchor: " + std::to_string(rows.size()) + " rows with " +
                     std::to_string(losses.size()) + " losses");
  }
  std::vector<size_t> order(rows.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) { return rows[a] < rows[b]; });
  rows_.reserve(rows.size());
  losses_.reserve(rows.size());
  for (size_t k : order) {
    if (!rows_.empty() && rows_.back() == rows[k]) {
      throw DomainError("LossAnchor: duplicate row " + std::to_string(rows[k]));
    }
    rows_.push_back(rows[k]);
    losses_.push_back(losses[k]);
  }
}

double LossAnchor::loss_for(size_t row) const {
  const auto it = std::lower_bound(rows_.begin(), rows_.end(), row);
  if (it == rows_.end() || *it != row) {
    throw DomainError("LossAnchor: row " + std::to_string(row) + " is not anchored");
  }
  return losses_[static_cast<size_t>(it - rows_.begin())];
}

std::vector<double> LossAnchor::losses_for(const std::vector<size_t>& rows) const {
  std::vector<double> out;
  out.reserve(rows.size());
  for (size_t r : rows) out.push_back(loss_for(r));
  return out;
}

double LossAnchor::min_loss() const {
  if (losses_.empty()) throw DomainError("LossAnchor: empty anchor has no minimum");
  return *std::min_element(losses_.begin(), losses_.end());
}

LossAnchor capture_anchor(const Mlp& mlp, const ParamVector& theta, const datagen::Dataset& ds) {
  std::vector<size_t> rows = ds.indices(datagen::Subset::kForget, datagen::Split::kTrain);
  std::vector<double> losses = per_sample_losses(mlp, theta, ds, rows);
  return LossAnchor(std::move(rows), std::move(losses));
}

namespace {

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw DomainError("anchored loss: alpha must lie in [0, 1]");
  }
}

}  // namespace

AnchoredLossNodes anchored_loss(ad::Tape& tape, const Mlp& mlp, const ParamVector& theta,
                                const datagen::Dataset& ds, const std::vector<size_t>& rows,
                                const LossAnchor& anchor, double alpha,
                                std::vector<ad::NodeId>* param_nodes) {
  check_alpha(alpha);
  if (rows.empty()) throw DomainError("anchored loss: empty batch");

  const ad::NodeId logits = mlp.forward(tape, theta, ds.gather_features(rows), param_nodes);
  const ad::NodeId ps = tape.softmax_xent(logits, ds.gather_labels(rows));
  const ad::NodeId mean_ce = tape.mean(ps);
  std::vector<int64_t> ids(rows.begin(), rows.end());
  const ad::NodeId w2sq = tape.w2sq_ref(ps, anchor.losses_for(rows), std::move(ids));
  const ad::NodeId loss = tape.add(tape.scale(mean_ce, 1.0 - alpha), tape.scale(w2sq, alpha));
  return {loss, mean_ce, w2sq};
}

AnchoredLossValue anchored_loss_value(const Mlp& mlp, const ParamVector& theta,
                                      const datagen::Dataset& ds, const std::vector<size_t>& rows,
                                      const LossAnchor& anchor, double alpha) {
  check_alpha(alpha);
  const std::vector<double> ps = per_sample_losses(mlp, theta, ds, rows);
  const size_t n = ps.size();

  double sum = 0.0;
  for (double v : ps) sum += v;
  const double mean_ce = sum / static_cast<double>(n);

  // Same pairing as the differentiable path: current losses ascending with row
  // ids breaking ties, reference losses ascending.
  std::vector<size_t> order(n);
  std::iota(order.begin(), order.end(), size_t{0});
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (ps[a] != ps[b]) return ps[a] < ps[b];
    return rows[a] < rows[b];
  });
  std::vector<double> ref = anchor.losses_for(rows);
  std::sort(ref.begin(), ref.end());
  double s = 0.0;
  for (size_t k = 0; k < n; ++k) {
    const double d = ps[order[k]] - ref[k];
    s += d * d;
  }
  const double w2sq = s / static_cast<double>(n);

  AnchoredLossValue out;
  out.mean_ce = mean_ce;
  out.w2sq = w2sq;
  out.loss = mean_ce * (1.0 - alpha) + w2sq * alpha;
  return out;
}

}  // namespace wforget::lossdist
