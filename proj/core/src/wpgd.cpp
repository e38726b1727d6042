#include "wforget/wpgd.hpp"

#include <algorithm>
#include <cmath>

#include "wforget/errors.hpp"
#include "wforget/loaders.hpp"
#include "wforget/projection.hpp"
#include "wforget/rng.hpp"
#include "wforget/tape.hpp"
#include "wforget/vecmath.hpp"

namespace wforget::unlearn {

using datagen::Split;
using datagen::Subset;

double subset_accuracy(const Mlp& mlp, const ParamVector& theta, const datagen::Dataset& ds,
                       const std::vector<size_t>& rows) {
  if (rows.empty()) throw DomainError("subset_accuracy: empty row set");
  const Tensor logits = mlp.logits(theta, ds.gather_features(rows));
  const std::vector<int> pred = ad::argmax_rows(logits);
  size_t hits = 0;
  for (size_t i = 0; i < rows.size(); ++i) {
    if (pred[i] == ds.scoring_label(rows[i])) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

namespace {

GradVector grad_of_mean_ce(const Mlp& mlp, const ParamVector& theta, const datagen::Dataset& ds,
                           const std::vector<size_t>& rows) {
  ad::Tape tape;
  std::vector<ad::NodeId> params;
  const ad::NodeId loss = lossdist::mean_ce(tape, mlp, theta, ds, rows, &params);
  tape.backward(loss);
  return mlp.collect_grad(tape, params);
}

RecoverySnapshot snapshot(const Mlp& mlp, const ParamVector& theta, const datagen::Dataset& ds,
                          const std::vector<size_t>& forget_rows,
                          const std::vector<size_t>& adjacent_rows,
                          const std::vector<size_t>& remote_rows,
                          const lossdist::LossAnchor& anchor, double alpha) {
  RecoverySnapshot s;
  const lossdist::AnchoredLossValue anchored =
      lossdist::anchored_loss_value(mlp, theta, ds, anchor.rows(), anchor, alpha);
  s.forget_loss = lossdist::mean_ce_value(mlp, theta, ds, forget_rows);
  s.adjacent_loss = lossdist::mean_ce_value(mlp, theta, ds, adjacent_rows);
  s.remote_loss = lossdist::mean_ce_value(mlp, theta, ds, remote_rows);
  s.forget_acc = subset_accuracy(mlp, theta, ds, forget_rows);
  s.adjacent_acc = subset_accuracy(mlp, theta, ds, adjacent_rows);
  s.remote_acc = subset_accuracy(mlp, theta, ds, remote_rows);
  s.w2sq_reference = anchored.w2sq;
  return s;
}

}  // namespace

RecoveryResult run_recovery_stage(const Mlp& mlp, const ParamVector& theta_bar,
                                  const datagen::Dataset& ds, const RecoveryConfig& cfg) {
  if (!(cfg.alpha >= 0.0 && cfg.alpha <= 1.0)) {
    throw DomainError("recovery stage: alpha must lie in [0, 1]");
  }
  if (!(cfg.eta2 > 0.0)) throw DomainError("recovery stage: eta2 must be positive");
  if (cfg.accumulation_batches == 0) {
    throw DomainError("recovery stage: accumulation_batches must be positive");
  }
  if (!(cfg.projection_tolerance > 0.0)) {
    throw DomainError("recovery stage: projection tolerance must be positive");
  }
  if (theta_bar.size() != mlp.num_params()) {
    throw ShapeError("recovery stage: parameter vector of length " +
                     std::to_string(theta_bar.size()) + " for a model with " +
                     std::to_string(mlp.num_params()) + " parameters");
  }

  const std::vector<size_t> forget_rows = ds.indices(Subset::kForget, Split::kTrain);
  const std::vector<size_t> adjacent_rows = ds.indices(Subset::kAdjacent, Split::kTrain);
  const std::vector<size_t> remote_rows = ds.indices(Subset::kRemote, Split::kTrain);
  if (forget_rows.empty()) throw DomainError("recovery stage: empty forget train set");
  if (adjacent_rows.empty()) throw DomainError("recovery stage: empty adjacent train set");
  if (remote_rows.empty()) throw DomainError("recovery stage: empty remote train set");

  RecoveryResult result;
  result.theta_final = theta_bar;
  result.reference = lossdist::capture_anchor(mlp, theta_bar, ds);
  result.initial = snapshot(mlp, theta_bar, ds, forget_rows, adjacent_rows, remote_rows,
                            result.reference, cfg.alpha);

  BatchLoader forget_loader(forget_rows, cfg.forget_batch_size, derive_seed(cfg.seed, 0));
  BatchLoader adjacent_loader(adjacent_rows, cfg.adjacent_batch_size, derive_seed(cfg.seed, 1));
  BatchLoader remote_loader(remote_rows, cfg.remote_batch_size, derive_seed(cfg.seed, 2));

  result.trace.reserve(cfg.steps);
  for (size_t step = 0; step < cfg.steps; ++step) {
    // Protected direction 1: the anchored forget gradient.
    GradVector g_forget;
    {
      ad::Tape tape;
      std::vector<ad::NodeId> params;
      const lossdist::AnchoredLossNodes nodes = lossdist::anchored_loss(
          tape, mlp, result.theta_final, ds, forget_loader.next(), result.reference, cfg.alpha,
          &params);
      tape.backward(nodes.loss);
      g_forget = mlp.collect_grad(tape, params);
    }

    // Protected direction 2: the remote gradient, averaged over a fixed
    // number of consecutive batches in draw order.
    GradVector g_remote(mlp.num_params(), 0.0);
    for (size_t a = 0; a < cfg.accumulation_batches; ++a) {
      const GradVector g =
          grad_of_mean_ce(mlp, result.theta_final, ds, remote_loader.next());
      axpy(1.0, g, g_remote);
    }
    scale_inplace(g_remote, 1.0 / static_cast<double>(cfg.accumulation_batches));

    // Descent direction: adjacent gradient stripped of both protected
    // components.
    const GradVector g_adjacent =
        grad_of_mean_ce(mlp, result.theta_final, ds, adjacent_loader.next());
    const ProjectionBasis basis = build_basis(g_forget, g_remote, cfg.projection_tolerance);
    const GradVector direction = project_complement(g_adjacent, basis);

    double ortho = 0.0;
    for (const auto& e : basis.ortho) ortho = std::max(ortho, alignment_ratio(direction, e));
    // Audit against the raw gradients too; vectors below the basis norm floor
    // are numerically zero and carry no direction to test against.
    if (norm(g_forget) >= 1e-12) ortho = std::max(ortho, alignment_ratio(direction, g_forget));
    if (norm(g_remote) >= 1e-12) ortho = std::max(ortho, alignment_ratio(direction, g_remote));

    axpy(-cfg.eta2, direction, result.theta_final);

    RecoveryStep rec;
    rec.after = snapshot(mlp, result.theta_final, ds, forget_rows, adjacent_rows, remote_rows,
                         result.reference, cfg.alpha);
    rec.basis_rank = basis.rank;
    rec.ortho_ratio = ortho;
    if (!std::isfinite(rec.after.forget_loss) || !std::isfinite(rec.after.adjacent_loss) ||
        !std::isfinite(rec.after.remote_loss)) {
      throw DomainError("recovery stage: non-finite loss at step " + std::to_string(step + 1) +
                        " of " + std::to_string(cfg.steps) + "; lower eta2");
    }
    result.max_ortho_ratio = std::max(result.max_ortho_ratio, ortho);
    result.trace.push_back(rec);
    if (cfg.snapshot_every != 0 && (step + 1) % cfg.snapshot_every == 0) {
      result.snapshots.emplace_back(step + 1, result.theta_final);
    }
  }
  return result;
}

RecoveryResult run_recovery_stage_classical(const Mlp& mlp, const ParamVector& theta_bar,
                                            const datagen::Dataset& ds, RecoveryConfig cfg) {
  cfg.alpha = 0.0;
  return run_recovery_stage(mlp, theta_bar, ds, cfg);
}

}  // namespace wforget::unlearn
