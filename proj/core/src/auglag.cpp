#include "wforget/auglag.hpp"

#include <algorithm>
#include <cmath>

#include "wforget/errors.hpp"
#include "wforget/loaders.hpp"
#include "wforget/loss_samples.hpp"
#include "wforget/rng.hpp"

namespace wforget::unlearn {

ad::NodeId forgetting_objective(ad::Tape& tape, ad::NodeId forget_loss, ad::NodeId constraint_loss,
                                double lambda, double mu, double reference) {
  if (!(mu > 0.0)) throw DomainError("forgetting objective: mu must be positive");
  const ad::NodeId gap = tape.add_const(constraint_loss, -reference);
  const ad::NodeId linear = tape.scale(gap, lambda);
  const ad::NodeId penalty = tape.scale(tape.square(gap), mu / 2.0);
  return tape.add(tape.add(tape.scale(forget_loss, -1.0), linear), penalty);
}

double forgetting_objective_value(double forget_loss, double constraint_loss, double lambda,
                                  double mu, double reference) {
  if (!(mu > 0.0)) throw DomainError("forgetting objective: mu must be positive");
  const double gap = constraint_loss - reference;
  return -forget_loss + lambda * gap + (mu / 2.0) * gap * gap;
}

ForgettingResult run_forgetting_stage(const Mlp& mlp, const ParamVector& theta0,
                                      const datagen::Dataset& ds, const ForgettingConfig& cfg) {
  using datagen::Split;
  using datagen::Subset;
  if (!(cfg.mu > 0.0)) throw DomainError("forgetting stage: mu must be positive");
  if (!(cfg.clip_cap > 0.0)) throw DomainError("forgetting stage: clip cap must be positive");
  if (theta0.size() != mlp.num_params()) {
    throw ShapeError("forgetting stage: parameter vector of length " +
                     std::to_string(theta0.size()) + " for a model with " +
                     std::to_string(mlp.num_params()) + " parameters");
  }

  const std::vector<size_t> forget_rows = ds.indices(Subset::kForget, Split::kTrain);
  std::vector<size_t> constraint_rows = ds.indices(Subset::kRemote, Split::kTrain);
  if (cfg.constrain_adjacent) {
    constraint_rows = ds.retain_train_indices();
  }
  if (forget_rows.empty()) throw DomainError("forgetting stage: empty forget train set");
  if (constraint_rows.empty()) throw DomainError("forgetting stage: empty constraint set");

  ForgettingResult result;
  result.theta_bar = theta0;
  result.constraint_reference = lossdist::mean_ce_value(mlp, theta0, ds, constraint_rows);

  BatchLoader forget_loader(forget_rows, cfg.forget_batch_size, derive_seed(cfg.seed, 0));
  BatchLoader constraint_loader(constraint_rows, cfg.constraint_batch_size,
                                derive_seed(cfg.seed, 1));
  Optimizer opt(cfg.optimizer, cfg.eta1, mlp.num_params());

  const size_t steps = cfg.epochs * forget_loader.steps_per_epoch();
  result.trace.reserve(steps);
  double lambda = 0.0;

  for (size_t step = 0; step < steps; ++step) {
    const std::vector<size_t> batch_f = forget_loader.next();
    const std::vector<size_t> batch_c = constraint_loader.next();

    ad::Tape tape;
    std::vector<ad::NodeId> params_f, params_c;
    const ad::NodeId loss_f =
        lossdist::mean_ce(tape, mlp, result.theta_bar, ds, batch_f, &params_f, cfg.clip_cap);
    const ad::NodeId loss_c =
        lossdist::mean_ce(tape, mlp, result.theta_bar, ds, batch_c, &params_c);
    const ad::NodeId objective = forgetting_objective(tape, loss_f, loss_c, lambda, cfg.mu,
                                                      result.constraint_reference);
    tape.backward(objective);

    // The two forward passes hold separate parameter leaves; the total
    // gradient is the sum of both contributions.
    GradVector grad = mlp.collect_grad(tape, params_f);
    const GradVector grad_c = mlp.collect_grad(tape, params_c);
    for (size_t i = 0; i < grad.size(); ++i) grad[i] += grad_c[i];
    opt.step(result.theta_bar, grad);

    // Multiplier update from the constraint violation at the new parameters,
    // measured on the batch that produced the step.
    const double observed = lossdist::mean_ce_value(mlp, result.theta_bar, ds, batch_c);
    const double violation = observed - result.constraint_reference;
    lambda += cfg.mu * violation;

    ForgettingStep rec;
    rec.forget_loss = tape.value(loss_f).data[0];
    rec.constraint_loss = observed;
    rec.violation = violation;
    rec.lambda_after = lambda;
    if (!std::isfinite(rec.forget_loss) || !std::isfinite(rec.constraint_loss) ||
        !std::isfinite(lambda)) {
      throw DomainError("forgetting stage: non-finite loss at step " + std::to_string(step + 1) +
                        " of " + std::to_string(steps) + "; lower eta1 or mu");
    }
    result.trace.push_back(rec);
  }
  return result;
}

}  // namespace wforget::unlearn
