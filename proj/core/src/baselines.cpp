#include "wforget/baselines.hpp"

#include "wforget/errors.hpp"
#include "wforget/loaders.hpp"
#include "wforget/loss_samples.hpp"
#include "wforget/tape.hpp"

namespace wforget::unlearn {

using datagen::Split;
using datagen::Subset;

namespace {

// Shared minibatch loop; sign -1 turns the descent into an ascent.
ParamVector run_loop(const Mlp& mlp, ParamVector theta, const datagen::Dataset& ds,
                     const std::vector<size_t>& rows, const TrainConfig& cfg, double sign,
                     bool forbid_forget, std::vector<double>* loss_trace) {
  if (rows.empty()) throw DomainError("training loop: empty row set");
  if (theta.size() != mlp.num_params()) {
    throw ShapeError("training loop: parameter vector of length " + std::to_string(theta.size()) +
                     " for a model with " + std::to_string(mlp.num_params()) + " parameters");
  }
  BatchLoader loader(rows, cfg.batch_size, cfg.seed);
  Optimizer opt(cfg.optimizer, cfg.lr, mlp.num_params());
  const size_t steps = cfg.epochs * loader.steps_per_epoch();
  for (size_t step = 0; step < steps; ++step) {
    const std::vector<size_t>& batch = loader.next();
    if (forbid_forget) {
      for (size_t row : batch) {
        if (ds.subset[row] == Subset::kForget) {
          throw DomainError("training loop: forget-tagged row " + std::to_string(row) +
                            " reached a retain-only batch");
        }
      }
    }
    ad::Tape tape;
    std::vector<ad::NodeId> params;
    ad::NodeId objective = lossdist::mean_ce(tape, mlp, theta, ds, batch, &params);
    if (loss_trace) loss_trace->push_back(tape.value(objective).data[0]);
    if (sign != 1.0) objective = tape.scale(objective, sign);
    tape.backward(objective);
    opt.step(theta, mlp.collect_grad(tape, params));
  }
  return theta;
}

}  // namespace

ParamVector train_on_rows(const Mlp& mlp, ParamVector theta, const datagen::Dataset& ds,
                          const std::vector<size_t>& rows, const TrainConfig& cfg,
                          bool forbid_forget, std::vector<double>* loss_trace) {
  return run_loop(mlp, std::move(theta), ds, rows, cfg, 1.0, forbid_forget, loss_trace);
}

ParamVector train_original(const Mlp& mlp, ParamVector theta_init, const datagen::Dataset& ds,
                           const TrainConfig& cfg, std::vector<double>* loss_trace) {
  return run_loop(mlp, std::move(theta_init), ds, ds.train_indices(), cfg, 1.0, false,
                  loss_trace);
}

ParamVector baseline_gradient_ascent(const Mlp& mlp, ParamVector theta,
                                     const datagen::Dataset& ds, const TrainConfig& cfg) {
  return run_loop(mlp, std::move(theta), ds, ds.indices(Subset::kForget, Split::kTrain), cfg,
                  -1.0, false, nullptr);
}

ParamVector baseline_finetune(const Mlp& mlp, ParamVector theta, const datagen::Dataset& ds,
                              const TrainConfig& cfg) {
  return run_loop(mlp, std::move(theta), ds, ds.retain_train_indices(), cfg, 1.0, true, nullptr);
}

ParamVector baseline_retrain(const Mlp& mlp, const datagen::Dataset& ds, const TrainConfig& cfg,
                             uint64_t init_seed) {
  return run_loop(mlp, mlp.init_params(init_seed), ds, ds.retain_train_indices(), cfg, 1.0, true,
                  nullptr);
}

}  // namespace wforget::unlearn
