#pragma once

#include <cstdint>
#include <vector>

#include "wforget/dataset.hpp"
#include "wforget/mlp.hpp"
#include "wforget/optimizer.hpp"
#include "wforget/tape.hpp"

namespace wforget::unlearn {

struct ForgettingConfig {
  double mu = 10.0;        // penalty coefficient
  double clip_cap = 10.0;  // per-sample cap on the forget loss
  double eta1 = 1e-2;
  size_t epochs = 1;  // passes over the forget train set
  size_t forget_batch_size = 32;
  size_t constraint_batch_size = 64;
  OptKind optimizer = OptKind::kSgd;
  // When set, the constraint covers the whole retain set (adjacent + remote)
  // instead of the remote subset alone.
  bool constrain_adjacent = false;
  uint64_t seed = 0;
};

struct ForgettingStep {
  double forget_loss = 0.0;      // clipped batch mean before the step
  double constraint_loss = 0.0;  // constraint batch mean at the updated parameters
  double violation = 0.0;        // constraint_loss - reference
  double lambda_after = 0.0;
};

struct ForgettingResult {
  ParamVector theta_bar;
  double constraint_reference = 0.0;  // full constraint-set loss at theta0, frozen
  std::vector<ForgettingStep> trace;
};

// Scalar objective whose descent raises the (clipped) forget loss while the
// multiplier and penalty terms hold the constraint-set loss at its reference:
// -L_f + lambda (L_c - ref) + (mu / 2) (L_c - ref)^2.
ad::NodeId forgetting_objective(ad::Tape& tape, ad::NodeId forget_loss, ad::NodeId constraint_loss,
                                double lambda, double mu, double reference);

// The same arithmetic on plain numbers.
double forgetting_objective_value(double forget_loss, double constraint_loss, double lambda,
                                  double mu, double reference);

// Deliberate forgetting from a trained model: per step, one forget batch and
// one constraint batch drive a descent step on the objective, then the
// multiplier absorbs the constraint violation measured at the new parameters
// on the same constraint batch (negative violations shrink it).
ForgettingResult run_forgetting_stage(const Mlp& mlp, const ParamVector& theta0,
                                      const datagen::Dataset& ds, const ForgettingConfig& cfg);

}  // namespace wforget::unlearn
