#include "wforget/prop2.hpp"

#include <cmath>
#include <vector>

#include "wforget/errors.hpp"
#include "wforget/loss_samples.hpp"
#include "wforget/tape.hpp"

namespace wforget::eval {

double prop2_bound(double m, std::size_t num_classes, double alpha, double eps) {
  if (num_classes == 0) throw DomainError("prop2_bound: zero classes");
  if (alpha <= 0.0 || alpha > 1.0)
    throw DomainError("prop2_bound: alpha must be in (0,1], got " + std::to_string(alpha));
  if (eps < 0.0) throw DomainError("prop2_bound: negative eps");
  const double logn = std::log(static_cast<double>(num_classes));
  if (!(m > logn))
    throw DomainError("prop2_bound: loss floor " + std::to_string(m) +
                      " does not exceed log(n) = " + std::to_string(logn));
  const double denom = m - logn;
  const double term = (1.0 - alpha) / alpha + std::sqrt(eps / alpha);
  return (term * term) / (denom * denom);
}

Prop2Report prop2_runtime_check(const Mlp& mlp, const ParamVector& theta,
                                const ParamVector& theta_bar, const datagen::Dataset& ds,
                                double alpha) {
  Prop2Report rep;
  const std::vector<std::size_t> rows =
      ds.indices(datagen::Subset::kForget, datagen::Split::kTrain);
  if (rows.empty()) throw DomainError("prop2_runtime_check: empty forget train set");

  const lossdist::LossAnchor anchor = lossdist::capture_anchor(mlp, theta_bar, ds);
  rep.m = anchor.min_loss();

  const double logn = std::log(static_cast<double>(ds.num_classes));
  if (alpha <= 0.0 || !(rep.m > logn)) {
    rep.applicable = false;
    return rep;  // conditional certificate with a false premise: nothing to check
  }

  const double at_theta =
      lossdist::anchored_loss_value(mlp, theta, ds, rows, anchor, alpha).loss;
  const double at_bar =
      lossdist::anchored_loss_value(mlp, theta_bar, ds, rows, anchor, alpha).loss;
  rep.epsilon = std::fabs(at_theta - at_bar);
  rep.bound = prop2_bound(rep.m, ds.num_classes, alpha, rep.epsilon);

  const Tensor logits = mlp.logits(theta, ds.gather_features(rows));
  const std::vector<int> pred = ad::argmax_rows(logits);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (pred[i] == ds.labels[rows[i]]) ++hits;
  }
  rep.forget_accuracy = static_cast<double>(hits) / static_cast<double>(rows.size());

  rep.applicable = true;
  rep.passed = rep.forget_accuracy <= rep.bound + 1e-9;
  return rep;
}

}  // namespace wforget::eval
