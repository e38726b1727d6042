#pragma once

#include <cstddef>

#include "wforget/dataset.hpp"
#include "wforget/mlp.hpp"

namespace wforget::eval {

// Closed-form certificate on the forget-set accuracy of the anchored
// recovery stage:
//
//   bound = (1 / (m - log n)^2) * ((1-alpha)/alpha + sqrt(eps/alpha))^2
//
// where m is the per-sample loss floor on the forget set at the stage-1
// parameters, eps the observed full-batch anchored-loss drift, alpha the
// anchor weight, and n the number of classes. Requires m > log n and
// alpha > 0 (DomainError otherwise); eps must be >= 0.
double prop2_bound(double m, std::size_t num_classes, double alpha, double eps);

// Outcome of checking the certificate against a concrete parameter vector.
// When the preconditions fail (alpha == 0 or the loss floor does not clear
// log n) the certificate is simply inapplicable: applicable == false and
// passed stays true, because a conditional statement with a false premise
// asserts nothing.
struct Prop2Report {
  bool applicable = false;
  double m = 0.0;           // min per-sample forget-train CE at theta_bar
  double epsilon = 0.0;     // |anchored(theta) - anchored(theta_bar)|, full batch
  double bound = 0.0;       // certificate value when applicable
  double forget_accuracy = 0.0;  // against training labels (the labels in the loss)
  bool passed = true;
};

// Evaluates the certificate for theta, anchored at theta_bar, on the forget
// train rows. Accuracy here scores the *training* labels: those are the
// labels inside the bounded loss, so a correct prediction forces loss
// <= log n. A small numerical slack (1e-9) guards the comparison.
Prop2Report prop2_runtime_check(const Mlp& mlp, const ParamVector& theta,
                                const ParamVector& theta_bar, const datagen::Dataset& ds,
                                double alpha);

}  // namespace wforget::eval
