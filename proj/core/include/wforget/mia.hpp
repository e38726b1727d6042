#pragma once

#include <cstddef>
#include <vector>

#include "wforget/dataset.hpp"
#include "wforget/mlp.hpp"

namespace wforget::eval {

// Max-softmax confidence per listed row.
std::vector<double> max_softmax_confidences(const Mlp& mlp, const ParamVector& theta,
                                            const datagen::Dataset& ds,
                                            const std::vector<std::size_t>& rows);

struct MiaResult {
  double threshold = 0.0;          // member <=> confidence >= threshold
  double balanced_accuracy = 0.0;  // of the fitted member/non-member split
  double efficacy = 0.0;           // fraction of forget-train rows called non-member
};

// Fits the balanced-accuracy-optimal confidence threshold separating members
// from non-members; candidates are every observed confidence plus +infinity,
// and ties prefer the smallest threshold. With no confidence gap this
// degenerates to the all-member labeling (efficacy 0), which is the
// documented behavior. Throws DomainError when either side is empty.
MiaResult fit_confidence_threshold(const std::vector<double>& member,
                                   const std::vector<double>& nonmember);

// Membership-inference efficacy: the threshold attack is fit on retain-train
// (member) vs retain-test (non-member) confidences, then efficacy is the
// fraction of forget-train samples it classifies as non-members.
MiaResult mia_efficacy(const Mlp& mlp, const ParamVector& theta, const datagen::Dataset& ds);

}  // namespace wforget::eval
