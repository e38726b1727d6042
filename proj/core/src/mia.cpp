#include "wforget/mia.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wforget/errors.hpp"

namespace wforget::eval {

std::vector<double> max_softmax_confidences(const Mlp& mlp, const ParamVector& theta,
                                            const datagen::Dataset& ds,
                                            const std::vector<std::size_t>& rows) {
  const Tensor logits = mlp.logits(theta, ds.gather_features(rows));
  const std::size_t c = logits.cols();
  std::vector<double> out(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double* row = &logits.data[i * c];
    const double hi = *std::max_element(row, row + c);
    double denom = 0.0;
    for (std::size_t j = 0; j < c; ++j) denom += std::exp(row[j] - hi);
    out[i] = 1.0 / denom;
  }
  return out;
}

MiaResult fit_confidence_threshold(const std::vector<double>& member,
                                   const std::vector<double>& nonmember) {
  if (member.empty() || nonmember.empty())
    throw DomainError("fit_confidence_threshold: need both member and non-member samples");

  std::vector<double> ms = member;
  std::vector<double> ns = nonmember;
  std::sort(ms.begin(), ms.end());
  std::sort(ns.begin(), ns.end());

  std::vector<double> candidates = ms;
  candidates.insert(candidates.end(), ns.begin(), ns.end());
  candidates.push_back(std::numeric_limits<double>::infinity());
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  MiaResult best;
  best.balanced_accuracy = -1.0;
  for (const double t : candidates) {
    const auto members_below = static_cast<std::size_t>(
        std::lower_bound(ms.begin(), ms.end(), t) - ms.begin());
    const auto nonmembers_below = static_cast<std::size_t>(
        std::lower_bound(ns.begin(), ns.end(), t) - ns.begin());
    const double tpr =
        static_cast<double>(ms.size() - members_below) / static_cast<double>(ms.size());
    const double tnr = static_cast<double>(nonmembers_below) / static_cast<double>(ns.size());
    const double ba = 0.5 * (tpr + tnr);
    if (ba > best.balanced_accuracy) {  // strict: ties keep the smallest threshold
      best.balanced_accuracy = ba;
      best.threshold = t;
    }
  }
  return best;
}

MiaResult mia_efficacy(const Mlp& mlp, const ParamVector& theta, const datagen::Dataset& ds) {
  using datagen::Split;
  using datagen::Subset;
  const std::vector<std::size_t> member_rows = ds.retain_train_indices();
  std::vector<std::size_t> nonmember_rows = ds.indices(Subset::kAdjacent, Split::kTest);
  const std::vector<std::size_t> remote_test = ds.indices(Subset::kRemote, Split::kTest);
  nonmember_rows.insert(nonmember_rows.end(), remote_test.begin(), remote_test.end());

  MiaResult res = fit_confidence_threshold(
      max_softmax_confidences(mlp, theta, ds, member_rows),
      max_softmax_confidences(mlp, theta, ds, nonmember_rows));

  const std::vector<std::size_t> forget_rows = ds.indices(Subset::kForget, Split::kTrain);
  if (forget_rows.empty()) throw DomainError("mia_efficacy: empty forget train set");
  const std::vector<double> fc = max_softmax_confidences(mlp, theta, ds, forget_rows);
  std::size_t nonmember_calls = 0;
  for (const double c : fc) {
    if (c < res.threshold) ++nonmember_calls;
  }
  res.efficacy = static_cast<double>(nonmember_calls) / static_cast<double>(fc.size());
  return res;
}

}  // namespace wforget::eval
