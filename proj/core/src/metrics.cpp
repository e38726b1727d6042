#include "wforget/metrics.hpp"

#include <vector>

#include "wforget/loss_samples.hpp"
#include "wforget/tape.hpp"

namespace wforget::eval {

SubsetMetrics evaluate(const Mlp& mlp, const ParamVector& theta, const datagen::Dataset& ds) {
  SubsetMetrics out;
  for (const datagen::Subset s :
       {datagen::Subset::kForget, datagen::Subset::kAdjacent, datagen::Subset::kRemote}) {
    for (const datagen::Split sp : {datagen::Split::kTrain, datagen::Split::kTest}) {
      const std::vector<std::size_t> rows = ds.indices(s, sp);
      if (rows.empty()) continue;

      const Tensor logits = mlp.logits(theta, ds.gather_features(rows));
      const std::vector<int> pred = ad::argmax_rows(logits);
      std::size_t hits = 0;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (pred[i] == ds.scoring_label(rows[i])) ++hits;
      }

      MetricCell cell;
      cell.count = rows.size();
      cell.accuracy = static_cast<double>(hits) / static_cast<double>(rows.size());
      cell.mean_loss = lossdist::mean_ce_value(mlp, theta, ds, rows);
      out.at(s, sp) = cell;
    }
  }
  return out;
}

}  // namespace wforget::eval
