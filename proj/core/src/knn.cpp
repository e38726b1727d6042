#include "wforget/knn.hpp"

#include <algorithm>
#include <cmath>

#include "wforget/errors.hpp"

namespace wforget::datagen {

Dataset knn_adjacency(const Dataset& ds, const Mlp& mlp, const ParamVector& theta,
                      const KnnConfig& cfg) {
  std::vector<size_t> queries = ds.indices(Subset::kForget);
  std::vector<size_t> retained;
  for (size_t i = 0; i < ds.n(); ++i) {
    if (ds.subset[i] != Subset::kForget) retained.push_back(i);
  }
  if (queries.empty()) throw DomainError("knn_adjacency: no forget samples");
  if (cfg.k == 0 || cfg.k > retained.size()) {
    throw DomainError("knn_adjacency: k = " + std::to_string(cfg.k) + " with " +
                      std::to_string(retained.size()) + " retained samples");
  }
  if (cfg.top_fraction < 0.0 || cfg.top_fraction > 1.0) {
    throw DomainError("knn_adjacency: top_fraction must lie in [0, 1]");
  }

  Tensor all = ds.gather_features([&] {
    std::vector<size_t> idx(ds.n());
    for (size_t i = 0; i < ds.n(); ++i) idx[i] = i;
    return idx;
  }());
  Tensor emb = mlp.hidden_features(theta, all);
  const size_t fdim = emb.cols();

  std::vector<size_t> votes(ds.n(), 0);
  std::vector<std::pair<double, size_t>> dist(retained.size());
  for (size_t q : queries) {
    const double* qf = &emb.data[q * fdim];
    for (size_t r = 0; r < retained.size(); ++r) {
      const double* rf = &emb.data[retained[r] * fdim];
      double d2 = 0.0;
      for (size_t j = 0; j < fdim; ++j) {
        const double diff = qf[j] - rf[j];
        d2 += diff * diff;
      }
      dist[r] = {d2, retained[r]};
    }
    std::partial_sort(dist.begin(), dist.begin() + cfg.k, dist.end());
    for (size_t r = 0; r < cfg.k; ++r) ++votes[dist[r].second];
  }

  const size_t promote =
      static_cast<size_t>(std::llround(cfg.top_fraction * double(retained.size())));
  std::vector<size_t> order = retained;
  std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    if (votes[a] != votes[b]) return votes[a] > votes[b];
    return a < b;
  });

  Dataset out = ds;
  for (size_t r = 0; r < order.size(); ++r) {
    out.subset[order[r]] = r < promote ? Subset::kAdjacent : Subset::kRemote;
  }
  out.meta.params.emplace_back("knn_k", std::to_string(cfg.k));
  out.meta.params.emplace_back("knn_top_fraction", std::to_string(cfg.top_fraction));
  out.validate();
  return out;
}

}  // namespace wforget::datagen
