#include "wforget/histogram.hpp"

#include <algorithm>
#include <cstdio>
#include <numeric>

#include "wforget/errors.hpp"
#include "wforget/loss_samples.hpp"
#include "wforget/serial.hpp"

namespace wforget::eval {

std::size_t Histogram::total() const {
  return std::accumulate(counts.begin(), counts.end(), static_cast<std::size_t>(0));
}

Histogram compute_histogram(const std::vector<double>& values, std::size_t bins) {
  if (bins == 0) throw DomainError("compute_histogram: bins must be >= 1");
  if (values.empty()) throw DomainError("compute_histogram: no values");
  for (const double v : values) {
    if (v < 0.0) throw DomainError("compute_histogram: negative value " + std::to_string(v));
  }
  const double hi_raw = *std::max_element(values.begin(), values.end());
  const double hi = hi_raw > 0.0 ? hi_raw : 1.0;
  const double width = hi / static_cast<double>(bins);

  Histogram h;
  h.edges.resize(bins + 1);
  for (std::size_t i = 0; i <= bins; ++i) h.edges[i] = width * static_cast<double>(i);
  h.edges[bins] = hi;  // exact top edge regardless of rounding
  h.counts.assign(bins, 0);
  for (const double v : values) {
    auto idx = static_cast<std::size_t>(v / width);
    if (idx >= bins) idx = bins - 1;  // top edge inclusive
    ++h.counts[idx];
  }
  return h;
}

std::string histogram_csv(const Histogram& h) {
  std::string out = "bin_left,bin_right,count\n";
  char buf[96];
  for (std::size_t i = 0; i < h.counts.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%zu\n", h.edges[i], h.edges[i + 1],
                  h.counts[i]);
    out += buf;
  }
  return out;
}

Histogram export_loss_histogram(const Mlp& mlp, const ParamVector& theta,
                                const datagen::Dataset& ds, datagen::Subset subset,
                                std::size_t bins, const std::string& path) {
  const std::vector<std::size_t> rows = ds.indices(subset, datagen::Split::kTrain);
  if (rows.empty()) throw DomainError("export_loss_histogram: empty subset");
  const Histogram h =
      compute_histogram(lossdist::per_sample_losses(mlp, theta, ds, rows), bins);
  atomic_write_file(path, histogram_csv(h));
  return h;
}

}  // namespace wforget::eval
