#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "wforget/dataset.hpp"
#include "wforget/mlp.hpp"

namespace wforget::eval {

// Fixed-width histogram: bins equal-width intervals over [lo, hi], with the
// top edge inclusive so every value in range is counted exactly once.
struct Histogram {
  std::vector<double> edges;        // bins + 1 ascending edges
  std::vector<std::size_t> counts;  // one per bin

  std::size_t total() const;
};

// Bins the values over [0, max(values)] (or [0, 1] when all values are 0).
// Values are losses, hence nonnegative; bins must be >= 1.
Histogram compute_histogram(const std::vector<double>& values, std::size_t bins);

// CSV with header "bin_left,bin_right,count", one row per bin.
std::string histogram_csv(const Histogram& h);

// Per-sample training-label cross entropy over the subset's train rows,
// binned and written atomically to path as CSV. Returns the histogram.
Histogram export_loss_histogram(const Mlp& mlp, const ParamVector& theta,
                                const datagen::Dataset& ds, datagen::Subset subset,
                                std::size_t bins, const std::string& path);

}  // namespace wforget::eval
