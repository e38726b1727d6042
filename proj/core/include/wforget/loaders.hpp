#pragma once

#include <cstdint>
#include <vector>

#include "wforget/rng.hpp"

namespace wforget::unlearn {

// Cycles through a fixed row set in seeded shuffled order. Each pass hands out
// ceil(n / batch_size) batches (the last one may be short) and reshuffles at
// every pass boundary, so the sequence of batches is a pure function of
// (rows, batch_size, seed).
class BatchLoader {
 public:
  BatchLoader(std::vector<size_t> rows, size_t batch_size, uint64_t seed);

  const std::vector<size_t>& next();

  size_t size() const { return rows_.size(); }
  size_t steps_per_epoch() const;

 private:
  std::vector<size_t> rows_;
  size_t batch_size_;
  Rng rng_;
  size_t pos_ = 0;
  std::vector<size_t> current_;
};

}  // namespace wforget::unlearn
