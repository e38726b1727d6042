#include "wforget/loaders.hpp"

#include <algorithm>

#include "wforget/errors.hpp"

namespace wforget::unlearn {

BatchLoader::BatchLoader(std::vector<size_t> rows, size_t batch_size, uint64_t seed)
    : rows_(std::move(rows)), batch_size_(batch_size), rng_(seed) {
  if (rows_.empty()) throw DomainError("batch loader: empty row set");
  if (batch_size_ == 0) throw DomainError("batch loader: batch size must be positive");
  rng_.shuffle(rows_);
}

size_t BatchLoader::steps_per_epoch() const {
  return (rows_.size() + batch_size_ - 1) / batch_size_;
}

const std::vector<size_t>& BatchLoader::next() {
  if (pos_ >= rows_.size()) {
    rng_.shuffle(rows_);
    pos_ = 0;
  }
  const size_t take = std::min(batch_size_, rows_.size() - pos_);
  current_.assign(rows_.begin() + pos_, rows_.begin() + pos_ + take);
  pos_ += take;
  return current_;
}

}  // namespace wforget::unlearn
