#include "wforget/wasserstein.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "wforget/errors.hpp"

namespace wforget::lossdist {

double w2_squared(std::vector<double> a, std::vector<double> b) {
  if (a.size() != b.size()) {
    throw ShapeError("w2_squared: sample counts differ, " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  if (a.empty()) throw DomainError("w2_squared: empty distributions");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s / static_cast<double>(a.size());
}

double w2_squared_bruteforce(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw ShapeError("w2_squared_bruteforce: sample counts differ, " + std::to_string(a.size()) +
                     " vs " + std::to_string(b.size()));
  }
  if (a.empty()) throw DomainError("w2_squared_bruteforce: empty distributions");
  if (a.size() > 10) {
    throw DomainError("w2_squared_bruteforce: refusing " + std::to_string(a.size()) +
                      "! pairings; use w2_squared");
  }
  std::vector<size_t> idx(a.size());
  std::iota(idx.begin(), idx.end(), size_t{0});
  double best = std::numeric_limits<double>::infinity();
  do {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
      const double d = a[i] - b[idx[i]];
      s += d * d;
    }
    best = std::min(best, s);
  } while (std::next_permutation(idx.begin(), idx.end()));
  return best / static_cast<double>(a.size());
}

}  // namespace wforget::lossdist
