#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "wforget/errors.hpp"

namespace wforget {

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw ShapeError("dot: size mismatch " + std::to_string(a.size()) + " vs " +
                     std::to_string(b.size()));
  }
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const std::vector<double>& a) { return std::sqrt(dot(a, a)); }

// y += c * x
inline void axpy(double c, const std::vector<double>& x, std::vector<double>& y) {
  if (x.size() != y.size()) {
    throw ShapeError("axpy: size mismatch " + std::to_string(x.size()) + " vs " +
                     std::to_string(y.size()));
  }
  for (size_t i = 0; i < x.size(); ++i) y[i] += c * x[i];
}

inline void scale_inplace(std::vector<double>& a, double c) {
  for (double& v : a) v *= c;
}

}  // namespace wforget
