#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "wforget/errors.hpp"

namespace wforget {

// Dense row-major tensor of rank 0 (scalar), 1, or 2, f64 throughout.
struct Tensor {
  std::vector<size_t> shape;
  std::vector<double> data;

  Tensor() = default;

  static Tensor scalar(double v) {
    Tensor t;
    t.data.assign(1, v);
    return t;
  }
  static Tensor zeros(std::vector<size_t> shp);
  static Tensor vec(size_t n) { return zeros({n}); }
  static Tensor matrix(size_t r, size_t c) { return zeros({r, c}); }

  size_t rank() const { return shape.size(); }
  size_t size() const { return data.size(); }

  bool is_scalar() const { return shape.empty(); }
  double scalar_value() const {
    if (!is_scalar()) throw ShapeError("scalar_value on tensor of rank " + std::to_string(rank()));
    return data[0];
  }

  size_t rows() const {
    if (rank() != 2) throw ShapeError("rows() on tensor of rank " + std::to_string(rank()));
    return shape[0];
  }
  size_t cols() const {
    if (rank() != 2) throw ShapeError("cols() on tensor of rank " + std::to_string(rank()));
    return shape[1];
  }

  double& at(size_t i, size_t j) { return data[i * cols() + j]; }
  double at(size_t i, size_t j) const { return data[i * cols() + j]; }

  bool same_shape(const Tensor& o) const { return shape == o.shape; }
  std::string shape_str() const;
};

}  // namespace wforget
