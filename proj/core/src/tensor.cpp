#include "wforget/tensor.hpp"

namespace wforget {

Tensor Tensor::zeros(std::vector<size_t> shp) {
  Tensor t;
  size_t n = 1;
  for (size_t d : shp) n *= d;
  t.shape = std::move(shp);
  t.data.assign(n, 0.0);
  return t;
}

std::string Tensor::shape_str() const {
  std::string s = "[";
  for (size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

}  // namespace wforget
