#include "wforget/optimizer.hpp"

#include <cmath>

#include "wforget/errors.hpp"

namespace wforget::unlearn {

Optimizer::Optimizer(OptKind kind, double lr, size_t dim) : kind_(kind), lr_(lr), dim_(dim) {
  if (!(lr > 0.0)) throw DomainError("optimizer: learning rate must be positive");
  if (dim == 0) throw DomainError("optimizer: zero-dimensional parameter space");
  if (kind_ == OptKind::kAdam) {
    m_.assign(dim_, 0.0);
    v_.assign(dim_, 0.0);
  }
}

void Optimizer::step(ParamVector& theta, const GradVector& grad) {
  if (theta.size() != dim_ || grad.size() != dim_) {
    throw ShapeError("optimizer: expected " + std::to_string(dim_) + " parameters, got " +
                     std::to_string(theta.size()) + " / " + std::to_string(grad.size()));
  }
  if (kind_ == OptKind::kSgd) {
    for (size_t i = 0; i < dim_; ++i) theta[i] -= lr_ * grad[i];
    return;
  }
  constexpr double kBeta1 = 0.9;
  constexpr double kBeta2 = 0.999;
  constexpr double kEps = 1e-8;
  ++t_;
  const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
  for (size_t i = 0; i < dim_; ++i) {
    m_[i] = kBeta1 * m_[i] + (1.0 - kBeta1) * grad[i];
    v_[i] = kBeta2 * v_[i] + (1.0 - kBeta2) * grad[i] * grad[i];
    const double mhat = m_[i] / c1;
    const double vhat = v_[i] / c2;
    theta[i] -= lr_ * mhat / (std::sqrt(vhat) + kEps);
  }
}

}  // namespace wforget::unlearn
