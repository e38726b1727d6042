#include "wforget/projection.hpp"

#include <cmath>

#include "wforget/errors.hpp"
#include "wforget/vecmath.hpp"

namespace wforget::unlearn {

namespace {
constexpr double kNormFloor = 1e-12;
}

ProjectionBasis build_basis(const GradVector& g1, const GradVector& g2, double tolerance) {
  if (g1.size() != g2.size()) {
    throw ShapeError("build_basis: gradient lengths differ, " + std::to_string(g1.size()) +
                     " vs " + std::to_string(g2.size()));
  }
  if (!(tolerance > 0.0)) throw DomainError("build_basis: tolerance must be positive");

  ProjectionBasis basis;
  for (const GradVector* g : {&g1, &g2}) {
    const double original_norm = norm(*g);
    if (original_norm < kNormFloor) continue;
    std::vector<double> v = *g;
    for (const auto& e : basis.ortho) {
      const double c = dot(v, e);
      axpy(-c, e, v);
    }
    const double residual = norm(v);
    if (residual < tolerance * original_norm || residual < kNormFloor) continue;
    scale_inplace(v, 1.0 / residual);
    basis.ortho.push_back(std::move(v));
  }
  basis.rank = basis.ortho.size();
  return basis;
}

GradVector project_complement(const GradVector& g, const ProjectionBasis& basis) {
  GradVector out = g;
  for (const auto& e : basis.ortho) {
    if (e.size() != g.size()) {
      throw ShapeError("project_complement: vector of length " + std::to_string(g.size()) +
                       " against basis of length " + std::to_string(e.size()));
    }
    const double c = dot(out, e);
    axpy(-c, e, out);
  }
  return out;
}

double alignment_ratio(const std::vector<double>& a, const std::vector<double>& b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::fabs(dot(a, b)) / (na * nb);
}

}  // namespace wforget::unlearn
