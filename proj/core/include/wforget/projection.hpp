#pragma once

#include <vector>

#include "wforget/mlp.hpp"

namespace wforget::unlearn {

// Orthonormal basis of the span of up to two gradient vectors, built by
// modified Gram-Schmidt. A vector is dropped when its norm falls below an
// absolute floor of 1e-12 or when its residual after orthogonalization drops
// below tolerance times its original norm (near-collinear second vector).
struct ProjectionBasis {
  std::vector<std::vector<double>> ortho;  // 0-2 unit vectors
  size_t rank = 0;
};

ProjectionBasis build_basis(const GradVector& g1, const GradVector& g2, double tolerance);

// g minus its projection onto the basis span: the component of g orthogonal to
// every spanning gradient.
GradVector project_complement(const GradVector& g, const ProjectionBasis& basis);

// |<a, b>| / (|a| |b|), the relative alignment used to audit projection
// quality; zero when either vector vanishes.
double alignment_ratio(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace wforget::unlearn
