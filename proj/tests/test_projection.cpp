#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include "doctest.h"
#include "wforget/errors.hpp"
#include "wforget/loaders.hpp"
#include "wforget/optimizer.hpp"
#include "wforget/projection.hpp"
#include "wforget/rng.hpp"
#include "wforget/vecmath.hpp"

using namespace wforget;
using namespace wforget::unlearn;

namespace {

std::vector<double> random_vec(Rng& rng, size_t n, double scale = 1.0) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * rng.normal();
  return v;
}

// Independent projection oracle: least squares onto span{g1, g2} via the
// 2x2 normal equations in long double, then subtract.
std::vector<double> oracle_complement(const std::vector<double>& g, const std::vector<double>& g1,
                                      const std::vector<double>& g2) {
  using ld = long double;
  const size_t n = g.size();
  ld a11 = 0, a12 = 0, a22 = 0, b1 = 0, b2 = 0;
  for (size_t i = 0; i < n; ++i) {
    a11 += static_cast<ld>(g1[i]) * g1[i];
    a12 += static_cast<ld>(g1[i]) * g2[i];
    a22 += static_cast<ld>(g2[i]) * g2[i];
    b1 += static_cast<ld>(g1[i]) * g[i];
    b2 += static_cast<ld>(g2[i]) * g[i];
  }
  const ld det = a11 * a22 - a12 * a12;
  const ld c1 = (b1 * a22 - b2 * a12) / det;
  const ld c2 = (a11 * b2 - a12 * b1) / det;
  std::vector<double> out(n);
  for (size_t i = 0; i < n; ++i) {
    out[i] = static_cast<double>(static_cast<ld>(g[i]) - c1 * g1[i] - c2 * g2[i]);
  }
  return out;
}

}  // namespace

TEST_CASE("projection removes exactly the spanned components") {
  const GradVector g1 = {1.0, 0.0, 0.0};
  const GradVector g2 = {0.0, 1.0, 0.0};
  const GradVector g = {1.0, 2.0, 3.0};
  const ProjectionBasis basis = build_basis(g1, g2, 1e-8);
  REQUIRE(basis.rank == 2);
  const GradVector out = project_complement(g, basis);
  CHECK(out[0] == 0.0);
  CHECK(out[1] == 0.0);
  CHECK(out[2] == 3.0);
}

TEST_CASE("projection edge cases") {
  Rng rng(71);
  const size_t n = 12;

  SUBCASE("a spanned vector projects to zero") {
    const GradVector g1 = random_vec(rng, n);
    const GradVector g2 = random_vec(rng, n);
    const ProjectionBasis basis = build_basis(g1, g2, 1e-8);
    const GradVector out = project_complement(g1, basis);
    CHECK(norm(out) <= 1e-12 * norm(g1));
  }

  SUBCASE("an orthogonal vector passes through") {
    const GradVector g1 = {1.0, 0.0, 0.0, 0.0};
    const GradVector g2 = {0.0, 1.0, 0.0, 0.0};
    const GradVector g = {0.0, 0.0, 2.0, -1.0};
    const GradVector out = project_complement(g, build_basis(g1, g2, 1e-8));
    CHECK(out == g);
  }

  SUBCASE("collinear second vector drops the rank to 1") {
    const GradVector g1 = random_vec(rng, n);
    GradVector g2 = g1;
    scale_inplace(g2, 2.0);
    const ProjectionBasis basis = build_basis(g1, g2, 1e-8);
    CHECK(basis.rank == 1);
    // The complement is still orthogonal to both inputs.
    const GradVector g = random_vec(rng, n);
    const GradVector out = project_complement(g, basis);
    CHECK(alignment_ratio(out, g1) <= 1e-8);
    CHECK(alignment_ratio(out, g2) <= 1e-8);
  }

  SUBCASE("two zero vectors give rank 0 and the identity projection") {
    const GradVector zero(n, 0.0);
    const ProjectionBasis basis = build_basis(zero, zero, 1e-8);
    CHECK(basis.rank == 0);
    const GradVector g = random_vec(rng, n);
    CHECK(project_complement(g, basis) == g);
  }

  SUBCASE("orthonormal inputs survive unchanged") {
    GradVector g1(n, 0.0), g2(n, 0.0);
    g1[0] = 1.0;
    g2[3] = 1.0;
    const ProjectionBasis basis = build_basis(g1, g2, 1e-8);
    REQUIRE(basis.rank == 2);
    CHECK(norm(basis.ortho[0]) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::fabs(basis.ortho[0][0] - 1.0) <= 1e-12);
    CHECK(std::fabs(basis.ortho[1][3] - 1.0) <= 1e-12);
  }

  SUBCASE("argument validation") {
    CHECK_THROWS_AS(build_basis(GradVector{1.0}, GradVector{1.0, 2.0}, 1e-8), ShapeError);
    CHECK_THROWS_AS(build_basis(GradVector{1.0}, GradVector{2.0}, 0.0), DomainError);
    const ProjectionBasis basis = build_basis(GradVector{1.0, 0.0}, GradVector{0.0, 1.0}, 1e-8);
    CHECK_THROWS_AS(project_complement(GradVector{1.0, 2.0, 3.0}, basis), ShapeError);
  }
}

TEST_CASE("basis invariants and least-squares agreement on random instances") {
  Rng rng(72);
  for (int trial = 0; trial < 200; ++trial) {
    const size_t n = 5 + rng.uniform_index(60);
    const GradVector g1 = random_vec(rng, n, 1.0 + 2.0 * rng.uniform());
    const GradVector g2 = random_vec(rng, n, 1.0 + 2.0 * rng.uniform());
    const GradVector g = random_vec(rng, n, 2.0);

    const ProjectionBasis basis = build_basis(g1, g2, 1e-8);
    REQUIRE(basis.rank == basis.ortho.size());
    for (size_t i = 0; i < basis.rank; ++i) {
      CHECK(std::fabs(norm(basis.ortho[i]) - 1.0) <= 1e-10);
      for (size_t j = i + 1; j < basis.rank; ++j) {
        CHECK(std::fabs(dot(basis.ortho[i], basis.ortho[j])) <= 1e-10);
      }
    }

    const GradVector out = project_complement(g, basis);
    CHECK(alignment_ratio(out, g1) <= 1e-8);
    CHECK(alignment_ratio(out, g2) <= 1e-8);

    // Independent Gaussian draws are far from collinear with overwhelming
    // margin, so the full-rank least-squares oracle applies.
    if (basis.rank == 2) {
      const std::vector<double> expect = oracle_complement(g, g1, g2);
      double diff = 0.0;
      for (size_t i = 0; i < n; ++i) diff += (out[i] - expect[i]) * (out[i] - expect[i]);
      CHECK(std::sqrt(diff) <= 1e-8 * (norm(g) + 1.0));
    }
  }
}

TEST_CASE("sgd step applies the plain update") {
  Optimizer opt(OptKind::kSgd, 0.5, 3);
  ParamVector theta = {1.0, -2.0, 0.25};
  opt.step(theta, {2.0, 2.0, -1.0});
  CHECK(theta == ParamVector{0.0, -3.0, 0.75});
  CHECK_THROWS_AS(opt.step(theta, {1.0}), ShapeError);
  CHECK_THROWS_AS(Optimizer(OptKind::kSgd, 0.0, 3), DomainError);
  CHECK_THROWS_AS(Optimizer(OptKind::kSgd, 0.1, 0), DomainError);
}

TEST_CASE("adam first step normalizes by the gradient magnitude") {
  // After one step the bias-corrected moments are exactly g and g^2, so each
  // coordinate moves by lr * g / (|g| + eps).
  Optimizer opt(OptKind::kAdam, 0.1, 2);
  ParamVector theta = {1.0, 1.0};
  const GradVector g = {4.0, -0.5};
  opt.step(theta, g);
  for (size_t i = 0; i < 2; ++i) {
    const double expect = 1.0 - 0.1 * g[i] / (std::fabs(g[i]) + 1e-8);
    CHECK(theta[i] == doctest::Approx(expect).epsilon(1e-12));
  }
}

TEST_CASE("adam converges on a quadratic") {
  Optimizer opt(OptKind::kAdam, 0.05, 2);
  ParamVector theta = {3.0, -2.0};
  for (int i = 0; i < 400; ++i) {
    const GradVector g = {2.0 * (theta[0] - 1.0), 2.0 * (theta[1] + 1.0)};
    opt.step(theta, g);
  }
  CHECK(std::fabs(theta[0] - 1.0) < 1e-3);
  CHECK(std::fabs(theta[1] + 1.0) < 1e-3);
}

TEST_CASE("batch loader covers each row once per pass") {
  std::vector<size_t> rows = {10, 20, 30, 40, 50, 60, 70};
  BatchLoader loader(rows, 3, 99);
  CHECK(loader.steps_per_epoch() == 3);

  for (int epoch = 0; epoch < 4; ++epoch) {
    std::multiset<size_t> seen;
    std::vector<size_t> sizes;
    for (size_t s = 0; s < loader.steps_per_epoch(); ++s) {
      const std::vector<size_t>& b = loader.next();
      sizes.push_back(b.size());
      seen.insert(b.begin(), b.end());
    }
    CHECK(seen == std::multiset<size_t>(rows.begin(), rows.end()));
    CHECK(sizes == std::vector<size_t>{3, 3, 1});
  }
}

TEST_CASE("batch loader is a pure function of rows, size and seed") {
  std::vector<size_t> rows = {1, 2, 3, 4, 5, 6, 7, 8, 9};
  BatchLoader a(rows, 4, 7);
  BatchLoader b(rows, 4, 7);
  BatchLoader c(rows, 4, 8);
  bool any_diff = false;
  for (int s = 0; s < 12; ++s) {
    const std::vector<size_t> ba = a.next();
    CHECK(ba == b.next());
    if (ba != c.next()) any_diff = true;
  }
  CHECK(any_diff);  // a different seed transposes at least one batch
}

TEST_CASE("batch loader oversize batch and validation") {
  BatchLoader loader({4, 5, 6}, 10, 0);
  CHECK(loader.steps_per_epoch() == 1);
  CHECK(loader.next().size() == 3);
  CHECK_THROWS_AS(BatchLoader({}, 4, 0), DomainError);
  CHECK_THROWS_AS(BatchLoader({1}, 0, 0), DomainError);
}
