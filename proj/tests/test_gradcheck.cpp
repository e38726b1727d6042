#include <vector>

#include "doctest.h"
#include "support/fd_oracle.hpp"
#include "support/test_util.hpp"
#include "wforget/mlp.hpp"
#include "wforget/rng.hpp"
#include "wforget/tape.hpp"

using namespace wforget;

namespace {

GradVector ad_mean_ce(const Mlp& mlp, const ParamVector& theta, const Tensor& batch,
                      const std::vector<int>& labels, double clip) {
  ad::Tape tape;
  std::vector<ad::NodeId> params;
  ad::NodeId logits = mlp.forward(tape, theta, batch, &params);
  ad::NodeId ce = tape.softmax_xent(logits, labels);
  if (clip > 0.0) ce = tape.clip_max(ce, clip);
  tape.backward(tape.mean(ce));
  return mlp.collect_grad(tape, params);
}

}  // namespace

TEST_CASE("tape gradients of mean cross entropy match the scalar oracle") {
  Rng rng(2024);
  int done = 0;
  int attempts = 0;
  while (done < 10 && attempts < 400) {
    ++attempts;
    testutil::Instance inst = testutil::draw_instance(rng);
    Mlp mlp(inst.spec);
    if (!testutil::preact_margin_ok(mlp, inst.theta, inst.batch, 1e-3)) continue;
    GradVector g = ad_mean_ce(mlp, inst.theta, inst.batch, inst.labels, 0.0);
    if (!testutil::grads_resolvable(g)) continue;

    auto f = [&](const std::vector<fdtest::ld>& t) {
      return fdtest::oracle_mean(
          fdtest::oracle_per_sample_ce(inst.spec, t, inst.batch, inst.labels));
    };
    std::vector<double> fd = fdtest::central_fd(f, inst.theta, 1e-5);
    CHECK(fdtest::max_rel_err(g, fd) < 1e-5);
    ++done;
  }
  REQUIRE(done == 10);
}

TEST_CASE("tape gradients of clipped cross entropy match the scalar oracle") {
  Rng rng(77);
  int done = 0;
  int attempts = 0;
  while (done < 10 && attempts < 600) {
    ++attempts;
    testutil::Instance inst = testutil::draw_instance(rng);
    Mlp mlp(inst.spec);
    if (!testutil::preact_margin_ok(mlp, inst.theta, inst.batch, 1e-3)) continue;

    // Pick a cap that clips some samples, with a safety margin around the
    // kink so the difference quotient stays one-sided.
    std::vector<double> ce = ad::per_sample_cross_entropy(mlp.logits(inst.theta, inst.batch),
                                                          inst.labels);
    double lo = ce[0], hi = ce[0];
    for (double v : ce) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (hi - lo < 0.1) continue;
    const double cap = 0.5 * (lo + hi);
    bool margin_ok = true;
    for (double v : ce) margin_ok = margin_ok && std::fabs(v - cap) > 1e-3;
    if (!margin_ok) continue;

    GradVector g = ad_mean_ce(mlp, inst.theta, inst.batch, inst.labels, cap);
    if (!testutil::grads_resolvable(g)) continue;

    auto f = [&](const std::vector<fdtest::ld>& t) {
      return fdtest::oracle_mean_clipped(
          fdtest::oracle_per_sample_ce(inst.spec, t, inst.batch, inst.labels),
          static_cast<fdtest::ld>(cap));
    };
    std::vector<double> fd = fdtest::central_fd(f, inst.theta, 1e-5);
    CHECK(fdtest::max_rel_err(g, fd) < 1e-5);
    ++done;
  }
  REQUIRE(done == 10);
}
