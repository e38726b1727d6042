#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "doctest.h"
#include "support/fd_oracle.hpp"
#include "support/test_util.hpp"
#include "wforget/auglag.hpp"
#include "wforget/baselines.hpp"
#include "wforget/errors.hpp"
#include "wforget/generator.hpp"
#include "wforget/loaders.hpp"
#include "wforget/loss_samples.hpp"
#include "wforget/projection.hpp"
#include "wforget/rng.hpp"
#include "wforget/vecmath.hpp"
#include "wforget/wpgd.hpp"

using namespace wforget;
using namespace wforget::unlearn;
using datagen::Dataset;
using datagen::GeneratorConfig;
using datagen::Split;
using datagen::Subset;

namespace {

struct Fixture {
  Dataset ds;
  Mlp mlp;
  ParamVector theta0;
};

// One small trained model shared across the behavioral tests.
const Fixture& fixture() {
  static const Fixture f = [] {
    GeneratorConfig g;
    g.num_superclasses = 3;
    g.subclasses_per_superclass = 3;
    g.samples_per_subclass = 12;
    g.feature_dim = 6;
    g.superclass_center_scale = 5.0;
    g.subclass_offset_scale = 1.2;
    g.noise_sigma = 0.5;
    g.test_fraction = 0.25;
    g.seed = 1234;
    Dataset ds = datagen::generate_superclass(g);
    Mlp mlp(MlpSpec{6, {16}, 3, Activation::kRelu});
    TrainConfig tc;
    tc.lr = 0.05;
    tc.epochs = 40;
    tc.batch_size = 16;
    tc.seed = 9;
    ParamVector theta0 = train_original(mlp, mlp.init_params(42), ds, tc);
    return Fixture{std::move(ds), std::move(mlp), std::move(theta0)};
  }();
  return f;
}

ForgettingConfig default_forgetting() {
  ForgettingConfig cfg;
  cfg.mu = 10.0;
  cfg.clip_cap = 3.0;
  cfg.eta1 = 0.05;
  cfg.epochs = 20;
  cfg.forget_batch_size = 4;
  cfg.constraint_batch_size = 32;
  cfg.seed = 5;
  return cfg;
}

}  // namespace

TEST_CASE("forgetting objective: frozen example and identities") {
  CHECK(forgetting_objective_value(2.0, 1.2, 0.5, 10.0, 1.0) ==
        doctest::Approx(-1.7).epsilon(1e-12));
  // A satisfied constraint leaves pure ascent on the forget loss.
  CHECK(forgetting_objective_value(3.25, 0.9, 7.0, 10.0, 0.9) == -3.25);
  CHECK_THROWS_AS(forgetting_objective_value(1.0, 1.0, 0.0, 0.0, 1.0), DomainError);
  CHECK_THROWS_AS(forgetting_objective_value(1.0, 1.0, 0.0, -1.0, 1.0), DomainError);
}

TEST_CASE("forgetting objective: tape value and analytic partials") {
  Rng rng(81);
  for (int trial = 0; trial < 30; ++trial) {
    const double lf = 3.0 * rng.uniform();
    const double lc = 2.0 * rng.uniform();
    const double lambda = 2.0 * rng.normal();
    const double mu = 0.5 + 10.0 * rng.uniform();
    const double ref = 2.0 * rng.uniform();

    ad::Tape tape;
    const ad::NodeId nf = tape.param(Tensor::scalar(lf));
    const ad::NodeId nc = tape.param(Tensor::scalar(lc));
    const ad::NodeId obj = forgetting_objective(tape, nf, nc, lambda, mu, ref);
    CHECK(tape.value(obj).data[0] ==
          doctest::Approx(forgetting_objective_value(lf, lc, lambda, mu, ref)).epsilon(1e-14));

    tape.backward(obj);
    CHECK(tape.grad(nf).data[0] == -1.0);
    const double gap = lc - ref;
    CHECK(tape.grad(nc).data[0] == doctest::Approx(lambda + mu * gap).epsilon(1e-12));
  }
}

TEST_CASE("forgetting stage gradient matches central differences") {
  Rng rng(82);
  const double h = 1e-5;
  int done = 0;
  int attempts = 0;
  while (done < 10 && attempts < 500) {
    ++attempts;
    testutil::Instance inst = testutil::draw_instance(rng);
    if (inst.labels.size() < 4) continue;
    Dataset ds;
    ds.feature_dim = inst.spec.input_dim;
    ds.num_classes = inst.spec.num_classes;
    ds.features = inst.batch.data;
    ds.labels.assign(inst.labels.begin(), inst.labels.end());
    ds.subset.assign(inst.labels.size(), Subset::kForget);
    ds.split.assign(inst.labels.size(), Split::kTrain);

    const size_t half = inst.labels.size() / 2;
    std::vector<size_t> rows_f, rows_c;
    for (size_t i = 0; i < half; ++i) rows_f.push_back(i);
    for (size_t i = half; i < inst.labels.size(); ++i) rows_c.push_back(i);

    Mlp mlp(inst.spec);
    if (!testutil::preact_margin_ok(mlp, inst.theta, inst.batch, 1e-3)) continue;

    // Cap in the middle of the forget-loss range so clipping is active with a
    // safe margin on every sample.
    const std::vector<double> ce_f = lossdist::per_sample_losses(mlp, inst.theta, ds, rows_f);
    const double lo = *std::min_element(ce_f.begin(), ce_f.end());
    const double hi = *std::max_element(ce_f.begin(), ce_f.end());
    if (hi - lo < 0.1) continue;
    const double cap = 0.5 * (lo + hi);
    bool margin_ok = true;
    for (double v : ce_f) margin_ok = margin_ok && std::fabs(v - cap) > 1e-3;
    if (!margin_ok) continue;

    const double lambda = -0.5 + 2.0 * rng.uniform();
    const double mu = 10.0;
    const double ref = 0.5 + rng.uniform();

    ad::Tape tape;
    std::vector<ad::NodeId> params_f, params_c;
    const ad::NodeId loss_f = lossdist::mean_ce(tape, mlp, inst.theta, ds, rows_f, &params_f, cap);
    const ad::NodeId loss_c = lossdist::mean_ce(tape, mlp, inst.theta, ds, rows_c, &params_c);
    const ad::NodeId obj = forgetting_objective(tape, loss_f, loss_c, lambda, mu, ref);
    tape.backward(obj);
    GradVector ad_grad = mlp.collect_grad(tape, params_f);
    const GradVector gc = mlp.collect_grad(tape, params_c);
    for (size_t i = 0; i < ad_grad.size(); ++i) ad_grad[i] += gc[i];
    if (!testutil::grads_resolvable(ad_grad)) continue;

    const Tensor xf = ds.gather_features(rows_f);
    const Tensor xc = ds.gather_features(rows_c);
    const std::vector<int> yf = ds.gather_labels(rows_f);
    const std::vector<int> yc = ds.gather_labels(rows_c);
    const auto oracle = [&](const std::vector<fdtest::ld>& t) -> fdtest::ld {
      const fdtest::ld mf =
          fdtest::oracle_mean_clipped(fdtest::oracle_per_sample_ce(inst.spec, t, xf, yf),
                                      static_cast<fdtest::ld>(cap));
      const fdtest::ld mc = fdtest::oracle_mean(fdtest::oracle_per_sample_ce(inst.spec, t, xc, yc));
      const fdtest::ld gap = mc - static_cast<fdtest::ld>(ref);
      return -mf + static_cast<fdtest::ld>(lambda) * gap +
             static_cast<fdtest::ld>(mu) / 2.0L * gap * gap;
    };
    const std::vector<double> fd_grad = fdtest::central_fd(oracle, inst.theta, h);
    CHECK(fdtest::max_rel_err(ad_grad, fd_grad) < 1e-5);
    ++done;
  }
  REQUIRE(done == 10);
}

TEST_CASE("forgetting stage: zero epochs is the identity") {
  const Fixture& f = fixture();
  ForgettingConfig cfg = default_forgetting();
  cfg.epochs = 0;
  const ForgettingResult r = run_forgetting_stage(f.mlp, f.theta0, f.ds, cfg);
  CHECK(r.theta_bar == f.theta0);
  CHECK(r.trace.empty());
}

TEST_CASE("forgetting stage: reference freezing and multiplier dynamics") {
  const Fixture& f = fixture();
  const ForgettingConfig cfg = default_forgetting();
  const ForgettingResult r = run_forgetting_stage(f.mlp, f.theta0, f.ds, cfg);

  const std::vector<size_t> remote_rows = f.ds.indices(Subset::kRemote, Split::kTrain);
  CHECK(r.constraint_reference ==
        lossdist::mean_ce_value(f.mlp, f.theta0, f.ds, remote_rows));

  REQUIRE_FALSE(r.trace.empty());
  double lambda_prev = 0.0;
  for (const ForgettingStep& s : r.trace) {
    CHECK(s.violation == doctest::Approx(s.constraint_loss - r.constraint_reference)
                             .epsilon(1e-14));
    // Eq.-style multiplier: moves by mu * violation, so its direction tracks
    // the violation's sign exactly.
    CHECK(s.lambda_after ==
          doctest::Approx(lambda_prev + cfg.mu * s.violation).epsilon(1e-12));
    if (s.violation > 0.0) CHECK(s.lambda_after > lambda_prev);
    if (s.violation < 0.0) CHECK(s.lambda_after < lambda_prev);
    lambda_prev = s.lambda_after;
  }
}

TEST_CASE("forgetting stage erases the forget set and spares the remote set") {
  const Fixture& f = fixture();
  const ForgettingResult r = run_forgetting_stage(f.mlp, f.theta0, f.ds, default_forgetting());

  const std::vector<size_t> forget_rows = f.ds.indices(Subset::kForget, Split::kTrain);
  const std::vector<size_t> remote_rows = f.ds.indices(Subset::kRemote, Split::kTrain);
  const double orig_forget = subset_accuracy(f.mlp, f.theta0, f.ds, forget_rows);
  const double orig_remote = subset_accuracy(f.mlp, f.theta0, f.ds, remote_rows);
  REQUIRE(orig_forget >= 0.9);  // the fixture model actually fit its data
  REQUIRE(orig_remote >= 0.9);

  const double new_forget = subset_accuracy(f.mlp, r.theta_bar, f.ds, forget_rows);
  const double new_remote = subset_accuracy(f.mlp, r.theta_bar, f.ds, remote_rows);
  const std::vector<size_t> adj_rows = f.ds.indices(Subset::kAdjacent, Split::kTrain);
  MESSAGE("forget ", orig_forget, " -> ", new_forget, "; remote ", orig_remote, " -> ",
          new_remote, "; adjacent ",
          subset_accuracy(f.mlp, f.theta0, f.ds, adj_rows), " -> ",
          subset_accuracy(f.mlp, r.theta_bar, f.ds, adj_rows));
  CHECK(new_forget <= orig_forget - 0.3);
  CHECK(new_remote >= orig_remote - 0.1);
}

TEST_CASE("forgetting stage: joint constraint covers the whole retain set") {
  const Fixture& f = fixture();
  ForgettingConfig cfg = default_forgetting();
  cfg.constrain_adjacent = true;
  const ForgettingResult r = run_forgetting_stage(f.mlp, f.theta0, f.ds, cfg);
  CHECK(r.constraint_reference ==
        lossdist::mean_ce_value(f.mlp, f.theta0, f.ds, f.ds.retain_train_indices()));
}

TEST_CASE("forgetting stage is deterministic") {
  const Fixture& f = fixture();
  const ForgettingResult a = run_forgetting_stage(f.mlp, f.theta0, f.ds, default_forgetting());
  const ForgettingResult b = run_forgetting_stage(f.mlp, f.theta0, f.ds, default_forgetting());
  CHECK(a.theta_bar == b.theta_bar);
  REQUIRE(a.trace.size() == b.trace.size());
  for (size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].lambda_after == b.trace[i].lambda_after);
    CHECK(a.trace[i].forget_loss == b.trace[i].forget_loss);
  }
}

TEST_CASE("forgetting stage rejects empty subsets") {
  const Fixture& f = fixture();
  Dataset broken = f.ds;
  for (auto& s : broken.subset) {
    if (s == Subset::kRemote) s = Subset::kAdjacent;
  }
  CHECK_THROWS_AS(run_forgetting_stage(f.mlp, f.theta0, broken, default_forgetting()),
                  DomainError);
}

namespace {

RecoveryConfig default_recovery(size_t steps) {
  RecoveryConfig cfg;
  cfg.alpha = 0.5;
  cfg.eta2 = 0.02;
  cfg.steps = steps;
  cfg.forget_batch_size = 8;
  cfg.adjacent_batch_size = 8;
  cfg.remote_batch_size = 16;
  cfg.accumulation_batches = 2;
  cfg.seed = 11;
  return cfg;
}

const ForgettingResult& stage1_result() {
  static const ForgettingResult r =
      run_forgetting_stage(fixture().mlp, fixture().theta0, fixture().ds, default_forgetting());
  return r;
}

}  // namespace

TEST_CASE("recovery stage: zero steps returns the input with its snapshot") {
  const Fixture& f = fixture();
  const ParamVector& theta_bar = stage1_result().theta_bar;
  const RecoveryResult r = run_recovery_stage(f.mlp, theta_bar, f.ds, default_recovery(0));
  CHECK(r.theta_final == theta_bar);
  CHECK(r.trace.empty());
  CHECK(r.max_ortho_ratio == 0.0);
  // Anchored at itself, the transport distance starts at exactly zero.
  CHECK(r.initial.w2sq_reference == 0.0);
  const std::vector<size_t> forget_rows = f.ds.indices(Subset::kForget, Split::kTrain);
  CHECK(r.initial.forget_loss == lossdist::mean_ce_value(f.mlp, theta_bar, f.ds, forget_rows));
  CHECK(r.initial.forget_acc == subset_accuracy(f.mlp, theta_bar, f.ds, forget_rows));
}

TEST_CASE("recovery stage: one step reproduces the documented recipe") {
  const Fixture& f = fixture();
  const ParamVector& theta_bar = stage1_result().theta_bar;
  const RecoveryConfig cfg = default_recovery(1);
  const RecoveryResult r = run_recovery_stage(f.mlp, theta_bar, f.ds, cfg);

  // Replay: anchored forget gradient, accumulated remote gradient, adjacent
  // gradient, projection, plain step — with the same derived loader streams.
  const lossdist::LossAnchor anchor = lossdist::capture_anchor(f.mlp, theta_bar, f.ds);
  BatchLoader fl(f.ds.indices(Subset::kForget, Split::kTrain), cfg.forget_batch_size,
                 derive_seed(cfg.seed, 0));
  BatchLoader al(f.ds.indices(Subset::kAdjacent, Split::kTrain), cfg.adjacent_batch_size,
                 derive_seed(cfg.seed, 1));
  BatchLoader rl(f.ds.indices(Subset::kRemote, Split::kTrain), cfg.remote_batch_size,
                 derive_seed(cfg.seed, 2));

  GradVector g_forget;
  {
    ad::Tape tape;
    std::vector<ad::NodeId> params;
    const auto nodes =
        lossdist::anchored_loss(tape, f.mlp, theta_bar, f.ds, fl.next(), anchor, cfg.alpha,
                                &params);
    tape.backward(nodes.loss);
    g_forget = f.mlp.collect_grad(tape, params);
  }
  GradVector g_remote(f.mlp.num_params(), 0.0);
  for (size_t a = 0; a < cfg.accumulation_batches; ++a) {
    ad::Tape tape;
    std::vector<ad::NodeId> params;
    const ad::NodeId loss = lossdist::mean_ce(tape, f.mlp, theta_bar, f.ds, rl.next(), &params);
    tape.backward(loss);
    axpy(1.0, f.mlp.collect_grad(tape, params), g_remote);
  }
  scale_inplace(g_remote, 1.0 / static_cast<double>(cfg.accumulation_batches));
  GradVector g_adjacent;
  {
    ad::Tape tape;
    std::vector<ad::NodeId> params;
    const ad::NodeId loss = lossdist::mean_ce(tape, f.mlp, theta_bar, f.ds, al.next(), &params);
    tape.backward(loss);
    g_adjacent = f.mlp.collect_grad(tape, params);
  }
  const ProjectionBasis basis = build_basis(g_forget, g_remote, cfg.projection_tolerance);
  const GradVector direction = project_complement(g_adjacent, basis);
  ParamVector expect = theta_bar;
  axpy(-cfg.eta2, direction, expect);

  CHECK(r.theta_final == expect);
  REQUIRE(r.trace.size() == 1);
  CHECK(r.trace[0].basis_rank == basis.rank);
}

TEST_CASE("recovery stage keeps every update orthogonal to the protected gradients") {
  const Fixture& f = fixture();
  const RecoveryResult r =
      run_recovery_stage(f.mlp, stage1_result().theta_bar, f.ds, default_recovery(25));
  REQUIRE(r.trace.size() == 25);
  CHECK(r.max_ortho_ratio <= 1e-8);
  for (const RecoveryStep& s : r.trace) {
    CHECK(s.ortho_ratio <= 1e-8);
    CHECK(s.basis_rank <= 2);
  }
}

TEST_CASE("recovery stage restores adjacent accuracy") {
  const Fixture& f = fixture();
  const RecoveryResult r =
      run_recovery_stage(f.mlp, stage1_result().theta_bar, f.ds, default_recovery(60));
  const double final_adjacent = r.trace.back().after.adjacent_acc;
  CHECK(final_adjacent > r.initial.adjacent_acc);
  // The protected forget behavior must not silently return.
  CHECK(r.trace.back().after.forget_acc <= r.initial.forget_acc + 0.12);
}

TEST_CASE("classical projection is the anchored loop with alpha zero") {
  const Fixture& f = fixture();
  RecoveryConfig cfg = default_recovery(5);
  cfg.alpha = 0.9;
  const RecoveryResult classical =
      run_recovery_stage_classical(f.mlp, stage1_result().theta_bar, f.ds, cfg);
  cfg.alpha = 0.0;
  const RecoveryResult direct = run_recovery_stage(f.mlp, stage1_result().theta_bar, f.ds, cfg);
  CHECK(classical.theta_final == direct.theta_final);
}

TEST_CASE("recovery stage is deterministic and validates its config") {
  const Fixture& f = fixture();
  const ParamVector& theta_bar = stage1_result().theta_bar;
  const RecoveryResult a = run_recovery_stage(f.mlp, theta_bar, f.ds, default_recovery(10));
  const RecoveryResult b = run_recovery_stage(f.mlp, theta_bar, f.ds, default_recovery(10));
  CHECK(a.theta_final == b.theta_final);

  RecoveryConfig bad = default_recovery(1);
  bad.alpha = 1.5;
  CHECK_THROWS_AS(run_recovery_stage(f.mlp, theta_bar, f.ds, bad), DomainError);
  bad = default_recovery(1);
  bad.accumulation_batches = 0;
  CHECK_THROWS_AS(run_recovery_stage(f.mlp, theta_bar, f.ds, bad), DomainError);
  bad = default_recovery(1);
  bad.eta2 = 0.0;
  CHECK_THROWS_AS(run_recovery_stage(f.mlp, theta_bar, f.ds, bad), DomainError);
}

TEST_CASE("baselines: zero epochs are identities") {
  const Fixture& f = fixture();
  TrainConfig tc;
  tc.epochs = 0;
  CHECK(baseline_gradient_ascent(f.mlp, f.theta0, f.ds, tc) == f.theta0);
  CHECK(baseline_finetune(f.mlp, f.theta0, f.ds, tc) == f.theta0);
}

TEST_CASE("baseline directions: ascent raises forget loss, finetune lowers retain loss") {
  const Fixture& f = fixture();
  TrainConfig tc;
  tc.lr = 0.02;
  tc.epochs = 3;
  tc.batch_size = 8;
  tc.seed = 3;

  const std::vector<size_t> forget_rows = f.ds.indices(Subset::kForget, Split::kTrain);
  const ParamVector after_ga = baseline_gradient_ascent(f.mlp, f.theta0, f.ds, tc);
  CHECK(lossdist::mean_ce_value(f.mlp, after_ga, f.ds, forget_rows) >
        lossdist::mean_ce_value(f.mlp, f.theta0, f.ds, forget_rows));

  // Start finetuning from a damaged model so there is room to descend.
  const ParamVector& theta_bar = stage1_result().theta_bar;
  const std::vector<size_t> retain_rows = f.ds.retain_train_indices();
  const ParamVector after_ft = baseline_finetune(f.mlp, theta_bar, f.ds, tc);
  CHECK(lossdist::mean_ce_value(f.mlp, after_ft, f.ds, retain_rows) <
        lossdist::mean_ce_value(f.mlp, theta_bar, f.ds, retain_rows));
}

TEST_CASE("retain-only training refuses forget rows") {
  const Fixture& f = fixture();
  TrainConfig tc;
  tc.epochs = 1;
  std::vector<size_t> rows = f.ds.retain_train_indices();
  rows.push_back(f.ds.indices(Subset::kForget, Split::kTrain).front());
  CHECK_THROWS_AS(train_on_rows(f.mlp, f.theta0, f.ds, rows, tc, true), DomainError);
  // The legitimate retain set passes the same guard.
  const ParamVector ok = train_on_rows(f.mlp, f.theta0, f.ds, f.ds.retain_train_indices(), tc,
                                       true);
  CHECK(ok.size() == f.theta0.size());
}

TEST_CASE("retraining from scratch learns the retained data only") {
  const Fixture& f = fixture();
  TrainConfig tc;
  tc.lr = 0.05;
  tc.epochs = 40;
  tc.batch_size = 16;
  tc.seed = 17;
  const ParamVector retrained = baseline_retrain(f.mlp, f.ds, tc, 77);
  CHECK(retrained == baseline_retrain(f.mlp, f.ds, tc, 77));
  const double retain_acc =
      subset_accuracy(f.mlp, retrained, f.ds, f.ds.retain_train_indices());
  CHECK(retain_acc >= 0.9);
}

TEST_CASE("training loop records batch losses and works with adam") {
  const Fixture& f = fixture();
  TrainConfig tc;
  tc.lr = 0.01;
  tc.epochs = 10;
  tc.batch_size = 16;
  tc.optimizer = OptKind::kAdam;
  tc.seed = 23;
  std::vector<double> trace;
  const ParamVector trained = train_original(f.mlp, f.mlp.init_params(1), f.ds, tc, &trace);
  BatchLoader probe(f.ds.train_indices(), tc.batch_size, 0);
  CHECK(trace.size() == tc.epochs * probe.steps_per_epoch());
  CHECK(trace.back() < trace.front());
  CHECK(lossdist::mean_ce_value(f.mlp, trained, f.ds, f.ds.train_indices()) <
        lossdist::mean_ce_value(f.mlp, f.mlp.init_params(1), f.ds, f.ds.train_indices()));
}
