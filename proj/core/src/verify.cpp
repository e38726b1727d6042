#include "wforget/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wforget/dataset.hpp"
#include "wforget/errors.hpp"
#include "wforget/loss_samples.hpp"
#include "wforget/mlp.hpp"
#include "wforget/projection.hpp"
#include "wforget/rng.hpp"
#include "wforget/tape.hpp"
#include "wforget/vecmath.hpp"
#include "wforget/wasserstein.hpp"

namespace wforget::eval {

namespace {

using datagen::Dataset;
using datagen::Split;
using datagen::Subset;

struct Prop1Draw {
  Dataset ds;
  MlpSpec spec;
  ParamVector theta;
  std::vector<std::size_t> forget_rows, adjacent_rows, remote_rows;
};

Prop1Draw draw_prop1_instance(Rng& rng, std::uint64_t theta_seed) {
  Prop1Draw d;
  d.spec.input_dim = 3 + rng.uniform_index(4);
  d.spec.hidden = {4 + rng.uniform_index(5)};
  d.spec.num_classes = 3 + rng.uniform_index(3);
  d.spec.activation = Activation::kTanh;

  const std::size_t n_f = 4 + rng.uniform_index(3);
  const std::size_t n_a = 4 + rng.uniform_index(3);
  const std::size_t n_r = 5 + rng.uniform_index(4);
  const std::size_t n = n_f + n_a + n_r;

  d.ds.feature_dim = d.spec.input_dim;
  d.ds.num_classes = d.spec.num_classes;
  d.ds.features.resize(n * d.spec.input_dim);
  for (double& v : d.ds.features) v = 1.5 * rng.normal();
  d.ds.labels.resize(n);
  for (auto& y : d.ds.labels)
    y = static_cast<std::int32_t>(rng.uniform_index(d.spec.num_classes));
  d.ds.subset.assign(n, Subset::kRemote);
  d.ds.split.assign(n, Split::kTrain);
  for (std::size_t i = 0; i < n_f; ++i) d.ds.subset[i] = Subset::kForget;
  for (std::size_t i = n_f; i < n_f + n_a; ++i) d.ds.subset[i] = Subset::kAdjacent;
  d.ds.meta.scenario = "probe";

  d.forget_rows = d.ds.indices(Subset::kForget, Split::kTrain);
  d.adjacent_rows = d.ds.indices(Subset::kAdjacent, Split::kTrain);
  d.remote_rows = d.ds.indices(Subset::kRemote, Split::kTrain);

  Mlp mlp(d.spec);
  d.theta = mlp.init_params(theta_seed);
  return d;
}

GradVector grad_of_mean_ce(const Mlp& mlp, const ParamVector& theta, const Dataset& ds,
                           const std::vector<std::size_t>& rows) {
  ad::Tape tape;
  std::vector<ad::NodeId> params;
  const ad::NodeId loss = lossdist::mean_ce(tape, mlp, theta, ds, rows, &params);
  tape.backward(loss);
  return mlp.collect_grad(tape, params);
}

// Least-squares slope of log|delta| against log(eta).
double loglog_slope(const std::vector<double>& etas, const std::vector<double>& deltas) {
  const std::size_t k = etas.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    mx += std::log(etas[i]);
    my += std::log(deltas[i]);
  }
  mx /= static_cast<double>(k);
  my /= static_cast<double>(k);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double dx = std::log(etas[i]) - mx;
    num += dx * (std::log(deltas[i]) - my);
    den += dx * dx;
  }
  return num / den;
}

}  // namespace

Prop1Report verify_prop1(const Prop1Config& cfg) {
  if (cfg.instances == 0 || cfg.etas.empty())
    throw DomainError("verify_prop1: need instances and an eta grid");
  Prop1Report report;
  report.min_slope = std::numeric_limits<double>::infinity();
  Rng rng(derive_seed(cfg.seed, 101));
  const double eta_max = *std::max_element(cfg.etas.begin(), cfg.etas.end());

  bool all_ok = true;
  while (report.instances.size() < cfg.instances && report.attempts < cfg.max_attempts) {
    ++report.attempts;
    Prop1Draw d = draw_prop1_instance(rng, derive_seed(cfg.seed, 1000 + report.attempts));
    const Mlp mlp(d.spec);

    const lossdist::LossAnchor anchor = lossdist::capture_anchor(mlp, d.theta, d.ds);

    GradVector g_forget;
    {
      ad::Tape tape;
      std::vector<ad::NodeId> params;
      const auto nodes = lossdist::anchored_loss(tape, mlp, d.theta, d.ds, d.forget_rows,
                                                 anchor, cfg.alpha, &params);
      tape.backward(nodes.loss);
      g_forget = mlp.collect_grad(tape, params);
    }
    const GradVector g_remote = grad_of_mean_ce(mlp, d.theta, d.ds, d.remote_rows);
    const GradVector g_adjacent = grad_of_mean_ce(mlp, d.theta, d.ds, d.adjacent_rows);

    const unlearn::ProjectionBasis basis = unlearn::build_basis(g_forget, g_remote, 1e-8);
    const GradVector direction = unlearn::project_complement(g_adjacent, basis);
    if (norm(direction) < 1e-8) continue;  // degenerate: no usable direction

    // The anchored term pairs sorted losses; keep the sort permutation stable
    // across the whole eta grid so the delta is a clean smooth quantity.
    std::vector<double> base = lossdist::per_sample_losses(mlp, d.theta, d.ds, d.forget_rows);
    std::vector<double> sorted_base = base;
    std::sort(sorted_base.begin(), sorted_base.end());
    double min_gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < sorted_base.size(); ++i)
      min_gap = std::min(min_gap, sorted_base[i] - sorted_base[i - 1]);
    if (min_gap < 1e-4) continue;

    ParamVector probe = d.theta;
    axpy(-eta_max, direction, probe);
    const std::vector<double> moved =
        lossdist::per_sample_losses(mlp, probe, d.ds, d.forget_rows);
    double max_move = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i)
      max_move = std::max(max_move, std::fabs(moved[i] - base[i]));
    if (2.0 * max_move >= min_gap) continue;

    const double f0 =
        lossdist::anchored_loss_value(mlp, d.theta, d.ds, d.forget_rows, anchor, cfg.alpha)
            .loss;
    const double r0 = lossdist::mean_ce_value(mlp, d.theta, d.ds, d.remote_rows);
    const double a0 = lossdist::mean_ce_value(mlp, d.theta, d.ds, d.adjacent_rows);

    std::vector<double> df, dr;
    bool floored = false;
    for (const double eta : cfg.etas) {
      ParamVector th = d.theta;
      axpy(-eta, direction, th);
      const double f1 =
          lossdist::anchored_loss_value(mlp, th, d.ds, d.forget_rows, anchor, cfg.alpha).loss;
      const double r1 = lossdist::mean_ce_value(mlp, th, d.ds, d.remote_rows);
      df.push_back(std::fabs(f1 - f0));
      dr.push_back(std::fabs(r1 - r0));
      if (df.back() < 1e-12 || dr.back() < 1e-12) floored = true;
    }
    if (floored) continue;  // below numerical noise: not a measurable instance

    Prop1Instance inst;
    inst.slope_forget = loglog_slope(cfg.etas, df);
    inst.slope_remote = loglog_slope(cfg.etas, dr);

    double eta_a = cfg.etas.front();
    for (int tries = 0; tries < 60; ++tries) {
      ParamVector th = d.theta;
      axpy(-eta_a, direction, th);
      if (lossdist::mean_ce_value(mlp, th, d.ds, d.adjacent_rows) < a0) {
        inst.adjacent_decreased = true;
        inst.adjacent_eta = eta_a;
        break;
      }
      eta_a *= 0.5;
    }

    report.min_slope = std::min({report.min_slope, inst.slope_forget, inst.slope_remote});
    all_ok = all_ok && inst.adjacent_decreased && inst.slope_forget >= cfg.min_slope &&
             inst.slope_remote >= cfg.min_slope;
    report.instances.push_back(inst);
  }

  report.passed = all_ok && report.instances.size() == cfg.instances;
  return report;
}

W2OracleReport verify_w2_oracle(std::size_t trials, std::uint64_t seed) {
  W2OracleReport rep;
  rep.trials = trials;
  Rng rng(derive_seed(seed, 202));
  for (std::size_t t = 0; t < trials; ++t) {
    const std::size_t n = 1 + rng.uniform_index(7);
    std::vector<double> a(n), b(n);
    for (double& v : a) v = rng.uniform(0.0, 10.0);
    for (double& v : b) v = rng.uniform(0.0, 10.0);
    const double diff =
        std::fabs(lossdist::w2_squared(a, b) - lossdist::w2_squared_bruteforce(a, b));
    rep.max_abs_diff = std::max(rep.max_abs_diff, diff);
  }
  rep.passed = rep.max_abs_diff <= 1e-12;
  return rep;
}

}  // namespace wforget::eval
