#include "wforget/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wforget/auglag.hpp"
#include "wforget/baselines.hpp"
#include "wforget/errors.hpp"
#include "wforget/generator.hpp"
#include "wforget/histogram.hpp"
#include "wforget/knn.hpp"
#include "wforget/metrics.hpp"
#include "wforget/mia.hpp"
#include "wforget/prop2.hpp"
#include "wforget/rng.hpp"
#include "wforget/serial.hpp"
#include "wforget/wpgd.hpp"

namespace wforget::harness {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using datagen::Dataset;
using datagen::Split;
using datagen::Subset;

// Seed-stream ids: every random phase draws from its own derived stream so
// enabling or disabling one phase never shifts another phase's randomness.
enum Stream : uint64_t {
  kStreamDataset = 0,
  kStreamInit = 1,
  kStreamOriginal = 2,
  kStreamStage1 = 3,
  kStreamStage2 = 4,
  kStreamGa = 5,
  kStreamFt = 6,
  kStreamRetrainTrain = 7,
  kStreamRetrainInit = 8,
  kStreamNoiseAdjToRem = 9,
  kStreamNoiseRemToAdj = 10,
};

class PhaseTimer {
 public:
  explicit PhaseTimer(json& sink, std::string name)
      : sink_(sink), name_(std::move(name)), start_(std::chrono::steady_clock::now()) {}
  ~PhaseTimer() {
    const auto end = std::chrono::steady_clock::now();
    sink_[name_] = std::chrono::duration<double>(end - start_).count();
  }

 private:
  json& sink_;
  std::string name_;
  std::chrono::steady_clock::time_point start_;
};

const char* cell_key(Subset s, Split sp) {
  static const char* names[3][2] = {{"forget_train", "forget_test"},
                                    {"adjacent_train", "adjacent_test"},
                                    {"remote_train", "remote_test"}};
  return names[static_cast<size_t>(s)][static_cast<size_t>(sp)];
}

json metrics_json(const eval::SubsetMetrics& m) {
  json out = json::object();
  for (const Subset s : {Subset::kForget, Subset::kAdjacent, Subset::kRemote}) {
    for (const Split sp : {Split::kTrain, Split::kTest}) {
      const auto& cell = m.at(s, sp);
      if (!cell) continue;
      out[cell_key(s, sp)] = {{"accuracy", cell->accuracy},
                              {"mean_loss", cell->mean_loss},
                              {"count", cell->count}};
    }
  }
  return out;
}

json mia_json(const eval::MiaResult& r) {
  return {{"threshold", r.threshold},
          {"balanced_accuracy", r.balanced_accuracy},
          {"efficacy", r.efficacy}};
}

json snapshot_json(const unlearn::RecoverySnapshot& s) {
  return {{"forget_loss", s.forget_loss},     {"adjacent_loss", s.adjacent_loss},
          {"remote_loss", s.remote_loss},     {"forget_acc", s.forget_acc},
          {"adjacent_acc", s.adjacent_acc},   {"remote_acc", s.remote_acc},
          {"w2sq_reference", s.w2sq_reference}};
}

json prop2_json(const eval::Prop2Report& r) {
  return {{"applicable", r.applicable}, {"m", r.m},
          {"epsilon", r.epsilon},       {"bound", r.bound},
          {"forget_accuracy", r.forget_accuracy}, {"passed", r.passed}};
}

json histogram_json(const eval::Histogram& h) {
  return {{"edges", h.edges}, {"counts", h.counts}};
}

json stage2_json(const unlearn::RecoveryResult& r, double alpha, size_t steps_per_epoch) {
  json trace = json::array();
  for (const auto& step : r.trace) {
    json e = snapshot_json(step.after);
    e["basis_rank"] = step.basis_rank;
    e["ortho_ratio"] = step.ortho_ratio;
    trace.push_back(std::move(e));
  }
  return {{"alpha", alpha},
          {"steps", r.trace.size()},
          {"steps_per_epoch", steps_per_epoch},
          {"max_ortho_ratio", r.max_ortho_ratio},
          {"initial", snapshot_json(r.initial)},
          {"trace", std::move(trace)}};
}

void check_ortho(const unlearn::RecoveryResult& r, double tolerance, const std::string& phase) {
  if (r.max_ortho_ratio > tolerance)
    throw DomainError(phase + ": projected update lost orthogonality (ratio " +
                      std::to_string(r.max_ortho_ratio) + " > tolerance " +
                      std::to_string(tolerance) + ")");
}

unlearn::TrainConfig to_train(const PhaseConfig& ph, uint64_t seed) {
  unlearn::TrainConfig tc;
  tc.lr = ph.lr;
  tc.epochs = ph.epochs;
  tc.batch_size = ph.batch_size;
  tc.optimizer = ph.optimizer;
  tc.seed = seed;
  return tc;
}

Dataset make_dataset(const ExperimentConfig& cfg, uint64_t seed) {
  datagen::GeneratorConfig g = cfg.dataset;
  g.seed = derive_seed(seed, kStreamDataset);
  Dataset ds = g.scenario == datagen::Scenario::kSuperclass ? datagen::generate_superclass(g)
                                                            : datagen::generate_biased_label(g);
  ds.validate();
  return ds;
}

struct SeedArtifacts {
  json metrics;   // deterministic; written to metrics.json
  json timings;   // wall-clock per phase; written separately
};

SeedArtifacts run_seed(const ExperimentConfig& cfg, uint64_t seed,
                       const std::vector<std::string>& methods, bool do_ablations,
                       const std::string& dir, const std::string& fingerprint) {
  SeedArtifacts art;
  art.timings = json::object();
  const auto wants = [&methods](const std::string& m) {
    return std::find(methods.begin(), methods.end(), m) != methods.end();
  };

  Dataset ds;
  {
    PhaseTimer t(art.timings, "generate");
    ds = make_dataset(cfg, seed);
    datagen::save_dataset(ds, dir + "/dataset.bin");
  }

  Mlp mlp(MlpSpec{ds.feature_dim, cfg.hidden, ds.num_classes, cfg.activation});

  ParamVector theta_orig;
  {
    PhaseTimer t(art.timings, "original_training");
    const ParamVector theta_init = mlp.init_params(derive_seed(seed, kStreamInit));
    theta_orig =
        unlearn::train_original(mlp, theta_init, ds, to_train(cfg.original, derive_seed(seed, kStreamOriginal)));
    save_params(theta_orig, dir + "/params_original.bin");
  }

  json root;
  root["schema"] = "wforget-metrics-1";
  root["config_hash"] = fingerprint;
  root["seed"] = seed;
  {
    json counts = json::object();
    for (const Subset s : {Subset::kForget, Subset::kAdjacent, Subset::kRemote})
      for (const Split sp : {Split::kTrain, Split::kTest})
        counts[cell_key(s, sp)] = ds.count(s, sp);
    root["dataset"] = {{"n", ds.n()},
                       {"feature_dim", ds.feature_dim},
                       {"num_classes", ds.num_classes},
                       {"counts", std::move(counts)}};
  }

  json method_out = json::object();
  {
    json orig;
    orig["metrics"] = metrics_json(eval::evaluate(mlp, theta_orig, ds));
    orig["mia"] = mia_json(eval::mia_efficacy(mlp, theta_orig, ds));
    orig["forget_histogram"] = histogram_json(eval::export_loss_histogram(
        mlp, theta_orig, ds, Subset::kForget, cfg.histogram_bins, dir + "/hist_forget_original.csv"));
    method_out["original"] = std::move(orig);
  }

  // Stage 1 is shared by both projection methods.
  const bool need_stage1 = wants("wpgd") || wants("pgd");
  unlearn::ForgettingResult stage1;
  if (need_stage1) {
    PhaseTimer t(art.timings, "stage1");
    unlearn::ForgettingConfig f = cfg.stage1;
    f.seed = derive_seed(seed, kStreamStage1);
    stage1 = unlearn::run_forgetting_stage(mlp, theta_orig, ds, f);
    save_params(stage1.theta_bar, dir + "/params_theta_bar.bin");

    json trace = json::array();
    for (const auto& step : stage1.trace)
      trace.push_back({{"forget_loss", step.forget_loss},
                       {"constraint_loss", step.constraint_loss},
                       {"violation", step.violation},
                       {"lambda_after", step.lambda_after}});
    root["stage1"] = {{"constraint_reference", stage1.constraint_reference},
                      {"theta_bar_metrics", metrics_json(eval::evaluate(mlp, stage1.theta_bar, ds))},
                      {"trace", std::move(trace)}};
  }

  const size_t forget_train = ds.count(Subset::kForget, Split::kTrain);
  const size_t steps_per_epoch =
      (forget_train + cfg.stage2.forget_batch_size - 1) / cfg.stage2.forget_batch_size;
  unlearn::RecoveryConfig rc;
  rc.alpha = cfg.stage2.alpha;
  rc.eta2 = cfg.stage2.eta2;
  rc.steps = cfg.stage2.epochs * steps_per_epoch;
  rc.forget_batch_size = cfg.stage2.forget_batch_size;
  rc.adjacent_batch_size = cfg.stage2.adjacent_batch_size;
  rc.remote_batch_size = cfg.stage2.remote_batch_size;
  rc.accumulation_batches = cfg.stage2.accumulation_batches;
  rc.projection_tolerance = cfg.stage2.projection_tolerance;
  rc.seed = derive_seed(seed, kStreamStage2);
  rc.snapshot_every = steps_per_epoch;

  if (wants("wpgd")) {
    PhaseTimer t(art.timings, "stage2_wpgd");
    const unlearn::RecoveryResult rec = unlearn::run_recovery_stage(mlp, stage1.theta_bar, ds, rc);
    check_ortho(rec, rc.projection_tolerance, "stage2 wpgd");
    save_params(rec.theta_final, dir + "/params_wpgd.bin");

    json m;
    m["metrics"] = metrics_json(eval::evaluate(mlp, rec.theta_final, ds));
    m["stage2"] = stage2_json(rec, rc.alpha, steps_per_epoch);

    // Certificate checkpoints: theta_bar, every stage-2 epoch, theta_final.
    json checkpoints = json::array();
    const auto add_checkpoint = [&](size_t step, const ParamVector& theta) {
      json c;
      c["step"] = step;
      c["metrics"] = metrics_json(eval::evaluate(mlp, theta, ds));
      c["prop2"] = prop2_json(eval::prop2_runtime_check(mlp, theta, stage1.theta_bar, ds, rc.alpha));
      checkpoints.push_back(std::move(c));
    };
    add_checkpoint(0, stage1.theta_bar);
    for (const auto& [step, theta] : rec.snapshots) add_checkpoint(step, theta);
    if (rec.snapshots.empty() || rec.snapshots.back().first != rec.trace.size())
      add_checkpoint(rec.trace.size(), rec.theta_final);
    m["checkpoints"] = std::move(checkpoints);

    m["mia"] = mia_json(eval::mia_efficacy(mlp, rec.theta_final, ds));
    m["forget_histogram"] = histogram_json(eval::export_loss_histogram(
        mlp, rec.theta_final, ds, Subset::kForget, cfg.histogram_bins, dir + "/hist_forget_wpgd.csv"));
    method_out["wpgd"] = std::move(m);
  }

  if (wants("pgd")) {
    PhaseTimer t(art.timings, "stage2_pgd");
    const unlearn::RecoveryResult rec =
        unlearn::run_recovery_stage_classical(mlp, stage1.theta_bar, ds, rc);
    check_ortho(rec, rc.projection_tolerance, "stage2 pgd");
    save_params(rec.theta_final, dir + "/params_pgd.bin");

    json m;
    m["metrics"] = metrics_json(eval::evaluate(mlp, rec.theta_final, ds));
    m["stage2"] = stage2_json(rec, 0.0, steps_per_epoch);
    m["mia"] = mia_json(eval::mia_efficacy(mlp, rec.theta_final, ds));
    m["forget_histogram"] = histogram_json(eval::export_loss_histogram(
        mlp, rec.theta_final, ds, Subset::kForget, cfg.histogram_bins, dir + "/hist_forget_pgd.csv"));
    method_out["pgd"] = std::move(m);
  }

  const auto plain_method = [&](const std::string& name, const ParamVector& theta) {
    save_params(theta, dir + "/params_" + name + ".bin");
    json m;
    m["metrics"] = metrics_json(eval::evaluate(mlp, theta, ds));
    m["mia"] = mia_json(eval::mia_efficacy(mlp, theta, ds));
    method_out[name] = std::move(m);
  };
  if (wants("ga")) {
    PhaseTimer t(art.timings, "baseline_ga");
    plain_method("ga", unlearn::baseline_gradient_ascent(
                           mlp, theta_orig, ds, to_train(cfg.ga, derive_seed(seed, kStreamGa))));
  }
  if (wants("ft")) {
    PhaseTimer t(art.timings, "baseline_ft");
    plain_method("ft", unlearn::baseline_finetune(mlp, theta_orig, ds,
                                                  to_train(cfg.ft, derive_seed(seed, kStreamFt))));
  }
  if (wants("retrain")) {
    PhaseTimer t(art.timings, "baseline_retrain");
    plain_method("retrain",
                 unlearn::baseline_retrain(mlp, ds, to_train(cfg.retrain, derive_seed(seed, kStreamRetrainTrain)),
                                           derive_seed(seed, kStreamRetrainInit)));
  }
  root["methods"] = std::move(method_out);

  if (do_ablations) {
    json ab = json::object();
    const auto enabled = [&cfg](const std::string& a) {
      return std::find(cfg.ablations.begin(), cfg.ablations.end(), a) != cfg.ablations.end();
    };
    // Re-runs the full two-stage pipeline on a dataset whose subset tags were
    // altered; quality is always scored against the unaltered ground truth.
    const auto retagged_pipeline = [&](const Dataset& tagged, json& out) {
      unlearn::ForgettingConfig f = cfg.stage1;
      f.seed = derive_seed(seed, kStreamStage1);
      const unlearn::ForgettingResult s1 = unlearn::run_forgetting_stage(mlp, theta_orig, tagged, f);
      const unlearn::RecoveryResult s2 = unlearn::run_recovery_stage(mlp, s1.theta_bar, tagged, rc);
      check_ortho(s2, rc.projection_tolerance, "ablation stage2");
      out["metrics"] = metrics_json(eval::evaluate(mlp, s2.theta_final, ds));
    };

    if (enabled("alpha_grid")) {
      PhaseTimer t(art.timings, "ablation_alpha_grid");
      json grid = json::array();
      for (const double alpha : cfg.alpha_grid) {
        unlearn::RecoveryConfig rc2 = rc;
        rc2.alpha = alpha;
        const unlearn::RecoveryResult rec = unlearn::run_recovery_stage(mlp, stage1.theta_bar, ds, rc2);
        check_ortho(rec, rc.projection_tolerance, "ablation alpha_grid stage2");
        grid.push_back({{"alpha", alpha},
                        {"metrics", metrics_json(eval::evaluate(mlp, rec.theta_final, ds))}});
      }
      ab["alpha_grid"] = std::move(grid);
    }
    if (enabled("mu_grid")) {
      PhaseTimer t(art.timings, "ablation_mu_grid");
      json grid = json::array();
      for (const double mu : cfg.mu_grid) {
        unlearn::ForgettingConfig f = cfg.stage1;
        f.mu = mu;
        f.seed = derive_seed(seed, kStreamStage1);
        const unlearn::ForgettingResult s1 = unlearn::run_forgetting_stage(mlp, theta_orig, ds, f);
        const unlearn::RecoveryResult s2 = unlearn::run_recovery_stage(mlp, s1.theta_bar, ds, rc);
        check_ortho(s2, rc.projection_tolerance, "ablation mu_grid stage2");
        grid.push_back({{"mu", mu},
                        {"metrics", metrics_json(eval::evaluate(mlp, s2.theta_final, ds))}});
      }
      ab["mu_grid"] = std::move(grid);
    }
    if (enabled("joint_constraint")) {
      PhaseTimer t(art.timings, "ablation_joint_constraint");
      unlearn::ForgettingConfig f = cfg.stage1;
      f.constrain_adjacent = true;
      f.seed = derive_seed(seed, kStreamStage1);
      const unlearn::ForgettingResult s1 = unlearn::run_forgetting_stage(mlp, theta_orig, ds, f);
      const unlearn::RecoveryResult s2 = unlearn::run_recovery_stage(mlp, s1.theta_bar, ds, rc);
      check_ortho(s2, rc.projection_tolerance, "ablation joint_constraint stage2");
      json out;
      out["metrics"] = metrics_json(eval::evaluate(mlp, s2.theta_final, ds));
      ab["joint_constraint"] = std::move(out);
    }
    if (enabled("adjacency_noise")) {
      PhaseTimer t(art.timings, "ablation_adjacency_noise");
      json out = json::object();
      const std::pair<datagen::NoiseMode, uint64_t> modes[] = {
          {datagen::NoiseMode::kAdjacentToRemote, kStreamNoiseAdjToRem},
          {datagen::NoiseMode::kRemoteToAdjacent, kStreamNoiseRemToAdj}};
      for (const auto& [mode, stream] : modes) {
        Dataset noisy = ds;
        datagen::perturb_adjacency(noisy, mode, cfg.adjacency_noise_fraction,
                                   derive_seed(seed, stream));
        noisy.validate();
        json entry;
        entry["fraction"] = cfg.adjacency_noise_fraction;
        retagged_pipeline(noisy, entry);
        out[mode == datagen::NoiseMode::kAdjacentToRemote ? "adjacent_to_remote"
                                                          : "remote_to_adjacent"] = std::move(entry);
      }
      ab["adjacency_noise"] = std::move(out);
    }
    if (enabled("knn_adjacency")) {
      PhaseTimer t(art.timings, "ablation_knn_adjacency");
      const Dataset tagged =
          datagen::knn_adjacency(ds, mlp, theta_orig, {cfg.knn_k, cfg.knn_top_fraction});
      tagged.validate();
      size_t true_adjacent = 0, recovered = 0;
      for (size_t i = 0; i < ds.n(); ++i) {
        if (ds.split[i] != Split::kTrain || ds.subset[i] != Subset::kAdjacent) continue;
        ++true_adjacent;
        if (tagged.subset[i] == Subset::kAdjacent) ++recovered;
      }
      json entry;
      entry["true_adjacent_train"] = true_adjacent;
      entry["recovered_adjacent_train"] = recovered;
      entry["adjacent_overlap"] =
          true_adjacent == 0 ? 0.0 : static_cast<double>(recovered) / static_cast<double>(true_adjacent);
      retagged_pipeline(tagged, entry);
      ab["knn_adjacency"] = std::move(entry);
    }
    if (!ab.empty()) root["ablations"] = std::move(ab);
  }

  art.metrics = std::move(root);
  return art;
}

struct Moments {
  std::vector<double> values;
  void add(double v) { values.push_back(v); }
  double mean() const {
    double s = 0.0;
    for (const double v : values) s += v;
    return values.empty() ? 0.0 : s / static_cast<double>(values.size());
  }
  double population_std() const {
    if (values.empty()) return 0.0;
    const double m = mean();
    double s = 0.0;
    for (const double v : values) s += (v - m) * (v - m);
    return std::sqrt(std::max(0.0, s / static_cast<double>(values.size())));
  }
};

json aggregate_cells(const std::vector<const json*>& metrics_list) {
  json out = json::object();
  if (metrics_list.empty()) return out;
  for (const auto& [key, first_cell] : metrics_list.front()->items()) {
    Moments acc, loss;
    bool everywhere = true;
    for (const json* m : metrics_list) {
      if (!m->contains(key)) {
        everywhere = false;
        break;
      }
      acc.add((*m)[key]["accuracy"].get<double>());
      loss.add((*m)[key]["mean_loss"].get<double>());
    }
    if (!everywhere) continue;
    out[key] = {{"accuracy_mean", acc.mean()},
                {"accuracy_std", acc.population_std()},
                {"mean_loss_mean", loss.mean()},
                {"mean_loss_std", loss.population_std()},
                {"count", (*metrics_list.front())[key]["count"]}};
  }
  return out;
}

json build_aggregate(const std::string& fingerprint, const std::vector<uint64_t>& seeds,
                     const std::vector<json>& per_seed) {
  json out;
  out["schema"] = "wforget-aggregate-1";
  out["config_hash"] = fingerprint;
  out["seeds"] = seeds;

  json methods = json::object();
  for (const auto& [name, first] : per_seed.front()["methods"].items()) {
    (void)first;
    std::vector<const json*> cells;
    Moments efficacy, balanced;
    for (const json& s : per_seed) {
      const json& m = s["methods"][name];
      cells.push_back(&m["metrics"]);
      efficacy.add(m["mia"]["efficacy"].get<double>());
      balanced.add(m["mia"]["balanced_accuracy"].get<double>());
    }
    json entry;
    entry["metrics"] = aggregate_cells(cells);
    entry["mia"] = {{"efficacy_mean", efficacy.mean()},
                    {"efficacy_std", efficacy.population_std()},
                    {"balanced_accuracy_mean", balanced.mean()},
                    {"balanced_accuracy_std", balanced.population_std()}};
    methods[name] = std::move(entry);
  }
  out["methods"] = std::move(methods);

  if (per_seed.front().contains("ablations")) {
    const json& first_ab = per_seed.front()["ablations"];
    json ab = json::object();
    const auto collect = [&per_seed](const std::vector<std::string>& path) {
      std::vector<const json*> cells;
      for (const json& s : per_seed) {
        const json* node = &s["ablations"];
        for (const std::string& p : path) node = &(*node)[p];
        cells.push_back(&(*node)["metrics"]);
      }
      return cells;
    };
    if (first_ab.contains("alpha_grid")) {
      json grid = json::array();
      for (size_t i = 0; i < first_ab["alpha_grid"].size(); ++i) {
        std::vector<const json*> cells;
        for (const json& s : per_seed) cells.push_back(&s["ablations"]["alpha_grid"][i]["metrics"]);
        grid.push_back({{"alpha", first_ab["alpha_grid"][i]["alpha"]},
                        {"metrics", aggregate_cells(cells)}});
      }
      ab["alpha_grid"] = std::move(grid);
    }
    if (first_ab.contains("mu_grid")) {
      json grid = json::array();
      for (size_t i = 0; i < first_ab["mu_grid"].size(); ++i) {
        std::vector<const json*> cells;
        for (const json& s : per_seed) cells.push_back(&s["ablations"]["mu_grid"][i]["metrics"]);
        grid.push_back({{"mu", first_ab["mu_grid"][i]["mu"]},
                        {"metrics", aggregate_cells(cells)}});
      }
      ab["mu_grid"] = std::move(grid);
    }
    if (first_ab.contains("joint_constraint"))
      ab["joint_constraint"] = {{"metrics", aggregate_cells(collect({"joint_constraint"}))}};
    if (first_ab.contains("adjacency_noise")) {
      json noise = json::object();
      for (const char* mode : {"adjacent_to_remote", "remote_to_adjacent"})
        noise[mode] = {{"metrics", aggregate_cells(collect({"adjacency_noise", mode}))}};
      ab["adjacency_noise"] = std::move(noise);
    }
    if (first_ab.contains("knn_adjacency")) {
      Moments overlap;
      for (const json& s : per_seed)
        overlap.add(s["ablations"]["knn_adjacency"]["adjacent_overlap"].get<double>());
      ab["knn_adjacency"] = {{"adjacent_overlap_mean", overlap.mean()},
                             {"adjacent_overlap_std", overlap.population_std()},
                             {"metrics", aggregate_cells(collect({"knn_adjacency"}))}};
    }
    out["ablations"] = std::move(ab);
  }
  return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

ExperimentOutcome run_experiment(const ExperimentConfig& cfg,
                                 const std::vector<std::string>& method_filter) {
  if (cfg.out_dir.empty()) throw ConfigError("output directory is not set");
  if (cfg.seeds.empty()) throw ConfigError("no seeds configured");

  static const std::set<std::string> kKnown = {"wpgd", "pgd", "ga", "ft", "retrain"};
  std::vector<std::string> methods;
  if (method_filter.empty()) {
    methods.push_back("wpgd");
    for (const std::string& m : cfg.baseline_methods) methods.push_back(m);
  } else {
    for (const std::string& m : method_filter) {
      if (!kKnown.count(m)) throw ConfigError("unknown method \"" + m + "\"");
      if (std::find(methods.begin(), methods.end(), m) != methods.end()) continue;
      if (m != "wpgd" && m != "pgd" &&
          std::find(cfg.baseline_methods.begin(), cfg.baseline_methods.end(), m) ==
              cfg.baseline_methods.end())
        throw ConfigError("method \"" + m + "\" requested but not configured under [baselines]");
      methods.push_back(m);
    }
  }
  const bool do_ablations = method_filter.empty() && !cfg.ablations.empty();

  fs::create_directories(cfg.out_dir);
  const std::string fingerprint = config_hash(cfg);
  atomic_write_file(cfg.out_dir + "/config.ini", canonical_config(cfg));

  ExperimentOutcome outcome;
  outcome.fingerprint = fingerprint;
  outcome.out_dir = cfg.out_dir;

  std::vector<json> per_seed;
  for (const uint64_t seed : cfg.seeds) {
    const std::string dir = cfg.out_dir + "/seed_" + std::to_string(seed);
    fs::create_directories(dir);
    SeedArtifacts art = run_seed(cfg, seed, methods, do_ablations, dir, fingerprint);
    const std::string metrics_path = dir + "/metrics.json";
    atomic_write_file(metrics_path, dump(art.metrics));
    atomic_write_file(dir + "/timings.json", dump(art.timings));
    per_seed.push_back(std::move(art.metrics));
    outcome.seeds.push_back(SeedRun{seed, dir, metrics_path});
  }

  outcome.aggregate_path = cfg.out_dir + "/aggregate.json";
  atomic_write_file(outcome.aggregate_path,
                    dump(build_aggregate(fingerprint, cfg.seeds, per_seed)));
  return outcome;
}

}  // namespace wforget::harness
