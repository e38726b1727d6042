// Command line front end: dataset generation, full experiment runs, the
// randomized property verifiers, and table rendering over finished runs.
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "wforget/config.hpp"
#include "wforget/errors.hpp"
#include "wforget/experiment.hpp"
#include "wforget/generator.hpp"
#include "wforget/prop2.hpp"
#include "wforget/report.hpp"
#include "wforget/rng.hpp"
#include "wforget/serial.hpp"
#include "wforget/verify.hpp"

namespace {

namespace fs = std::filesystem;
using wforget::harness::ExperimentConfig;

struct CommonFlags {
  std::string config_path;
  std::vector<uint64_t> seeds;
  std::string out;
};

ExperimentConfig load_config(const CommonFlags& flags) {
  ExperimentConfig cfg = wforget::harness::parse_config(flags.config_path);
  if (!flags.seeds.empty()) cfg.seeds = flags.seeds;
  if (!flags.out.empty()) cfg.out_dir = flags.out;
  if (cfg.out_dir.empty())
    throw wforget::ConfigError("no output directory: set run.out in the config or pass --out");
  return cfg;
}

int cmd_generate(const CommonFlags& flags) {
  const ExperimentConfig cfg = load_config(flags);
  fs::create_directories(cfg.out_dir);
  for (const uint64_t seed : cfg.seeds) {
    wforget::datagen::GeneratorConfig g = cfg.dataset;
    g.seed = wforget::derive_seed(seed, 0);
    wforget::datagen::Dataset ds =
        g.scenario == wforget::datagen::Scenario::kSuperclass
            ? wforget::datagen::generate_superclass(g)
            : wforget::datagen::generate_biased_label(g);
    ds.validate();
    const std::string dir = cfg.out_dir + "/seed_" + std::to_string(seed);
    fs::create_directories(dir);
    const std::string path = dir + "/dataset.bin";
    wforget::datagen::save_dataset(ds, path);
    std::printf("seed %llu: %zu samples -> %s\n", static_cast<unsigned long long>(seed),
                ds.n(), path.c_str());
  }
  return 0;
}

int cmd_run(const CommonFlags& flags, const std::vector<std::string>& methods) {
  const ExperimentConfig cfg = load_config(flags);
  const wforget::harness::ExperimentOutcome res =
      wforget::harness::run_experiment(cfg, methods);
  for (const auto& sr : res.seeds)
    std::printf("seed %llu: %s\n", static_cast<unsigned long long>(sr.seed),
                sr.metrics_path.c_str());
  std::printf("aggregate: %s\n", res.aggregate_path.c_str());
  std::fputs(wforget::harness::report_table(res.out_dir).c_str(), stdout);
  return 0;
}

int cmd_verify(uint64_t seed) {
  int failures = 0;
  const auto line = [&failures](bool ok, const std::string& text) {
    std::printf("[%s] %s\n", ok ? "PASS" : "FAIL", text.c_str());
    if (!ok) ++failures;
  };

  {
    const wforget::eval::W2OracleReport r = wforget::eval::verify_w2_oracle(500, seed);
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "transport distance: closed form equals brute-force pairing on %zu multisets "
                  "(max gap %.3g)",
                  r.trials, r.max_abs_diff);
    line(r.passed, buf);
  }
  {
    wforget::eval::Prop1Config cfg;
    cfg.seed = seed;
    const wforget::eval::Prop1Report r = wforget::eval::verify_prop1(cfg);
    bool adjacent_ok = !r.instances.empty();
    for (const auto& inst : r.instances) adjacent_ok = adjacent_ok && inst.adjacent_decreased;
    char buf[200];
    std::snprintf(buf, sizeof buf,
                  "projected step: protected losses move at second order on %zu instances "
                  "(min slope %.3f) and the adjacent loss strictly decreases",
                  r.instances.size(), r.min_slope);
    line(r.passed && adjacent_ok, buf);
  }
  {
    const double bound = wforget::eval::prop2_bound(10.0, 20, 0.5, 0.1);
    const double frozen = 0.042691340489023807;
    const bool ok = std::fabs(bound - frozen) <= 1e-12 * frozen;
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "certificate bound: closed form reproduces the frozen reference value "
                  "(%.17g vs %.17g)",
                  bound, frozen);
    line(ok, buf);
  }

  if (failures > 0) std::printf("%d check(s) failed\n", failures);
  return failures == 0 ? 0 : 1;
}

int cmd_report(const std::string& out) {
  std::fputs(wforget::harness::report_table(out).c_str(), stdout);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"two-stage unlearning engine for small classifiers"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::vector<std::string> methods;
  uint64_t verify_seed = 0;
  std::string report_out;

  CLI::App* generate = app.add_subcommand("generate", "write the configured datasets only");
  generate->add_option("--config", flags.config_path, "experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  generate->add_option("--seed", flags.seeds, "seed list overriding the config")
      ->delimiter(',');
  generate->add_option("--out", flags.out, "output directory overriding the config");

  CLI::App* run = app.add_subcommand("run", "run the configured experiment end to end");
  run->add_option("--config", flags.config_path, "experiment config file")
      ->required()
      ->check(CLI::ExistingFile);
  run->add_option("--seed", flags.seeds, "seed list overriding the config")->delimiter(',');
  run->add_option("--out", flags.out, "output directory overriding the config");
  run->add_option("--method", methods,
                  "restrict to these methods (wpgd, pgd, ga, ft, retrain); skips ablations")
      ->delimiter(',');

  CLI::App* verify =
      app.add_subcommand("verify", "run the randomized property and certificate checks");
  verify->add_option("--seed", verify_seed, "seed for the randomized suites");

  CLI::App* report = app.add_subcommand("report", "render the summary table of a finished run");
  report->add_option("--out", report_out, "experiment output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (generate->parsed()) return cmd_generate(flags);
    if (run->parsed()) return cmd_run(flags, methods);
    if (verify->parsed()) return cmd_verify(verify_seed);
    return cmd_report(report_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
