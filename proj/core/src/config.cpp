#include "wforget/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <set>

#include "wforget/errors.hpp"
#include "wforget/serial.hpp"

namespace wforget::harness {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (const char c : s) {
    if (c == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  cur = trim(cur);
  if (!cur.empty() || !out.empty()) out.push_back(cur);
  // "a," style trailing empties are rejected by the typed parsers below.
  if (out.size() == 1 && out[0].empty()) out.clear();
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

using SectionMap = std::map<std::string, Entry>;

const std::set<std::string> kSections = {"dataset", "model",     "original", "stage1",
                                         "stage2",  "baselines", "ablations", "run"};
const std::set<std::string> kMethods = {"pgd", "ga", "ft", "retrain"};
const std::set<std::string> kAblations = {"alpha_grid", "mu_grid", "joint_constraint",
                                          "adjacency_noise", "knn_adjacency"};

class Parsed {
 public:
  Parsed(const std::string& text, const std::string& name) : name_(name) {
    std::string current;
    // An unrecognized section is always fatal; the error waits for the first
    // key inside it so the message can name the full section.key path.
    std::string unknown_section;
    int unknown_line = 0;
    int ln = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
      const std::size_t nl = text.find('\n', pos);
      std::string line = text.substr(pos, nl == std::string::npos ? nl : nl - pos);
      pos = nl == std::string::npos ? text.size() + 1 : nl + 1;
      ++ln;
      line = trim(line);
      if (line.empty() || line[0] == '#' || line[0] == ';') continue;
      if (line.front() == '[') {
        if (!unknown_section.empty())
          throw ConfigError(name_ + ": unknown section [" + unknown_section + "]",
                            unknown_line);
        if (line.back() != ']') throw ConfigError(name_ + ": malformed section header", ln);
        current = trim(line.substr(1, line.size() - 2));
        if (!kSections.count(current)) {
          unknown_section = current;
          unknown_line = ln;
          continue;
        }
        sections_[current];  // may legitimately stay empty
        continue;
      }
      const auto eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(name_ + ": expected key = value, got \"" + line + "\"", ln);
      const std::string key = trim(line.substr(0, eq));
      if (key.empty()) throw ConfigError(name_ + ": empty key", ln);
      if (!unknown_section.empty())
        throw ConfigError(name_ + ": unknown key " + unknown_section + "." + key, ln);
      if (current.empty()) throw ConfigError(name_ + ": key outside any section", ln);
      auto& sec = sections_[current];
      if (sec.count(key))
        throw ConfigError(name_ + ": duplicate key " + current + "." + key, ln);
      sec[key] = Entry{trim(line.substr(eq + 1)), ln, false};
    }
    if (!unknown_section.empty())
      throw ConfigError(name_ + ": unknown section [" + unknown_section + "]", unknown_line);
  }

  // nullptr when absent; marks the key used.
  Entry* find(const std::string& sec, const std::string& key) {
    auto s = sections_.find(sec);
    if (s == sections_.end()) return nullptr;
    auto k = s->second.find(key);
    if (k == s->second.end()) return nullptr;
    k->second.used = true;
    return &k->second;
  }

  Entry& require(const std::string& sec, const std::string& key) {
    Entry* e = find(sec, key);
    if (!e)
      throw ConfigError(name_ + ": missing required key " + sec + "." + key);
    return *e;
  }

  void reject_unused() const {
    for (const auto& [sec, keys] : sections_) {
      for (const auto& [key, entry] : keys) {
        if (!entry.used)
          throw ConfigError(name_ + ": unknown key " + sec + "." + key, entry.line);
      }
    }
  }

  const std::string& name() const { return name_; }

 private:
  std::string name_;
  std::map<std::string, SectionMap> sections_;
};

double to_double(const Parsed& p, const std::string& where, const Entry& e) {
  double v = 0.0;
  const char* b = e.value.data();
  const char* end = b + e.value.size();
  const auto [ptr, ec] = std::from_chars(b, end, v);
  if (ec != std::errc{} || ptr != end)
    throw ConfigError(p.name() + ": " + where + " is not a number: \"" + e.value + "\"",
                      e.line);
  return v;
}

std::uint64_t to_u64(const Parsed& p, const std::string& where, const Entry& e) {
  std::uint64_t v = 0;
  const char* b = e.value.data();
  const char* end = b + e.value.size();
  const auto [ptr, ec] = std::from_chars(b, end, v);
  if (ec != std::errc{} || ptr != end)
    throw ConfigError(p.name() + ": " + where + " is not a nonnegative integer: \"" +
                          e.value + "\"",
                      e.line);
  return v;
}

std::size_t to_size(const Parsed& p, const std::string& where, const Entry& e) {
  return static_cast<std::size_t>(to_u64(p, where, e));
}

// Optional scalar reads (default untouched when the key is absent).
void opt_double(Parsed& p, const std::string& sec, const std::string& key, double& out) {
  if (Entry* e = p.find(sec, key)) out = to_double(p, sec + "." + key, *e);
}
void opt_size(Parsed& p, const std::string& sec, const std::string& key, std::size_t& out) {
  if (Entry* e = p.find(sec, key)) out = to_size(p, sec + "." + key, *e);
}

unlearn::OptKind to_optimizer(const Parsed& p, const std::string& where, const Entry& e) {
  if (e.value == "sgd") return unlearn::OptKind::kSgd;
  if (e.value == "adam") return unlearn::OptKind::kAdam;
  throw ConfigError(p.name() + ": " + where + " must be sgd or adam, got \"" + e.value + "\"",
                    e.line);
}

void positive(const Parsed& p, const std::string& where, double v, int line) {
  if (!(v > 0.0))
    throw ConfigError(p.name() + ": " + where + " must be positive", line);
}

PhaseConfig read_phase(Parsed& p, const std::string& sec, const std::string& prefix) {
  PhaseConfig ph;
  const std::string pre = prefix.empty() ? "" : prefix + "_";
  if (Entry* e = p.find(sec, pre + "optimizer"))
    ph.optimizer = to_optimizer(p, sec + "." + pre + "optimizer", *e);
  Entry& lr = p.require(sec, pre + "lr");
  ph.lr = to_double(p, sec + "." + pre + "lr", lr);
  positive(p, sec + "." + pre + "lr", ph.lr, lr.line);
  ph.epochs = to_size(p, sec + "." + pre + "epochs", p.require(sec, pre + "epochs"));
  Entry& bs = p.require(sec, pre + "batch_size");
  ph.batch_size = to_size(p, sec + "." + pre + "batch_size", bs);
  if (ph.batch_size == 0)
    throw ConfigError(p.name() + ": " + sec + "." + pre + "batch_size must be >= 1", bs.line);
  return ph;
}

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <class T, class F>
std::string join(const std::vector<T>& v, F&& f) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += f(v[i]);
  }
  return out;
}

}  // namespace

ExperimentConfig parse_config_text(const std::string& text, const std::string& name) {
  Parsed p(text, name);
  ExperimentConfig cfg;

  // [dataset] — everything optional; defaults are the synthetic protocol's.
  if (Entry* e = p.find("dataset", "scenario")) {
    if (e->value == "superclass")
      cfg.dataset.scenario = datagen::Scenario::kSuperclass;
    else if (e->value == "biased")
      cfg.dataset.scenario = datagen::Scenario::kBiasedLabel;
    else
      throw ConfigError(name + ": dataset.scenario must be superclass or biased, got \"" +
                            e->value + "\"",
                        e->line);
  }
  if (p.find("dataset", "seed"))
    throw ConfigError(name + ": dataset.seed is owned by run.seeds, remove it");
  opt_size(p, "dataset", "num_superclasses", cfg.dataset.num_superclasses);
  opt_size(p, "dataset", "subclasses_per_superclass", cfg.dataset.subclasses_per_superclass);
  opt_size(p, "dataset", "samples_per_subclass", cfg.dataset.samples_per_subclass);
  opt_size(p, "dataset", "feature_dim", cfg.dataset.feature_dim);
  opt_double(p, "dataset", "superclass_center_scale", cfg.dataset.superclass_center_scale);
  opt_double(p, "dataset", "subclass_offset_scale", cfg.dataset.subclass_offset_scale);
  opt_double(p, "dataset", "noise_sigma", cfg.dataset.noise_sigma);
  opt_size(p, "dataset", "forget_subclass", cfg.dataset.forget_subclass);
  opt_double(p, "dataset", "test_fraction", cfg.dataset.test_fraction);
  opt_double(p, "dataset", "mislabel_fraction", cfg.dataset.mislabel_fraction);

  // [model]
  {
    Entry& hidden = p.require("model", "hidden");
    for (const std::string& item : split_list(hidden.value)) {
      Entry fake{item, hidden.line, true};
      cfg.hidden.push_back(to_size(p, "model.hidden", fake));
    }
    if (Entry* e = p.find("model", "activation")) {
      if (e->value == "relu")
        cfg.activation = Activation::kRelu;
      else if (e->value == "tanh")
        cfg.activation = Activation::kTanh;
      else
        throw ConfigError(name + ": model.activation must be relu or tanh, got \"" +
                              e->value + "\"",
                          e->line);
    }
  }

  // [original]
  cfg.original = read_phase(p, "original", "");

  // [stage1]
  {
    Entry& eta = p.require("stage1", "eta1");
    cfg.stage1.eta1 = to_double(p, "stage1.eta1", eta);
    positive(p, "stage1.eta1", cfg.stage1.eta1, eta.line);
    opt_double(p, "stage1", "mu", cfg.stage1.mu);
    cfg.stage1.clip_cap =
        cfg.dataset.scenario == datagen::Scenario::kSuperclass ? 10.0 : 5.0;
    opt_double(p, "stage1", "clip_cap", cfg.stage1.clip_cap);
    cfg.stage1.epochs = 1;
    opt_size(p, "stage1", "epochs", cfg.stage1.epochs);
    Entry& fb = p.require("stage1", "forget_batch_size");
    cfg.stage1.forget_batch_size = to_size(p, "stage1.forget_batch_size", fb);
    Entry& cb = p.require("stage1", "constraint_batch_size");
    cfg.stage1.constraint_batch_size = to_size(p, "stage1.constraint_batch_size", cb);
    if (cfg.stage1.forget_batch_size == 0 || cfg.stage1.constraint_batch_size == 0)
      throw ConfigError(name + ": stage1 batch sizes must be >= 1", fb.line);
    if (Entry* e = p.find("stage1", "optimizer"))
      cfg.stage1.optimizer = to_optimizer(p, "stage1.optimizer", *e);
    if (!(cfg.stage1.mu > 0.0) || !(cfg.stage1.clip_cap > 0.0))
      throw ConfigError(name + ": stage1.mu and stage1.clip_cap must be positive");
  }

  // [stage2]
  {
    opt_double(p, "stage2", "alpha", cfg.stage2.alpha);
    if (cfg.stage2.alpha < 0.0 || cfg.stage2.alpha > 1.0)
      throw ConfigError(name + ": stage2.alpha must be in [0,1]");
    Entry& eta = p.require("stage2", "eta2");
    cfg.stage2.eta2 = to_double(p, "stage2.eta2", eta);
    positive(p, "stage2.eta2", cfg.stage2.eta2, eta.line);
    cfg.stage2.epochs = to_size(p, "stage2.epochs", p.require("stage2", "epochs"));
    Entry& fb = p.require("stage2", "forget_batch_size");
    cfg.stage2.forget_batch_size = to_size(p, "stage2.forget_batch_size", fb);
    Entry& ab = p.require("stage2", "adjacent_batch_size");
    cfg.stage2.adjacent_batch_size = to_size(p, "stage2.adjacent_batch_size", ab);
    Entry& rb = p.require("stage2", "remote_batch_size");
    cfg.stage2.remote_batch_size = to_size(p, "stage2.remote_batch_size", rb);
    if (cfg.stage2.forget_batch_size == 0 || cfg.stage2.adjacent_batch_size == 0 ||
        cfg.stage2.remote_batch_size == 0)
      throw ConfigError(name + ": stage2 batch sizes must be >= 1", fb.line);
    opt_size(p, "stage2", "accumulation_batches", cfg.stage2.accumulation_batches);
    if (cfg.stage2.accumulation_batches == 0)
      throw ConfigError(name + ": stage2.accumulation_batches must be >= 1");
    opt_double(p, "stage2", "projection_tolerance", cfg.stage2.projection_tolerance);
    if (!(cfg.stage2.projection_tolerance > 0.0))
      throw ConfigError(name + ": stage2.projection_tolerance must be positive");
  }

  // [baselines]
  if (Entry* e = p.find("baselines", "methods")) {
    for (const std::string& m : split_list(e->value)) {
      if (!kMethods.count(m))
        throw ConfigError(name + ": unknown baseline method \"" + m + "\"", e->line);
      if (std::find(cfg.baseline_methods.begin(), cfg.baseline_methods.end(), m) !=
          cfg.baseline_methods.end())
        throw ConfigError(name + ": baseline method \"" + m + "\" listed twice", e->line);
      cfg.baseline_methods.push_back(m);
    }
  }
  const auto enabled = [&](const std::string& m) {
    return std::find(cfg.baseline_methods.begin(), cfg.baseline_methods.end(), m) !=
           cfg.baseline_methods.end();
  };
  for (const std::string m : {"ga", "ft", "retrain"}) {
    if (enabled(m)) {
      PhaseConfig ph = read_phase(p, "baselines", m);
      (m == std::string("ga") ? cfg.ga : m == std::string("ft") ? cfg.ft : cfg.retrain) = ph;
    }
  }

  // [ablations]
  if (Entry* e = p.find("ablations", "enabled")) {
    for (const std::string& a : split_list(e->value)) {
      if (!kAblations.count(a))
        throw ConfigError(name + ": unknown ablation \"" + a + "\"", e->line);
      if (std::find(cfg.ablations.begin(), cfg.ablations.end(), a) != cfg.ablations.end())
        throw ConfigError(name + ": ablation \"" + a + "\" listed twice", e->line);
      cfg.ablations.push_back(a);
    }
  }
  if (Entry* e = p.find("ablations", "alpha_grid")) {
    cfg.alpha_grid.clear();
    for (const std::string& item : split_list(e->value)) {
      Entry fake{item, e->line, true};
      const double a = to_double(p, "ablations.alpha_grid", fake);
      if (a < 0.0 || a > 1.0)
        throw ConfigError(name + ": ablations.alpha_grid entries must be in [0,1]", e->line);
      cfg.alpha_grid.push_back(a);
    }
    if (cfg.alpha_grid.empty())
      throw ConfigError(name + ": ablations.alpha_grid must not be empty", e->line);
  }
  if (Entry* e = p.find("ablations", "mu_grid")) {
    cfg.mu_grid.clear();
    for (const std::string& item : split_list(e->value)) {
      Entry fake{item, e->line, true};
      const double m = to_double(p, "ablations.mu_grid", fake);
      if (!(m > 0.0))
        throw ConfigError(name + ": ablations.mu_grid entries must be positive", e->line);
      cfg.mu_grid.push_back(m);
    }
    if (cfg.mu_grid.empty())
      throw ConfigError(name + ": ablations.mu_grid must not be empty", e->line);
  }
  if (Entry* e = p.find("ablations", "adjacency_noise_fraction")) {
    cfg.adjacency_noise_fraction = to_double(p, "ablations.adjacency_noise_fraction", *e);
    if (cfg.adjacency_noise_fraction < 0.0 || cfg.adjacency_noise_fraction > 1.0)
      throw ConfigError(name + ": ablations.adjacency_noise_fraction must be in [0,1]",
                        e->line);
  }
  if (Entry* e = p.find("ablations", "knn_k")) {
    cfg.knn_k = to_size(p, "ablations.knn_k", *e);
    if (cfg.knn_k == 0) throw ConfigError(name + ": ablations.knn_k must be >= 1", e->line);
  }
  if (Entry* e = p.find("ablations", "knn_top_fraction")) {
    cfg.knn_top_fraction = to_double(p, "ablations.knn_top_fraction", *e);
    if (!(cfg.knn_top_fraction > 0.0) || cfg.knn_top_fraction > 1.0)
      throw ConfigError(name + ": ablations.knn_top_fraction must be in (0,1]", e->line);
  }

  // [run]
  {
    Entry& seeds = p.require("run", "seeds");
    for (const std::string& item : split_list(seeds.value)) {
      Entry fake{item, seeds.line, true};
      cfg.seeds.push_back(to_u64(p, "run.seeds", fake));
    }
    if (cfg.seeds.empty())
      throw ConfigError(name + ": run.seeds must list at least one seed", seeds.line);
    if (Entry* e = p.find("run", "out")) cfg.out_dir = e->value;
    if (Entry* e = p.find("run", "histogram_bins")) {
      cfg.histogram_bins = to_size(p, "run.histogram_bins", *e);
      if (cfg.histogram_bins == 0)
        throw ConfigError(name + ": run.histogram_bins must be >= 1", e->line);
    }
  }

  p.reject_unused();
  return cfg;
}

ExperimentConfig parse_config(const std::string& path) {
  return parse_config_text(read_file(path), path);
}

std::string canonical_config(const ExperimentConfig& cfg) {
  std::string o;
  const auto kv = [&o](const std::string& k, const std::string& v) {
    o += k;
    o += " = ";
    o += v;
    o += "\n";
  };
  const auto num = [](double v) { return format_double(v); };
  const auto idx = [](std::size_t v) { return std::to_string(v); };
  const auto opt = [](unlearn::OptKind k) {
    return std::string(k == unlearn::OptKind::kSgd ? "sgd" : "adam");
  };

  o += "[dataset]\n";
  kv("scenario",
     cfg.dataset.scenario == datagen::Scenario::kSuperclass ? "superclass" : "biased");
  kv("num_superclasses", idx(cfg.dataset.num_superclasses));
  kv("subclasses_per_superclass", idx(cfg.dataset.subclasses_per_superclass));
  kv("samples_per_subclass", idx(cfg.dataset.samples_per_subclass));
  kv("feature_dim", idx(cfg.dataset.feature_dim));
  kv("superclass_center_scale", num(cfg.dataset.superclass_center_scale));
  kv("subclass_offset_scale", num(cfg.dataset.subclass_offset_scale));
  kv("noise_sigma", num(cfg.dataset.noise_sigma));
  kv("forget_subclass", idx(cfg.dataset.forget_subclass));
  kv("test_fraction", num(cfg.dataset.test_fraction));
  kv("mislabel_fraction", num(cfg.dataset.mislabel_fraction));

  o += "\n[model]\n";
  kv("hidden", join(cfg.hidden, [](std::size_t h) { return std::to_string(h); }));
  kv("activation", cfg.activation == Activation::kRelu ? "relu" : "tanh");

  const auto phase = [&](const PhaseConfig& ph, const std::string& prefix) {
    const std::string pre = prefix.empty() ? "" : prefix + "_";
    kv(pre + "optimizer", opt(ph.optimizer));
    kv(pre + "lr", num(ph.lr));
    kv(pre + "epochs", idx(ph.epochs));
    kv(pre + "batch_size", idx(ph.batch_size));
  };

  o += "\n[original]\n";
  phase(cfg.original, "");

  o += "\n[stage1]\n";
  kv("eta1", num(cfg.stage1.eta1));
  kv("mu", num(cfg.stage1.mu));
  kv("clip_cap", num(cfg.stage1.clip_cap));
  kv("epochs", idx(cfg.stage1.epochs));
  kv("forget_batch_size", idx(cfg.stage1.forget_batch_size));
  kv("constraint_batch_size", idx(cfg.stage1.constraint_batch_size));
  kv("optimizer", opt(cfg.stage1.optimizer));

  o += "\n[stage2]\n";
  kv("alpha", num(cfg.stage2.alpha));
  kv("eta2", num(cfg.stage2.eta2));
  kv("epochs", idx(cfg.stage2.epochs));
  kv("forget_batch_size", idx(cfg.stage2.forget_batch_size));
  kv("adjacent_batch_size", idx(cfg.stage2.adjacent_batch_size));
  kv("remote_batch_size", idx(cfg.stage2.remote_batch_size));
  kv("accumulation_batches", idx(cfg.stage2.accumulation_batches));
  kv("projection_tolerance", num(cfg.stage2.projection_tolerance));

  o += "\n[baselines]\n";
  kv("methods", join(cfg.baseline_methods, [](const std::string& s) { return s; }));
  const auto enabled = [&](const std::string& m) {
    return std::find(cfg.baseline_methods.begin(), cfg.baseline_methods.end(), m) !=
           cfg.baseline_methods.end();
  };
  if (enabled("ga")) phase(cfg.ga, "ga");
  if (enabled("ft")) phase(cfg.ft, "ft");
  if (enabled("retrain")) phase(cfg.retrain, "retrain");

  o += "\n[ablations]\n";
  kv("enabled", join(cfg.ablations, [](const std::string& s) { return s; }));
  kv("alpha_grid", join(cfg.alpha_grid, num));
  kv("mu_grid", join(cfg.mu_grid, num));
  kv("adjacency_noise_fraction", num(cfg.adjacency_noise_fraction));
  kv("knn_k", idx(cfg.knn_k));
  kv("knn_top_fraction", num(cfg.knn_top_fraction));

  o += "\n[run]\n";
  kv("seeds", join(cfg.seeds, [](std::uint64_t s) { return std::to_string(s); }));
  kv("out", cfg.out_dir);
  kv("histogram_bins", idx(cfg.histogram_bins));
  return o;
}

std::string config_hash(const ExperimentConfig& cfg) {
  // The fingerprint identifies the experiment, not where its artifacts land:
  // the same config written to two output directories hashes identically.
  ExperimentConfig keyed = cfg;
  keyed.out_dir.clear();
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(fnv1a64(canonical_config(keyed))));
  return std::string(buf);
}

}  // namespace wforget::harness
