#include "wforget/generator.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wforget/errors.hpp"
#include "wforget/rng.hpp"

namespace wforget::datagen {

namespace {

void check_common(const GeneratorConfig& cfg) {
  if (cfg.feature_dim == 0) throw DomainError("generator: feature_dim must be positive");
  if (cfg.samples_per_subclass == 0) {
    throw DomainError("generator: samples_per_subclass must be positive");
  }
  if (cfg.subclasses_per_superclass < 2) {
    throw DomainError("generator: need at least 2 subclasses per superclass");
  }
  if (cfg.forget_subclass >= cfg.subclasses_per_superclass) {
    throw DomainError("generator: forget_subclass " + std::to_string(cfg.forget_subclass) +
                      " out of range");
  }
  if (cfg.test_fraction < 0.0 || cfg.test_fraction >= 1.0) {
    throw DomainError("generator: test_fraction must lie in [0, 1)");
  }
  if (cfg.noise_sigma < 0.0 || cfg.superclass_center_scale < 0.0 ||
      cfg.subclass_offset_scale < 0.0) {
    throw DomainError("generator: scales must be nonnegative");
  }
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

void record_meta(Dataset& ds, const GeneratorConfig& cfg, const char* scenario) {
  ds.meta.scenario = scenario;
  ds.meta.seed = cfg.seed;
  ds.meta.params = {
      {"num_superclasses", std::to_string(cfg.num_superclasses)},
      {"subclasses_per_superclass", std::to_string(cfg.subclasses_per_superclass)},
      {"samples_per_subclass", std::to_string(cfg.samples_per_subclass)},
      {"feature_dim", std::to_string(cfg.feature_dim)},
      {"superclass_center_scale", fmt(cfg.superclass_center_scale)},
      {"subclass_offset_scale", fmt(cfg.subclass_offset_scale)},
      {"noise_sigma", fmt(cfg.noise_sigma)},
      {"forget_subclass", std::to_string(cfg.forget_subclass)},
      {"test_fraction", fmt(cfg.test_fraction)},
      {"mislabel_fraction", fmt(cfg.mislabel_fraction)},
  };
}

// Marks `test_count` of the samples listed in `idx` as test, chosen by a
// seeded shuffle of a copy; idx order itself is left untouched.
void assign_split(Dataset& ds, std::vector<size_t> idx, size_t test_count, Rng& rng) {
  rng.shuffle(idx);
  for (size_t k = 0; k < test_count; ++k) ds.split[idx[k]] = Split::kTest;
}

}  // namespace

Dataset generate_superclass(const GeneratorConfig& cfg) {
  check_common(cfg);
  if (cfg.num_superclasses < 2) {
    throw DomainError("generator: need at least 2 superclasses");
  }

  const size_t n_sup = cfg.num_superclasses;
  const size_t n_sub = cfg.subclasses_per_superclass;
  const size_t m = cfg.samples_per_subclass;
  const size_t d = cfg.feature_dim;
  const size_t total = n_sup * n_sub * m;

  Rng rng(cfg.seed);
  std::vector<double> centers(n_sup * d);
  for (double& v : centers) v = cfg.superclass_center_scale * rng.normal();
  std::vector<double> submeans(n_sup * n_sub * d);
  for (size_t s = 0; s < n_sup; ++s) {
    for (size_t k = 0; k < n_sub; ++k) {
      for (size_t j = 0; j < d; ++j) {
        submeans[(s * n_sub + k) * d + j] =
            centers[s * d + j] + cfg.subclass_offset_scale * rng.normal();
      }
    }
  }

  Dataset ds;
  ds.feature_dim = d;
  ds.num_classes = n_sup;
  ds.features.resize(total * d);
  ds.labels.resize(total);
  ds.subset.resize(total);
  ds.split.assign(total, Split::kTrain);

  size_t row = 0;
  for (size_t s = 0; s < n_sup; ++s) {
    for (size_t k = 0; k < n_sub; ++k) {
      for (size_t i = 0; i < m; ++i, ++row) {
        for (size_t j = 0; j < d; ++j) {
          ds.features[row * d + j] =
              submeans[(s * n_sub + k) * d + j] + cfg.noise_sigma * rng.normal();
        }
        ds.labels[row] = static_cast<int32_t>(s);
        if (s == 0) {
          ds.subset[row] = (k == cfg.forget_subclass) ? Subset::kForget : Subset::kAdjacent;
        } else {
          ds.subset[row] = Subset::kRemote;
        }
      }
    }
  }

  const size_t test_count = static_cast<size_t>(std::llround(cfg.test_fraction * double(m)));
  for (size_t s = 0; s < n_sup; ++s) {
    for (size_t k = 0; k < n_sub; ++k) {
      std::vector<size_t> idx(m);
      std::iota(idx.begin(), idx.end(), (s * n_sub + k) * m);
      assign_split(ds, std::move(idx), test_count, rng);
    }
  }

  record_meta(ds, cfg, "superclass");
  ds.validate();
  return ds;
}

Dataset generate_biased_label(const GeneratorConfig& cfg) {
  check_common(cfg);
  if (cfg.num_superclasses != 2) {
    throw DomainError("generator: the biased-label scenario is binary classification; "
                      "num_superclasses must be 2");
  }
  if (cfg.mislabel_fraction <= 0.0 || cfg.mislabel_fraction > 1.0) {
    throw DomainError("generator: mislabel_fraction must lie in (0, 1]; 0 would leave the "
                      "forget set empty");
  }

  const size_t groups = cfg.subclasses_per_superclass;
  const size_t m = cfg.samples_per_subclass;  // per group and class
  const size_t d = cfg.feature_dim;
  const size_t total = groups * 2 * m;
  const size_t mislabeled = static_cast<size_t>(std::llround(cfg.mislabel_fraction * double(m)));
  if (mislabeled == 0) {
    throw DomainError("generator: mislabel_fraction rounds to an empty forget set");
  }

  Rng rng(cfg.seed);
  std::vector<double> centers(groups * d);
  for (double& v : centers) v = cfg.superclass_center_scale * rng.normal();
  // Unit direction along which the two classes separate inside each group.
  std::vector<double> dirs(groups * d);
  for (size_t g = 0; g < groups; ++g) {
    double nrm = 0.0;
    for (size_t j = 0; j < d; ++j) {
      dirs[g * d + j] = rng.normal();
      nrm += dirs[g * d + j] * dirs[g * d + j];
    }
    nrm = std::sqrt(nrm);
    if (nrm == 0.0) nrm = 1.0;
    for (size_t j = 0; j < d; ++j) dirs[g * d + j] /= nrm;
  }

  Dataset ds;
  ds.feature_dim = d;
  ds.num_classes = 2;
  ds.features.resize(total * d);
  ds.labels.resize(total);
  ds.eval_labels.resize(total);
  ds.subset.resize(total);
  ds.split.assign(total, Split::kTrain);

  // Group g occupies rows [g*2m, (g+1)*2m): positives first, then negatives.
  size_t row = 0;
  for (size_t g = 0; g < groups; ++g) {
    for (int cls = 1; cls >= 0; --cls) {
      const double sign = cls == 1 ? 1.0 : -1.0;
      for (size_t i = 0; i < m; ++i, ++row) {
        for (size_t j = 0; j < d; ++j) {
          ds.features[row * d + j] = centers[g * d + j] +
                                     sign * cfg.subclass_offset_scale * dirs[g * d + j] +
                                     cfg.noise_sigma * rng.normal();
        }
        ds.labels[row] = cls;
        ds.eval_labels[row] = cls;
        ds.subset[row] = g == cfg.forget_subclass ? Subset::kAdjacent : Subset::kRemote;
      }
    }
  }

  // Mislabel a seeded choice of the designated subgroup's positives.
  {
    std::vector<size_t> pos(m);
    std::iota(pos.begin(), pos.end(), cfg.forget_subclass * 2 * m);
    rng.shuffle(pos);
    for (size_t k = 0; k < mislabeled; ++k) {
      ds.labels[pos[k]] = 0;       // biased training label
      ds.eval_labels[pos[k]] = 1;  // corrected target
      ds.subset[pos[k]] = Subset::kForget;
    }
  }

  const size_t test_count = static_cast<size_t>(std::llround(cfg.test_fraction * double(m)));
  for (size_t g = 0; g < groups; ++g) {
    for (size_t half = 0; half < 2; ++half) {
      std::vector<size_t> idx(m);
      std::iota(idx.begin(), idx.end(), (g * 2 + half) * m);
      assign_split(ds, std::move(idx), test_count, rng);
    }
  }

  record_meta(ds, cfg, "biased_label");
  ds.validate();
  return ds;
}

Dataset generate(const GeneratorConfig& cfg) {
  return cfg.scenario == Scenario::kSuperclass ? generate_superclass(cfg)
                                               : generate_biased_label(cfg);
}

void perturb_adjacency(Dataset& ds, NoiseMode mode, double fraction, uint64_t seed) {
  if (fraction < 0.0 || fraction > 1.0) {
    throw DomainError("perturb_adjacency: fraction must lie in [0, 1]");
  }
  const Subset src = mode == NoiseMode::kAdjacentToRemote ? Subset::kAdjacent : Subset::kRemote;
  const Subset dst = mode == NoiseMode::kAdjacentToRemote ? Subset::kRemote : Subset::kAdjacent;
  std::vector<size_t> candidates = ds.indices(src);
  const size_t k = static_cast<size_t>(std::llround(fraction * double(candidates.size())));
  if (k == 0) return;

  Rng rng(seed);
  rng.shuffle(candidates);
  for (size_t i = 0; i < k; ++i) ds.subset[candidates[i]] = dst;

  ds.meta.params.emplace_back("perturb_mode",
                              mode == NoiseMode::kAdjacentToRemote ? "adjacent_to_remote"
                                                                   : "remote_to_adjacent");
  ds.meta.params.emplace_back("perturb_fraction", fmt(fraction));
  ds.meta.params.emplace_back("perturb_seed", std::to_string(seed));
  ds.validate();
}

}  // namespace wforget::datagen
