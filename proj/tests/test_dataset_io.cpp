#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "wforget/errors.hpp"
#include "wforget/generator.hpp"
#include "wforget/rng.hpp"
#include "wforget/serial.hpp"

using namespace wforget;
using namespace wforget::datagen;

namespace {

std::filesystem::path tmp_path(const char* name) {
  return std::filesystem::temp_directory_path() / name;
}

// Checksum over everything before the trailing 8 bytes, matching the on-disk
// convention (64-bit FNV-1a).
uint64_t fnv1a64(const std::string& bytes) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void rewrite_with_fresh_checksum(const std::filesystem::path& path, std::string bytes) {
  const std::string body = bytes.substr(0, bytes.size() - 8);
  const uint64_t h = fnv1a64(body);
  for (int i = 0; i < 8; ++i) {
    bytes[bytes.size() - 8 + i] = static_cast<char>((h >> (8 * i)) & 0xff);
  }
  atomic_write_file(path.string(), bytes);
}

void check_equal(const Dataset& a, const Dataset& b) {
  CHECK(a.feature_dim == b.feature_dim);
  CHECK(a.num_classes == b.num_classes);
  CHECK(a.features == b.features);
  CHECK(a.labels == b.labels);
  CHECK(a.eval_labels == b.eval_labels);
  CHECK(a.subset == b.subset);
  CHECK(a.split == b.split);
  CHECK(a.meta.scenario == b.meta.scenario);
  CHECK(a.meta.seed == b.meta.seed);
  CHECK(a.meta.params == b.meta.params);
}

Dataset sample_dataset(Scenario scenario) {
  GeneratorConfig cfg;
  cfg.scenario = scenario;
  cfg.num_superclasses = scenario == Scenario::kBiasedLabel ? 2 : 3;
  cfg.subclasses_per_superclass = 3;
  cfg.samples_per_subclass = 8;
  cfg.feature_dim = 4;
  cfg.mislabel_fraction = 0.5;
  cfg.seed = 21;
  return generate(cfg);
}

}  // namespace

TEST_CASE("dataset files round-trip exactly") {
  for (Scenario s : {Scenario::kSuperclass, Scenario::kBiasedLabel}) {
    Dataset ds = sample_dataset(s);
    if (s == Scenario::kSuperclass) {
      // Exercise the appended metadata path too.
      perturb_adjacency(ds, NoiseMode::kAdjacentToRemote, 0.25, 3);
    }
    const auto path = tmp_path("wforget_io_roundtrip.bin");
    save_dataset(ds, path.string());
    CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
    Dataset back = load_dataset(path.string());
    check_equal(ds, back);
    std::filesystem::remove(path);
  }
}

TEST_CASE("saving is deterministic at the byte level") {
  Dataset ds = sample_dataset(Scenario::kSuperclass);
  const auto p1 = tmp_path("wforget_io_bytes_a.bin");
  const auto p2 = tmp_path("wforget_io_bytes_b.bin");
  save_dataset(ds, p1.string());
  save_dataset(ds, p2.string());
  CHECK(read_file(p1.string()) == read_file(p2.string()));
  std::filesystem::remove(p1);
  std::filesystem::remove(p2);
}

TEST_CASE("corrupted dataset files are rejected") {
  Dataset ds = sample_dataset(Scenario::kSuperclass);
  const auto path = tmp_path("wforget_io_corrupt.bin");
  save_dataset(ds, path.string());
  std::string bytes = read_file(path.string());

  SUBCASE("a flipped payload byte breaks the checksum") {
    bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x40);
    atomic_write_file(path.string(), bytes);
    CHECK_THROWS_AS(load_dataset(path.string()), IoError);
  }

  SUBCASE("truncation is detected") {
    atomic_write_file(path.string(), bytes.substr(0, bytes.size() / 2));
    CHECK_THROWS_AS(load_dataset(path.string()), IoError);
  }

  SUBCASE("a short file is rejected before any parsing") {
    atomic_write_file(path.string(), "WFDS");
    CHECK_THROWS_AS(load_dataset(path.string()), IoError);
  }

  SUBCASE("foreign magic is rejected") {
    bytes[0] = 'X';
    rewrite_with_fresh_checksum(path, bytes);
    CHECK_THROWS_AS(load_dataset(path.string()), IoError);
  }

  SUBCASE("a future format version is rejected even with a valid checksum") {
    bytes[4] = 2;  // version field, little endian
    rewrite_with_fresh_checksum(path, bytes);
    CHECK_THROWS_AS(load_dataset(path.string()), IoError);
  }

  SUBCASE("a corrupt subset tag fails structural validation") {
    // Subset bytes sit right before the split bytes and the checksum.
    const size_t subset_off = bytes.size() - 8 - 2 * ds.n();
    bytes[subset_off] = 7;
    rewrite_with_fresh_checksum(path, bytes);
    CHECK_THROWS_AS(load_dataset(path.string()), IoError);
  }

  std::filesystem::remove(path);
}

TEST_CASE("missing files raise io errors") {
  CHECK_THROWS_AS(load_dataset(tmp_path("wforget_io_does_not_exist.bin").string()), IoError);
  CHECK_THROWS_AS(read_file(tmp_path("wforget_io_does_not_exist.bin").string()), IoError);
}

TEST_CASE("parameter snapshots round-trip bit for bit") {
  Rng rng(5);
  ParamVector theta(257);
  for (double& v : theta) v = rng.normal() * std::pow(10.0, rng.normal());
  theta[0] = 0.0;
  theta[1] = -0.0;
  theta[2] = 1e-308;  // subnormal-adjacent magnitude

  const auto path = tmp_path("wforget_io_params.bin");
  save_params(theta, path.string());
  ParamVector back = load_params(path.string());
  REQUIRE(back.size() == theta.size());
  for (size_t i = 0; i < theta.size(); ++i) {
    CHECK(std::bit_cast<uint64_t>(back[i]) == std::bit_cast<uint64_t>(theta[i]));
  }

  // A parameter file is not a dataset file.
  CHECK_THROWS_AS(load_dataset(path.string()), IoError);
  std::filesystem::remove(path);
}
