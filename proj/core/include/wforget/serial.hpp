#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "wforget/dataset.hpp"
#include "wforget/mlp.hpp"

namespace wforget {

// Writes via a temp file in the same directory followed by an atomic rename,
// so readers never observe a partially written file.
// FNV-1a 64-bit hash; used for file checksums and config fingerprints.
uint64_t fnv1a64(std::string_view bytes);

void atomic_write_file(const std::string& path, const std::string& bytes);

std::string read_file(const std::string& path);

namespace datagen {

// Versioned little-endian container with a trailing 64-bit FNV-1a checksum.
void save_dataset(const Dataset& ds, const std::string& path);
Dataset load_dataset(const std::string& path);

}  // namespace datagen

// Flat parameter snapshots, same container conventions as datasets.
void save_params(const ParamVector& theta, const std::string& path);
ParamVector load_params(const std::string& path);

}  // namespace wforget
