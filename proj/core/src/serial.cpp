#include "wforget/serial.hpp"

#include <bit>
#include <cerrno>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "wforget/errors.hpp"

namespace wforget {

uint64_t fnv1a64(std::string_view bytes) {
  uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_i32(std::string& out, int32_t v) { put_u32(out, static_cast<uint32_t>(v)); }

void put_f64(std::string& out, double v) { put_u64(out, std::bit_cast<uint64_t>(v)); }

void put_str(std::string& out, const std::string& s) {
  put_u32(out, static_cast<uint32_t>(s.size()));
  out += s;
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::string& path) : b_(bytes), path_(path) {}

  uint32_t u32() {
    need(4);
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
    pos_ += 4;
    return v;
  }
  uint64_t u64() {
    need(8);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(static_cast<unsigned char>(b_[pos_ + i])) << (8 * i);
    pos_ += 8;
    return v;
  }
  int32_t i32() { return static_cast<int32_t>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  uint8_t u8() {
    need(1);
    return static_cast<uint8_t>(b_[pos_++]);
  }
  std::string str() {
    const uint32_t len = u32();
    need(len);
    std::string s = b_.substr(pos_, len);
    pos_ += len;
    return s;
  }
  size_t pos() const { return pos_; }

 private:
  void need(size_t k) const {
    if (pos_ + k > b_.size()) throw IoError(path_ + ": truncated file");
  }
  const std::string& b_;
  std::string path_;
  size_t pos_ = 0;
};

// Frames payload with magic + version up front and a checksum of everything
// before it at the end.
std::string frame(const char magic[4], uint32_t version, const std::string& payload) {
  std::string out;
  out.reserve(payload.size() + 16);
  out.append(magic, 4);
  put_u32(out, version);
  out += payload;
  put_u64(out, fnv1a64(out));
  return out;
}

std::string unframe(const std::string& bytes, const char magic[4], uint32_t max_version,
                    const std::string& path, uint32_t* version_out) {
  if (bytes.size() < 16) throw IoError(path + ": file too short");
  if (std::memcmp(bytes.data(), magic, 4) != 0) {
    throw IoError(path + ": bad magic, not a " + std::string(magic, 4) + " file");
  }
  const std::string body = bytes.substr(0, bytes.size() - 8);
  uint64_t stored = 0;
  for (int i = 0; i < 8; ++i) {
    stored |= static_cast<uint64_t>(static_cast<unsigned char>(bytes[bytes.size() - 8 + i]))
              << (8 * i);
  }
  if (fnv1a64(body) != stored) throw IoError(path + ": checksum mismatch, file is corrupt");
  uint32_t version = 0;
  for (int i = 0; i < 4; ++i) {
    version |= static_cast<uint32_t>(static_cast<unsigned char>(bytes[4 + i])) << (8 * i);
  }
  if (version == 0 || version > max_version) {
    throw IoError(path + ": unsupported format version " + std::to_string(version));
  }
  *version_out = version;
  return body.substr(8);
}

}  // namespace

void atomic_write_file(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError(tmp + ": cannot open for writing");
    f.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!f) throw IoError(tmp + ": write failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw IoError(path + ": rename failed: " + ec.message());
}

std::string read_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError(path + ": cannot open for reading");
  std::string bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (f.bad()) throw IoError(path + ": read failed");
  return bytes;
}

namespace datagen {

static constexpr char kDatasetMagic[4] = {'W', 'F', 'D', 'S'};
static constexpr uint32_t kDatasetVersion = 1;

void save_dataset(const Dataset& ds, const std::string& path) {
  ds.validate();
  std::string p;
  put_u64(p, ds.n());
  put_u64(p, ds.feature_dim);
  put_u64(p, ds.num_classes);
  p.push_back(ds.eval_labels.empty() ? '\0' : '\1');
  put_str(p, ds.meta.scenario);
  put_u64(p, ds.meta.seed);
  put_u32(p, static_cast<uint32_t>(ds.meta.params.size()));
  for (const auto& [k, v] : ds.meta.params) {
    put_str(p, k);
    put_str(p, v);
  }
  for (double v : ds.features) put_f64(p, v);
  for (int32_t v : ds.labels) put_i32(p, v);
  for (int32_t v : ds.eval_labels) put_i32(p, v);
  for (Subset s : ds.subset) p.push_back(static_cast<char>(s));
  for (Split s : ds.split) p.push_back(static_cast<char>(s));
  atomic_write_file(path, frame(kDatasetMagic, kDatasetVersion, p));
}

Dataset load_dataset(const std::string& path) {
  uint32_t version = 0;
  const std::string payload =
      unframe(read_file(path), kDatasetMagic, kDatasetVersion, path, &version);
  Reader r(payload, path);
  Dataset ds;
  const uint64_t n = r.u64();
  ds.feature_dim = r.u64();
  ds.num_classes = r.u64();
  const bool has_eval = r.u8() != 0;
  ds.meta.scenario = r.str();
  ds.meta.seed = r.u64();
  const uint32_t nparams = r.u32();
  for (uint32_t i = 0; i < nparams; ++i) {
    std::string k = r.str();
    std::string v = r.str();
    ds.meta.params.emplace_back(std::move(k), std::move(v));
  }
  ds.features.resize(n * ds.feature_dim);
  for (double& v : ds.features) v = r.f64();
  ds.labels.resize(n);
  for (int32_t& v : ds.labels) v = r.i32();
  if (has_eval) {
    ds.eval_labels.resize(n);
    for (int32_t& v : ds.eval_labels) v = r.i32();
  }
  ds.subset.resize(n);
  for (Subset& s : ds.subset) s = static_cast<Subset>(r.u8());
  ds.split.resize(n);
  for (Split& s : ds.split) s = static_cast<Split>(r.u8());
  try {
    ds.validate();
  } catch (const DomainError& e) {
    throw IoError(path + ": invalid dataset: " + e.what());
  }
  return ds;
}

}  // namespace datagen

static constexpr char kParamMagic[4] = {'W', 'F', 'P', 'M'};
static constexpr uint32_t kParamVersion = 1;

void save_params(const ParamVector& theta, const std::string& path) {
  std::string p;
  put_u64(p, theta.size());
  for (double v : theta) put_f64(p, v);
  atomic_write_file(path, frame(kParamMagic, kParamVersion, p));
}

ParamVector load_params(const std::string& path) {
  uint32_t version = 0;
  const std::string payload = unframe(read_file(path), kParamMagic, kParamVersion, path, &version);
  Reader r(payload, path);
  ParamVector theta(r.u64());
  for (double& v : theta) v = r.f64();
  return theta;
}

}  // namespace wforget
