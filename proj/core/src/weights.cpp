// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include "mcenh/weights.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "mcenh/error.hpp"

namespace mcenh {
namespace {

static_assert(std::endian::native == std::endian::little,
              "weight container I/O assumes a little-endian host");

constexpr char kMagic[4] = {'N', 'M', 'W', '1'};
constexpr std::uint32_t kMaxRank = 8;
constexpr std::uint32_t kMaxNameLength = 4096;

template <typename T>
void put(std::string& out, T v) {
  char raw[sizeof(T)];
  std::memcpy(raw, &v, sizeof(T));
  out.append(raw, sizeof(T));
}

class Reader {
 public:
  Reader(const std::vector<char>& buf, const std::filesystem::path& path)
      : buf_(buf), path_(path) {}

  bool done() const { return pos_ == buf_.size(); }

  template <typename T>
  T read(std::string_view what) {
    need(sizeof(T), what);
    T v;
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }

  std::string read_string(std::size_t len) {
    need(len, "tensor name");
    std::string s(buf_.data() + pos_, len);
    pos_ += len;
    return s;
  }

  void read_floats(float* dst, std::size_t count, std::string_view name) {
    need(count * sizeof(float), name);
    std::memcpy(dst, buf_.data() + pos_, count * sizeof(float));
    pos_ += count * sizeof(float);
  }

 private:
  void need(std::size_t bytes, std::string_view what) {
    if (buf_.size() - pos_ < bytes)
      throw Error(fmt::format("{}: truncated weight container while reading {}",
                              path_.string(), what));
  }

  const std::vector<char>& buf_;
  const std::filesystem::path& path_;
  std::size_t pos_ = 0;
};

}  // namespace

std::size_t Tensor::numel() const {
  std::size_t n = 1;
  for (auto d : shape) n *= static_cast<std::size_t>(d);
  return n;
}

void WeightStore::set(std::string name, Tensor tensor) {
  if (tensor.numel() != tensor.data.size())
    throw Error(fmt::format("tensor {}: shape [{}] does not match {} values", name,
                            fmt::join(tensor.shape, ", "), tensor.data.size()));
  tensors_.insert_or_assign(std::move(name), std::move(tensor));
}

bool WeightStore::contains(std::string_view name) const {
  return tensors_.find(name) != tensors_.end();
}

const Tensor& WeightStore::at(std::string_view name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw Error(fmt::format("missing parameter tensor {}", name));
  return it->second;
}

Tensor& WeightStore::at(std::string_view name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw Error(fmt::format("missing parameter tensor {}", name));
  return it->second;
}

std::size_t WeightStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : tensors_) n += t.numel();
  return n;
}

std::vector<ManifestEntry> manifest(const WeightStore& store) {
  std::vector<ManifestEntry> out;
  out.reserve(store.size());
  for (const auto& [name, t] : store.tensors()) out.push_back({name, t.shape});
  return out;
}

void save_weights(const std::filesystem::path& path, const WeightStore& store) {
  std::string out(kMagic, sizeof(kMagic));
  for (const auto& [name, t] : store.tensors()) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.append(name);
    put<std::uint32_t>(out, static_cast<std::uint32_t>(t.shape.size()));
    for (auto d : t.shape) put<std::uint64_t>(out, static_cast<std::uint64_t>(d));
    out.append(reinterpret_cast<const char*>(t.data.data()), t.data.size() * sizeof(float));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(fmt::format("{}: cannot open for writing", path.string()));
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error(fmt::format("{}: write failed", path.string()));
}

WeightStore load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("{}: cannot open for reading", path.string()));
  const std::vector<char> buf((std::istreambuf_iterator<char>(in)),
                              std::istreambuf_iterator<char>());
  if (buf.size() < sizeof(kMagic) || std::memcmp(buf.data(), kMagic, sizeof(kMagic)) != 0)
    throw Error(fmt::format("{}: bad magic, not an NMW1 weight container", path.string()));

  Reader reader(buf, path);
  reader.read<std::uint32_t>("magic");
  WeightStore store;
  while (!reader.done()) {
    const auto name_len = reader.read<std::uint32_t>("name length");
    if (name_len == 0 || name_len > kMaxNameLength)
      throw Error(fmt::format("{}: implausible tensor name length {}", path.string(), name_len));
    std::string name = reader.read_string(name_len);
    const auto rank = reader.read<std::uint32_t>("rank");
    if (rank > kMaxRank)
      throw Error(fmt::format("{}: tensor {} has implausible rank {}", path.string(), name, rank));
    Tensor t;
    std::size_t count = 1;
    for (std::uint32_t i = 0; i < rank; ++i) {
      const auto d = reader.read<std::uint64_t>("dims");
      if (d > (std::uint64_t{1} << 32))
        throw Error(fmt::format("{}: tensor {} has implausible dim {}", path.string(), name, d));
      t.shape.push_back(static_cast<std::int64_t>(d));
      count *= static_cast<std::size_t>(d);
    }
    t.data.resize(count);
    reader.read_floats(t.data.data(), count, name);
    if (store.contains(name))
      throw Error(fmt::format("{}: duplicate tensor {}", path.string(), name));
    store.set(std::move(name), std::move(t));
  }
  return store;
}

}  // namespace mcenh
