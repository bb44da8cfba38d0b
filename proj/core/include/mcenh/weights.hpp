// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace mcenh {

struct Tensor {
  std::vector<std::int64_t> shape;
  std::vector<float> data;  // row-major

  std::size_t numel() const;
};

// Named parameter tensors for the mask estimator.
class WeightStore {
 public:
  WeightStore() = default;
  explicit WeightStore(std::uint64_t rng_seed) : rng_seed_(rng_seed) {}

  void set(std::string name, Tensor tensor);
  bool contains(std::string_view name) const;
  const Tensor& at(std::string_view name) const;
  Tensor& at(std::string_view name);

  const std::map<std::string, Tensor, std::less<>>& tensors() const { return tensors_; }
  std::size_t size() const { return tensors_.size(); }
  std::size_t parameter_count() const;

  std::uint64_t rng_seed() const { return rng_seed_; }

 private:
  std::uint64_t rng_seed_ = 0;
  std::map<std::string, Tensor, std::less<>> tensors_;
};

struct ManifestEntry {
  std::string name;
  std::vector<std::int64_t> shape;
};

std::vector<ManifestEntry> manifest(const WeightStore& store);

// Container layout: "NMW1", then until end of file one record per tensor:
//   u32 name length, UTF-8 name, u32 rank, rank x u64 dims,
//   prod(dims) x f32 values (row-major). All integers little-endian.
void save_weights(const std::filesystem::path& path, const WeightStore& store);
WeightStore load_weights(const std::filesystem::path& path);

}  // namespace mcenh
