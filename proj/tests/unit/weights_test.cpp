// Copyright 2026 The mcenh Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#include <cstring>
#include <fstream>

#include <gtest/gtest.h>

#include "mcenh/error.hpp"
#include "mcenh/weights.hpp"
#include "test_util.hpp"

namespace mcenh {
namespace {

using testing::TempDir;

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

void dump(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream(p, std::ios::binary) << bytes;
}

WeightStore sample_store() {
  WeightStore s(0);
  s.set("b.bias", Tensor{{3}, {1.5f, -2.0f, 0.25f}});
  s.set("a.weight", Tensor{{2, 2}, {1, 2, 3, 4}});
  s.set("scalar", Tensor{{}, {7.0f}});
  return s;
}

TEST(WeightStore, ParameterCountAndLookup) {
  const WeightStore s = sample_store();
  EXPECT_EQ(s.size(), 3u);
  EXPECT_EQ(s.parameter_count(), 8u);
  EXPECT_TRUE(s.contains("a.weight"));
  EXPECT_FALSE(s.contains("nope"));
  EXPECT_THROW(s.at("nope"), Error);
  WeightStore t(0);
  EXPECT_THROW(t.set("bad", Tensor{{2, 2}, {1, 2, 3}}), Error);
}

TEST(WeightFile, RoundTripAndByteLayout) {
  TempDir dir("weights");
  const WeightStore s = sample_store();
  save_weights(dir.path() / "w.bin", s);
  const WeightStore r = load_weights(dir.path() / "w.bin");
  ASSERT_EQ(r.size(), s.size());
  for (const auto& [name, t] : s.tensors()) {
    EXPECT_EQ(r.at(name).shape, t.shape);
    EXPECT_EQ(r.at(name).data, t.data);
  }
  const std::string bytes = slurp(dir.path() / "w.bin");
  ASSERT_GE(bytes.size(), 8u);
  EXPECT_EQ(bytes.substr(0, 4), "NMW1");
  std::uint32_t name_len = 0;
  std::memcpy(&name_len, bytes.data() + 4, 4);
  EXPECT_EQ(name_len, 8u);  // "a.weight" sorts first
  EXPECT_EQ(bytes.substr(8, 8), "a.weight");
}

TEST(WeightFile, ManifestListsNamesAndShapes) {
  const auto m = manifest(sample_store());
  ASSERT_EQ(m.size(), 3u);
  EXPECT_EQ(m[0].name, "a.weight");
  EXPECT_EQ(m[0].shape, (std::vector<std::int64_t>{2, 2}));
}

TEST(WeightFile, CorruptionIsDetected) {
  TempDir dir("weights");
  save_weights(dir.path() / "w.bin", sample_store());
  const std::string bytes = slurp(dir.path() / "w.bin");

  dump(dir.path() / "magic.bin", "XXXX" + bytes.substr(4));
  EXPECT_THROW(load_weights(dir.path() / "magic.bin"), Error);

  for (std::size_t cut : {std::size_t{2}, std::size_t{6}, std::size_t{20}, bytes.size() - 1}) {
    dump(dir.path() / "cut.bin", bytes.substr(0, cut));
    EXPECT_THROW(load_weights(dir.path() / "cut.bin"), Error) << "cut at " << cut;
  }

  dump(dir.path() / "dup.bin", bytes + bytes.substr(4));
  EXPECT_THROW(load_weights(dir.path() / "dup.bin"), Error);

  EXPECT_THROW(load_weights(dir.path() / "missing.bin"), Error);
}

}  // namespace
}  // namespace mcenh
