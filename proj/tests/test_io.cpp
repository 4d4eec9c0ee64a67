// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "panfuse/io.hpp"

using namespace panfuse;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("panfuse_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

FeatureMap float_map(std::size_t c, std::size_t h, std::size_t w, Rng& rng) {
  auto m = oracle::random_map(c, h, w, rng, -100, 100);
  for (double& v : m.data()) v = static_cast<float>(v);
  return m;
}

}  // namespace

TEST(TensorContainerTest, HeaderLayout) {
  const auto bytes = io::encode_tensor(FeatureMap({1, 1, 2}, {1.0, -2.0}));
  ASSERT_EQ(bytes.size(), 4u + 3u + 3u * 4u + 2u * 4u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "PTEN");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5], 1);
  EXPECT_EQ(bytes[6], 3);
  EXPECT_EQ(bytes[7], 1);  // dims[0] = 1, little-endian
  EXPECT_EQ(bytes[15], 2);
  // 1.0f = 0x3f800000
  EXPECT_EQ(bytes[19], 0x00);
  EXPECT_EQ(bytes[22], 0x3f);
}

TEST(TensorContainerTest, FileRoundTrip) {
  Rng rng(1);
  const auto dir = scratch_dir("tensor");
  const auto t = float_map(3, 4, 5, rng);
  io::write_tensor(dir / "t.pten", t);
  EXPECT_EQ(io::read_tensor(dir / "t.pten"), t);
  // Byte-exact determinism.
  io::write_tensor(dir / "u.pten", t);
  EXPECT_EQ(io::read_file(dir / "t.pten"), io::read_file(dir / "u.pten"));
}

TEST(TensorContainerTest, TwoDimsReadAsSingleChannel) {
  const auto bytes = io::encode_raw({{2, 3}, {1, 2, 3, 4, 5, 6}});
  const auto t = io::decode_tensor(bytes);
  EXPECT_EQ(t.shape(), (Shape{1, 2, 3}));
}

TEST(TensorContainerTest, BadMagic) {
  auto bytes = io::encode_tensor(FeatureMap(1, 2, 2));
  bytes[0] = 'X';
  bytes[1] = 'X';
  bytes[2] = 'X';
  bytes[3] = 'X';
  try {
    io::decode_tensor(bytes);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
}

TEST(TensorContainerTest, BadDtypeAndVersion) {
  auto bytes = io::encode_tensor(FeatureMap(1, 2, 2));
  auto dtype = bytes;
  dtype[5] = 2;
  try {
    io::decode_tensor(dtype);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_EQ(e.offset(), 5u);
  }
  auto version = bytes;
  version[4] = 9;
  EXPECT_THROW(io::decode_tensor(version), FormatError);
}

TEST(TensorContainerTest, PayloadSizeMismatchNamesSizes) {
  auto bytes = io::encode_tensor(FeatureMap(1, 2, 2));
  bytes.pop_back();
  try {
    io::decode_tensor(bytes);
    FAIL();
  } catch (const FormatError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("15"), std::string::npos) << what;
    EXPECT_NE(what.find("16"), std::string::npos) << what;
  }
  bytes.push_back(0);
  bytes.push_back(0);
  EXPECT_THROW(io::decode_tensor(bytes), FormatError);
}

TEST(TensorContainerTest, NonFiniteValuesRejected) {
  const auto bytes = io::encode_raw({{1, 1, 1}, {std::nanf("")}});
  EXPECT_NO_THROW(io::decode_raw(bytes));
  EXPECT_THROW(io::decode_tensor(bytes), FormatError);
}

TEST(TensorContainerTest, MissingFile) {
  EXPECT_THROW(io::read_tensor("/nonexistent/panfuse/file.pten"), FormatError);
}

TEST(MaskContainerTest, RoundTripAndLayout) {
  const PanopticMask m{LabelMap(2, 3, std::vector<std::int32_t>{0, 1, 2, 3, 4, 65535}),
                       LabelMap(2, 3, std::vector<std::int32_t>{0, 0, 1, 2, 0, 7})};
  const auto bytes = io::encode_mask(m);
  ASSERT_EQ(bytes.size(), 4u + 1u + 8u + 6u * 4u);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "PMSK");
  EXPECT_EQ(bytes[5], 2);  // height
  EXPECT_EQ(bytes[9], 3);  // width
  EXPECT_EQ(io::decode_mask(bytes), m);
}

TEST(MaskContainerTest, Errors) {
  const PanopticMask m{LabelMap(2, 2, 1), LabelMap(2, 2, 0)};
  auto bytes = io::encode_mask(m);
  auto truncated = bytes;
  truncated.resize(truncated.size() - 3);
  EXPECT_THROW(io::decode_mask(truncated), FormatError);
  bytes[0] = 'P';
  bytes[1] = 'T';
  EXPECT_THROW(io::decode_mask(bytes), FormatError);
  EXPECT_THROW(io::encode_mask({LabelMap(1, 1, 70000), LabelMap(1, 1, 0)}), ValidationError);
}

TEST(ExcitationFilesTest, RoundTrip) {
  Rng rng(2);
  auto p = ExcitationParams::random(3, 2, rng);
  for (auto& layer : p.layers) {
    for (double& v : layer.weights.data()) v = static_cast<float>(v);
    for (double& v : layer.bias) v = static_cast<float>(v);
  }
  const auto dir = scratch_dir("excite");
  io::write_excitation(dir, "rgb", p);
  EXPECT_EQ(io::read_excitation(dir, "rgb"), p);
  EXPECT_THROW(io::read_excitation(dir, "depth"), FormatError);
}

TEST(FuzzTest, RandomRoundTripsAndCorruptions) {
  Rng rng(3);
  for (int iter = 0; iter < 300; ++iter) {
    const auto t = float_map(std::size_t(rng.uniform_int(1, 4)), std::size_t(rng.uniform_int(1, 6)),
                             std::size_t(rng.uniform_int(1, 6)), rng);
    auto bytes = io::encode_tensor(t);
    EXPECT_EQ(io::decode_tensor(bytes), t);
    // Any mutation either decodes or raises FormatError.
    const auto at = static_cast<std::size_t>(rng.uniform_int(0, std::int64_t(bytes.size()) - 1));
    bytes[at] = static_cast<std::uint8_t>(rng.uniform_int(0, 255));
    bytes.resize(static_cast<std::size_t>(rng.uniform_int(0, std::int64_t(bytes.size()))));
    try {
      (void)io::decode_tensor(bytes);
    } catch (const FormatError&) {
    }
  }
}
