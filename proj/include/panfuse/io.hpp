// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

// Binary containers. Everything is little-endian with no padding.
//
// Tensor ("PTEN"):
//   0  magic    "PTEN"
//   4  u8       version = 1
//   5  u8       dtype   = 1 (IEEE-754 binary32)
//   6  u8       ndim
//   7  u32[nd]  dims
//   .. f32[]    payload, row-major, product(dims) values
//
// Mask ("PMSK"):
//   0  magic    "PMSK"
//   4  u8       version = 1
//   5  u32      height
//   9  u32      width
//   13 (u16 class, u16 instance)[height * width], raster order

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "panfuse/fusion.hpp"
#include "panfuse/postprocess.hpp"
#include "panfuse/tensor.hpp"

namespace panfuse::io {

inline constexpr std::uint8_t kFormatVersion = 1;
inline constexpr std::uint8_t kDtypeFloat32 = 1;

using Bytes = std::vector<std::uint8_t>;

/// Container contents before interpretation as a feature map or matrix.
struct RawTensor {
  std::vector<std::uint32_t> dims;
  std::vector<float> values;

  friend bool operator==(const RawTensor&, const RawTensor&) = default;
};

Bytes encode_raw(const RawTensor& t);
/// Throws FormatError naming the failing byte offset.
RawTensor decode_raw(std::span<const std::uint8_t> bytes);

/// Feature maps are stored with ndim 3 (C, H, W). Values are narrowed to
/// float on write and promoted to double on read; ndim 2 reads as 1 x H x W.
Bytes encode_tensor(const FeatureMap& t);
FeatureMap decode_tensor(std::span<const std::uint8_t> bytes);

Bytes encode_mask(const PanopticMask& m);
PanopticMask decode_mask(std::span<const std::uint8_t> bytes);

Bytes read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

FeatureMap read_tensor(const std::filesystem::path& path);
void write_tensor(const std::filesystem::path& path, const FeatureMap& t);

PanopticMask read_mask(const std::filesystem::path& path);
void write_mask(const std::filesystem::path& path, const PanopticMask& m);

/// Excitation stacks are stored as one file per layer: `<stem>.<l>.w.pten`
/// (2-D, C x C) and `<stem>.<l>.b.pten` (1-D, C).
void write_excitation(const std::filesystem::path& dir, const std::string& stem, const ExcitationParams& p);
ExcitationParams read_excitation(const std::filesystem::path& dir, const std::string& stem);

}  // namespace panfuse::io
