// Copyright 2026 The panfuse Authors
// SPDX-License-Identifier: Apache-2.0
#include "panfuse/io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <string>

namespace panfuse::io {

namespace {

constexpr char kTensorMagic[4] = {'P', 'T', 'E', 'N'};
constexpr char kMaskMagic[4] = {'P', 'M', 'S', 'K'};
// Refuse to allocate more than this many elements from an untrusted header.
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 31;

class Writer {
 public:
  void bytes(const char (&magic)[4]) {
    for (char c : magic) out_.push_back(static_cast<std::uint8_t>(c));
  }
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v));
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
  }
  void u32(std::uint32_t v) {
    for (int shift = 0; shift < 32; shift += 8) out_.push_back(static_cast<std::uint8_t>(v >> shift));
  }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

  void reserve(std::size_t n) { out_.reserve(n); }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  void expect_magic(const char (&magic)[4], const char* what) {
    need(4, "magic");
    if (std::memcmp(in_.data(), magic, 4) != 0) {
      throw FormatError(std::string("bad magic: not a ") + what + " container", 0);
    }
    pos_ += 4;
  }
  std::uint8_t u8(const char* field) {
    need(1, field);
    return in_[pos_++];
  }
  std::uint16_t u16(const char* field) {
    need(2, field);
    const auto v = static_cast<std::uint16_t>(in_[pos_] | (in_[pos_ + 1] << 8));
    pos_ += 2;
    return v;
  }
  std::uint32_t u32(const char* field) {
    need(4, field);
    std::uint32_t v = 0;
    for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(in_[pos_ + b]) << (8 * b);
    pos_ += 4;
    return v;
  }
  float f32(const char* field) { return std::bit_cast<float>(u32(field)); }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n, const char* field) {
    if (remaining() < n) {
      throw FormatError(std::string("truncated container while reading ") + field, pos_);
    }
  }

  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

Bytes encode_raw(const RawTensor& t) {
  if (t.dims.size() > 255) throw ValidationError("tensor rank exceeds 255");
  std::uint64_t count = 1;
  for (auto d : t.dims) count *= d;
  if (count != t.values.size()) {
    throw ShapeError("tensor has " + std::to_string(t.values.size()) + " values but dims hold " + std::to_string(count));
  }
  Writer w;
  w.reserve(7 + 4 * t.dims.size() + 4 * t.values.size());
  w.bytes(kTensorMagic);
  w.u8(kFormatVersion);
  w.u8(kDtypeFloat32);
  w.u8(static_cast<std::uint8_t>(t.dims.size()));
  for (auto d : t.dims) w.u32(d);
  for (float v : t.values) w.f32(v);
  return w.take();
}

RawTensor decode_raw(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.expect_magic(kTensorMagic, "PTEN tensor");
  const std::size_t version_at = r.pos();
  if (const auto version = r.u8("version"); version != kFormatVersion) {
    throw FormatError("unsupported tensor version " + std::to_string(version), version_at);
  }
  const std::size_t dtype_at = r.pos();
  if (const auto dtype = r.u8("dtype"); dtype != kDtypeFloat32) {
    throw FormatError("unsupported dtype code " + std::to_string(dtype) + " (expected 1 = float32)", dtype_at);
  }
  const std::uint8_t ndim = r.u8("ndim");
  RawTensor t;
  std::uint64_t count = 1;
  for (std::uint8_t i = 0; i < ndim; ++i) {
    const std::uint32_t d = r.u32("dims");
    t.dims.push_back(d);
    count *= d;
    if (count > kMaxElements) throw FormatError("tensor element count exceeds limit", r.pos() - 4);
  }
  const std::uint64_t expected = count * 4;
  if (r.remaining() != expected) {
    throw FormatError("payload is " + std::to_string(r.remaining()) + " bytes but dims require " +
                          std::to_string(expected),
                      r.pos());
  }
  t.values.resize(count);
  for (auto& v : t.values) v = r.f32("payload");
  return t;
}

Bytes encode_tensor(const FeatureMap& t) {
  RawTensor raw;
  for (std::size_t d : {t.channels(), t.height(), t.width()}) {
    if (d > std::numeric_limits<std::uint32_t>::max()) throw ValidationError("tensor dimension exceeds 32 bits");
    raw.dims.push_back(static_cast<std::uint32_t>(d));
  }
  raw.values.reserve(t.size());
  for (double v : t.data()) raw.values.push_back(static_cast<float>(v));
  return encode_raw(raw);
}

FeatureMap decode_tensor(std::span<const std::uint8_t> bytes) {
  RawTensor raw = decode_raw(bytes);
  constexpr std::size_t kDimsOffset = 7;
  if (raw.dims.size() == 2) raw.dims.insert(raw.dims.begin(), 1);
  if (raw.dims.size() != 3) {
    throw FormatError("feature map needs 2 or 3 dims, container has " + std::to_string(raw.dims.size()), 6);
  }
  for (std::size_t i = 0; i < 3; ++i) {
    if (raw.dims[i] == 0) throw FormatError("feature map dimension is zero", kDimsOffset);
  }
  const std::size_t payload_at = bytes.size() - 4 * raw.values.size();
  std::vector<double> data(raw.values.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(raw.values[i])) throw FormatError("non-finite value in payload", payload_at + 4 * i);
    data[i] = raw.values[i];
  }
  return FeatureMap({raw.dims[0], raw.dims[1], raw.dims[2]}, std::move(data));
}

Bytes encode_mask(const PanopticMask& m) {
  if (m.instance_map.height() != m.class_map.height() || m.instance_map.width() != m.class_map.width()) {
    throw ShapeError("mask class and instance maps differ in size");
  }
  if (m.height() > std::numeric_limits<std::uint32_t>::max() || m.width() > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("mask dimension exceeds 32 bits");
  }
  Writer w;
  w.reserve(13 + 4 * m.class_map.size());
  w.bytes(kMaskMagic);
  w.u8(kFormatVersion);
  w.u32(static_cast<std::uint32_t>(m.height()));
  w.u32(static_cast<std::uint32_t>(m.width()));
  for (std::size_t i = 0; i < m.class_map.size(); ++i) {
    const std::int32_t cls = m.class_map[i];
    const std::int32_t inst = m.instance_map[i];
    if (cls < 0 || cls > 0xFFFF || inst < 0 || inst > 0xFFFF) {
      throw ValidationError("mask label out of 16-bit range at pixel " + std::to_string(i));
    }
    w.u16(static_cast<std::uint16_t>(cls));
    w.u16(static_cast<std::uint16_t>(inst));
  }
  return w.take();
}

PanopticMask decode_mask(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.expect_magic(kMaskMagic, "PMSK mask");
  const std::size_t version_at = r.pos();
  if (const auto version = r.u8("version"); version != kFormatVersion) {
    throw FormatError("unsupported mask version " + std::to_string(version), version_at);
  }
  const std::uint32_t h = r.u32("height");
  const std::uint32_t w = r.u32("width");
  const std::uint64_t count = std::uint64_t{h} * w;
  if (count > kMaxElements) throw FormatError("mask pixel count exceeds limit", 5);
  if (r.remaining() != count * 4) {
    throw FormatError("mask payload is " + std::to_string(r.remaining()) + " bytes but " + std::to_string(h) + "x" +
                          std::to_string(w) + " requires " + std::to_string(count * 4),
                      r.pos());
  }
  PanopticMask m{LabelMap(h, w), LabelMap(h, w)};
  for (std::size_t i = 0; i < count; ++i) {
    m.class_map[i] = r.u16("class");
    m.instance_map[i] = r.u16("instance");
  }
  return m;
}

Bytes read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string(), 0);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

FeatureMap read_tensor(const std::filesystem::path& path) {
  try {
    return decode_tensor(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.offset());
  }
}

void write_tensor(const std::filesystem::path& path, const FeatureMap& t) { write_file(path, encode_tensor(t)); }

PanopticMask read_mask(const std::filesystem::path& path) {
  try {
    return decode_mask(read_file(path));
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what(), e.offset());
  }
}

void write_mask(const std::filesystem::path& path, const PanopticMask& m) { write_file(path, encode_mask(m)); }

namespace {
std::filesystem::path layer_file(const std::filesystem::path& dir, const std::string& stem, std::size_t l,
                                 const char* part) {
  return dir / (stem + "." + std::to_string(l) + "." + part + ".pten");
}
}  // namespace

void write_excitation(const std::filesystem::path& dir, const std::string& stem, const ExcitationParams& p) {
  const std::size_t c = p.channels();
  for (std::size_t l = 0; l < p.layers.size(); ++l) {
    RawTensor w{{static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c)}, {}};
    for (double v : p.layers[l].weights.data()) w.values.push_back(static_cast<float>(v));
    RawTensor b{{static_cast<std::uint32_t>(c)}, {}};
    for (double v : p.layers[l].bias) b.values.push_back(static_cast<float>(v));
    write_file(layer_file(dir, stem, l, "w"), encode_raw(w));
    write_file(layer_file(dir, stem, l, "b"), encode_raw(b));
  }
}

ExcitationParams read_excitation(const std::filesystem::path& dir, const std::string& stem) {
  ExcitationParams p;
  for (std::size_t l = 0; std::filesystem::exists(layer_file(dir, stem, l, "w")); ++l) {
    const RawTensor w = decode_raw(read_file(layer_file(dir, stem, l, "w")));
    const RawTensor b = decode_raw(read_file(layer_file(dir, stem, l, "b")));
    if (w.dims.size() != 2 || w.dims[0] != w.dims[1] || b.dims.size() != 1 || b.dims[0] != w.dims[0]) {
      throw FormatError("excitation layer " + std::to_string(l) + " must be C x C weights and C bias", 6);
    }
    ExcitationLayer layer{Matrix(w.dims[0], w.dims[1]), std::vector<double>(b.values.begin(), b.values.end())};
    std::copy(w.values.begin(), w.values.end(), layer.weights.data().begin());
    p.layers.push_back(std::move(layer));
  }
  if (p.layers.empty()) throw FormatError("no excitation layers found for " + (dir / stem).string(), 0);
  return p;
}

}  // namespace panfuse::io
