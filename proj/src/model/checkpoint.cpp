// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "ridnet/checkpoint.hpp"

#include <zlib.h>

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>

namespace ridnet {

namespace {

constexpr std::array<char, 4> kMagic{'R', 'I', 'D', 'N'};
constexpr std::uint32_t kConfigBlockSize = 40;

class Writer {
 public:
  void u8(std::uint8_t v) { bytes_.push_back(v); }
  void u16(std::uint16_t v) { le(v, 2); }
  void u32(std::uint32_t v) { le(v, 4); }
  void u64(std::uint64_t v) { le(v, 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void raw(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    bytes_.insert(bytes_.end(), p, p + n);
  }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  void le(std::uint64_t v, int n) {
    for (int i = 0; i < n; ++i) bytes_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint8_t u8() { return static_cast<std::uint8_t>(le(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(le(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(le(4)); }
  std::uint64_t u64() { return le(8); }
  float f32() { return std::bit_cast<float>(u32()); }
  std::string str(std::size_t n) {
    need(n);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  std::size_t position() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) fail(Errc::checkpoint_truncated, "checkpoint: unexpected end of data");
  }
  std::uint64_t le(int n) {
    need(static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(bytes_[pos_ + static_cast<std::size_t>(i)]) << (8 * i);
    pos_ += static_cast<std::size_t>(n);
    return v;
  }
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

void write_record(Writer& w, const CheckpointRecord& r) {
  if (r.name.size() > 0xFFFF) fail(Errc::invalid_argument, "checkpoint: record name too long");
  if (r.shape.size() > 0xFF) fail(Errc::invalid_argument, "checkpoint: record rank too large");
  const std::size_t n = shape_numel(r.shape);
  const std::size_t have = r.dtype == DType::f32 ? r.f32.size() : r.i64.size();
  if (have != n) fail(Errc::shape_mismatch, "checkpoint: record '" + r.name + "' payload does not match its shape");
  w.u16(static_cast<std::uint16_t>(r.name.size()));
  w.raw(r.name.data(), r.name.size());
  w.u8(static_cast<std::uint8_t>(r.dtype));
  w.u8(static_cast<std::uint8_t>(r.shape.size()));
  for (std::size_t d : r.shape) w.u32(static_cast<std::uint32_t>(d));
  if (r.dtype == DType::f32) {
    for (float v : r.f32) w.f32(v);
  } else {
    for (std::int64_t v : r.i64) w.u64(static_cast<std::uint64_t>(v));
  }
}

CheckpointRecord read_record(Reader& r) {
  CheckpointRecord rec;
  rec.name = r.str(r.u16());
  const std::uint8_t dtype = r.u8();
  if (dtype != static_cast<std::uint8_t>(DType::f32) && dtype != static_cast<std::uint8_t>(DType::i64)) {
    fail(Errc::checkpoint_shape, "checkpoint: record '" + rec.name + "' has unknown dtype " + std::to_string(dtype));
  }
  rec.dtype = static_cast<DType>(dtype);
  const std::uint8_t rank = r.u8();
  rec.shape.resize(rank);
  for (auto& d : rec.shape) d = r.u32();
  const std::size_t n = shape_numel(rec.shape);
  const std::size_t width = rec.dtype == DType::f32 ? 4 : 8;
  if (n > r.remaining() / width) fail(Errc::checkpoint_truncated, "checkpoint: record '" + rec.name + "' is truncated");
  if (rec.dtype == DType::f32) {
    rec.f32.resize(n);
    for (auto& v : rec.f32) v = r.f32();
  } else {
    rec.i64.resize(n);
    for (auto& v : rec.i64) v = static_cast<std::int64_t>(r.u64());
  }
  return rec;
}

}  // namespace

CheckpointRecord CheckpointRecord::from_floats(std::string name, Shape shape, std::vector<float> values) {
  CheckpointRecord r;
  r.name = std::move(name);
  r.dtype = DType::f32;
  r.shape = std::move(shape);
  r.f32 = std::move(values);
  return r;
}

CheckpointRecord CheckpointRecord::from_int(std::string name, std::int64_t value) {
  CheckpointRecord r;
  r.name = std::move(name);
  r.dtype = DType::i64;
  r.shape = {1};
  r.i64 = {value};
  return r;
}

const CheckpointRecord* LoadedCheckpoint::find(const std::string& name) const {
  for (const auto& r : extras) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
  uLong crc = ::crc32(0L, Z_NULL, 0);
  std::size_t offset = 0;
  while (offset < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - offset, 1u << 30));
    crc = ::crc32(crc, bytes.data() + offset, chunk);
    offset += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

std::vector<std::uint8_t> serialize_checkpoint(const RIDNet& net, const std::vector<CheckpointRecord>& extras) {
  const NetworkConfig& c = net.config();
  Writer w;
  w.raw(kMagic.data(), kMagic.size());
  w.u16(kCheckpointVersion);
  w.u32(kConfigBlockSize);
  w.u32(static_cast<std::uint32_t>(c.num_eams));
  w.u32(static_cast<std::uint32_t>(c.channels));
  w.u32(static_cast<std::uint32_t>(c.attention_reduction));
  w.u32(static_cast<std::uint32_t>(c.in_channels));
  w.u32(static_cast<std::uint32_t>(c.dilations_a[0]));
  w.u32(static_cast<std::uint32_t>(c.dilations_a[1]));
  w.u32(static_cast<std::uint32_t>(c.dilations_b[0]));
  w.u32(static_cast<std::uint32_t>(c.dilations_b[1]));
  w.f32(static_cast<float>(c.lambda));
  w.u8(c.ablation.lsc);
  w.u8(c.ablation.ssc);
  w.u8(c.ablation.lc);
  w.u8(c.ablation.fa);

  RIDNet alias = net;
  auto params = alias.parameters();
  w.u32(static_cast<std::uint32_t>(params.size() + extras.size()));
  for (auto& p : params) {
    write_record(w, CheckpointRecord::from_floats(p.name, p.tensor.shape(),
                                                  std::vector<float>(p.tensor.data().begin(), p.tensor.data().end())));
  }
  for (const auto& r : extras) write_record(w, r);

  auto& bytes = w.bytes();
  const std::uint32_t crc = crc32_of(std::span<const std::uint8_t>(bytes).subspan(6));
  w.u32(crc);
  return std::move(bytes);
}

LoadedCheckpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic.data(), 4) != 0) {
    fail(Errc::checkpoint_magic, "checkpoint: missing RIDN magic");
  }
  if (bytes.size() < 6 + 4) fail(Errc::checkpoint_truncated, "checkpoint: file too short");
  const std::uint16_t version = static_cast<std::uint16_t>(bytes[4] | (bytes[5] << 8));
  if (version != kCheckpointVersion) {
    fail(Errc::checkpoint_version, "checkpoint: format version " + std::to_string(version) + " is not supported (expected " +
                                       std::to_string(kCheckpointVersion) + ")");
  }
  const std::size_t body_end = bytes.size() - 4;
  Reader tail(bytes.subspan(body_end));
  const std::uint32_t stored_crc = tail.u32();
  const std::uint32_t actual_crc = crc32_of(bytes.subspan(6, body_end - 6));
  if (stored_crc != actual_crc) fail(Errc::checkpoint_crc, "checkpoint: CRC-32 mismatch, file is corrupt");

  Reader r(bytes.subspan(6, body_end - 6));
  const std::uint32_t config_size = r.u32();
  if (config_size != kConfigBlockSize) {
    fail(Errc::checkpoint_shape, "checkpoint: unexpected config block size " + std::to_string(config_size));
  }
  NetworkConfig c;
  c.num_eams = static_cast<int>(r.u32());
  c.channels = static_cast<int>(r.u32());
  c.attention_reduction = static_cast<int>(r.u32());
  c.in_channels = static_cast<int>(r.u32());
  c.dilations_a = {static_cast<int>(r.u32()), static_cast<int>(r.u32())};
  c.dilations_b = {static_cast<int>(r.u32()), static_cast<int>(r.u32())};
  c.lambda = static_cast<double>(r.f32());
  c.ablation.lsc = r.u8() != 0;
  c.ablation.ssc = r.u8() != 0;
  c.ablation.lc = r.u8() != 0;
  c.ablation.fa = r.u8() != 0;
  try {
    c.validate();
  } catch (const Error& e) {
    fail(Errc::checkpoint_shape, std::string("checkpoint: embedded config is invalid: ") + e.what());
  }

  const std::uint32_t count = r.u32();
  std::vector<CheckpointRecord> records;
  for (std::uint32_t i = 0; i < count; ++i) records.push_back(read_record(r));
  if (r.remaining() != 0) fail(Errc::checkpoint_shape, "checkpoint: trailing bytes after the record table");

  LoadedCheckpoint out;
  out.net = RIDNet::zeros(c);
  auto params = out.net.parameters();
  if (records.size() < params.size()) {
    fail(Errc::checkpoint_shape, "checkpoint: holds " + std::to_string(records.size()) + " records, the network needs " +
                                     std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto& rec = records[i];
    auto& p = params[i];
    if (rec.name != p.name || rec.dtype != DType::f32 || rec.shape != p.tensor.shape()) {
      fail(Errc::checkpoint_shape, "checkpoint: record '" + rec.name + "' " + shape_string(rec.shape) +
                                       " does not match parameter '" + p.name + "' " + shape_string(p.tensor.shape()));
    }
    std::copy(rec.f32.begin(), rec.f32.end(), p.tensor.mutable_data().begin());
  }
  out.extras.assign(std::make_move_iterator(records.begin() + static_cast<std::ptrdiff_t>(params.size())),
                    std::make_move_iterator(records.end()));
  return out;
}

void save_checkpoint(const RIDNet& net, const std::filesystem::path& path, const std::vector<CheckpointRecord>& extras) {
  const auto bytes = serialize_checkpoint(net, extras);
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(Errc::io, "cannot open '" + tmp.string() + "' for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) fail(Errc::io, "failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) fail(Errc::io, "cannot move checkpoint into '" + path.string() + "': " + ec.message());
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(Errc::io, "cannot open checkpoint '" + path.string() + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_checkpoint(bytes);
}

}  // namespace ridnet
