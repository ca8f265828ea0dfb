// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Binary checkpoint format, version 1. All integers little-endian.
//
//   offset  size  field
//   0       4     magic "RIDN"
//   4       2     u16 format version (1)
//   6       4     u32 config block size (40)
//   10      40    config: u32 num_eams, channels, attention_reduction,
//                 in_channels, dilation_a0, dilation_a1, dilation_b0,
//                 dilation_b1; f32 lambda; u8 lsc, ssc, lc, fa
//   50      4     u32 record count
//           ...   records: u16 name length, name bytes, u8 dtype
//                 (1 = f32, 2 = i64), u8 rank, u32 dims[rank],
//                 numel * sizeof(dtype) payload bytes
//   end-4   4     u32 CRC-32 (IEEE) over bytes [6, end-4)
//
// Network parameters come first, in BasicRIDNet::parameters() order. Any
// other records (optimizer moments, iteration counters) follow and are
// returned to the caller as extras.

#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "ridnet/model.hpp"

namespace ridnet {

inline constexpr std::uint16_t kCheckpointVersion = 1;

enum class DType : std::uint8_t { f32 = 1, i64 = 2 };

struct CheckpointRecord {
  std::string name;
  DType dtype = DType::f32;
  Shape shape;
  std::vector<float> f32;        // populated for DType::f32
  std::vector<std::int64_t> i64;  // populated for DType::i64

  static CheckpointRecord from_floats(std::string name, Shape shape, std::vector<float> values);
  static CheckpointRecord from_int(std::string name, std::int64_t value);
};

struct LoadedCheckpoint {
  RIDNet net;
  std::vector<CheckpointRecord> extras;

  const CheckpointRecord* find(const std::string& name) const;
};

std::vector<std::uint8_t> serialize_checkpoint(const RIDNet& net, const std::vector<CheckpointRecord>& extras = {});
LoadedCheckpoint deserialize_checkpoint(std::span<const std::uint8_t> bytes);

void save_checkpoint(const RIDNet& net, const std::filesystem::path& path,
                     const std::vector<CheckpointRecord>& extras = {});
LoadedCheckpoint load_checkpoint(const std::filesystem::path& path);

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes);

}  // namespace ridnet
