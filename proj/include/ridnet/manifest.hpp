// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// JSON record written next to every command output. It holds the verb, its
// fully resolved arguments, the run configuration (for train/ablate), and a
// CRC-32 of every input file, which is enough to re-run the command.

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace ridnet {

struct InputHash {
  std::string path;
  std::uint32_t crc32 = 0;
  std::uint64_t bytes = 0;

  friend bool operator==(const InputHash&, const InputHash&) = default;
};

struct RunManifest {
  std::string tool = "ridnet";
  std::string version;
  std::string command;
  std::vector<std::string> args;  // argv after the verb, paths made absolute
  std::string config;             // resolved key=value text, empty if unused
  int threads = 1;
  std::vector<InputHash> inputs;
  std::vector<std::string> outputs;

  // Hashes a file, or every image file of a directory.
  void add_input(const std::filesystem::path& path);

  std::string to_json() const;
  static RunManifest from_json(const std::string& text);
  void save(const std::filesystem::path& path) const;
  static RunManifest load(const std::filesystem::path& path);

  // Throws Errc::io naming the first input whose content changed.
  void verify_inputs() const;

  friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

std::uint32_t file_crc32(const std::filesystem::path& path);

}  // namespace ridnet
