// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "ridnet/manifest.hpp"

#include <json.hpp>

#include "ridnet/checkpoint.hpp"
#include "ridnet/error.hpp"
#include "ridnet/image.hpp"

namespace ridnet {

using json = nlohmann::ordered_json;

std::uint32_t file_crc32(const std::filesystem::path& path) { return crc32_of(read_file_bytes(path)); }

void RunManifest::add_input(const std::filesystem::path& path) {
  std::error_code ec;
  if (std::filesystem::is_directory(path, ec)) {
    for (const auto& file : list_images(path)) add_input(file);
    return;
  }
  const auto bytes = read_file_bytes(path);
  inputs.push_back({std::filesystem::absolute(path).lexically_normal().string(), crc32_of(bytes), bytes.size()});
}

std::string RunManifest::to_json() const {
  json j;
  j["tool"] = tool;
  j["version"] = version;
  j["command"] = command;
  j["args"] = args;
  j["config"] = config;
  j["threads"] = threads;
  j["inputs"] = json::array();
  for (const auto& in : inputs) j["inputs"].push_back({{"path", in.path}, {"crc32", in.crc32}, {"bytes", in.bytes}});
  j["outputs"] = outputs;
  return j.dump(2) + "\n";
}

RunManifest RunManifest::from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    RunManifest m;
    m.tool = j.at("tool").get<std::string>();
    m.version = j.at("version").get<std::string>();
    m.command = j.at("command").get<std::string>();
    m.args = j.at("args").get<std::vector<std::string>>();
    m.config = j.value("config", std::string());
    m.threads = j.value("threads", 1);
    for (const auto& in : j.at("inputs")) {
      m.inputs.push_back(
          {in.at("path").get<std::string>(), in.at("crc32").get<std::uint32_t>(), in.at("bytes").get<std::uint64_t>()});
    }
    m.outputs = j.at("outputs").get<std::vector<std::string>>();
    return m;
  } catch (const json::exception& e) {
    fail(Errc::config, std::string("manifest: ") + e.what());
  }
}

void RunManifest::save(const std::filesystem::path& path) const {
  const std::string text = to_json();
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

RunManifest RunManifest::load(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return from_json(std::string(bytes.begin(), bytes.end()));
}

void RunManifest::verify_inputs() const {
  for (const auto& in : inputs) {
    std::uint32_t crc = 0;
    try {
      crc = file_crc32(in.path);
    } catch (const Error&) {
      fail(Errc::io, "manifest input '" + in.path + "' is missing");
    }
    if (crc != in.crc32) fail(Errc::io, "manifest input '" + in.path + "' changed since the recorded run");
  }
}

}  // namespace ridnet
