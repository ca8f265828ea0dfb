// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "ridnet/config.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace ridnet {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename I>
I parse_integer(const std::string& v) {
  I out{};
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw std::invalid_argument("expected an integer");
  return out;
}

double parse_double(const std::string& v) {
  std::size_t used = 0;
  const double out = std::stod(v, &used);
  if (used != v.size()) throw std::invalid_argument("expected a number");
  return out;
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw std::invalid_argument("expected true or false");
}

std::array<int, 2> parse_pair(const std::string& v) {
  const auto comma = v.find(',');
  if (comma == std::string::npos) throw std::invalid_argument("expected two comma-separated integers");
  return {parse_integer<int>(trim(v.substr(0, comma))), parse_integer<int>(trim(v.substr(comma + 1)))};
}

using Setter = std::function<void(RunConfig&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"num_eams", [](RunConfig& c, const std::string& v) { c.network.num_eams = parse_integer<int>(v); }},
      {"channels", [](RunConfig& c, const std::string& v) { c.network.channels = parse_integer<int>(v); }},
      {"reduction", [](RunConfig& c, const std::string& v) { c.network.attention_reduction = parse_integer<int>(v); }},
      {"in_channels", [](RunConfig& c, const std::string& v) { c.network.in_channels = parse_integer<int>(v); }},
      {"dilations_a", [](RunConfig& c, const std::string& v) { c.network.dilations_a = parse_pair(v); }},
      {"dilations_b", [](RunConfig& c, const std::string& v) { c.network.dilations_b = parse_pair(v); }},
      {"lambda", [](RunConfig& c, const std::string& v) { c.network.lambda = parse_double(v); }},
      {"lsc", [](RunConfig& c, const std::string& v) { c.network.ablation.lsc = parse_bool(v); }},
      {"ssc", [](RunConfig& c, const std::string& v) { c.network.ablation.ssc = parse_bool(v); }},
      {"lc", [](RunConfig& c, const std::string& v) { c.network.ablation.lc = parse_bool(v); }},
      {"fa", [](RunConfig& c, const std::string& v) { c.network.ablation.fa = parse_bool(v); }},
      {"lr", [](RunConfig& c, const std::string& v) { c.train.lr0 = parse_double(v); }},
      {"lr_halving_interval",
       [](RunConfig& c, const std::string& v) { c.train.lr_halving_interval = parse_integer<std::int64_t>(v); }},
      {"batch", [](RunConfig& c, const std::string& v) { c.train.batch = parse_integer<int>(v); }},
      {"patch", [](RunConfig& c, const std::string& v) { c.train.patch = parse_integer<int>(v); }},
      {"sigma", [](RunConfig& c, const std::string& v) { c.train.sigma = parse_double(v); }},
      {"sigma_max", [](RunConfig& c, const std::string& v) { c.train.sigma_max = parse_double(v); }},
      {"max_iters", [](RunConfig& c, const std::string& v) { c.train.max_iters = parse_integer<std::int64_t>(v); }},
      {"seed", [](RunConfig& c, const std::string& v) { c.train.seed = parse_integer<std::uint64_t>(v); }},
      {"adam_beta1", [](RunConfig& c, const std::string& v) { c.train.adam.beta1 = parse_double(v); }},
      {"adam_beta2", [](RunConfig& c, const std::string& v) { c.train.adam.beta2 = parse_double(v); }},
      {"adam_eps", [](RunConfig& c, const std::string& v) { c.train.adam.eps = parse_double(v); }},
      {"checkpoint_every",
       [](RunConfig& c, const std::string& v) { c.train.checkpoint_every = parse_integer<std::int64_t>(v); }},
  };
  return table;
}

std::string number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void RunConfig::validate() const {
  network.validate();
  train.validate();
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  const auto& x = a.train;
  const auto& y = b.train;
  return a.network == b.network && x.lr0 == y.lr0 && x.lr_halving_interval == y.lr_halving_interval &&
         x.batch == y.batch && x.patch == y.patch && x.sigma == y.sigma && x.sigma_max == y.sigma_max &&
         x.max_iters == y.max_iters && x.seed == y.seed && x.adam.beta1 == y.adam.beta1 &&
         x.adam.beta2 == y.adam.beta2 && x.adam.eps == y.adam.eps && x.checkpoint_every == y.checkpoint_every;
}

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto where = "config line " + std::to_string(lineno) + ": ";
    std::string line = raw.substr(0, raw.find('#'));
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(Errc::config, where + "expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const auto it = setters().find(key);
    if (it == setters().end()) fail(Errc::config, where + "unknown key '" + key + "'");
    if (!seen.insert(key).second) fail(Errc::config, where + "duplicate key '" + key + "'");
    if (value.empty()) fail(Errc::config, where + "missing value for '" + key + "'");
    try {
      it->second(config, value);
    } catch (const std::exception& e) {
      fail(Errc::config, where + "bad value '" + value + "' for '" + key + "': " + e.what());
    }
  }
  config.validate();
  return config;
}

RunConfig load_config(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return parse_config(std::string(bytes.begin(), bytes.end()));
  } catch (const Error& e) {
    fail(e.code(), path.string() + ": " + e.what());
  }
}

std::string format_config(const RunConfig& c) {
  const auto& n = c.network;
  const auto& t = c.train;
  auto flag = [](bool b) { return std::string(b ? "true" : "false"); };
  std::string out;
  auto put = [&](const std::string& key, const std::string& value) { out += key + " = " + value + "\n"; };
  put("num_eams", std::to_string(n.num_eams));
  put("channels", std::to_string(n.channels));
  put("reduction", std::to_string(n.attention_reduction));
  put("in_channels", std::to_string(n.in_channels));
  put("dilations_a", std::to_string(n.dilations_a[0]) + "," + std::to_string(n.dilations_a[1]));
  put("dilations_b", std::to_string(n.dilations_b[0]) + "," + std::to_string(n.dilations_b[1]));
  put("lambda", number(n.lambda));
  put("lsc", flag(n.ablation.lsc));
  put("ssc", flag(n.ablation.ssc));
  put("lc", flag(n.ablation.lc));
  put("fa", flag(n.ablation.fa));
  put("lr", number(t.lr0));
  put("lr_halving_interval", std::to_string(t.lr_halving_interval));
  put("batch", std::to_string(t.batch));
  put("patch", std::to_string(t.patch));
  put("sigma", number(t.sigma));
  put("sigma_max", number(t.sigma_max));
  put("max_iters", std::to_string(t.max_iters));
  put("seed", std::to_string(t.seed));
  put("adam_beta1", number(t.adam.beta1));
  put("adam_beta2", number(t.adam.beta2));
  put("adam_eps", number(t.adam.eps));
  put("checkpoint_every", std::to_string(t.checkpoint_every));
  return out;
}

}  // namespace ridnet
