// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "ridnet/model.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "ridnet/ops.hpp"

namespace ridnet {

std::array<Ablation, 9> Ablation::study_rows() {
  return {{
      {false, false, false, false},
      {true, false, false, false},
      {false, true, false, false},
      {true, true, false, false},
      {false, false, false, true},
      {false, false, true, true},
      {false, true, true, true},
      {true, true, false, true},
      {true, true, true, true},
  }};
}

std::string Ablation::label() const {
  if (*this == none()) return "none";
  if (*this == all()) return "all";
  std::string out;
  auto append = [&](bool on, const char* name) {
    if (!on) return;
    if (!out.empty()) out += '+';
    out += name;
  };
  append(lsc, "lsc");
  append(ssc, "ssc");
  append(lc, "lc");
  append(fa, "fa");
  return out;
}

Ablation Ablation::parse(const std::string& text) {
  if (text == "none") return none();
  if (text == "all") return all();
  Ablation a = none();
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, '+')) {
    if (item == "lsc") {
      a.lsc = true;
    } else if (item == "ssc") {
      a.ssc = true;
    } else if (item == "lc") {
      a.lc = true;
    } else if (item == "fa") {
      a.fa = true;
    } else {
      fail(Errc::config, "unknown ablation flag '" + item + "' in '" + text + "' (expected lsc, ssc, lc, fa)");
    }
  }
  return a;
}

void NetworkConfig::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) fail(Errc::config, "network config: " + what);
  };
  require(num_eams >= 1, "num_eams must be >= 1");
  require(channels >= 1, "channels must be >= 1");
  require(attention_reduction >= 1, "attention_reduction must be >= 1");
  require(channels % attention_reduction == 0, "channels (" + std::to_string(channels) +
                                                   ") must be divisible by attention_reduction (" +
                                                   std::to_string(attention_reduction) + ")");
  require(in_channels == 1 || in_channels == 3, "in_channels must be 1 or 3");
  for (int d : dilations_a) require(d >= 1, "dilations must be >= 1");
  for (int d : dilations_b) require(d >= 1, "dilations must be >= 1");
  require(std::isfinite(lambda) && lambda >= 0.0, "lambda must be a finite non-negative number");
}

template <typename T>
std::size_t EnhancementAttentionModule<T>::parameter_count(bool with_attention) const {
  return merge_run.parameter_count() + residual.parameter_count() + enhanced.parameter_count() +
         (with_attention ? attention.parameter_count() : 0);
}

template <typename T>
void EnhancementAttentionModule<T>::visit(const std::string& prefix, bool with_attention,
                                          const ParameterVisitor<T>& fn) {
  merge_run.visit(prefix + ".merge_run", fn);
  residual.visit(prefix + ".residual", fn);
  enhanced.visit(prefix + ".enhanced", fn);
  if (with_attention) attention.visit(prefix + ".attention", fn);
}

template <typename T>
Tensor<T> eam_forward(const Tensor<T>& features, const EnhancementAttentionModule<T>& eam, const Ablation& ablation,
                      const ForwardOptions<T>& options) {
  const Tensor<T> merged = merge_and_run_forward(features, eam.merge_run);
  const Tensor<T> learned = residual_block_forward(merged, eam.residual, ablation.lc);
  const Tensor<T> compressed = erb_forward(learned, eam.enhanced, ablation.lc);
  const Tensor<T> body = ablation.fa ? feature_attention_forward(compressed, eam.attention, options.gates) : compressed;
  return ablation.ssc ? add(features, body) : body;
}

template <typename T>
BasicRIDNet<T> BasicRIDNet<T>::zeros(const NetworkConfig& config) {
  config.validate();
  BasicRIDNet net;
  net.config_ = config;
  net.head_ = ConvParams<T>::zeros(config.in_channels, config.channels, 3);
  for (int m = 0; m < config.num_eams; ++m) {
    EnhancementAttentionModule<T> eam;
    eam.merge_run = MergeRunUnit<T>::zeros(config.channels, config.dilations_a, config.dilations_b);
    eam.residual = ResidualBlock<T>::zeros(config.channels);
    eam.enhanced = EnhancedResidualBlock<T>::zeros(config.channels);
    if (config.ablation.fa) {
      eam.attention =
          FeatureAttention<T>::zeros(config.channels, config.attention_reduction, static_cast<T>(config.lambda));
    }
    net.eams_.push_back(std::move(eam));
  }
  net.tail_ = ConvParams<T>::zeros(config.channels, config.in_channels, 3);
  return net;
}

template <typename T>
BasicRIDNet<T> BasicRIDNet<T>::initialized(const NetworkConfig& config, std::uint64_t seed) {
  BasicRIDNet net = zeros(config);
  std::mt19937_64 rng(seed);
  net.visit([&](const std::string&, Tensor<T>& p) {
    if (p.rank() != 4) return;  // biases stay zero
    const auto fan_in = static_cast<double>(p.dim(1) * p.dim(2) * p.dim(3));
    std::uniform_real_distribution<double> dist(-std::sqrt(6.0 / fan_in), std::sqrt(6.0 / fan_in));
    for (T& w : p.mutable_data()) w = static_cast<T>(dist(rng));
  });
  return net;
}

template <typename T>
Tensor<T> BasicRIDNet<T>::forward(const Tensor<T>& x, const ForwardOptions<T>& options) const {
  if (!x.defined() || x.rank() != 4 || static_cast<int>(x.dim(1)) != config_.in_channels) {
    fail(Errc::shape_mismatch, "network expects N x " + std::to_string(config_.in_channels) + " x H x W input, got " +
                                   (x.defined() ? shape_string(x.shape()) : std::string("undefined")));
  }
  const Tensor<T> f0 = conv_forward(x, head_);
  Tensor<T> f = f0;
  for (const auto& eam : eams_) f = eam_forward(f, eam, config_.ablation, options);
  const Tensor<T> fg = config_.ablation.lsc ? add(f0, f) : f;
  return add(x, conv_forward(fg, tail_));
}

template <typename T>
void BasicRIDNet<T>::visit(const ParameterVisitor<T>& fn) {
  head_.visit("head", fn);
  for (std::size_t m = 0; m < eams_.size(); ++m) {
    eams_[m].visit("eams." + std::to_string(m), config_.ablation.fa, fn);
  }
  tail_.visit("tail", fn);
}

template <typename T>
std::vector<typename BasicRIDNet<T>::NamedParameter> BasicRIDNet<T>::parameters() {
  std::vector<NamedParameter> out;
  visit([&](const std::string& name, Tensor<T>& p) { out.push_back({name, p}); });
  return out;
}

template <typename T>
std::size_t BasicRIDNet<T>::parameter_count() const {
  std::size_t n = head_.parameter_count() + tail_.parameter_count();
  for (const auto& eam : eams_) n += eam.parameter_count(config_.ablation.fa);
  return n;
}

template <typename T>
void BasicRIDNet<T>::zero_grad() {
  visit([](const std::string&, Tensor<T>& p) { p.zero_grad(); });
}

template <typename T>
BasicRIDNet<T> BasicRIDNet<T>::clone() const {
  BasicRIDNet out;
  out.config_ = config_;
  out.head_ = head_.clone();
  out.tail_ = tail_.clone();
  for (const auto& eam : eams_) {
    EnhancementAttentionModule<T> e{eam.merge_run.clone(), eam.residual.clone(), eam.enhanced.clone(), {}};
    if (config_.ablation.fa) e.attention = eam.attention.clone();
    out.eams_.push_back(std::move(e));
  }
  return out;
}

template struct EnhancementAttentionModule<float>;
template struct EnhancementAttentionModule<double>;
template class BasicRIDNet<float>;
template class BasicRIDNet<double>;
template Tensor<float> eam_forward(const Tensor<float>&, const EnhancementAttentionModule<float>&, const Ablation&,
                                   const ForwardOptions<float>&);
template Tensor<double> eam_forward(const Tensor<double>&, const EnhancementAttentionModule<double>&,
                                    const Ablation&, const ForwardOptions<double>&);

}  // namespace ridnet
