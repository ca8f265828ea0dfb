// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "ridnet/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "ridnet/dataset.hpp"
#include "ridnet/model.hpp"
#include "ridnet/ops.hpp"

namespace ridnet {

void GradcheckResult::merge(const GradcheckResult& other) {
  max_error = std::max(max_error, other.max_error);
  checked += other.checked;
  skipped += other.skipped;
}

GradcheckResult check_gradients(const std::string& name, const std::function<Tensor<double>()>& loss,
                                std::vector<Tensor<double>> inputs, const GradcheckOptions& options,
                                std::size_t probes, std::mt19937_64& rng) {
  GradcheckResult result;
  result.name = name;
  result.tolerance = options.tolerance;

  for (auto& t : inputs) {
    if (!t.requires_grad()) t.set_requires_grad(true);
    t.zero_grad();
  }
  {
    Tensor<double> out = loss();
    out.backward();
  }

  auto evaluate = [&](std::vector<unsigned char>& signature) {
    NoGradGuard no_grad;
    KinkMonitor monitor;
    monitor.begin();
    const double value = loss().item();
    signature = monitor.signature();
    return value;
  };

  const double h = options.step;
  std::vector<unsigned char> base_sig, plus_sig, minus_sig;
  for (auto& input : inputs) {
    const std::vector<double> analytic(input.grad().begin(), input.grad().end());
    std::vector<std::size_t> coords;
    if (probes == 0 || probes >= input.numel()) {
      coords.resize(input.numel());
      for (std::size_t i = 0; i < coords.size(); ++i) coords[i] = i;
    } else {
      std::uniform_int_distribution<std::size_t> pick(0, input.numel() - 1);
      for (std::size_t i = 0; i < probes; ++i) coords.push_back(pick(rng));
    }
    std::span<double> data = input.mutable_data();
    for (const std::size_t j : coords) {
      const double orig = data[j];
      evaluate(base_sig);
      data[j] = orig + h;
      const double plus = evaluate(plus_sig);
      data[j] = orig - h;
      const double minus = evaluate(minus_sig);
      data[j] = orig;
      if (plus_sig != base_sig || minus_sig != base_sig) {
        ++result.skipped;
        continue;
      }
      const double numeric = (plus - minus) / (2.0 * h);
      const double scale = std::max({std::abs(analytic[j]), std::abs(numeric), options.floor});
      result.max_error = std::max(result.max_error, std::abs(analytic[j] - numeric) / scale);
      ++result.checked;
    }
  }
  return result;
}

namespace {

using T = double;

Tensor<T> random_tensor(Shape shape, std::mt19937_64& rng, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<T> data(shape_numel(shape));
  for (auto& v : data) v = dist(rng);
  return Tensor<T>(std::move(shape), std::move(data), true);
}

int uniform_int(std::mt19937_64& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

// Weighted sum with fixed random weights so every output element carries a
// distinct upstream gradient.
std::function<Tensor<T>()> projected(std::function<Tensor<T>()> f, std::mt19937_64& rng) {
  Shape shape;
  {
    NoGradGuard no_grad;
    shape = f().shape();
  }
  Tensor<T> weights = random_tensor(shape, rng);
  weights.set_requires_grad(false);
  return [f = std::move(f), weights] { return sum(mul(f(), weights)); };
}

template <typename Layer>
std::vector<Tensor<T>> layer_parameters(Layer& layer) {
  std::vector<Tensor<T>> out;
  layer.visit("", [&](const std::string&, Tensor<T>& p) { out.push_back(p); });
  return out;
}

template <typename Layer>
void init_layer(Layer& layer, std::mt19937_64& rng) {
  layer.visit("", [&](const std::string& name, Tensor<T>& p) {
    std::uniform_real_distribution<double> dist(-0.5, 0.5);
    (void)name;
    for (auto& v : p.mutable_data()) v = dist(rng);
  });
}

struct Case {
  std::string name;
  std::function<GradcheckResult(std::mt19937_64&, const GradcheckOptions&)> run;
};

GradcheckResult elementwise(const std::string& name, std::mt19937_64& rng, const GradcheckOptions& o,
                            const std::function<Tensor<T>(const Tensor<T>&)>& op, double lo, double hi) {
  const Shape shape{static_cast<std::size_t>(uniform_int(rng, 1, 2)), static_cast<std::size_t>(uniform_int(rng, 1, 3)),
                    static_cast<std::size_t>(uniform_int(rng, 1, 5)), static_cast<std::size_t>(uniform_int(rng, 1, 5))};
  Tensor<T> x = random_tensor(shape, rng, lo, hi);
  return check_gradients(name, projected([=] { return op(x); }, rng), {x}, o, 0, rng);
}

GradcheckResult binary(const std::string& name, std::mt19937_64& rng, const GradcheckOptions& o,
                       const std::function<Tensor<T>(const Tensor<T>&, const Tensor<T>&)>& op) {
  const Shape shape{2, static_cast<std::size_t>(uniform_int(rng, 1, 3)), static_cast<std::size_t>(uniform_int(rng, 1, 4)),
                    static_cast<std::size_t>(uniform_int(rng, 1, 4))};
  Tensor<T> a = random_tensor(shape, rng);
  Tensor<T> b = random_tensor(shape, rng);
  return check_gradients(name, projected([=] { return op(a, b); }, rng), {a, b}, o, 0, rng);
}

std::vector<Case> cases() {
  std::vector<Case> out;
  out.push_back({"conv2d", [](std::mt19937_64& rng, const GradcheckOptions& o) {
                   const int k = uniform_int(rng, 0, 1) == 0 ? 1 : 3;
                   const int dil = uniform_int(rng, 1, 4);
                   const int reach = dil * (k - 1);
                   const int pad = uniform_int(rng, 0, reach);
                   const auto n = static_cast<std::size_t>(uniform_int(rng, 1, 2));
                   const auto c = static_cast<std::size_t>(uniform_int(rng, 1, 3));
                   const auto oc = static_cast<std::size_t>(uniform_int(rng, 1, 3));
                   const int min_side = std::max(1, reach + 1 - 2 * pad);
                   const auto h = static_cast<std::size_t>(min_side + uniform_int(rng, 0, 4));
                   const auto w = static_cast<std::size_t>(min_side + uniform_int(rng, 0, 4));
                   Tensor<T> x = random_tensor({n, c, h, w}, rng);
                   Tensor<T> wt = random_tensor({oc, c, static_cast<std::size_t>(k), static_cast<std::size_t>(k)}, rng);
                   Tensor<T> b = random_tensor({oc}, rng);
                   return check_gradients("conv2d", projected([=] { return conv2d(x, wt, b, dil, pad); }, rng),
                                          {x, wt, b}, o, 0, rng);
                 }});
  out.push_back({"global_avg_pool", [](std::mt19937_64& rng, const GradcheckOptions& o) {
                   return elementwise("global_avg_pool", rng, o, [](const Tensor<T>& x) { return global_avg_pool(x); },
                                      -1, 1);
                 }});
  out.push_back({"soft_shrink", [](std::mt19937_64& rng, const GradcheckOptions& o) {
                   return elementwise("soft_shrink", rng, o, [](const Tensor<T>& x) { return soft_shrink(x, T(0.5)); },
                                      -2, 2);
                 }});
  out.push_back({"sigmoid", [](std::mt19937_64& rng, const GradcheckOptions& o) {
                   return elementwise("sigmoid", rng, o, [](const Tensor<T>& x) { return sigmoid(x); }, -4, 4);
                 }});
  out.push_back({"relu", [](std::mt19937_64& rng, const GradcheckOptions& o) {
                   return elementwise("relu", rng, o, [](const Tensor<T>& x) { return relu(x); }, -1, 1);
                 }});
  out.push_back({"add", [](std::mt19937_64& rng, const GradcheckOptions& o) {
                   return binary("add", rng, o, [](const Tensor<T>& a, const Tensor<T>& b) { return add(a, b); });
                 }});
  out.push_back({"sub", [](std::mt19937_64& rng, const GradcheckOptions& o) {
                   return binary("sub", rng, o, [](const Tensor<T>& a, const Tensor<T>& b) { return sub(a, b); });
                 }});
  out.push_back({"mul", [](std::mt19937_64& rng, const GradcheckOptions& o) {
                   return binary("mul", rng, o, [](const Tensor<T>& a, const Tensor<T>& b) { return mul(a, b); });
                 }});
  out.push_back({"mul_broadcast", [](std::mt19937_64& rng, const GradcheckOptions& o) {
                   const auto c = static_cast<std::size_t>(uniform_int(rng, 1, 4));
                   Tensor<T> a = random_tensor({2, c, 3, static_cast<std::size_t>(uniform_int(rng, 1, 4))}, rng);
                   Tensor<T> g = random_tensor({2, c, 1, 1}, rng);
                   return check_gradients("mul_broadcast", projected([=] { return mul_broadcast(a, g); }, rng), {a, g},
                                          o, 0, rng);
                 }});
  out.push_back({"concat_channels", [](std::mt19937_64& rng, const GradcheckOptions& o) {
                   Tensor<T> a = random_tensor({2, static_cast<std::size_t>(uniform_int(rng, 1, 3)), 3, 4}, rng);
                   Tensor<T> b = random_tensor({2, static_cast<std::size_t>(uniform_int(rng, 1, 3)), 3, 4}, rng);
                   return check_gradients("concat_channels", projected([=] { return concat_channels(a, b); }, rng),
                                          {a, b}, o, 0, rng);
                 }});
  out.push_back({"sum", [](std::mt19937_64& rng, const GradcheckOptions& o) {
                   Tensor<T> x = random_tensor({2, 3, 4, 5}, rng);
                   return check_gradients("sum", [=] { return sum(x); }, {x}, o, 0, rng);
                 }});
  out.push_back({"l1_loss", [](std::mt19937_64& rng, const GradcheckOptions& o) {
                   Tensor<T> p = random_tensor({2, 2, 4, 4}, rng);
                   Tensor<T> t = random_tensor({2, 2, 4, 4}, rng);
                   return check_gradients("l1_loss", [=] { return l1_loss(p, t); }, {p, t}, o, 0, rng);
                 }});
  out.push_back({"feature_attention", [](std::mt19937_64& rng, const GradcheckOptions& o) {
                   auto fa = FeatureAttention<T>::zeros(8, 4, T(0.5));
                   init_layer(fa, rng);
                   Tensor<T> x = random_tensor({2, 8, 4, 4}, rng, -2, 2);
                   auto inputs = layer_parameters(fa);
                   inputs.push_back(x);
                   return check_gradients("feature_attention",
                                          projected([=] { return feature_attention_forward(x, fa); }, rng), inputs, o,
                                          0, rng);
                 }});
  out.push_back({"merge_and_run", [](std::mt19937_64& rng, const GradcheckOptions& o) {
                   auto unit = MergeRunUnit<T>::zeros(3, {1, 2}, {3, 4});
                   init_layer(unit, rng);
                   Tensor<T> x = random_tensor({1, 3, 6, 5}, rng);
                   auto inputs = layer_parameters(unit);
                   inputs.push_back(x);
                   return check_gradients("merge_and_run",
                                          projected([=] { return merge_and_run_forward(x, unit); }, rng), inputs, o, 0,
                                          rng);
                 }});
  out.push_back({"residual_block", [](std::mt19937_64& rng, const GradcheckOptions& o) {
                   auto block = ResidualBlock<T>::zeros(3);
                   init_layer(block, rng);
                   const bool skip = uniform_int(rng, 0, 1) == 1;
                   Tensor<T> x = random_tensor({2, 3, 5, 4}, rng);
                   auto inputs = layer_parameters(block);
                   inputs.push_back(x);
                   return check_gradients("residual_block",
                                          projected([=] { return residual_block_forward(x, block, skip); }, rng),
                                          inputs, o, 0, rng);
                 }});
  out.push_back({"enhanced_residual_block", [](std::mt19937_64& rng, const GradcheckOptions& o) {
                   auto block = EnhancedResidualBlock<T>::zeros(3);
                   init_layer(block, rng);
                   const bool skip = uniform_int(rng, 0, 1) == 1;
                   Tensor<T> x = random_tensor({2, 3, 4, 5}, rng);
                   auto inputs = layer_parameters(block);
                   inputs.push_back(x);
                   return check_gradients("enhanced_residual_block",
                                          projected([=] { return erb_forward(x, block, skip); }, rng), inputs, o, 0,
                                          rng);
                 }});
  out.push_back({"ridnet_2eam_8ch", [](std::mt19937_64& rng, const GradcheckOptions& o) {
                   NetworkConfig config;
                   config.num_eams = 2;
                   config.channels = 8;
                   config.attention_reduction = 4;
                   auto net = BasicRIDNet<float>::initialized(config, rng()).cast<T>();
                   Tensor<T> x = random_tensor({1, 1, 8, 8}, rng, 0.0, 1.0);
                   Tensor<T> target = random_tensor({1, 1, 8, 8}, rng, 0.0, 1.0);
                   target.set_requires_grad(false);
                   std::vector<Tensor<T>> inputs;
                   for (auto& p : net.parameters()) inputs.push_back(p.tensor);
                   inputs.push_back(x);
                   return check_gradients("ridnet_2eam_8ch", [=] { return l1_loss(net.forward(x), target); }, inputs, o,
                                          o.net_probes, rng);
                 }});
  return out;
}

constexpr std::uint64_t kGradcheckStream = 0x67726164ULL;  // "grad"

}  // namespace

std::vector<GradcheckResult> run_gradcheck_suite(const GradcheckOptions& options) {
  std::vector<GradcheckResult> results;
  const auto all = cases();
  for (std::size_t c = 0; c < all.size(); ++c) {
    GradcheckResult total;
    total.name = all[c].name;
    total.tolerance = options.tolerance;
    for (int s = 0; s < options.seeds; ++s) {
      std::mt19937_64 rng(derive_seed(options.seed, kGradcheckStream + c, static_cast<std::uint64_t>(s)));
      total.merge(all[c].run(rng, options));
    }
    results.push_back(total);
  }
  return results;
}

}  // namespace ridnet
