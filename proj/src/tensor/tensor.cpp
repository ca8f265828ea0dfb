// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0

#include "ridnet/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace ridnet {

namespace {

std::atomic<std::uint64_t> g_sequence{0};
thread_local bool t_grad_mode = true;

}  // namespace

std::size_t shape_numel(const Shape& shape) {
  std::size_t n = 1;
  for (std::size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i != 0) os << 'x';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

NoGradGuard::NoGradGuard() : previous_(t_grad_mode) { t_grad_mode = false; }
NoGradGuard::~NoGradGuard() { t_grad_mode = previous_; }
bool grad_mode_enabled() { return t_grad_mode; }

template <typename T>
TensorNode<T>::TensorNode() : seq(g_sequence.fetch_add(1, std::memory_order_relaxed)) {}

template <typename T>
Tensor<T>::Tensor(Shape shape, bool requires_grad) : node_(std::make_shared<TensorNode<T>>()) {
  node_->data.assign(shape_numel(shape), T(0));
  node_->shape = std::move(shape);
  set_requires_grad(requires_grad);
}

template <typename T>
Tensor<T>::Tensor(Shape shape, std::vector<T> values, bool requires_grad)
    : node_(std::make_shared<TensorNode<T>>()) {
  if (shape_numel(shape) != values.size()) {
    fail(Errc::shape_mismatch, "tensor shape " + shape_string(shape) + " holds " +
                                   std::to_string(shape_numel(shape)) + " values, got " +
                                   std::to_string(values.size()));
  }
  node_->shape = std::move(shape);
  node_->data = std::move(values);
  set_requires_grad(requires_grad);
}

template <typename T>
Tensor<T> Tensor<T>::full(Shape shape, T value, bool requires_grad) {
  std::vector<T> values(shape_numel(shape), value);
  return Tensor(std::move(shape), std::move(values), requires_grad);
}

template <typename T>
void Tensor<T>::set_requires_grad(bool on) {
  if (on && !node_->is_leaf()) fail(Errc::graph_state, "requires_grad can only be toggled on leaves");
  node_->requires_grad = on;
  if (on) {
    node_->grad.assign(node_->data.size(), T(0));
  } else {
    node_->grad.clear();
  }
}

template <typename T>
void Tensor<T>::zero_grad() {
  if (node_->requires_grad) node_->grad.assign(node_->data.size(), T(0));
}

template <typename T>
T Tensor<T>::item() const {
  if (numel() != 1) fail(Errc::shape_mismatch, "item() on tensor of shape " + shape_string(shape()));
  return node_->data[0];
}

template <typename T>
Tensor<T> Tensor<T>::detach() const {
  return Tensor(node_->shape, node_->data, false);
}

template <typename T>
Graph<T> build_graph(const Tensor<T>& root) {
  Graph<T> graph;
  if (!root.defined() || !root.requires_grad()) return graph;

  std::unordered_set<TensorNode<T>*> seen;
  std::vector<TensorNode<T>*> stack{root.node().get()};
  seen.insert(root.node().get());
  while (!stack.empty()) {
    TensorNode<T>* node = stack.back();
    stack.pop_back();
    graph.nodes.push_back(node);
    for (const auto& in : node->inputs) {
      if (in->requires_grad && seen.insert(in.get()).second) stack.push_back(in.get());
    }
  }
  std::sort(graph.nodes.begin(), graph.nodes.end(),
            [](const TensorNode<T>* a, const TensorNode<T>* b) { return a->seq < b->seq; });

  std::vector<std::pair<const TensorNode<T>*, std::size_t>> index;
  index.reserve(graph.nodes.size());
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) index.emplace_back(graph.nodes[i], i);
  auto position = [&](const TensorNode<T>* n) {
    auto it = std::lower_bound(index.begin(), index.end(), n->seq,
                               [](const auto& e, std::uint64_t s) { return e.first->seq < s; });
    return it->second;
  };
  graph.inputs.resize(graph.nodes.size());
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    for (const auto& in : graph.nodes[i]->inputs) {
      if (in->requires_grad) graph.inputs[i].push_back(position(in.get()));
    }
  }
  return graph;
}

template <typename T>
void Tensor<T>::backward(bool retain_graph) {
  if (!defined()) fail(Errc::graph_state, "backward on undefined tensor");
  if (numel() != 1) {
    fail(Errc::graph_state, "backward requires a scalar loss, got shape " + shape_string(shape()));
  }
  if (node_->released) {
    fail(Errc::graph_state, "backward called twice on the same graph without reset");
  }
  if (!node_->requires_grad) return;

  Graph<T> graph = build_graph(*this);
  for (TensorNode<T>* n : graph.nodes) {
    if (!n->is_leaf()) {
      n->grad.assign(n->data.size(), T(0));
    } else if (n->grad.size() != n->data.size()) {
      n->grad.assign(n->data.size(), T(0));
    }
  }
  node_->grad[0] += T(1);

  for (auto it = graph.nodes.rbegin(); it != graph.nodes.rend(); ++it) {
    TensorNode<T>* n = *it;
    if (n->backward_fn) n->backward_fn(*n);
  }

  if (!retain_graph) {
    for (TensorNode<T>* n : graph.nodes) {
      if (n->is_leaf()) continue;
      n->backward_fn = nullptr;
      n->inputs.clear();
      n->grad.clear();
      n->grad.shrink_to_fit();
      n->released = true;
    }
  }
}

template <typename T>
Tensor<T> make_op_result(std::string_view op, Shape shape, std::vector<T> data,
                         std::vector<Tensor<T>> inputs,
                         std::function<void(TensorNode<T>&)> backward_fn) {
#ifndef NDEBUG
  for (T v : data) {
    if (!std::isfinite(v)) {
      bool finite_inputs = true;
      for (const auto& in : inputs) {
        for (T u : in.data()) finite_inputs = finite_inputs && std::isfinite(u);
      }
      if (finite_inputs) fail(Errc::numeric, std::string(op) + " produced a non-finite value");
      break;
    }
  }
#endif
  auto node = std::make_shared<TensorNode<T>>();
  node->op = op;
  node->shape = std::move(shape);
  node->data = std::move(data);
  bool needs_grad = false;
  if (grad_mode_enabled()) {
    for (const auto& in : inputs) needs_grad = needs_grad || in.requires_grad();
  }
  if (needs_grad) {
    node->requires_grad = true;
    node->inputs.reserve(inputs.size());
    for (auto& in : inputs) node->inputs.push_back(in.node());
    node->backward_fn = std::move(backward_fn);
  }
  return Tensor<T>(std::move(node));
}

template struct TensorNode<float>;
template struct TensorNode<double>;
template class Tensor<float>;
template class Tensor<double>;
template Graph<float> build_graph(const Tensor<float>&);
template Graph<double> build_graph(const Tensor<double>&);
template Tensor<float> make_op_result(std::string_view, Shape, std::vector<float>, std::vector<Tensor<float>>,
                                      std::function<void(TensorNode<float>&)>);
template Tensor<double> make_op_result(std::string_view, Shape, std::vector<double>, std::vector<Tensor<double>>,
                                       std::function<void(TensorNode<double>&)>);

}  // namespace ridnet
