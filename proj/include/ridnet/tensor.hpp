// Copyright (c) 2026, The ridnet-cpp Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dense NCHW tensors with reverse-mode differentiation.
//
// A Tensor is a shared handle to a TensorNode. Ops create a new node that
// keeps its inputs alive together with a closure that pushes the node's
// gradient back into them. Nodes are stamped with a global creation sequence,
// so sorting the nodes reachable from a loss by that stamp is a topological
// order of the graph.

#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ridnet/error.hpp"

namespace ridnet {

using Shape = std::vector<std::size_t>;

std::size_t shape_numel(const Shape& shape);
std::string shape_string(const Shape& shape);

template <typename T>
struct TensorNode {
  std::uint64_t seq = 0;
  std::string_view op = "leaf";
  Shape shape;
  std::vector<T> data;
  std::vector<T> grad;  // empty until needed; same length as data otherwise
  bool requires_grad = false;
  bool released = false;  // set once backward consumed the graph rooted here
  std::vector<std::shared_ptr<TensorNode>> inputs;
  std::function<void(TensorNode&)> backward_fn;

  TensorNode();
  bool is_leaf() const { return inputs.empty() && !backward_fn; }
};

// Disables graph construction on the current thread while alive.
class NoGradGuard {
 public:
  NoGradGuard();
  ~NoGradGuard();
  NoGradGuard(const NoGradGuard&) = delete;
  NoGradGuard& operator=(const NoGradGuard&) = delete;

 private:
  bool previous_;
};

bool grad_mode_enabled();

template <typename T>
class Tensor {
 public:
  using value_type = T;

  Tensor() = default;
  explicit Tensor(Shape shape, bool requires_grad = false);
  Tensor(Shape shape, std::vector<T> values, bool requires_grad = false);

  static Tensor full(Shape shape, T value, bool requires_grad = false);
  static Tensor scalar(T value, bool requires_grad = false) { return full({1}, value, requires_grad); }

  bool defined() const { return node_ != nullptr; }
  const Shape& shape() const { return node_->shape; }
  std::size_t dim(std::size_t i) const { return node_->shape.at(i); }
  std::size_t rank() const { return node_->shape.size(); }
  std::size_t numel() const { return node_->data.size(); }

  std::span<const T> data() const { return node_->data; }
  // Mutable access is reserved for parameter updates and test fixtures.
  std::span<T> mutable_data() { return node_->data; }

  bool has_grad() const { return !node_->grad.empty(); }
  std::span<const T> grad() const { return node_->grad; }
  std::span<T> mutable_grad() { return node_->grad; }

  bool requires_grad() const { return node_->requires_grad; }
  void set_requires_grad(bool on);
  void zero_grad();

  bool is_leaf() const { return node_->is_leaf(); }
  std::string_view op() const { return node_->op; }

  T item() const;

  // Populates grad on every requires_grad leaf reachable from this scalar.
  // Leaf gradients accumulate across calls; interior state is released
  // unless retain_graph is set, after which a second call is an error.
  void backward(bool retain_graph = false);

  // Copy of the values with no graph attached.
  Tensor detach() const;
  template <typename U>
  Tensor<U> cast() const;

  const std::shared_ptr<TensorNode<T>>& node() const { return node_; }
  explicit Tensor(std::shared_ptr<TensorNode<T>> node) : node_(std::move(node)) {}

 private:
  std::shared_ptr<TensorNode<T>> node_;
};

// Topologically ordered view of the nodes that feed a tensor and require
// gradients. inputs[i] lists positions in `nodes` (always < i).
template <typename T>
struct Graph {
  std::vector<TensorNode<T>*> nodes;
  std::vector<std::vector<std::size_t>> inputs;
};

template <typename T>
Graph<T> build_graph(const Tensor<T>& root);

// Builds the result of an op. When no input requires grad (or grad mode is
// off) the result is a plain constant and backward_fn is dropped.
template <typename T>
Tensor<T> make_op_result(std::string_view op, Shape shape, std::vector<T> data,
                         std::vector<Tensor<T>> inputs,
                         std::function<void(TensorNode<T>&)> backward_fn);

// True when backward should write into this node's grad buffer.
template <typename T>
inline bool wants_grad(const std::shared_ptr<TensorNode<T>>& node) {
  return node->requires_grad && !node->grad.empty();
}

template <typename T>
template <typename U>
Tensor<U> Tensor<T>::cast() const {
  std::vector<U> values(node_->data.begin(), node_->data.end());
  return Tensor<U>(node_->shape, std::move(values), node_->requires_grad);
}

}  // namespace ridnet
