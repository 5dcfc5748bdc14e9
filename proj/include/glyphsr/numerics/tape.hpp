// Copyright 2026 The glyphsr Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <functional>
#include <string>
#include <unordered_map>
#include <vector>

#include "glyphsr/numerics/tensor.hpp"

namespace glyphsr {

template <typename T>
class Tape;

// Handle to a node on a tape.
template <typename T>
struct Var {
  Tape<T>* tape = nullptr;
  int id = -1;

  const Tensor<T>& value() const { return tape->value(id); }
  const Shape& shape() const { return value().shape(); }
  std::size_t size() const { return value().size(); }
  bool valid() const noexcept { return tape != nullptr && id >= 0; }
};

// Leaf id -> gradient, same shape as the leaf.
template <typename T>
using Gradients = std::unordered_map<int, Tensor<T>>;

// Eager reverse-mode tape. Nodes are appended in evaluation order, so the
// node vector is already topologically sorted.
template <typename T>
class Tape {
 public:
  // Receives the node's own id and its upstream gradient; accumulates into
  // the node's inputs.
  using BackwardFn = std::function<void(Tape&, int self, const Tensor<T>& grad_out)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var<T> leaf(Tensor<T> value, bool requires_grad = true);
  Var<T> constant(Tensor<T> value) { return leaf(std::move(value), false); }

  Var<T> record(Tensor<T> value, std::vector<int> inputs, const char* op, BackwardFn backward);

  const Tensor<T>& value(int id) const { return nodes_.at(static_cast<std::size_t>(id)).value; }
  bool requires_grad(int id) const { return nodes_[static_cast<std::size_t>(id)].requires_grad; }
  bool is_leaf(int id) const { return nodes_[static_cast<std::size_t>(id)].is_leaf; }
  const char* op_name(int id) const { return nodes_[static_cast<std::size_t>(id)].op; }
  std::size_t size() const noexcept { return nodes_.size(); }

  // Gradient buffer for node `id`, zero-initialised on first access.
  Tensor<T>& grad_buffer(int id);
  void accumulate(int id, const Tensor<T>& g);

  // Gradients for every requires_grad leaf; unreachable leaves get zeros.
  Gradients<T> backward(Var<T> loss);

 private:
  struct Node {
    Tensor<T> value;
    std::vector<int> inputs;
    const char* op = "leaf";
    BackwardFn backward;
    bool requires_grad = false;
    bool is_leaf = false;
  };

  std::vector<Node> nodes_;
  std::vector<Tensor<T>> grads_;
};

extern template class Tape<float>;
extern template class Tape<double>;

}  // namespace glyphsr
