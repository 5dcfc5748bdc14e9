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

#include "glyphsr/numerics/tape.hpp"

#include <sstream>

namespace glyphsr {

std::string shape_str(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
  os << ']';
  return os.str();
}

template <typename T>
Var<T> Tape<T>::leaf(Tensor<T> value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  n.is_leaf = true;
  nodes_.push_back(std::move(n));
  return Var<T>{this, static_cast<int>(nodes_.size() - 1)};
}

template <typename T>
Var<T> Tape<T>::record(Tensor<T> value, std::vector<int> inputs, const char* op, BackwardFn backward) {
  Node n;
  n.value = std::move(value);
  n.op = op;
  for (int id : inputs) {
    require(id >= 0 && static_cast<std::size_t>(id) < nodes_.size(), "Tape::record: input is not on this tape");
    n.requires_grad = n.requires_grad || nodes_[static_cast<std::size_t>(id)].requires_grad;
  }
  n.inputs = std::move(inputs);
  if (n.requires_grad) n.backward = std::move(backward);
  nodes_.push_back(std::move(n));
  return Var<T>{this, static_cast<int>(nodes_.size() - 1)};
}

template <typename T>
Tensor<T>& Tape<T>::grad_buffer(int id) {
  auto& g = grads_[static_cast<std::size_t>(id)];
  if (g.empty()) g = Tensor<T>(value(id).shape());
  return g;
}

template <typename T>
void Tape<T>::accumulate(int id, const Tensor<T>& g) {
  if (!requires_grad(id)) return;
  auto& buf = grad_buffer(id);
  require(buf.size() == g.size(), std::string("Tape::accumulate: gradient shape mismatch for ") + op_name(id));
  T* dst = buf.ptr();
  const T* src = g.ptr();
  for (std::size_t i = 0; i < buf.size(); ++i) dst[i] += src[i];
}

template <typename T>
Gradients<T> Tape<T>::backward(Var<T> loss) {
  require(loss.tape == this, "backward: loss is not on this tape");
  require(value(loss.id).size() == 1, "backward: loss must be a scalar, got shape " + shape_str(value(loss.id).shape()));
  grads_.assign(nodes_.size(), Tensor<T>());
  if (requires_grad(loss.id)) grads_[static_cast<std::size_t>(loss.id)] = Tensor<T>(value(loss.id).shape(), T{1});

  for (int id = loss.id; id >= 0; --id) {
    auto& node = nodes_[static_cast<std::size_t>(id)];
    if (node.is_leaf || !node.requires_grad) continue;
    auto& g = grads_[static_cast<std::size_t>(id)];
    if (g.empty()) continue;
    node.backward(*this, id, g);
    // Intermediate gradients are not needed once propagated.
    g = Tensor<T>();
  }

  Gradients<T> out;
  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    const auto& node = nodes_[id];
    if (!node.is_leaf || !node.requires_grad) continue;
    auto& g = grads_[id];
    out.emplace(static_cast<int>(id), g.empty() ? Tensor<T>(node.value.shape()) : std::move(g));
  }
  grads_.clear();
  return out;
}

template class Tape<float>;
template class Tape<double>;

}  // namespace glyphsr
