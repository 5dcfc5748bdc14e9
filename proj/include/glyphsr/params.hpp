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

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "glyphsr/errors.hpp"
#include "glyphsr/numerics/rng.hpp"
#include "glyphsr/numerics/tape.hpp"

namespace glyphsr {

// Named, ordered tensors. Order is insertion order and defines checkpoint layout.
template <typename T>
class ParamStore {
 public:
  int add(std::string name, Tensor<T> value) {
    require(!index_.contains(name), "ParamStore: duplicate parameter " + name);
    const int id = static_cast<int>(values_.size());
    index_.emplace(name, id);
    names_.push_back(std::move(name));
    values_.push_back(std::move(value));
    return id;
  }

  int size() const noexcept { return static_cast<int>(values_.size()); }
  bool contains(std::string_view name) const { return index_.contains(std::string(name)); }
  int index(std::string_view name) const {
    const auto it = index_.find(std::string(name));
    require(it != index_.end(), "ParamStore: no parameter named " + std::string(name));
    return it->second;
  }
  const std::string& name(int id) const { return names_.at(static_cast<std::size_t>(id)); }
  const Tensor<T>& value(int id) const { return values_.at(static_cast<std::size_t>(id)); }
  Tensor<T>& value(int id) { return values_.at(static_cast<std::size_t>(id)); }
  const Tensor<T>& operator[](std::string_view name) const { return value(index(name)); }
  Tensor<T>& operator[](std::string_view name) { return value(index(name)); }
  const std::vector<std::string>& names() const noexcept { return names_; }

  std::size_t num_scalars() const {
    std::size_t n = 0;
    for (const auto& v : values_) n += v.size();
    return n;
  }

  template <typename U>
  ParamStore<U> cast() const {
    ParamStore<U> out;
    for (int i = 0; i < size(); ++i) out.add(name(i), value(i).template cast<U>());
    return out;
  }

  friend bool operator==(const ParamStore& a, const ParamStore& b) {
    return a.names_ == b.names_ && a.values_ == b.values_;
  }

 private:
  std::vector<std::string> names_;
  std::vector<Tensor<T>> values_;
  std::unordered_map<std::string, int> index_;
};

// Tensor with i.i.d. N(0, stddev^2) entries.
template <typename T>
Tensor<T> normal_tensor(RngStream& rng, const Shape& shape, double stddev) {
  return Tensor<T>(shape, rng.normals<T>(static_cast<std::size_t>(numel(shape)), stddev));
}

// Lazily places parameters on a tape. Parameters flagged trainable become
// gradient-carrying leaves; everything else enters as a constant.
template <typename T>
class Binder {
 public:
  Binder(Tape<T>& tape, const ParamStore<T>& store, std::vector<bool> trainable = {})
      : tape_(&tape), store_(&store), trainable_(std::move(trainable)), leaf_(static_cast<std::size_t>(store.size()), -1) {
    require(trainable_.empty() || trainable_.size() == leaf_.size(), "Binder: trainable mask size mismatch");
  }

  Var<T> operator()(int id) {
    int& leaf = leaf_.at(static_cast<std::size_t>(id));
    if (leaf < 0) {
      const bool grad = !trainable_.empty() && trainable_[static_cast<std::size_t>(id)];
      leaf = tape_->leaf(store_->value(id), grad).id;
    }
    return Var<T>{tape_, leaf};
  }
  Var<T> operator()(std::string_view name) { return (*this)(store_->index(name)); }

  // Substitutes an existing tape value for a parameter (must precede first use).
  void assign(int id, Var<T> v) {
    require(v.tape == tape_, "Binder::assign: variable lives on another tape");
    require(v.shape() == store_->value(id).shape(), "Binder::assign: shape mismatch for " + store_->name(id));
    leaf_.at(static_cast<std::size_t>(id)) = v.id;
  }

  Tape<T>& tape() noexcept { return *tape_; }
  const ParamStore<T>& store() const noexcept { return *store_; }

  // Adds gradients of bound trainable parameters into accum (indexed by parameter).
  void collect(const Gradients<T>& grads, std::vector<Tensor<T>>& accum) const {
    require(accum.size() == leaf_.size(), "Binder::collect: accumulator size mismatch");
    for (std::size_t i = 0; i < leaf_.size(); ++i) {
      if (leaf_[i] < 0 || trainable_.empty() || !trainable_[i]) continue;
      const auto it = grads.find(leaf_[i]);
      if (it == grads.end()) continue;
      auto& dst = accum[i];
      const T* src = it->second.ptr();
      T* out = dst.ptr();
      for (std::size_t k = 0; k < dst.size(); ++k) out[k] += src[k];
    }
  }

 private:
  Tape<T>* tape_;
  const ParamStore<T>* store_;
  std::vector<bool> trainable_;
  std::vector<int> leaf_;
};

template <typename T>
std::vector<Tensor<T>> zero_like(const ParamStore<T>& store) {
  std::vector<Tensor<T>> out;
  out.reserve(static_cast<std::size_t>(store.size()));
  for (int i = 0; i < store.size(); ++i) out.emplace_back(store.value(i).shape());
  return out;
}

}  // namespace glyphsr
