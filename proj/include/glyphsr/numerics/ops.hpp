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

#include <cstdint>
#include <span>
#include <vector>

#include "glyphsr/numerics/tape.hpp"

// Differentiable primitives. Every op records one node on the tape of its
// first argument. Binary elementwise ops accept `b` with the same shape as
// `a`, a single element, or one row (b.size() == last dim of a) broadcast
// over the leading dimensions.
namespace glyphsr::ops {

template <typename T>
Var<T> add(Var<T> a, Var<T> b);
template <typename T>
Var<T> sub(Var<T> a, Var<T> b);
template <typename T>
Var<T> mul(Var<T> a, Var<T> b);
template <typename T>
Var<T> scale(Var<T> a, T c);
template <typename T>
Var<T> add_scalar(Var<T> a, T c);

// [n,k] x [k,m] -> [n,m]
template <typename T>
Var<T> matmul(Var<T> a, Var<T> b);
template <typename T>
Var<T> transpose(Var<T> a);
template <typename T>
Var<T> reshape(Var<T> a, Shape shape);

// Normalises over the last dimension, no affine parameters.
template <typename T>
Var<T> layernorm(Var<T> a, T eps = T(1e-6));
template <typename T>
Var<T> softmax_rows(Var<T> a);
template <typename T>
Var<T> sigmoid(Var<T> a);
template <typename T>
Var<T> silu(Var<T> a);
// tanh approximation
template <typename T>
Var<T> gelu(Var<T> a);
// log(max(a, floor)); the gradient is zero where the floor is active.
template <typename T>
Var<T> log(Var<T> a, T floor = T(0));
template <typename T>
Var<T> power(Var<T> a, T exponent);

template <typename T>
Var<T> sum(Var<T> a);
template <typename T>
Var<T> mean(Var<T> a);
template <typename T>
Var<T> mse(Var<T> a, Var<T> b);

// table [vocab, d], ids -> [ids.size(), d]
template <typename T>
Var<T> embedding(Var<T> table, std::span<const int> ids);
// Slices / concatenates along the first dimension.
template <typename T>
Var<T> slice_rows(Var<T> a, int begin, int end);
template <typename T>
Var<T> concat_rows(std::span<const Var<T>> parts);

// x [c,h,w], w [o,c,k,k], b [o]; stride 1, zero padding `pad`.
template <typename T>
Var<T> conv2d(Var<T> x, Var<T> w, Var<T> b, int pad);

// Multi-head scaled dot-product attention. q [nq,d], k/v [nk,d]. Keys with
// key_mask[j] == 0 are excluded; an empty mask means all keys are valid.
// A query with no valid key produces a zero row.
template <typename T>
Var<T> attention(Var<T> q, Var<T> k, Var<T> v, int heads, std::span<const std::uint8_t> key_mask = {});

template <typename T>
Var<T> linear(Var<T> x, Var<T> w, Var<T> b) {
  return add(matmul(x, w), b);
}

template <typename T>
Var<T> detach(Var<T> a) {
  return a.tape->constant(a.value());
}

template <typename T>
Var<T> operator+(Var<T> a, Var<T> b) {
  return add(a, b);
}
template <typename T>
Var<T> operator-(Var<T> a, Var<T> b) {
  return sub(a, b);
}
template <typename T>
Var<T> operator*(Var<T> a, Var<T> b) {
  return mul(a, b);
}

}  // namespace glyphsr::ops
