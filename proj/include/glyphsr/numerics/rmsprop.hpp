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

#include "glyphsr/numerics/tensor.hpp"

namespace glyphsr {

// Squared-gradient running average for one parameter. Momentum is fixed at
// zero; epsilon sits outside the square root.
template <typename T>
struct RmsPropState {
  Tensor<T> square_avg;
  T alpha = T(0.9);
  T eps = T(1e-8);
};

template <typename T>
RmsPropState<T> make_rmsprop_state(const Shape& shape, T alpha = T(0.9), T eps = T(1e-8)) {
  return RmsPropState<T>{Tensor<T>(shape), alpha, eps};
}

// state <- alpha*state + (1-alpha)*g^2;  param <- param - lr*g/(sqrt(state)+eps)
template <typename T>
void rmsprop_step(Tensor<T>& param, const Tensor<T>& grad, RmsPropState<T>& state, T lr) {
  require(param.shape() == grad.shape() && param.shape() == state.square_avg.shape(),
          "rmsprop_step: shape mismatch between param " + shape_str(param.shape()) + ", grad " + shape_str(grad.shape()) +
              " and state " + shape_str(state.square_avg.shape()));
  T* p = param.ptr();
  T* v = state.square_avg.ptr();
  const T* g = grad.ptr();
  for (std::size_t i = 0; i < param.size(); ++i) {
    v[i] = state.alpha * v[i] + (T(1) - state.alpha) * g[i] * g[i];
    p[i] -= lr * g[i] / (std::sqrt(v[i]) + state.eps);
  }
}

}  // namespace glyphsr
