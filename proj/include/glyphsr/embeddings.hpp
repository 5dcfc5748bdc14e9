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

// Sinusoidal embedding of 1000 * t, shape [1, dim]; first half cos, second half sin.
template <typename T>
Tensor<T> timestep_embedding(double t, int dim);

// Fixed 2-D sin/cos positions [gh * gw, dim]; half the channels encode the
// row, half the column. dim must be a multiple of 4.
template <typename T>
Tensor<T> grid_positions(int gh, int gw, int dim);

}  // namespace glyphsr
