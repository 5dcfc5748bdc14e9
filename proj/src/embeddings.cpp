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

#include "glyphsr/embeddings.hpp"

#include <cmath>

#include "glyphsr/errors.hpp"

namespace glyphsr {

template <typename T>
Tensor<T> timestep_embedding(double t, int dim) {
  require(dim >= 2 && dim % 2 == 0, "timestep_embedding: dim must be even");
  const int half = dim / 2;
  Tensor<T> out(Shape{1, dim});
  for (int i = 0; i < half; ++i) {
    const double freq = std::exp(-std::log(10000.0) * i / half);
    out[static_cast<std::size_t>(i)] = static_cast<T>(std::cos(1000.0 * t * freq));
    out[static_cast<std::size_t>(half + i)] = static_cast<T>(std::sin(1000.0 * t * freq));
  }
  return out;
}

template <typename T>
Tensor<T> grid_positions(int gh, int gw, int dim) {
  require(dim % 4 == 0, "grid_positions: dim must be a multiple of 4");
  const int quarter = dim / 4;
  Tensor<T> out(Shape{gh * gw, dim});
  for (int y = 0; y < gh; ++y)
    for (int x = 0; x < gw; ++x) {
      T* row = out.ptr() + static_cast<std::size_t>(y * gw + x) * dim;
      for (int i = 0; i < quarter; ++i) {
        const double freq = std::exp(-std::log(10000.0) * i / quarter);
        row[i] = static_cast<T>(std::sin(y * freq));
        row[quarter + i] = static_cast<T>(std::cos(y * freq));
        row[2 * quarter + i] = static_cast<T>(std::sin(x * freq));
        row[3 * quarter + i] = static_cast<T>(std::cos(x * freq));
      }
    }
  return out;
}

template Tensor<float> timestep_embedding(double, int);
template Tensor<double> timestep_embedding(double, int);
template Tensor<float> grid_positions(int, int, int);
template Tensor<double> grid_positions(int, int, int);

}  // namespace glyphsr
