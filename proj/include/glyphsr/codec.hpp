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

#include "glyphsr/image.hpp"
#include "glyphsr/numerics/tensor.hpp"

namespace glyphsr {

// Token grid standing in for a VAE latent: one token per patch.
template <typename T>
struct LatentGrid {
  int grid_h = 0;
  int grid_w = 0;
  Tensor<T> tokens;  // [grid_h * grid_w, 3 * patch * patch]

  int token_dim() const { return tokens.dim(1); }
  int num_tokens() const { return grid_h * grid_w; }
};

// Identity patch codec. Token layout within a patch is (row, col, channel).
template <typename T>
LatentGrid<T> encode(const Image& img, int patch);

// Exact inverse of encode followed by clamping to [0, 1].
template <typename T>
Image decode(const LatentGrid<T>& latent, int patch);

// Inverse of encode without clamping.
template <typename T>
Image decode_unclamped(const LatentGrid<T>& latent, int patch);

}  // namespace glyphsr
