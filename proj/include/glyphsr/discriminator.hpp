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

#include "glyphsr/glyphs.hpp"
#include "glyphsr/numerics/ops.hpp"
#include "glyphsr/params.hpp"

namespace glyphsr {

struct DiscriminatorConfig {
  int layers = 2;
  int dim = 64;
  int heads = 4;
  int patch = 2;
  int vocab = Vocab::kSize;
  int max_caption = 16 + Vocab::kTemplateOverhead;
  int t_embed_dim = 64;
  int mlp_ratio = 4;
  int conv_hidden = 32;

  int token_dim() const { return 3 * patch * patch; }
  void validate() const;

  friend bool operator==(const DiscriminatorConfig&, const DiscriminatorConfig&) = default;
};

template <typename T>
struct DiscriminatorParams {
  DiscriminatorConfig config;
  ParamStore<T> store;
};

template <typename T>
DiscriminatorParams<T> init_discriminator(const DiscriminatorConfig& cfg, std::uint64_t seed);

// Transformer trunk with self-attention over patches and cross-attention to
// the caption, then conv3x3 -> SiLU -> conv3x3 to one raw score per patch.
// Returns [gh * gw].
template <typename T>
Var<T> score_patches(Binder<T>& bind, const DiscriminatorConfig& cfg, Var<T> x, int gh, int gw, double t,
                     std::span<const int> caption);

template <typename T>
Tensor<T> predict_scores(const DiscriminatorParams<T>& params, const Tensor<T>& x, int gh, int gw, double t,
                         std::span<const int> caption);

// sigmoid(a - b), elementwise.
template <typename T>
Var<T> relativistic_prob(Var<T> score_a, Var<T> score_b);

}  // namespace glyphsr
