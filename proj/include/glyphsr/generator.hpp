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

#include "glyphsr/glyphs.hpp"
#include "glyphsr/numerics/ops.hpp"
#include "glyphsr/params.hpp"

namespace glyphsr {

struct GeneratorConfig {
  int layers = 4;
  int dim = 64;
  int heads = 4;
  int patch = 2;
  int vocab = Vocab::kSize;
  int max_caption = 16 + Vocab::kTemplateOverhead;
  int lora_rank = 8;
  double lora_alpha = 8.0;
  int t_embed_dim = 64;
  int mlp_ratio = 4;

  int token_dim() const { return 3 * patch * patch; }
  double lora_scale() const { return lora_alpha / lora_rank; }
  void validate() const;

  friend bool operator==(const GeneratorConfig&, const GeneratorConfig&) = default;
};

enum class Stage { kPretrain, kFaa };

template <typename T>
struct GeneratorParams {
  GeneratorConfig config;
  ParamStore<T> store;
};

// Random init. The control stream starts as a copy of the prior stream and
// every LoRA B is zero.
template <typename T>
GeneratorParams<T> init_generator(const GeneratorConfig& cfg, std::uint64_t seed);

// Re-copies prior-stream weights into the control stream and redraws the
// LoRA pairs (A random, B zero). Used when entering stage 2.
template <typename T>
void reset_control_stream(GeneratorParams<T>& params, std::uint64_t seed);

// Copies every prior-stream weight onto its control counterpart. Stage 1
// calls this after each update so the control stream mirrors the prior.
template <typename T>
void sync_control_stream(GeneratorParams<T>& params);

// Parameter ids updated in the given stage, sorted ascending. Stage 1: all
// but the control stream; stage 2: the LoRA pairs.
template <typename T>
std::vector<int> trainable_parameters(const GeneratorParams<T>& params, Stage stage);

// Per-parameter mask derived from trainable_parameters.
template <typename T>
std::vector<bool> trainable_mask(const GeneratorParams<T>& params, Stage stage);

// Names of the control-stream linears carrying LoRA, as (prefix, in, out).
struct LinearShape {
  std::string prefix;
  int in = 0;
  int out = 0;
};
std::vector<LinearShape> control_linears(const GeneratorConfig& cfg);

// Intermediate values for inspection; filled when passed to a forward.
template <typename T>
struct ForwardTrace {
  // Per layer: keys and values of the prior and control streams.
  std::vector<Tensor<T>> prior_k, prior_v, control_k, control_v;
};

// Three-stream forward. x_tp and x_tc are token grids [gh*gw, token_dim];
// caption is padded to max_caption. Returns the velocity [gh*gw, token_dim]
// read from the prior stream.
template <typename T>
Var<T> forward_velocity(Binder<T>& bind, const GeneratorConfig& cfg, Var<T> x_tp, Var<T> x_tc, int gh, int gw,
                        double t_p, double t_c, std::span<const int> caption, ForwardTrace<T>* trace = nullptr);

// Text and prior streams only.
template <typename T>
Var<T> forward_pretrain(Binder<T>& bind, const GeneratorConfig& cfg, Var<T> x_t, int gh, int gw, double t,
                        std::span<const int> caption);

// Prior-stream activations after the first `layers` blocks, evaluated at t = 0
// with an empty caption. Serves as the frozen perceptual feature space.
template <typename T>
Var<T> prior_features(Binder<T>& bind, const GeneratorConfig& cfg, Var<T> x, int gh, int gw, int layers = 2);

// Value-only conveniences (no gradients recorded).
template <typename T>
Tensor<T> predict_velocity(const GeneratorParams<T>& params, const Tensor<T>& x_tp, const Tensor<T>& x_tc, int gh,
                           int gw, double t_p, double t_c, std::span<const int> caption);
template <typename T>
Tensor<T> predict_pretrain(const GeneratorParams<T>& params, const Tensor<T>& x_t, int gh, int gw, double t,
                           std::span<const int> caption);

}  // namespace glyphsr
