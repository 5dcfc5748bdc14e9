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
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "glyphsr/datagen.hpp"
#include "glyphsr/discriminator.hpp"
#include "glyphsr/generator.hpp"
#include "glyphsr/losses.hpp"
#include "glyphsr/numerics/rmsprop.hpp"
#include "glyphsr/scheduler.hpp"

namespace glyphsr {

struct TrainConfig {
  Stage stage = Stage::kPretrain;
  int iterations = 5000;
  int batch_size = 8;
  int grad_accum = 4;
  double lr_g = 5e-5;
  double lr_d = 5e-6;
  double prompt_keep = 0.75;
  double f_min = 0.0;  // f ~ U[f_min, f_max]
  double f_max = 1.0;
  std::uint64_t seed = 0;
  int precision = 32;
  int prior_timestep = kDefaultPriorTimestep;
  double shift = 0.0;  // <= 0: fitted to the published anchors
  int perceptual_layers = 2;
  LossWeights weights;
  GeneratorConfig generator;
  DiscriminatorConfig discriminator;

  void validate() const;
  NoiseSchedule schedule() const;
};

// Flat "key = value" text; '#' starts a comment. Unknown keys are rejected.
TrainConfig parse_train_config(const std::string& text, const std::string& source = "<config>");
TrainConfig load_train_config(const std::filesystem::path& path);
// Applies one key/value pair; returns false for an unknown key.
bool apply_config_value(TrainConfig& cfg, const std::string& key, const std::string& value);
std::string format_train_config(const TrainConfig& cfg);
std::uint64_t config_digest(const TrainConfig& cfg);

// One training pair in token form. The LQ image is bilinearly upsampled to
// GT resolution before encoding.
template <typename T>
struct TrainingExample {
  Tensor<T> gt;
  Tensor<T> lq;
  std::string caption;
  int grid_h = 0;
  int grid_w = 0;
};

template <typename T>
std::vector<TrainingExample<T>> make_examples(const Dataset& ds, int patch);
template <typename T>
TrainingExample<T> make_example(const Image& gt, const Image& lq, const std::string& caption, int patch);

struct LossRecord {
  int iteration = 0;
  double flow = 0;  // stage 1
  double mse = 0;
  double perceptual = 0;
  double adv_g = 0;
  double adv_d = 0;
  double reg = 0;
  double f_mean = 0;

  friend bool operator==(const LossRecord&, const LossRecord&) = default;
};

template <typename T>
struct OptimizerSlots {
  std::vector<int> ids;
  std::vector<RmsPropState<T>> states;

  friend bool operator==(const OptimizerSlots& a, const OptimizerSlots& b) {
    if (a.ids != b.ids || a.states.size() != b.states.size()) return false;
    for (std::size_t i = 0; i < a.states.size(); ++i)
      if (!(a.states[i].square_avg == b.states[i].square_avg)) return false;
    return true;
  }
};

template <typename T>
struct TrainState {
  Stage stage = Stage::kPretrain;
  int iteration = 0;
  std::uint64_t seed = 0;
  OptimizerSlots<T> g_opt;
  OptimizerSlots<T> d_opt;
  // FNV digests of generator parameters outside the trainable set, taken at
  // the start of stage 2 (empty in stage 1).
  std::vector<std::uint64_t> frozen_digests;
  std::vector<LossRecord> history;

  friend bool operator==(const TrainState&, const TrainState&) = default;
};

template <typename T>
struct Session {
  TrainConfig config;
  GeneratorParams<T> gen;
  std::optional<DiscriminatorParams<T>> disc;
  TrainState<T> state;
};

// Fresh stage-1 session with a randomly initialised generator.
template <typename T>
Session<T> start_pretrain(const TrainConfig& cfg);

// Stage-2 session from stage-1 generator weights: control stream re-copied
// from the prior stream, LoRA reset, fresh discriminator.
template <typename T>
Session<T> start_faa(const TrainConfig& cfg, const GeneratorParams<T>& stage1);

// Per-item random draws of one FAA iteration.
struct FaaDraw {
  double f = 1.0;
  bool keep_prompt = true;
  PromptTemplate tpl = PromptTemplate::kTerse;
};
FaaDraw draw_faa_item(RngStream& rng, const TrainConfig& cfg);

template <typename T>
LossRecord pretrain_step(Session<T>& s, const std::vector<TrainingExample<T>>& data);
template <typename T>
LossRecord faa_train_step(Session<T>& s, const std::vector<TrainingExample<T>>& data);

// Throws FrozenDriftError naming the first generator parameter outside the
// stage-2 trainable set whose digest differs from the recorded one.
template <typename T>
void audit_frozen(const Session<T>& s);
template <typename T>
std::vector<std::uint64_t> frozen_digests(const GeneratorParams<T>& gen);

using ProgressFn = std::function<void(const LossRecord&)>;

// Steps until state.iteration == until (or cfg.iterations when until < 0).
template <typename T>
void run_training(Session<T>& s, const std::vector<TrainingExample<T>>& data, int until = -1,
                  const ProgressFn& progress = {});

// Checkpoint directory: manifest.json, weights.bin, state.bin.
template <typename T>
void save_checkpoint(const Session<T>& s, const std::filesystem::path& dir);
template <typename T>
Session<T> load_checkpoint(const std::filesystem::path& dir);
// Dtype and stage recorded in a checkpoint manifest.
nlohmann::json read_checkpoint_manifest(const std::filesystem::path& dir);

void write_loss_csv(const std::vector<LossRecord>& history, const std::filesystem::path& path);

template <typename T>
std::uint64_t tensor_digest(const Tensor<T>& t);

}  // namespace glyphsr
