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
#include <string>
#include <vector>

#include <json.hpp>

#include "glyphsr/datagen.hpp"
#include "glyphsr/generator.hpp"
#include "glyphsr/scheduler.hpp"

namespace glyphsr {

enum class PromptMode { kWith, kWithout, kBoth };

const char* prompt_mode_name(PromptMode m);
PromptMode parse_prompt_mode(const std::string& s);

// One row per item per setting. `setting` is t_s for the noise study and the
// fidelity weight otherwise; `variant` is gt / lq (noise study), sr or
// bilinear. mse_lq is NaN where it does not apply.
struct MetricRow {
  std::string study;
  std::string id;
  std::string variant;
  double setting = 0;
  bool prompt = false;
  double psnr = 0;
  double ssim = 0;
  double ned = 0;
  double mse_lq = 0;
  std::string ocr;
  std::string caption;
};

struct MetricAggregate {
  std::string study;
  std::string variant;
  double setting = 0;
  bool prompt = false;
  int count = 0;
  double psnr = 0;
  double ssim = 0;
  double ned = 0;
  double mse_lq = 0;
};

struct MetricReport {
  nlohmann::json config;  // echo of the settings that produced the rows
  std::vector<MetricRow> rows;
};

// Means grouped by (study, variant, setting, prompt), in first-seen order.
std::vector<MetricAggregate> aggregate(const MetricReport& report);
// Aggregate matching the key; throws ContractError when absent.
MetricAggregate find_aggregate(const std::vector<MetricAggregate>& aggs, const std::string& variant, double setting,
                               bool prompt);

// Appends rows of `b` to `a` and merges the config echoes.
void merge_into(MetricReport& a, const MetricReport& b);

// <stem>.csv (rows) and <stem>.json (config, aggregates, unavailable metric slots).
void write_report(const MetricReport& report, const std::filesystem::path& dir, const std::string& stem);

struct NoiseStudyOptions {
  std::vector<double> t_s{0.90, 0.29};
  int n_steps = 20;
  PromptMode prompt = PromptMode::kBoth;
  std::uint64_t seed = 0;
};

// For every t_s and scene: noise the GT and the upsampled LQ to t_s, Euler
// denoise with the stage-1 model, and score against the clean input.
template <typename T>
MetricReport noise_study(const GeneratorParams<T>& gen, const NoiseSchedule& sched, const std::vector<DatasetItem>& scenes,
                         const LatticeSpec& lattice, const NoiseStudyOptions& opts);

struct SweepOptions {
  std::vector<double> fidelities{1.0, 0.5, 0.0};
  PromptMode prompt = PromptMode::kBoth;
  std::uint64_t seed = 0;
};

// One-step restoration at every fidelity weight, scored against GT and the
// bilinearly upsampled LQ.
template <typename T>
MetricReport fidelity_sweep(const GeneratorParams<T>& gen, const NoiseSchedule& sched,
                            const std::vector<DatasetItem>& scenes, const LatticeSpec& lattice, const SweepOptions& opts);

// Bilinear x4 rows (variant "bilinear", setting 1).
MetricReport bilinear_baseline(const std::vector<DatasetItem>& scenes, const LatticeSpec& lattice);

}  // namespace glyphsr
