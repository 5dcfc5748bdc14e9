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
#include <string>

#include "glyphsr/generator.hpp"
#include "glyphsr/image.hpp"
#include "glyphsr/scheduler.hpp"

namespace glyphsr {

struct RestoreOptions {
  double fidelity = 1.0;
  std::string prompt;  // raw caption; empty means no prompt
  PromptTemplate tpl = PromptTemplate::kTerse;
  std::uint64_t noise_seed = 0;
};

// One-step 4x restoration of an LQ image. The input is bilinearly upsampled,
// encoded, noised to t_p (prior stream) and t_c (control stream), and
// x_tp - t_p * v is decoded with clamping.
template <typename T>
Image restore(const GeneratorParams<T>& gen, const NoiseSchedule& sched, const Image& lq, const RestoreOptions& opts);

}  // namespace glyphsr
