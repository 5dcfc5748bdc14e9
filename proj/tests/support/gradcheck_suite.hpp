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
#include <functional>
#include <string>
#include <vector>

#include "glyphsr/numerics/gradcheck.hpp"
#include "glyphsr/numerics/rng.hpp"

namespace glyphsr::testing {

// One gradient-oracle case: given a seed, builds random inputs and returns
// the max relative error reported by finite_diff_check.
struct GradCase {
  std::string name;
  std::function<double(std::uint64_t seed)> run;
};

std::vector<GradCase> primitive_gradient_cases();
std::vector<GradCase> loss_gradient_cases();
// Generator and discriminator forwards, differentiated wrt inputs and every parameter.
std::vector<GradCase> model_gradient_cases();

Tensor<double> random_tensor(RngStream& rng, Shape shape, double lo = -1.0, double hi = 1.0);

// Splits a flat leaf into consecutive pieces with the given shapes.
std::vector<Var<double>> unpack(Var<double> flat, const std::vector<Shape>& shapes);
std::size_t packed_size(const std::vector<Shape>& shapes);

}  // namespace glyphsr::testing
