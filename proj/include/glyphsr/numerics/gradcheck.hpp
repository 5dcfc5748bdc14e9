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
#include <optional>
#include <string>

#include "glyphsr/numerics/tape.hpp"

namespace glyphsr {

// Scalar-valued function of one tensor, built on the supplied tape.
using ScalarFn = std::function<Var<double>(Tape<double>&, Var<double>)>;

struct GradCheckOptions {
  double h = 1e-5;
  // Checks a random subset of this many coordinates instead of all of them.
  std::optional<std::size_t> sample;
  std::uint64_t seed = 0;
  std::string label = "f";
};

// max over coordinates of |analytic - central difference| / max(1, |analytic|).
// Throws NonFiniteError naming the label (and the first non-finite op on the
// tape, if any) when a gradient is not finite.
double finite_diff_check(const ScalarFn& f, const Tensor<double>& point, const GradCheckOptions& opts = {});

}  // namespace glyphsr
