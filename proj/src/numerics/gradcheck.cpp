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

#include "glyphsr/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "glyphsr/numerics/rng.hpp"

namespace glyphsr {

namespace {

double evaluate(const ScalarFn& f, const Tensor<double>& point) {
  Tape<double> tape;
  const auto x = tape.constant(point);
  return f(tape, x).value().item();
}

std::string first_non_finite_op(const Tape<double>& tape) {
  for (std::size_t id = 0; id < tape.size(); ++id)
    if (!tape.value(static_cast<int>(id)).all_finite()) return tape.op_name(static_cast<int>(id));
  return "none";
}

}  // namespace

double finite_diff_check(const ScalarFn& f, const Tensor<double>& point, const GradCheckOptions& opts) {
  require(opts.h > 0, "finite_diff_check: h must be positive");
  Tape<double> tape;
  const auto x = tape.leaf(point, true);
  const auto y = f(tape, x);
  if (!y.value().all_finite())
    throw NonFiniteError(opts.label + ": non-finite function value (first non-finite op: " + first_non_finite_op(tape) + ")");
  const auto grads = tape.backward(y);
  const Tensor<double>& analytic = grads.at(x.id);
  if (!analytic.all_finite())
    throw NonFiniteError(opts.label + ": non-finite analytic gradient (first non-finite op: " + first_non_finite_op(tape) + ")");

  std::vector<std::size_t> coords(point.size());
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (opts.sample && *opts.sample < coords.size()) {
    RngStream rng(opts.seed);
    for (std::size_t i = 0; i < *opts.sample; ++i) {
      const auto j = i + rng.next_u64() % (coords.size() - i);
      std::swap(coords[i], coords[j]);
    }
    coords.resize(*opts.sample);
  }

  double worst = 0.0;
  Tensor<double> probe = point;
  for (std::size_t i : coords) {
    const double orig = probe[i];
    probe[i] = orig + opts.h;
    const double fp = evaluate(f, probe);
    probe[i] = orig - opts.h;
    const double fm = evaluate(f, probe);
    probe[i] = orig;
    const double numeric = (fp - fm) / (2.0 * opts.h);
    if (!std::isfinite(numeric))
      throw NonFiniteError(opts.label + ": non-finite central difference at coordinate " + std::to_string(i));
    const double err = std::abs(analytic[i] - numeric) / std::max(1.0, std::abs(analytic[i]));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace glyphsr
