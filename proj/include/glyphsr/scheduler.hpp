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

#include <array>
#include <functional>
#include <span>
#include <utility>
#include <vector>

#include "glyphsr/numerics/tensor.hpp"

namespace glyphsr {

inline constexpr int kNumTimesteps = 1000;

struct TimestepAnchor {
  int timestep;
  double t;
};

// (timestep, t) pairs published for the base model's scheduler.
inline constexpr std::array<TimestepAnchor, 3> kPublishedAnchors{{{250, 0.87}, {500, 0.69}, {750, 0.43}}};
inline constexpr int kDefaultPriorTimestep = 750;

// t(u) = s*u / (1 + (s-1)*u)
double shift_map(double u, double shift);
// Inverse of shift_map in u.
double inverse_shift_map(double t, double shift);

// u = 1 - timestep/1000; continuous, strictly decreasing in the timestep.
double timestep_to_t(int timestep, double shift);

// Least-squares shift over the given anchors. One anchor is inverted in
// closed form; two or more anchors that share a single u are rejected.
double fit_shift(std::span<const TimestepAnchor> points);

// Discrete timestep -> t table plus the prior noise level t_p.
struct NoiseSchedule {
  double shift = 1.0;
  int prior_timestep = kDefaultPriorTimestep;
  double t_p = 0.0;
  std::vector<double> table;  // kNumTimesteps entries

  static NoiseSchedule make(double shift, int prior_timestep = kDefaultPriorTimestep);
  // Shift fitted to kPublishedAnchors.
  static NoiseSchedule fitted(int prior_timestep = kDefaultPriorTimestep);

  double t_at(int timestep) const;
};

class FidelityWeight {
 public:
  explicit FidelityWeight(double f);
  double value() const noexcept { return f_; }

 private:
  double f_;
};

// t_c = (1 - f) * t_p
double control_t(FidelityWeight f, double t_p);

// (1 - t) * x0 + t * eps. Endpoints return an input exactly.
template <typename T>
Tensor<T> interpolate(const Tensor<T>& x0, const Tensor<T>& eps, double t);

// eps - x0
template <typename T>
Tensor<T> velocity_target(const Tensor<T>& x0, const Tensor<T>& eps);

// x_tp + (0 - t_p) * v
template <typename T>
Tensor<T> one_step_update(const Tensor<T>& x_tp, const Tensor<T>& v, double t_p);

enum class GridSpacing {
  kUniformTimestep,  // equal steps in the discrete timestep, mapped through the schedule
  kUniformT,         // equal steps in t
};

// Descending grid t_s = g[0] > ... > g[n] = 0.
std::vector<double> descending_grid(double t_s, int n_steps, double shift, GridSpacing spacing);

template <typename T>
using VelocityFn = std::function<Tensor<T>(const Tensor<T>& x, double t)>;

// Euler integration of dx/dt = v from t_s down to 0. t_s == 0 returns x_ts
// without evaluating the model.
template <typename T>
Tensor<T> euler_denoise_from(const VelocityFn<T>& model, const Tensor<T>& x_ts, double t_s, int n_steps, double shift,
                             GridSpacing spacing = GridSpacing::kUniformTimestep);

}  // namespace glyphsr
