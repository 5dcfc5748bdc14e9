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

#include "glyphsr/scheduler.hpp"

#include <algorithm>
#include <boost/math/tools/minima.hpp>
#include <cmath>
#include <limits>

namespace glyphsr {

double shift_map(double u, double shift) { return shift * u / (1.0 + (shift - 1.0) * u); }

double inverse_shift_map(double t, double shift) { return t / (shift - (shift - 1.0) * t); }

double timestep_to_t(int timestep, double shift) {
  require(timestep >= 0 && timestep < kNumTimesteps, "timestep_to_t: timestep must lie in [0, 999]");
  require(shift > 1.0, "timestep_to_t: shift must exceed 1");
  const double u = 1.0 - static_cast<double>(timestep) / kNumTimesteps;
  return shift_map(u, shift);
}

double fit_shift(std::span<const TimestepAnchor> points) {
  if (points.empty()) throw FitError("fit_shift: no anchor points");
  for (const auto& p : points) {
    require(p.timestep >= 0 && p.timestep < kNumTimesteps, "fit_shift: anchor timestep out of range");
    require(p.t > 0.0 && p.t < 1.0, "fit_shift: anchor t must lie in (0, 1)");
  }
  auto u_of = [](const TimestepAnchor& p) { return 1.0 - static_cast<double>(p.timestep) / kNumTimesteps; };

  if (points.size() == 1) {
    const double u = u_of(points[0]);
    if (u >= 1.0) throw FitError("fit_shift: timestep 0 maps to t=1 for every shift");
    const double t = points[0].t;
    return t * (1.0 - u) / (u * (1.0 - t));
  }

  const double u0 = u_of(points[0]);
  const bool degenerate =
      std::all_of(points.begin(), points.end(), [&](const TimestepAnchor& p) { return u_of(p) == u0; }) ||
      std::all_of(points.begin(), points.end(), [&](const TimestepAnchor& p) { return u_of(p) >= 1.0; });
  if (degenerate) throw FitError("fit_shift: all anchors share the same timestep; shift is not identifiable");

  auto sse = [&](double s) {
    double acc = 0.0;
    for (const auto& p : points) {
      const double r = shift_map(u_of(p), s) - p.t;
      acc += r * r;
    }
    return acc;
  };

  // Coarse log-spaced bracket, then Brent refinement.
  constexpr double lo = 1.0 + 1e-9, hi = 1e3;
  double best = lo, best_val = std::numeric_limits<double>::infinity();
  constexpr int kCoarse = 2000;
  for (int i = 0; i <= kCoarse; ++i) {
    const double s = lo * std::pow(hi / lo, static_cast<double>(i) / kCoarse);
    const double v = sse(s);
    if (v < best_val) {
      best_val = v;
      best = s;
    }
  }
  const double step = std::pow(hi / lo, 1.0 / kCoarse);
  const auto [s, v] = boost::math::tools::brent_find_minima(sse, std::max(lo, best / step), std::min(hi, best * step),
                                                            std::numeric_limits<double>::digits / 2);
  (void)v;
  return s;
}

NoiseSchedule NoiseSchedule::make(double shift, int prior_timestep) {
  require(shift > 1.0, "NoiseSchedule: shift must exceed 1");
  NoiseSchedule s;
  s.shift = shift;
  s.prior_timestep = prior_timestep;
  s.table.resize(kNumTimesteps);
  for (int tau = 0; tau < kNumTimesteps; ++tau) s.table[static_cast<std::size_t>(tau)] = timestep_to_t(tau, shift);
  s.t_p = s.t_at(prior_timestep);
  return s;
}

NoiseSchedule NoiseSchedule::fitted(int prior_timestep) { return make(fit_shift(kPublishedAnchors), prior_timestep); }

double NoiseSchedule::t_at(int timestep) const {
  require(timestep >= 0 && timestep < kNumTimesteps, "NoiseSchedule::t_at: timestep must lie in [0, 999]");
  return table[static_cast<std::size_t>(timestep)];
}

FidelityWeight::FidelityWeight(double f) : f_(f) {
  require(f >= 0.0 && f <= 1.0, "FidelityWeight: f must lie in [0, 1]");
}

double control_t(FidelityWeight f, double t_p) {
  require(t_p > 0.0 && t_p < 1.0, "control_t: t_p must lie in (0, 1)");
  return (1.0 - f.value()) * t_p;
}

// The affine helpers evaluate in double and round once, keeping the
// interpolate/one-step round trip within a few ulps in 32-bit.
template <typename T>
Tensor<T> interpolate(const Tensor<T>& x0, const Tensor<T>& eps, double t) {
  require(x0.shape() == eps.shape(), "interpolate: x0 and eps shapes differ");
  require(t >= 0.0 && t <= 1.0, "interpolate: t must lie in [0, 1]");
  if (t == 0.0) return x0;
  if (t == 1.0) return eps;
  Tensor<T> out(x0.shape());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<T>((1.0 - t) * static_cast<double>(x0[i]) + t * static_cast<double>(eps[i]));
  return out;
}

template <typename T>
Tensor<T> velocity_target(const Tensor<T>& x0, const Tensor<T>& eps) {
  require(x0.shape() == eps.shape(), "velocity_target: shape mismatch");
  Tensor<T> out(x0.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = eps[i] - x0[i];
  return out;
}

template <typename T>
Tensor<T> one_step_update(const Tensor<T>& x_tp, const Tensor<T>& v, double t_p) {
  require(x_tp.shape() == v.shape(), "one_step_update: shape mismatch");
  Tensor<T> out(x_tp.shape());
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<T>(static_cast<double>(x_tp[i]) + (0.0 - t_p) * static_cast<double>(v[i]));
  return out;
}

std::vector<double> descending_grid(double t_s, int n_steps, double shift, GridSpacing spacing) {
  require(n_steps >= 1, "descending_grid: need at least one step");
  require(t_s > 0.0 && t_s <= 1.0, "descending_grid: t_s must lie in (0, 1]");
  std::vector<double> grid(static_cast<std::size_t>(n_steps) + 1);
  const double u_s = inverse_shift_map(t_s, shift);
  for (int k = 0; k <= n_steps; ++k) {
    const double frac = 1.0 - static_cast<double>(k) / n_steps;
    grid[static_cast<std::size_t>(k)] =
        spacing == GridSpacing::kUniformT ? t_s * frac : shift_map(u_s * frac, shift);
  }
  grid.front() = t_s;
  grid.back() = 0.0;
  return grid;
}

template <typename T>
Tensor<T> euler_denoise_from(const VelocityFn<T>& model, const Tensor<T>& x_ts, double t_s, int n_steps, double shift,
                             GridSpacing spacing) {
  require(n_steps >= 1, "euler_denoise_from: n_steps must be at least 1");
  require(t_s >= 0.0 && t_s <= 1.0, "euler_denoise_from: t_s must lie in [0, 1]");
  if (t_s == 0.0) return x_ts;
  const auto grid = descending_grid(t_s, n_steps, shift, spacing);
  Tensor<T> x = x_ts;
  for (int k = 0; k < n_steps; ++k) {
    const double t = grid[static_cast<std::size_t>(k)];
    const double dt = grid[static_cast<std::size_t>(k) + 1] - t;
    const Tensor<T> v = model(x, t);
    require(v.shape() == x.shape(), "euler_denoise_from: model returned a velocity of the wrong shape");
    for (std::size_t i = 0; i < x.size(); ++i)
      x[i] = static_cast<T>(static_cast<double>(x[i]) + dt * static_cast<double>(v[i]));
  }
  return x;
}

#define GLYPHSR_INSTANTIATE_SCHED(T)                                                           \
  template Tensor<T> interpolate(const Tensor<T>&, const Tensor<T>&, double);                  \
  template Tensor<T> velocity_target(const Tensor<T>&, const Tensor<T>&);                      \
  template Tensor<T> one_step_update(const Tensor<T>&, const Tensor<T>&, double);              \
  template Tensor<T> euler_denoise_from(const VelocityFn<T>&, const Tensor<T>&, double, int, double, GridSpacing);

GLYPHSR_INSTANTIATE_SCHED(float)
GLYPHSR_INSTANTIATE_SCHED(double)

}  // namespace glyphsr
