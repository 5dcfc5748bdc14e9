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

#include <cmath>
#include <functional>

#include "glyphsr/numerics/ops.hpp"
#include "glyphsr/numerics/rng.hpp"
#include "glyphsr/scheduler.hpp"

namespace glyphsr {

inline constexpr double kLogFloor = 1e-7;

struct LossWeights {
  double lambda1 = 1.0;     // perceptual term
  double lambda_min = 0.02;  // adversarial weight at f = 1
  double lambda_max = 0.1;   // adversarial weight at f = 0
  double lambda2 = 5.0;      // R1 regulariser
  // Standard deviation of the R1 perturbation (variance 0.005).
  double r1_sigma = std::sqrt(0.005);

  void validate() const;
};

template <typename T>
Var<T> flow_matching_loss(Var<T> v_pred, Var<T> v_target);

template <typename T>
using FeatureFn = std::function<Var<T>(Var<T>)>;

template <typename T>
struct RecLoss {
  Var<T> total;
  Var<T> mse;
  Var<T> perceptual;  // invalid when lambda1 == 0 or no feature map is given
};

// MSE(pred, gt) + lambda1 * MSE(features(pred), features(gt)).
template <typename T>
RecLoss<T> rec_loss(Var<T> pred, Var<T> gt, double lambda1, const FeatureFn<T>& features);

// Mean over patches of the mean of the two relativistic log terms.
template <typename T>
Var<T> adv_g_loss(Var<T> d_real, Var<T> d_fake);
template <typename T>
Var<T> adv_d_loss(Var<T> d_real, Var<T> d_fake);

double faa_weight(FidelityWeight f, double lambda_min, double lambda_max);
inline double faa_weight(FidelityWeight f, const LossWeights& w) { return faa_weight(f, w.lambda_min, w.lambda_max); }

template <typename T>
using ScoreFn = std::function<Var<T>(Var<T>)>;

// Mean squared difference between the scores of x_real and of x_real plus
// N(0, sigma^2) noise drawn from rng.
template <typename T>
Var<T> r1_reg(const ScoreFn<T>& score, Var<T> x_real, double sigma, RngStream& rng);

template <typename T>
Var<T> total_g_loss(Var<T> rec, Var<T> adv_g, FidelityWeight f, const LossWeights& w);
template <typename T>
Var<T> total_d_loss(Var<T> adv_d, Var<T> reg, double lambda2);

}  // namespace glyphsr
