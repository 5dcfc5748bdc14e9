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

#include "glyphsr/losses.hpp"

#include "glyphsr/errors.hpp"

namespace glyphsr {

using namespace ops;

void LossWeights::validate() const {
  require(lambda1 >= 0, "LossWeights: lambda1 must be non-negative");
  require(lambda_min > 0 && lambda_min <= lambda_max, "LossWeights: need 0 < lambda_min <= lambda_max");
  require(lambda2 >= 0, "LossWeights: lambda2 must be non-negative");
  require(r1_sigma > 0, "LossWeights: r1_sigma must be positive");
}

template <typename T>
Var<T> flow_matching_loss(Var<T> v_pred, Var<T> v_target) {
  require(v_pred.shape() == v_target.shape(), "flow_matching_loss: shape mismatch " + shape_str(v_pred.shape()) +
                                                  " vs " + shape_str(v_target.shape()));
  return mse(v_pred, v_target);
}

template <typename T>
RecLoss<T> rec_loss(Var<T> pred, Var<T> gt, double lambda1, const FeatureFn<T>& features) {
  require(pred.shape() == gt.shape(), "rec_loss: shape mismatch " + shape_str(pred.shape()) + " vs " +
                                          shape_str(gt.shape()));
  RecLoss<T> out;
  out.mse = mse(pred, gt);
  out.total = out.mse;
  if (lambda1 != 0.0 && features) {
    out.perceptual = mse(features(pred), features(gt));
    out.total = add(out.mse, scale(out.perceptual, T(lambda1)));
  }
  return out;
}

namespace {

template <typename T>
void check_scores(Var<T> a, Var<T> b, const char* who) {
  require(a.shape() == b.shape(), std::string(who) + ": score grids differ in shape");
  if (!a.value().all_finite() || !b.value().all_finite())
    throw NonFiniteError(std::string(who) + ": non-finite discriminator scores");
}

// mean(0.5 * (-log R(a, b) - log(1 - R(b, a)))); R(x, y) = sigmoid(x - y).
template <typename T>
Var<T> pair_loss(Var<T> a, Var<T> b) {
  Var<T> r_ab = sigmoid(sub(a, b));
  Var<T> one_minus_r_ba = add_scalar(scale(sigmoid(sub(b, a)), T(-1)), T(1));
  Var<T> terms = add(log(r_ab, T(kLogFloor)), log(one_minus_r_ba, T(kLogFloor)));
  return scale(mean(terms), T(-0.5));
}

}  // namespace

template <typename T>
Var<T> adv_g_loss(Var<T> d_real, Var<T> d_fake) {
  check_scores(d_real, d_fake, "adv_g_loss");
  return pair_loss(d_fake, d_real);
}

template <typename T>
Var<T> adv_d_loss(Var<T> d_real, Var<T> d_fake) {
  check_scores(d_real, d_fake, "adv_d_loss");
  return pair_loss(d_real, d_fake);
}

double faa_weight(FidelityWeight f, double lambda_min, double lambda_max) {
  return f.value() * lambda_min + (1.0 - f.value()) * lambda_max;
}

template <typename T>
Var<T> r1_reg(const ScoreFn<T>& score, Var<T> x_real, double sigma, RngStream& rng) {
  require(sigma > 0, "r1_reg: sigma must be positive");
  Tensor<T> noise(x_real.shape(), rng.normals<T>(x_real.size(), sigma));
  Var<T> perturbed = add(x_real, x_real.tape->constant(std::move(noise)));
  return mse(score(x_real), score(perturbed));
}

template <typename T>
Var<T> total_g_loss(Var<T> rec, Var<T> adv_g, FidelityWeight f, const LossWeights& w) {
  return add(rec, scale(adv_g, T(faa_weight(f, w))));
}

template <typename T>
Var<T> total_d_loss(Var<T> adv_d, Var<T> reg, double lambda2) {
  return add(adv_d, scale(reg, T(lambda2)));
}

#define GLYPHSR_INSTANTIATE_LOSSES(T)                                                  \
  template Var<T> flow_matching_loss<T>(Var<T>, Var<T>);                               \
  template RecLoss<T> rec_loss<T>(Var<T>, Var<T>, double, const FeatureFn<T>&);        \
  template Var<T> adv_g_loss<T>(Var<T>, Var<T>);                                       \
  template Var<T> adv_d_loss<T>(Var<T>, Var<T>);                                       \
  template Var<T> r1_reg<T>(const ScoreFn<T>&, Var<T>, double, RngStream&);            \
  template Var<T> total_g_loss<T>(Var<T>, Var<T>, FidelityWeight, const LossWeights&); \
  template Var<T> total_d_loss<T>(Var<T>, Var<T>, double);

GLYPHSR_INSTANTIATE_LOSSES(float)
GLYPHSR_INSTANTIATE_LOSSES(double)

}  // namespace glyphsr
