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

#include <doctest.h>

#include <cmath>
#include <numbers>

#include "glyphsr/errors.hpp"
#include "glyphsr/losses.hpp"
#include "support/gradcheck_suite.hpp"

using namespace glyphsr;
using glyphsr::testing::random_tensor;

namespace {

Var<double> vec(Tape<double>& tape, std::vector<double> v) {
  const int n = static_cast<int>(v.size());
  return tape.constant(Tensor<double>(Shape{n}, std::move(v)));
}

}  // namespace

TEST_CASE("flow matching loss") {
  Tape<double> tape;
  auto a = vec(tape, {0.1, 0.2, 0.3, 0.4});
  CHECK(flow_matching_loss(a, a).value().item() == 0.0);
  auto b = vec(tape, {0.2, 0.3, 0.4, 0.5});
  CHECK(flow_matching_loss(b, a).value().item() == doctest::Approx(0.01).epsilon(1e-12));
  CHECK_THROWS_AS(flow_matching_loss(a, vec(tape, {1.0})), ContractError);

  auto p = tape.leaf(Tensor<double>(Shape{4}, std::vector<double>{1, -2, 0.5, 3}));
  auto g = tape.backward(flow_matching_loss(p, a)).at(p.id);
  const std::vector<double> pv{1, -2, 0.5, 3}, tv{0.1, 0.2, 0.3, 0.4};
  for (std::size_t i = 0; i < 4; ++i) CHECK(g[i] == doctest::Approx(2 * (pv[i] - tv[i]) / 4));
}

TEST_CASE("reconstruction loss") {
  Tape<double> tape;
  auto a = vec(tape, {0.2, 0.4});
  FeatureFn<double> feat = [](Var<double> x) { return ops::scale(x, 3.0); };
  CHECK(rec_loss(a, a, 1.0, feat).total.value().item() == 0.0);
  // MSE 0.04, perceptual term 0.10 via a feature map with a known output.
  auto pred = vec(tape, {0.2});
  auto gt = vec(tape, {0.0});
  FeatureFn<double> fixed = [&](Var<double> x) {
    return x.id == pred.id ? vec(tape, {std::sqrt(0.10)}) : vec(tape, {0.0});
  };
  const auto r = rec_loss(pred, gt, 1.0, fixed);
  CHECK(r.mse.value().item() == doctest::Approx(0.04));
  CHECK(r.perceptual.value().item() == doctest::Approx(0.10));
  CHECK(r.total.value().item() == doctest::Approx(0.14));
  CHECK_FALSE(rec_loss<double>(pred, gt, 0.0, fixed).perceptual.valid());
}

TEST_CASE("adversarial losses") {
  Tape<double> tape;
  auto a = vec(tape, {0.3, -1.0, 2.0});
  CHECK(adv_g_loss(a, a).value().item() == doctest::Approx(std::numbers::ln2).epsilon(1e-12));
  CHECK(adv_d_loss(a, a).value().item() == doctest::Approx(std::numbers::ln2).epsilon(1e-12));
  auto b = vec(tape, {2.3, 1.0, 4.0});
  CHECK(adv_g_loss(a, b).value().item() == doctest::Approx(0.1269).epsilon(1e-4));
  CHECK(adv_d_loss(b, a).value().item() == doctest::Approx(0.1269).epsilon(1e-4));
  CHECK(adv_d_loss(a, b).value().item() == adv_g_loss(b, a).value().item());
  CHECK(adv_g_loss(a, vec(tape, {1e3, 1e3, 1e3})).value().item() < 1e-6);
  CHECK(adv_d_loss(a, vec(tape, {1e3, 1e3, 1e3})).value().item() > 0);
  CHECK_THROWS_AS(adv_g_loss(a, vec(tape, {0.0, NAN, 0.0})), NonFiniteError);
  CHECK_THROWS_AS(adv_d_loss(a, vec(tape, {0.0})), ContractError);

  RngStream rng(1);
  for (int i = 0; i < 50; ++i) {
    auto x = tape.constant(random_tensor(rng, Shape{5}, -20, 20));
    auto y = tape.constant(random_tensor(rng, Shape{5}, -20, 20));
    CHECK(adv_d_loss(x, y).value().item() == adv_g_loss(y, x).value().item());
    CHECK(adv_d_loss(x, y).value().item() >= 0);
    const auto r1 = ops::sigmoid(ops::sub(x, y)).value(), r2 = ops::sigmoid(ops::sub(y, x)).value();
    for (std::size_t k = 0; k < 5; ++k) CHECK(std::abs(1 - r1[k] - r2[k]) < 1e-6);
  }
}

TEST_CASE("fidelity-aware weight") {
  const LossWeights w;
  CHECK(faa_weight(FidelityWeight(1.0), w) == 0.02);
  CHECK(faa_weight(FidelityWeight(0.0), w) == 0.1);
  CHECK(faa_weight(FidelityWeight(0.5), w) == doctest::Approx(0.06).epsilon(1e-15));
  CHECK(faa_weight(FidelityWeight(0.0), w) / faa_weight(FidelityWeight(1.0), w) == doctest::Approx(5.0));
  double prev = 1;
  for (int i = 0; i <= 10; ++i) {
    const double v = faa_weight(FidelityWeight(i / 10.0), w);
    CHECK(v <= prev);
    CHECK(v >= 0.02);
    CHECK(v <= 0.1);
    prev = v;
  }
}

TEST_CASE("R1 regulariser") {
  Tape<double> tape;
  auto x = vec(tape, {0.5});
  RngStream rng(3);
  ScoreFn<double> constant = [&](Var<double>) { return vec(tape, {1.5}); };
  CHECK(r1_reg(constant, x, 0.5, rng).value().item() == 0.0);
  ScoreFn<double> identity = [](Var<double> v) { return ops::reshape(ops::sum(v), Shape{1}); };
  // Replay the perturbation the regulariser will draw.
  const double n = std::abs(RngStream(11).normal());
  RngStream draw(11);
  CHECK(r1_reg(identity, x, 0.2 / n, draw).value().item() == doctest::Approx(0.04).epsilon(1e-12));
  RngStream tiny(4);
  CHECK(r1_reg(identity, x, 1e-9, tiny).value().item() < 1e-16);
  CHECK(LossWeights{}.r1_sigma == doctest::Approx(std::sqrt(0.005)));
}

TEST_CASE("combined objectives") {
  Tape<double> tape;
  const LossWeights w;
  auto g = total_g_loss(vec(tape, {0.14}), vec(tape, {0.6931}), FidelityWeight(1.0), w);
  CHECK(g.value().item() == doctest::Approx(0.1539).epsilon(1e-4));
  auto d = total_d_loss(vec(tape, {0.6931}), vec(tape, {0.04}), 5.0);
  CHECK(d.value().item() == doctest::Approx(0.8931).epsilon(1e-12));
}

TEST_CASE("loss gradients match finite differences") {
  for (const auto& c : glyphsr::testing::loss_gradient_cases())
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      CAPTURE(c.name);
      CAPTURE(seed);
      CHECK(c.run(seed) < 1e-4);
    }
}
