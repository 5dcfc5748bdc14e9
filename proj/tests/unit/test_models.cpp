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

#include "glyphsr/discriminator.hpp"
#include "glyphsr/errors.hpp"
#include "glyphsr/generator.hpp"
#include "support/gradcheck_suite.hpp"

using namespace glyphsr;
using glyphsr::testing::random_tensor;

namespace {

GeneratorConfig small_config() {
  GeneratorConfig cfg;
  cfg.layers = 2;
  cfg.dim = 16;
  cfg.heads = 2;
  cfg.patch = 2;
  cfg.max_caption = 6;
  cfg.lora_rank = 4;
  cfg.lora_alpha = 4;
  cfg.t_embed_dim = 8;
  return cfg;
}

// Stand-in for a trained stage-1 model: every non-LoRA weight random, then
// the control stream reset as on entry to stage 2.
GeneratorParams<double> trained_like(const GeneratorConfig& cfg, std::uint64_t seed) {
  auto p = init_generator<double>(cfg, seed);
  RngStream rng(seed + 100);
  for (int i = 0; i < p.store.size(); ++i)
    p.store.value(i) = random_tensor(rng, p.store.value(i).shape(), -0.4, 0.4);
  reset_control_stream(p, seed);
  return p;
}

const std::vector<int> kCaption{Vocab::kTemplateSign, Vocab::kTemplateReads, 5, 9, Vocab::kPad, Vocab::kPad};

}  // namespace

TEST_CASE("generator init is deterministic and control mirrors prior") {
  const auto cfg = small_config();
  const auto a = init_generator<double>(cfg, 3), b = init_generator<double>(cfg, 3);
  CHECK(a.store == b.store);
  CHECK_FALSE(a.store == init_generator<double>(cfg, 4).store);
  int compared = 0;
  for (int i = 0; i < a.store.size(); ++i) {
    const auto& n = a.store.name(i);
    if (n.starts_with("prior.")) {
      CHECK(a.store["control." + n.substr(6)] == a.store.value(i));
      ++compared;
    }
    if (n.ends_with(".lora_b"))
      for (double v : a.store.value(i).data()) CHECK(v == 0.0);
  }
  CHECK(compared == 2 * static_cast<int>(control_linears(cfg).size()));
}

TEST_CASE("forward shapes and determinism") {
  const auto cfg = small_config();
  const auto p = trained_like(cfg, 1);
  RngStream rng(5);
  const auto x = random_tensor(rng, Shape{12, cfg.token_dim()});
  const auto y = random_tensor(rng, Shape{12, cfg.token_dim()});
  const auto v = predict_velocity(p, x, y, 3, 4, 0.43, 0.1, kCaption);
  CHECK(v.shape() == x.shape());
  CHECK(predict_velocity(p, x, y, 3, 4, 0.43, 0.1, kCaption) == v);
  const auto u = predict_pretrain(p, x, 3, 4, 0.5, kCaption);
  CHECK(u.shape() == x.shape());
  CHECK(predict_pretrain(p, x, 3, 4, 0.5, kCaption) == u);
  CHECK_THROWS_AS(predict_pretrain(p, x, 4, 4, 0.5, kCaption), ContractError);
  CHECK_THROWS_AS(predict_pretrain(p, x, 3, 4, 0.5, std::vector<int>{1, 2}), ContractError);
  CHECK_THROWS_AS(predict_pretrain(p, x, 3, 4, 0.5, std::vector<int>{1, 2, 3, 4, 5, 99}), ContractError);
}

TEST_CASE("LoRA has no effect while B is zero") {
  const auto cfg = small_config();
  auto p = trained_like(cfg, 2);
  RngStream rng(6);
  const auto x = random_tensor(rng, Shape{4, cfg.token_dim()});
  const auto y = random_tensor(rng, Shape{4, cfg.token_dim()});
  const auto before = predict_velocity(p, x, y, 2, 2, 0.43, 0.2, kCaption);
  for (int i = 0; i < p.store.size(); ++i)
    if (p.store.name(i).ends_with(".lora_a")) p.store.value(i) = random_tensor(rng, p.store.value(i).shape(), -3, 3);
  CHECK(predict_velocity(p, x, y, 2, 2, 0.43, 0.2, kCaption) == before);
  for (int i = 0; i < p.store.size(); ++i)
    if (p.store.name(i).ends_with(".lora_b")) p.store.value(i) = random_tensor(rng, p.store.value(i).shape());
  CHECK_FALSE(predict_velocity(p, x, y, 2, 2, 0.43, 0.2, kCaption) == before);
}

TEST_CASE("padding positions do not influence the output") {
  const auto cfg = small_config();
  auto p = trained_like(cfg, 3);
  RngStream rng(7);
  const auto x = random_tensor(rng, Shape{4, cfg.token_dim()});
  const auto y = random_tensor(rng, Shape{4, cfg.token_dim()});
  const auto v = predict_velocity(p, x, y, 2, 2, 0.43, 0.0, kCaption);
  const auto u = predict_pretrain(p, x, 2, 2, 0.43, kCaption);
  auto& embed = p.store["text.embed"];
  for (int j = 0; j < cfg.dim; ++j) embed.at(Vocab::kPad, j) += 5.0;
  auto& pos = p.store["text.pos"];
  for (int r : {4, 5})
    for (int j = 0; j < cfg.dim; ++j) pos.at(r, j) = -pos.at(r, j) + 1.0;
  CHECK(predict_velocity(p, x, y, 2, 2, 0.43, 0.0, kCaption) == v);
  CHECK(predict_pretrain(p, x, 2, 2, 0.43, kCaption) == u);
}

TEST_CASE("stage-2 init: control keys and values equal prior ones") {
  const auto cfg = small_config();
  const auto p = trained_like(cfg, 4);
  RngStream rng(8);
  const auto x = random_tensor(rng, Shape{4, cfg.token_dim()});
  Tape<double> tape;
  Binder<double> bind(tape, p.store);
  ForwardTrace<double> trace;
  forward_velocity(bind, cfg, tape.constant(x), tape.constant(x), 2, 2, 0.43, 0.43, kCaption, &trace);
  REQUIRE(trace.prior_k.size() == static_cast<std::size_t>(cfg.layers));
  CHECK(trace.prior_k[0] == trace.control_k[0]);
  CHECK(trace.prior_v[0] == trace.control_v[0]);
  // Deeper layers agree up to GEMM blocking differences between row ranges.
  for (std::size_t l = 1; l < trace.prior_k.size(); ++l)
    for (std::size_t i = 0; i < trace.prior_k[l].size(); ++i) {
      CHECK(trace.prior_k[l][i] == doctest::Approx(trace.control_k[l][i]).epsilon(1e-12));
      CHECK(trace.prior_v[l][i] == doctest::Approx(trace.control_v[l][i]).epsilon(1e-12));
    }
}

TEST_CASE("trainable sets") {
  const auto cfg = small_config();
  const auto p = init_generator<double>(cfg, 1);
  const auto faa = trainable_parameters(p, Stage::kFaa);
  const auto pre = trainable_parameters(p, Stage::kPretrain);
  for (int id : pre) CHECK_FALSE(p.store.name(id).starts_with("control."));
  const auto n_control = std::count_if(p.store.names().begin(), p.store.names().end(),
                                       [](const std::string& n) { return n.starts_with("control."); });
  CHECK(pre.size() + static_cast<std::size_t>(n_control) == static_cast<std::size_t>(p.store.size()));
  const auto frozen = trainable_mask(p, Stage::kFaa);
  std::size_t scalars = 0;
  for (int id : faa) {
    const auto& n = p.store.name(id);
    CHECK((n.ends_with(".lora_a") || n.ends_with(".lora_b")));
    CHECK(n.starts_with("control."));
    CHECK(frozen[static_cast<std::size_t>(id)]);
    scalars += p.store.value(id).size();
  }
  CHECK(std::count(frozen.begin(), frozen.end(), true) == static_cast<long>(faa.size()));

  // One (A, B) pair per control linear: patch embedding plus seven per layer.
  const int d = cfg.dim, m = cfg.dim * cfg.mlp_ratio, r = cfg.lora_rank;
  CHECK(faa.size() == static_cast<std::size_t>(2 * (1 + 7 * cfg.layers)));
  const std::size_t per_layer = (d + 6 * d) + 4 * (d + d) + (d + m) + (m + d);
  CHECK(scalars == static_cast<std::size_t>(r) * ((cfg.token_dim() + d) + cfg.layers * per_layer));
}

TEST_CASE("gradients reach LoRA through the control stream") {
  const auto cfg = small_config();
  const auto p = trained_like(cfg, 5);
  RngStream rng(9);
  const auto x = random_tensor(rng, Shape{4, cfg.token_dim()});
  const auto y = random_tensor(rng, Shape{4, cfg.token_dim()});
  for (double t_c : {0.0, 0.2, 0.43}) {
    Tape<double> tape;
    Binder<double> bind(tape, p.store, trainable_mask(p, Stage::kFaa));
    auto v = forward_velocity(bind, cfg, tape.constant(x), tape.constant(y), 2, 2, 0.43, t_c, kCaption);
    auto grads = tape.backward(ops::sum(ops::mul(v, v)));
    auto accum = zero_like(p.store);
    bind.collect(grads, accum);
    double norm_b = 0;
    for (int i = 0; i < p.store.size(); ++i)
      if (p.store.name(i).ends_with(".lora_b"))
        for (double g : accum[static_cast<std::size_t>(i)].data()) norm_b += g * g;
    CHECK(norm_b > 0);
  }
}

TEST_CASE("model gradients match finite differences") {
  for (const auto& c : glyphsr::testing::model_gradient_cases())
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      CAPTURE(c.name);
      CAPTURE(seed);
      CHECK(c.run(seed) < 1e-4);
    }
}

TEST_CASE("discriminator scores one value per patch") {
  DiscriminatorConfig cfg;
  cfg.dim = 16;
  cfg.heads = 2;
  cfg.max_caption = 6;
  cfg.conv_hidden = 4;
  const auto d = init_discriminator<double>(cfg, 2);
  CHECK(init_discriminator<double>(cfg, 2).store == d.store);
  RngStream rng(3);
  const auto x = random_tensor(rng, Shape{12, cfg.token_dim()});
  const auto s = predict_scores(d, x, 3, 4, 0.0, kCaption);
  CHECK(s.shape() == Shape{12});
  CHECK(predict_scores(d, x, 3, 4, 0.0, kCaption) == s);
  CHECK(predict_scores(d, x, 3, 4, 0.0, empty_prompt(6)).all_finite());
  CHECK_THROWS_AS(predict_scores(d, x, 4, 4, 0.0, kCaption), ContractError);
}

TEST_CASE("relativistic probability") {
  Tape<double> tape;
  RngStream rng(4);
  auto a = tape.constant(random_tensor(rng, Shape{9}, -5, 5));
  auto b = tape.constant(random_tensor(rng, Shape{9}, -5, 5));
  const auto rab = relativistic_prob(a, b).value(), rba = relativistic_prob(b, a).value();
  for (std::size_t i = 0; i < 9; ++i) CHECK(rab[i] + rba[i] == doctest::Approx(1.0).epsilon(1e-12));
  for (double v : relativistic_prob(a, a).value().data()) CHECK(v == 0.5);
  auto shifted = relativistic_prob(ops::add_scalar(a, 3.0), ops::add_scalar(b, 3.0)).value();
  for (std::size_t i = 0; i < 9; ++i) CHECK(shifted[i] == doctest::Approx(rab[i]).epsilon(1e-12));
  auto two = relativistic_prob(tape.constant(Tensor<double>::scalar(2.0)), tape.constant(Tensor<double>::scalar(0.0)));
  CHECK(two.value().item() == doctest::Approx(0.8808).epsilon(1e-4));

  Tape<float> ft;
  auto fa = ft.constant(Tensor<float>(Shape{3}, std::vector<float>{0.3f, -7.f, 12.f}));
  auto fb = ft.constant(Tensor<float>(Shape{3}, std::vector<float>{1.1f, 2.f, -3.f}));
  const auto p = relativistic_prob(fa, fb).value(), q = relativistic_prob(fb, fa).value();
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(p[i] - (1.0f - q[i])) <= 1e-7f);
  CHECK_THROWS_AS(relativistic_prob(a, tape.constant(Tensor<double>(Shape{3}))), ContractError);
}
