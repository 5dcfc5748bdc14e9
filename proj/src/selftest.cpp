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

#include "glyphsr/selftest.hpp"

#include <cmath>
#include <filesystem>
#include <sstream>

#include "glyphsr/discriminator.hpp"
#include "glyphsr/errors.hpp"
#include "glyphsr/losses.hpp"
#include "glyphsr/metrics.hpp"
#include "glyphsr/numerics/gradcheck.hpp"
#include "glyphsr/numerics/ops.hpp"
#include "glyphsr/trainer.hpp"

namespace glyphsr {

namespace {

using namespace ops;

std::string fmt(double v) {
  std::ostringstream o;
  o.precision(6);
  o << v;
  return o.str();
}

SelfCheck check_anchors() {
  const double s = fit_shift(kPublishedAnchors);
  double sse = 0, worst = 0;
  for (const auto& a : kPublishedAnchors) {
    const double d = timestep_to_t(a.timestep, s) - a.t;
    sse += d * d;
    worst = std::max(worst, std::abs(d));
  }
  return {"schedule anchors", worst <= 0.01 && sse < 3e-4, "shift " + fmt(s) + ", max dev " + fmt(worst) + ", sse " + fmt(sse)};
}

SelfCheck check_one_step() {
  RngStream rng(1);
  double worst = 0;
  const double t_p = NoiseSchedule::fitted().t_p;
  for (int i = 0; i < 100; ++i) {
    const Tensor<double> x0(Shape{6, 5}, rng.normals<double>(30));
    const Tensor<double> eps(Shape{6, 5}, rng.normals<double>(30));
    const auto back = one_step_update(interpolate(x0, eps, t_p), velocity_target(x0, eps), t_p);
    for (std::size_t k = 0; k < x0.size(); ++k) worst = std::max(worst, std::abs(back[k] - x0[k]));
  }
  return {"one-step algebra", worst < 1e-6, "max error " + fmt(worst)};
}

SelfCheck check_fidelity_mapping() {
  const double t_p = NoiseSchedule::fitted().t_p;
  const LossWeights w;
  const bool ok = control_t(FidelityWeight(1.0), t_p) == 0.0 && control_t(FidelityWeight(0.0), t_p) == t_p &&
                  faa_weight(FidelityWeight(1.0), w) == 0.02 && faa_weight(FidelityWeight(0.0), w) == 0.1;
  return {"fidelity mapping", ok, "t_p " + fmt(t_p)};
}

SelfCheck check_relativistic() {
  RngStream rng(2);
  double worst = 0;
  for (int i = 0; i < 20; ++i) {
    Tape<double> tape;
    auto a = tape.constant(Tensor<double>(Shape{8}, rng.normals<double>(8, 2.0)));
    auto b = tape.constant(Tensor<double>(Shape{8}, rng.normals<double>(8, 2.0)));
    worst = std::max(worst, std::abs(adv_g_loss(a, a).value().item() - std::log(2.0)));
    worst = std::max(worst, std::abs(adv_d_loss(a, b).value().item() - adv_g_loss(b, a).value().item()));
    const auto ab = relativistic_prob(a, b).value(), ba = relativistic_prob(b, a).value();
    for (std::size_t k = 0; k < ab.size(); ++k) worst = std::max(worst, std::abs(ab[k] + ba[k] - 1.0));
  }
  return {"relativistic identities", worst < 1e-6, "max deviation " + fmt(worst)};
}

SelfCheck check_gradients() {
  RngStream rng(3);
  const Tensor<double> w(Shape{4, 3}, rng.normals<double>(12));
  const Tensor<double> x(Shape{5, 4}, rng.normals<double>(20));
  const ScalarFn f = [&](Tape<double>& tape, Var<double> in) {
    auto h = layernorm(matmul(in, tape.constant(w)));
    auto sm = softmax_rows(h);
    return mean(mul(sm, silu(h)));
  };
  const double err = finite_diff_check(f, x);
  return {"gradient spot check", err < 1e-4, "max relative error " + fmt(err)};
}

SelfCheck check_ned_oracle() {
  RngStream rng(4);
  bool ok = std::abs(ned("abc", "abd") - 2.0 / 3.0) < 1e-12 && ned("", "") == 1.0 && ned("", "abc") == 0.0;
  for (int i = 0; i < 200 && ok; ++i) {
    std::string a(static_cast<std::size_t>(rng.uniform_int(0, 8)), 'a'), b(static_cast<std::size_t>(rng.uniform_int(0, 8)), 'a');
    for (auto& c : a) c = static_cast<char>('a' + rng.uniform_int(0, 2));
    for (auto& c : b) c = static_cast<char>('a' + rng.uniform_int(0, 2));
    std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
    for (std::size_t r = 0; r <= a.size(); ++r) d[r][0] = r;
    for (std::size_t c = 0; c <= b.size(); ++c) d[0][c] = c;
    for (std::size_t r = 1; r <= a.size(); ++r)
      for (std::size_t c = 1; c <= b.size(); ++c)
        d[r][c] = std::min({d[r - 1][c] + 1, d[r][c - 1] + 1, d[r - 1][c - 1] + (a[r - 1] != b[c - 1])});
    ok = levenshtein(a, b) == d[a.size()][b.size()];
  }
  return {"edit distance oracle", ok, ok ? "200 random pairs" : "mismatch"};
}

SelfCheck check_checkpoint() {
  TrainConfig c;
  c.batch_size = 1;
  c.grad_accum = 1;
  c.perceptual_layers = 1;
  c.generator.layers = c.discriminator.layers = 1;
  c.generator.dim = c.discriminator.dim = 8;
  c.generator.heads = c.discriminator.heads = 2;
  c.generator.patch = c.discriminator.patch = 4;
  c.discriminator.conv_hidden = 4;
  SceneConfig sc;
  sc.image_size = 16;
  const auto data = make_examples<double>(make_dataset(2, 5, sc, DegradationConfig{}), 4);
  auto s1 = start_pretrain<double>(c);
  run_training(s1, data, 1);
  auto s = start_faa<double>(c, s1.gen);
  run_training(s, data, 2);
  const auto dir = std::filesystem::temp_directory_path() /
                   ("glyphsr_selftest_" + std::to_string(reinterpret_cast<std::uintptr_t>(&s)));
  save_checkpoint(s, dir);
  auto back = load_checkpoint<double>(dir);
  std::filesystem::remove_all(dir);
  bool ok = back.gen.store == s.gen.store && back.disc->store == s.disc->store && back.state == s.state;
  run_training(s, data, 3);
  run_training(back, data, 3);
  ok = ok && s.state.history == back.state.history;
  return {"checkpoint round trip", ok, ok ? "bit exact, resumed step identical" : "mismatch after reload"};
}

}  // namespace

std::vector<SelfCheck> run_selftest() {
  using Fn = SelfCheck (*)();
  const std::pair<const char*, Fn> checks[] = {{"schedule anchors", check_anchors},
                                               {"one-step algebra", check_one_step},
                                               {"fidelity mapping", check_fidelity_mapping},
                                               {"relativistic identities", check_relativistic},
                                               {"gradient spot check", check_gradients},
                                               {"edit distance oracle", check_ned_oracle},
                                               {"checkpoint round trip", check_checkpoint}};
  std::vector<SelfCheck> out;
  for (const auto& [name, fn] : checks) {
    try {
      out.push_back(fn());
    } catch (const std::exception& e) {
      out.push_back({name, false, std::string("threw: ") + e.what()});
    }
  }
  return out;
}

}  // namespace glyphsr
