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
#include <filesystem>
#include <fstream>

#include "glyphsr/errors.hpp"
#include "glyphsr/metrics.hpp"
#include "glyphsr/studies.hpp"

using namespace glyphsr;
namespace fs = std::filesystem;

namespace {

GeneratorParams<double> tiny_gen() {
  GeneratorConfig c;
  c.layers = 1;
  c.dim = 16;
  c.heads = 2;
  c.patch = 4;
  c.max_caption = 8;
  c.lora_rank = 2;
  c.lora_alpha = 2;
  c.t_embed_dim = 8;
  c.mlp_ratio = 2;
  return init_generator<double>(c, 3);
}

std::vector<DatasetItem> scenes(int n) {
  SceneConfig s;
  s.image_size = 16;
  return make_dataset(n, 8, s, DegradationConfig{}).items;
}

LatticeSpec lattice() {
  SceneConfig s;
  s.image_size = 16;
  return LatticeSpec::from(s);
}

}  // namespace

TEST_CASE("noise study at t_s = 0 returns the inputs") {
  const auto gen = tiny_gen();
  const auto items = scenes(3);
  NoiseStudyOptions o;
  o.t_s = {0.0};
  o.n_steps = 4;
  const auto rep = noise_study(gen, NoiseSchedule::fitted(), items, lattice(), o);
  REQUIRE(rep.rows.size() == 3 * 2 * 2);
  for (const auto& r : rep.rows) {
    CHECK(r.psnr == kPsnrCap);
    CHECK(r.ssim == doctest::Approx(1.0));
    if (r.variant == "gt") CHECK(r.ned == 1.0);
  }
}

TEST_CASE("noise study rows cover exactly the requested timesteps") {
  const auto gen = tiny_gen();
  const auto items = scenes(2);
  NoiseStudyOptions o;
  o.n_steps = 3;
  o.prompt = PromptMode::kWithout;
  const auto rep = noise_study(gen, NoiseSchedule::fitted(), items, lattice(), o);
  REQUIRE(rep.rows.size() == 2 * 2 * 2);
  for (const auto& r : rep.rows) {
    CHECK((r.setting == 0.90 || r.setting == 0.29));
    CHECK_FALSE(r.prompt);
    CHECK(r.psnr < kPsnrCap);
  }
  const auto aggs = aggregate(rep);
  CHECK(aggs.size() == 4);
  CHECK(find_aggregate(aggs, "gt", 0.29, false).count == 2);
  CHECK_THROWS_AS(find_aggregate(aggs, "gt", 0.5, false), ContractError);

  o.t_s = {1.5};
  CHECK_THROWS_AS(noise_study(gen, NoiseSchedule::fitted(), items, lattice(), o), ContractError);
}

TEST_CASE("fidelity sweep") {
  const auto gen = tiny_gen();
  const auto items = scenes(2);
  SweepOptions o;
  const auto rep = fidelity_sweep(gen, NoiseSchedule::fitted(), items, lattice(), o);
  REQUIRE(rep.rows.size() == 3 * 2 * 2);
  for (const auto& r : rep.rows) {
    CHECK(r.variant == "sr");
    CHECK(r.mse_lq >= 0);
    CHECK(r.ned >= 0);
    CHECK(r.ned <= 1);
    CHECK(r.ssim >= -1);
    CHECK(r.ssim <= 1);
  }
  CHECK(fidelity_sweep(gen, NoiseSchedule::fitted(), items, lattice(), o).rows[0].psnr == rep.rows[0].psnr);
  o.fidelities = {1.2};
  CHECK_THROWS_AS(fidelity_sweep(gen, NoiseSchedule::fitted(), items, lattice(), o), ContractError);
}

TEST_CASE("report files") {
  const auto items = scenes(2);
  auto rep = bilinear_baseline(items, lattice());
  const auto b = aggregate(rep);
  REQUIRE(b.size() == 1);
  CHECK(b[0].psnr == doctest::Approx((rep.rows[0].psnr + rep.rows[1].psnr) / 2));
  CHECK(b[0].mse_lq == 0.0);

  const fs::path dir = fs::temp_directory_path() / "glyphsr_test_report";
  fs::remove_all(dir);
  write_report(rep, dir, "eval");
  std::ifstream csv(dir / "eval.csv");
  std::string header, line;
  std::getline(csv, header);
  CHECK(header == "study,id,variant,setting,prompt,psnr,ssim,ned,mse_lq,ocr,caption");
  int rows = 0;
  while (std::getline(csv, line)) ++rows;
  CHECK(rows == 2);
  std::ifstream js(dir / "eval.json");
  const auto j = nlohmann::json::parse(js);
  CHECK(j["aggregates"].size() == 1);
  CHECK(j["learned_metrics"]["lpips"] == "unavailable");
  CHECK(j["config"]["baseline"] == "bilinear_x4");
  fs::remove_all(dir);

  CHECK(parse_prompt_mode("with") == PromptMode::kWith);
  CHECK_THROWS_AS(parse_prompt_mode("sometimes"), ContractError);
}
