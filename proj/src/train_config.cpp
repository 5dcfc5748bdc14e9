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

#include <charconv>
#include <fstream>
#include <sstream>

#include "glyphsr/errors.hpp"
#include "glyphsr/trainer.hpp"

namespace glyphsr {

void TrainConfig::validate() const {
  require(iterations >= 0, "TrainConfig: iterations must be non-negative");
  require(batch_size >= 1 && grad_accum >= 1, "TrainConfig: batch_size and grad_accum must be >= 1");
  require(lr_g > 0 && lr_d > 0, "TrainConfig: learning rates must be positive");
  require(prompt_keep >= 0 && prompt_keep <= 1, "TrainConfig: prompt_keep must lie in [0, 1]");
  require(f_min >= 0 && f_min <= f_max && f_max <= 1, "TrainConfig: need 0 <= f_min <= f_max <= 1");
  require(precision == 32 || precision == 64, "TrainConfig: precision must be 32 or 64");
  require(prior_timestep >= 0 && prior_timestep < kNumTimesteps, "TrainConfig: prior_timestep out of range");
  require(perceptual_layers >= 1 && perceptual_layers <= generator.layers,
          "TrainConfig: perceptual_layers must lie in [1, layers]");
  require(generator.patch == discriminator.patch, "TrainConfig: generator and discriminator patch sizes differ");
  require(generator.max_caption == discriminator.max_caption,
          "TrainConfig: generator and discriminator caption lengths differ");
  weights.validate();
  generator.validate();
  discriminator.validate();
}

NoiseSchedule TrainConfig::schedule() const {
  return shift > 0 ? NoiseSchedule::make(shift, prior_timestep) : NoiseSchedule::fitted(prior_timestep);
}

namespace {

template <typename N>
N parse_number(const std::string& key, const std::string& v) {
  N out{};
  const char* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) throw ContractError("config: bad value '" + v + "' for key '" + key + "'");
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

bool apply_config_value(TrainConfig& c, const std::string& key, const std::string& v) {
  auto i = [&] { return parse_number<int>(key, v); };
  auto d = [&] { return parse_number<double>(key, v); };
  if (key == "stage") {
    if (v == "pretrain")
      c.stage = Stage::kPretrain;
    else if (v == "faa")
      c.stage = Stage::kFaa;
    else
      throw ContractError("config: stage must be 'pretrain' or 'faa', got '" + v + "'");
  } else if (key == "iterations") c.iterations = i();
  else if (key == "batch_size") c.batch_size = i();
  else if (key == "grad_accum") c.grad_accum = i();
  else if (key == "lr_g") c.lr_g = d();
  else if (key == "lr_d") c.lr_d = d();
  else if (key == "prompt_keep") c.prompt_keep = d();
  else if (key == "f_min") c.f_min = d();
  else if (key == "f_max") c.f_max = d();
  else if (key == "seed") c.seed = parse_number<std::uint64_t>(key, v);
  else if (key == "precision") c.precision = i();
  else if (key == "prior_timestep") c.prior_timestep = i();
  else if (key == "shift") c.shift = d();
  else if (key == "perceptual_layers") c.perceptual_layers = i();
  else if (key == "lambda1") c.weights.lambda1 = d();
  else if (key == "lambda_min") c.weights.lambda_min = d();
  else if (key == "lambda_max") c.weights.lambda_max = d();
  else if (key == "lambda2") c.weights.lambda2 = d();
  else if (key == "r1_sigma") c.weights.r1_sigma = d();
  else if (key == "patch") c.generator.patch = c.discriminator.patch = i();
  else if (key == "max_caption") c.generator.max_caption = c.discriminator.max_caption = i();
  else if (key == "layers") c.generator.layers = i();
  else if (key == "dim") c.generator.dim = i();
  else if (key == "heads") c.generator.heads = i();
  else if (key == "lora_rank") c.generator.lora_rank = i();
  else if (key == "lora_alpha") c.generator.lora_alpha = d();
  else if (key == "t_embed_dim") c.generator.t_embed_dim = c.discriminator.t_embed_dim = i();
  else if (key == "mlp_ratio") c.generator.mlp_ratio = i();
  else if (key == "disc_layers") c.discriminator.layers = i();
  else if (key == "disc_dim") c.discriminator.dim = i();
  else if (key == "disc_heads") c.discriminator.heads = i();
  else if (key == "disc_mlp_ratio") c.discriminator.mlp_ratio = i();
  else if (key == "disc_conv_hidden") c.discriminator.conv_hidden = i();
  else return false;
  return true;
}

TrainConfig parse_train_config(const std::string& text, const std::string& source) {
  TrainConfig cfg;
  std::istringstream in(text);
  std::string line;
  std::size_t offset = 0;
  while (std::getline(in, line)) {
    const std::size_t line_offset = offset;
    offset += line.size() + 1;
    const auto hash = line.find('#');
    const std::string body = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(source, line_offset, "expected 'key = value'");
    const std::string key = trim(body.substr(0, eq)), value = trim(body.substr(eq + 1));
    try {
      if (!apply_config_value(cfg, key, value)) throw ParseError(source, line_offset, "unknown key '" + key + "'");
    } catch (const ContractError& e) {
      throw ParseError(source, line_offset, e.what());
    }
  }
  return cfg;
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_train_config(ss.str(), path.string());
}

std::string format_train_config(const TrainConfig& c) {
  std::ostringstream o;
  o.precision(17);
  o << "stage = " << (c.stage == Stage::kPretrain ? "pretrain" : "faa") << '\n'
    << "iterations = " << c.iterations << '\n'
    << "batch_size = " << c.batch_size << '\n'
    << "grad_accum = " << c.grad_accum << '\n'
    << "lr_g = " << c.lr_g << '\n'
    << "lr_d = " << c.lr_d << '\n'
    << "prompt_keep = " << c.prompt_keep << '\n'
    << "f_min = " << c.f_min << '\n'
    << "f_max = " << c.f_max << '\n'
    << "seed = " << c.seed << '\n'
    << "precision = " << c.precision << '\n'
    << "prior_timestep = " << c.prior_timestep << '\n'
    << "shift = " << c.shift << '\n'
    << "perceptual_layers = " << c.perceptual_layers << '\n'
    << "lambda1 = " << c.weights.lambda1 << '\n'
    << "lambda_min = " << c.weights.lambda_min << '\n'
    << "lambda_max = " << c.weights.lambda_max << '\n'
    << "lambda2 = " << c.weights.lambda2 << '\n'
    << "r1_sigma = " << c.weights.r1_sigma << '\n'
    << "patch = " << c.generator.patch << '\n'
    << "max_caption = " << c.generator.max_caption << '\n'
    << "layers = " << c.generator.layers << '\n'
    << "dim = " << c.generator.dim << '\n'
    << "heads = " << c.generator.heads << '\n'
    << "lora_rank = " << c.generator.lora_rank << '\n'
    << "lora_alpha = " << c.generator.lora_alpha << '\n'
    << "t_embed_dim = " << c.generator.t_embed_dim << '\n'
    << "mlp_ratio = " << c.generator.mlp_ratio << '\n'
    << "disc_layers = " << c.discriminator.layers << '\n'
    << "disc_dim = " << c.discriminator.dim << '\n'
    << "disc_heads = " << c.discriminator.heads << '\n'
    << "disc_mlp_ratio = " << c.discriminator.mlp_ratio << '\n'
    << "disc_conv_hidden = " << c.discriminator.conv_hidden << '\n';
  return o.str();
}

std::uint64_t config_digest(const TrainConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : format_train_config(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace glyphsr
