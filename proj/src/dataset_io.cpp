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

#include <fstream>
#include <sstream>

#include "glyphsr/datagen.hpp"
#include "glyphsr/errors.hpp"

namespace glyphsr {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kFormat = "glyphsr-dataset";
constexpr int kVersion = 1;

const char* kernel_name(DownsampleKernel k) {
  switch (k) {
    case DownsampleKernel::kNearest:
      return "nearest";
    case DownsampleKernel::kBilinear:
      return "bilinear";
    case DownsampleKernel::kArea:
      return "area";
  }
  return "area";
}

DownsampleKernel kernel_from_name(const std::string& s) {
  if (s == "nearest") return DownsampleKernel::kNearest;
  if (s == "bilinear") return DownsampleKernel::kBilinear;
  if (s == "area") return DownsampleKernel::kArea;
  throw ContractError("unknown downsampling kernel '" + s + "'");
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json parse_json(const std::string& text, const std::string& file, std::size_t base_offset) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(file, base_offset + (e.byte > 0 ? e.byte - 1 : 0), e.what());
  }
}

json item_record(const DatasetItem& item) {
  json grid = json::array();
  for (const auto& p : item.scene.grid) grid.push_back({p.row, p.col, p.glyph});
  const auto& bg = item.scene.background;
  return {{"id", item.id},
          {"caption", item.scene.caption},
          {"degradation_seed", item.degradation_seed},
          {"grid", grid},
          {"background",
           {{"texture", static_cast<int>(bg.texture)}, {"base", bg.base}, {"ink", bg.ink}, {"params", bg.params}}}};
}

}  // namespace

json to_json(const SceneConfig& cfg) {
  return {{"image_size", cfg.image_size}, {"cell", cfg.cell}, {"glyph_scale", cfg.glyph_scale},
          {"occupancy", cfg.occupancy}};
}

json to_json(const DegradationConfig& cfg) {
  json kernels = json::array();
  for (auto k : cfg.kernels) kernels.push_back(kernel_name(k));
  return {{"blur_sigma", {cfg.blur_sigma_min, cfg.blur_sigma_max}},
          {"factor", cfg.factor},
          {"kernels", kernels},
          {"noise_sigma", {cfg.noise_sigma_min, cfg.noise_sigma_max}},
          {"quant_levels", {cfg.quant_levels_min, cfg.quant_levels_max}}};
}

SceneConfig scene_config_from_json(const json& j) {
  SceneConfig cfg;
  cfg.image_size = j.at("image_size").get<int>();
  cfg.cell = j.at("cell").get<int>();
  cfg.glyph_scale = j.at("glyph_scale").get<int>();
  cfg.occupancy = j.at("occupancy").get<double>();
  cfg.validate();
  return cfg;
}

DegradationConfig degradation_config_from_json(const json& j) {
  DegradationConfig cfg;
  cfg.blur_sigma_min = j.at("blur_sigma").at(0).get<double>();
  cfg.blur_sigma_max = j.at("blur_sigma").at(1).get<double>();
  cfg.factor = j.at("factor").get<int>();
  cfg.kernels.clear();
  for (const auto& k : j.at("kernels")) cfg.kernels.push_back(kernel_from_name(k.get<std::string>()));
  cfg.noise_sigma_min = j.at("noise_sigma").at(0).get<double>();
  cfg.noise_sigma_max = j.at("noise_sigma").at(1).get<double>();
  cfg.quant_levels_min = j.at("quant_levels").at(0).get<int>();
  cfg.quant_levels_max = j.at("quant_levels").at(1).get<int>();
  cfg.validate();
  return cfg;
}

json write_dataset(const Dataset& ds, const fs::path& dir) {
  fs::create_directories(dir / "images");
  fs::create_directories(dir / "lq");
  std::ofstream captions(dir / "captions.jsonl", std::ios::binary);
  if (!captions) throw std::runtime_error("cannot write " + (dir / "captions.jsonl").string());
  for (const auto& item : ds.items) {
    write_ppm(item.scene.image, dir / "images" / (item.id + ".ppm"));
    write_ppm(item.lq, dir / "lq" / (item.id + ".ppm"));
    captions << item_record(item).dump() << '\n';
  }
  json manifest = {{"format", kFormat},
                   {"version", kVersion},
                   {"count", ds.items.size()},
                   {"global_seed", ds.meta.global_seed},
                   {"scene", to_json(ds.meta.scene)},
                   {"degradation", to_json(ds.meta.degradation)}};
  std::ofstream out(dir / "manifest.json", std::ios::binary);
  out << manifest.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
  return manifest;
}

Dataset read_dataset(const fs::path& dir) {
  const fs::path manifest_path = dir / "manifest.json";
  const std::string manifest_file = manifest_path.string();
  const json manifest = parse_json(slurp(manifest_path), manifest_file, 0);
  Dataset ds;
  std::size_t count = 0;
  try {
    if (manifest.at("format").get<std::string>() != kFormat) throw ParseError(manifest_file, 0, "not a dataset manifest");
    if (manifest.at("version").get<int>() != kVersion) throw ParseError(manifest_file, 0, "unsupported version");
    count = manifest.at("count").get<std::size_t>();
    ds.meta.global_seed = manifest.at("global_seed").get<std::uint64_t>();
    ds.meta.scene = scene_config_from_json(manifest.at("scene"));
    ds.meta.degradation = degradation_config_from_json(manifest.at("degradation"));
  } catch (const json::exception& e) {
    throw ParseError(manifest_file, 0, e.what());
  } catch (const ContractError& e) {
    throw ParseError(manifest_file, 0, e.what());
  }

  const fs::path captions_path = dir / "captions.jsonl";
  const std::string captions_file = captions_path.string();
  const std::string text = slurp(captions_path);
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string line = text.substr(pos, end - pos);
    if (!line.empty()) {
      const json rec = parse_json(line, captions_file, pos);
      DatasetItem item;
      try {
        item.id = rec.at("id").get<std::string>();
        item.scene.caption = rec.at("caption").get<std::string>();
        item.degradation_seed = rec.at("degradation_seed").get<std::uint64_t>();
        for (const auto& p : rec.at("grid")) item.scene.grid.push_back({p.at(0), p.at(1), p.at(2)});
        const auto& bg = rec.at("background");
        item.scene.background.texture = static_cast<Texture>(bg.at("texture").get<int>());
        item.scene.background.base = bg.at("base").get<std::array<double, 3>>();
        item.scene.background.ink = bg.at("ink").get<std::array<double, 3>>();
        item.scene.background.params = bg.at("params").get<std::array<double, 3>>();
      } catch (const json::exception& e) {
        throw ParseError(captions_file, pos, e.what());
      }
      if (item.scene.caption.size() != item.scene.grid.size())
        throw ParseError(captions_file, pos, "caption length does not match the glyph grid");
      item.scene.image = read_ppm(dir / "images" / (item.id + ".ppm"));
      item.lq = read_ppm(dir / "lq" / (item.id + ".ppm"));
      ds.items.push_back(std::move(item));
    }
    pos = end + 1;
  }
  if (ds.items.size() != count)
    throw ParseError(captions_file, text.size(),
                     "manifest lists " + std::to_string(count) + " items but captions hold " +
                         std::to_string(ds.items.size()));
  return ds;
}

}  // namespace glyphsr
