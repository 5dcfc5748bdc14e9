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
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "glyphsr/glyphs.hpp"
#include "glyphsr/image.hpp"

namespace glyphsr {

struct SceneConfig {
  int image_size = 32;
  int cell = 8;         // lattice cell edge in pixels
  int glyph_scale = 1;  // integer upscaling of the 5x7 bitmaps
  double occupancy = 0.85;

  int lattice_rows() const { return image_size / cell; }
  int lattice_cols() const { return image_size / cell; }
  int max_glyphs() const { return lattice_rows() * lattice_cols(); }
  void validate() const;
};

enum class Texture : int { kFlat = 0, kGradient = 1, kWaves = 2 };

struct Background {
  Texture texture = Texture::kFlat;
  std::array<double, 3> base{};  // light paper colour
  std::array<double, 3> ink{};   // dark glyph colour
  // Gradient: (dx, dy, unused); waves: (amplitude, frequency, phase).
  std::array<double, 3> params{};

  friend bool operator==(const Background&, const Background&) = default;
};

struct Placement {
  int row = 0;
  int col = 0;
  int glyph = 0;

  friend bool operator==(const Placement&, const Placement&) = default;
};

struct GlyphScene {
  Image image;
  std::string caption;  // one character per placement, row-major
  std::vector<Placement> grid;
  Background background;

  friend bool operator==(const GlyphScene&, const GlyphScene&) = default;
};

// Deterministic in (seed, config). The image is quantized to 8 bits so that it
// survives a PPM round trip unchanged.
GlyphScene render_scene(std::uint64_t seed, const SceneConfig& config);

enum class DownsampleKernel : int { kNearest = 0, kBilinear = 1, kArea = 2 };

struct DegradationConfig {
  double blur_sigma_min = 0.4;
  double blur_sigma_max = 1.2;
  int factor = 4;
  std::vector<DownsampleKernel> kernels{DownsampleKernel::kNearest, DownsampleKernel::kBilinear,
                                        DownsampleKernel::kArea};
  double noise_sigma_min = 0.0;
  double noise_sigma_max = 0.04;
  int quant_levels_min = 32;
  int quant_levels_max = 256;

  void validate() const;
};

// Parameters drawn for one degradation.
struct DegradationDraw {
  double blur_sigma = 0;
  DownsampleKernel kernel = DownsampleKernel::kArea;
  double noise_sigma = 0;
  int quant_levels = 256;
};

DegradationDraw sample_degradation(const DegradationConfig& cfg, std::uint64_t seed);

// blur -> downsample -> additive noise -> quantize, all determined by seed.
// Output is 1/factor of the input size, 8-bit representable.
Image degrade(const Image& img, const DegradationConfig& cfg, std::uint64_t seed);

Image gaussian_blur(const Image& img, double sigma);
// kNearest keeps the top-left pixel of each factor x factor block; kBilinear
// samples the block centre; kArea averages the block.
Image downsample(const Image& img, int factor, DownsampleKernel kernel);

// Cell lattice the OCR reads.
struct LatticeSpec {
  int rows = 4;
  int cols = 4;
  int cell = 8;
  int glyph_scale = 1;

  static LatticeSpec from(const SceneConfig& cfg);
};

// Template-matching reader: per cell, the ink map is compared by L2 with
// every glyph template; cells whose total ink is below blank_fraction times
// the lightest template's ink are read as empty.
struct OcrOptions {
  double blank_fraction = 0.35;
};

std::string toy_ocr(const Image& img, const LatticeSpec& lattice, const OcrOptions& opts = {});

// ---- dataset persistence -------------------------------------------------

struct DatasetItem {
  std::string id;
  GlyphScene scene;
  Image lq;
  std::uint64_t degradation_seed = 0;

  friend bool operator==(const DatasetItem&, const DatasetItem&) = default;
};

struct DatasetMeta {
  std::uint64_t global_seed = 0;
  SceneConfig scene;
  DegradationConfig degradation;
};

struct Dataset {
  DatasetMeta meta;
  std::vector<DatasetItem> items;
};

// count items from global_seed; each item draws its own scene and
// degradation seeds. threads > 1 renders items concurrently.
Dataset make_dataset(int count, std::uint64_t global_seed, const SceneConfig& scene_cfg,
                     const DegradationConfig& deg_cfg, int threads = 1, int first_index = 0);

// Layout: images/{id}.ppm, lq/{id}.ppm, captions.jsonl, manifest.json.
// Returns the manifest that was written.
nlohmann::json write_dataset(const Dataset& ds, const std::filesystem::path& dir);
Dataset read_dataset(const std::filesystem::path& dir);

nlohmann::json to_json(const SceneConfig& cfg);
nlohmann::json to_json(const DegradationConfig& cfg);
SceneConfig scene_config_from_json(const nlohmann::json& j);
DegradationConfig degradation_config_from_json(const nlohmann::json& j);

}  // namespace glyphsr
