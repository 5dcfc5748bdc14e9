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

#include "glyphsr/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <thread>

#include "glyphsr/errors.hpp"
#include "glyphsr/numerics/rng.hpp"

namespace glyphsr {

void SceneConfig::validate() const {
  require(image_size > 0 && image_size % 4 == 0, "SceneConfig: image_size must be a positive multiple of 4");
  require(cell > 0 && image_size % cell == 0, "SceneConfig: cell must divide image_size");
  require(glyph_scale >= 1 && cell >= kGlyphHeight * glyph_scale && cell >= kGlyphWidth * glyph_scale,
          "SceneConfig: scaled glyph does not fit in a cell");
  require(occupancy >= 0.0 && occupancy <= 1.0, "SceneConfig: occupancy must lie in [0, 1]");
}

void DegradationConfig::validate() const {
  require(blur_sigma_min >= 0 && blur_sigma_min <= blur_sigma_max, "DegradationConfig: bad blur range");
  require(factor == 4, "DegradationConfig: the downsampling factor is fixed at 4");
  require(!kernels.empty(), "DegradationConfig: kernel set is empty");
  require(noise_sigma_min >= 0 && noise_sigma_min <= noise_sigma_max, "DegradationConfig: bad noise range");
  require(quant_levels_min >= 2 && quant_levels_min <= quant_levels_max && quant_levels_max <= 256,
          "DegradationConfig: quantization levels must satisfy 2 <= min <= max <= 256");
}

namespace {

double background_value(const Background& bg, int c, int y, int x, int size) {
  const double fx = (x + 0.5) / size, fy = (y + 0.5) / size;
  switch (bg.texture) {
    case Texture::kFlat:
      return bg.base[c];
    case Texture::kGradient:
      return bg.base[c] + bg.params[0] * (2 * fx - 1) + bg.params[1] * (2 * fy - 1);
    case Texture::kWaves:
      return bg.base[c] +
             bg.params[0] * std::sin(2 * std::numbers::pi * bg.params[1] * (fx + fy) + bg.params[2]);
  }
  return bg.base[c];
}

Background sample_background(RngStream& rng) {
  Background bg;
  bg.texture = static_cast<Texture>(rng.uniform_int(0, 2));
  for (auto& v : bg.base) v = 0.70 + 0.22 * rng.uniform();
  for (auto& v : bg.ink) v = 0.22 * rng.uniform();
  switch (bg.texture) {
    case Texture::kFlat:
      break;
    case Texture::kGradient:
      bg.params = {0.08 * rng.uniform() - 0.04, 0.08 * rng.uniform() - 0.04, 0.0};
      break;
    case Texture::kWaves:
      bg.params = {0.01 + 0.04 * rng.uniform(), 0.5 + 1.5 * rng.uniform(), 2 * std::numbers::pi * rng.uniform()};
      break;
  }
  return bg;
}

}  // namespace

GlyphScene render_scene(std::uint64_t seed, const SceneConfig& cfg) {
  cfg.validate();
  RngStream rng(seed);
  GlyphScene scene;
  scene.background = sample_background(rng);
  for (int r = 0; r < cfg.lattice_rows(); ++r)
    for (int c = 0; c < cfg.lattice_cols(); ++c)
      if (rng.bernoulli(cfg.occupancy)) {
        const int g = rng.uniform_int(0, kNumGlyphs - 1);
        scene.grid.push_back({r, c, g});
        scene.caption.push_back(glyph_char(g));
      }

  Image img(cfg.image_size, cfg.image_size);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = background_value(scene.background, c, y, x, cfg.image_size);

  const int s = cfg.glyph_scale;
  const int off_x = (cfg.cell - kGlyphWidth * s) / 2;
  const int off_y = (cfg.cell - kGlyphHeight * s) / 2;
  for (const auto& p : scene.grid) {
    const auto& bmp = glyph_bitmap(p.glyph);
    for (int gy = 0; gy < kGlyphHeight * s; ++gy)
      for (int gx = 0; gx < kGlyphWidth * s; ++gx) {
        if (bmp[static_cast<std::size_t>(gy / s)][static_cast<std::size_t>(gx / s)] != '#') continue;
        const int y = p.row * cfg.cell + off_y + gy;
        const int x = p.col * cfg.cell + off_x + gx;
        for (int c = 0; c < 3; ++c) img.at(y, x, c) = scene.background.ink[c];
      }
  }
  scene.image = quantize8(clamp01(std::move(img)));
  return scene;
}

Image gaussian_blur(const Image& img, double sigma) {
  require(sigma >= 0, "gaussian_blur: sigma must be non-negative");
  if (sigma == 0.0) return img;
  const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double z = 0;
  for (int i = -radius; i <= radius; ++i) z += (k[static_cast<std::size_t>(i + radius)] = std::exp(-0.5 * i * i / (sigma * sigma)));
  for (auto& v : k) v /= z;

  auto pass = [&](const Image& src, bool horizontal) {
    Image dst(src.height, src.width);
    for (int y = 0; y < src.height; ++y)
      for (int x = 0; x < src.width; ++x)
        for (int c = 0; c < 3; ++c) {
          double acc = 0;
          for (int i = -radius; i <= radius; ++i) {
            const int yy = horizontal ? y : std::clamp(y + i, 0, src.height - 1);
            const int xx = horizontal ? std::clamp(x + i, 0, src.width - 1) : x;
            acc += k[static_cast<std::size_t>(i + radius)] * src.at(yy, xx, c);
          }
          dst.at(y, x, c) = acc;
        }
    return dst;
  };
  return pass(pass(img, true), false);
}

Image downsample(const Image& img, int factor, DownsampleKernel kernel) {
  require(factor >= 1 && img.height % factor == 0 && img.width % factor == 0,
          "downsample: image dimensions must be divisible by the factor");
  Image out(img.height / factor, img.width / factor);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      for (int c = 0; c < 3; ++c) {
        double v = 0;
        switch (kernel) {
          case DownsampleKernel::kNearest:
            v = img.at(y * factor, x * factor, c);
            break;
          case DownsampleKernel::kBilinear: {
            // Block centre sits between the two middle pixels for even factors.
            const int y0 = y * factor + (factor - 1) / 2, x0 = x * factor + (factor - 1) / 2;
            const int y1 = y * factor + factor / 2, x1 = x * factor + factor / 2;
            v = 0.25 * (img.at(y0, x0, c) + img.at(y0, x1, c) + img.at(y1, x0, c) + img.at(y1, x1, c));
            break;
          }
          case DownsampleKernel::kArea:
            for (int dy = 0; dy < factor; ++dy)
              for (int dx = 0; dx < factor; ++dx) v += img.at(y * factor + dy, x * factor + dx, c);
            v /= factor * factor;
            break;
        }
        out.at(y, x, c) = v;
      }
  return out;
}

DegradationDraw sample_degradation(const DegradationConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  RngStream rng(seed);
  DegradationDraw d;
  d.blur_sigma = cfg.blur_sigma_min + (cfg.blur_sigma_max - cfg.blur_sigma_min) * rng.uniform();
  d.kernel = cfg.kernels[static_cast<std::size_t>(rng.uniform_int(0, static_cast<int>(cfg.kernels.size()) - 1))];
  d.noise_sigma = cfg.noise_sigma_min + (cfg.noise_sigma_max - cfg.noise_sigma_min) * rng.uniform();
  d.quant_levels = rng.uniform_int(cfg.quant_levels_min, cfg.quant_levels_max);
  return d;
}

Image degrade(const Image& img, const DegradationConfig& cfg, std::uint64_t seed) {
  require(img.height % cfg.factor == 0 && img.width % cfg.factor == 0,
          "degrade: image dimensions must be divisible by the downsampling factor");
  const DegradationDraw d = sample_degradation(cfg, seed);
  Image lq = downsample(gaussian_blur(img, d.blur_sigma), cfg.factor, d.kernel);
  if (d.noise_sigma > 0) {
    RngStream noise = RngStream(seed).split(1);
    for (auto& v : lq.data) v += d.noise_sigma * noise.normal();
  }
  const double steps = d.quant_levels - 1;
  for (auto& v : lq.data) v = std::round(std::clamp(v, 0.0, 1.0) * steps) / steps;
  return quantize8(std::move(lq));
}

LatticeSpec LatticeSpec::from(const SceneConfig& cfg) {
  return LatticeSpec{cfg.lattice_rows(), cfg.lattice_cols(), cfg.cell, cfg.glyph_scale};
}

Dataset make_dataset(int count, std::uint64_t global_seed, const SceneConfig& scene_cfg,
                     const DegradationConfig& deg_cfg, int threads, int first_index) {
  require(count >= 0, "make_dataset: negative count");
  scene_cfg.validate();
  deg_cfg.validate();
  Dataset ds;
  ds.meta = DatasetMeta{global_seed, scene_cfg, deg_cfg};
  ds.items.resize(static_cast<std::size_t>(count));
  const RngStream root(global_seed);
  auto build = [&](int i) {
    const auto index = static_cast<std::uint64_t>(first_index + i);
    auto& item = ds.items[static_cast<std::size_t>(i)];
    char id[16];
    std::snprintf(id, sizeof id, "%06llu", static_cast<unsigned long long>(index));
    item.id = id;
    item.scene = render_scene(root.split(2 * index).key(), scene_cfg);
    item.degradation_seed = root.split(2 * index + 1).key();
    item.lq = degrade(item.scene.image, deg_cfg, item.degradation_seed);
  };
  threads = std::clamp(threads, 1, std::max(1, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) build(i);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < threads; ++w)
      pool.emplace_back([&, w] {
        for (int i = w; i < count; i += threads) build(i);
      });
  }
  return ds;
}

}  // namespace glyphsr
