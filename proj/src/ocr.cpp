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

#include <algorithm>
#include <limits>

#include "glyphsr/datagen.hpp"
#include "glyphsr/errors.hpp"

namespace glyphsr {

namespace {

// Ink coverage: paper (gray >= 0.6) reads 0, ink (gray <= 0.25) reads 1.
double ink(double gray) { return std::clamp((0.6 - gray) / 0.35, 0.0, 1.0); }

struct Templates {
  std::vector<std::vector<double>> masks;
  double lightest = 0;
};

Templates build_templates(const LatticeSpec& lat) {
  Templates t;
  t.lightest = std::numeric_limits<double>::infinity();
  const int s = lat.glyph_scale;
  const int off_x = (lat.cell - kGlyphWidth * s) / 2;
  const int off_y = (lat.cell - kGlyphHeight * s) / 2;
  for (int g = 0; g < kNumGlyphs; ++g) {
    std::vector<double> m(static_cast<std::size_t>(lat.cell) * lat.cell, 0.0);
    const auto& bmp = glyph_bitmap(g);
    double mass = 0;
    for (int gy = 0; gy < kGlyphHeight * s; ++gy)
      for (int gx = 0; gx < kGlyphWidth * s; ++gx)
        if (bmp[static_cast<std::size_t>(gy / s)][static_cast<std::size_t>(gx / s)] == '#') {
          m[static_cast<std::size_t>(off_y + gy) * lat.cell + off_x + gx] = 1.0;
          mass += 1.0;
        }
    t.lightest = std::min(t.lightest, mass);
    t.masks.push_back(std::move(m));
  }
  return t;
}

}  // namespace

std::string toy_ocr(const Image& img, const LatticeSpec& lat, const OcrOptions& opts) {
  require(img.height == lat.rows * lat.cell && img.width == lat.cols * lat.cell,
          "toy_ocr: image size does not match the lattice");
  const Templates templates = build_templates(lat);
  const auto gray = to_gray(img);
  std::string out;
  std::vector<double> cell(static_cast<std::size_t>(lat.cell) * lat.cell);
  for (int r = 0; r < lat.rows; ++r)
    for (int c = 0; c < lat.cols; ++c) {
      double total = 0;
      for (int y = 0; y < lat.cell; ++y)
        for (int x = 0; x < lat.cell; ++x) {
          const double v = ink(gray[static_cast<std::size_t>(r * lat.cell + y) * img.width + c * lat.cell + x]);
          cell[static_cast<std::size_t>(y) * lat.cell + x] = v;
          total += v;
        }
      if (total < opts.blank_fraction * templates.lightest) continue;
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int g = 0; g < kNumGlyphs; ++g) {
        double d = 0;
        const auto& m = templates.masks[static_cast<std::size_t>(g)];
        for (std::size_t i = 0; i < cell.size(); ++i) d += (cell[i] - m[i]) * (cell[i] - m[i]);
        if (d < best_d) {
          best_d = d;
          best = g;
        }
      }
      out.push_back(glyph_char(best));
    }
  return out;
}

}  // namespace glyphsr
