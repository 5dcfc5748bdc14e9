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

#include "glyphsr/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "glyphsr/errors.hpp"

namespace glyphsr {

double mse(const Image& a, const Image& b) {
  require(a.height == b.height && a.width == b.width && a.size() == b.size(), "mse: image shapes differ");
  require(a.size() > 0, "mse: empty image");
  double acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a.data[i] - b.data[i];
    acc += d * d;
  }
  return acc / static_cast<double>(a.size());
}

double psnr(const Image& a, const Image& b) {
  const double m = mse(a, b);
  if (m == 0.0) return kPsnrCap;
  return std::min(kPsnrCap, 10.0 * std::log10(1.0 / m));
}

double ssim(const Image& a, const Image& b, const SsimOptions& opts) {
  require(a.height == b.height && a.width == b.width, "ssim: image shapes differ");
  const int w = opts.window;
  require(w >= 1 && a.height >= w && a.width >= w, "ssim: image is smaller than the window");

  std::vector<double> g(static_cast<std::size_t>(w));
  const double c = (w - 1) / 2.0;
  for (int i = 0; i < w; ++i) g[static_cast<std::size_t>(i)] = std::exp(-0.5 * (i - c) * (i - c) / (opts.sigma * opts.sigma));
  const double z = std::accumulate(g.begin(), g.end(), 0.0);
  for (auto& v : g) v /= z;

  const auto ga = to_gray(a), gb = to_gray(b);
  const double c1 = opts.k1 * opts.k1, c2 = opts.k2 * opts.k2;
  const int oh = a.height - w + 1, ow = a.width - w + 1;
  double total = 0;
  for (int y = 0; y < oh; ++y)
    for (int x = 0; x < ow; ++x) {
      double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
      for (int dy = 0; dy < w; ++dy)
        for (int dx = 0; dx < w; ++dx) {
          const double k = g[static_cast<std::size_t>(dy)] * g[static_cast<std::size_t>(dx)];
          const std::size_t idx = static_cast<std::size_t>(y + dy) * a.width + x + dx;
          const double va = ga[idx], vb = gb[idx];
          ma += k * va;
          mb += k * vb;
          saa += k * va * va;
          sbb += k * vb * vb;
          sab += k * va * vb;
        }
      const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
      total += ((2 * ma * mb + c1) * (2 * cov + c2)) / ((ma * ma + mb * mb + c1) * (va + vb + c2));
    }
  return total / (static_cast<double>(oh) * ow);
}

namespace {

template <typename Seq>
std::size_t edit_distance(const Seq& a, const Seq& b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1)});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

template <typename Seq>
double normalized(const Seq& p, const Seq& g) {
  const std::size_t n = std::max(p.size(), g.size());
  if (n == 0) return 1.0;
  return 1.0 - static_cast<double>(edit_distance(p, g)) / static_cast<double>(n);
}

}  // namespace

std::size_t levenshtein(std::string_view a, std::string_view b) { return edit_distance(a, b); }
std::size_t levenshtein(std::span<const int> a, std::span<const int> b) { return edit_distance(a, b); }
double ned(std::string_view p, std::string_view g) { return normalized(p, g); }
double ned(std::span<const int> p, std::span<const int> g) { return normalized(p, g); }

}  // namespace glyphsr
