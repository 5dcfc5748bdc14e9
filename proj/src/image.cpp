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

#include "glyphsr/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include "glyphsr/errors.hpp"

namespace glyphsr {

Image::Image(int h, int w, double fill) : height(h), width(w) {
  require(h > 0 && w > 0, "Image: dimensions must be positive");
  data.assign(static_cast<std::size_t>(h) * w * kChannels, fill);
}

Image clamp01(Image img) {
  for (auto& v : img.data) v = std::clamp(v, 0.0, 1.0);
  return img;
}

namespace {
std::uint8_t to_byte(double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); }
}  // namespace

Image quantize8(Image img) {
  for (auto& v : img.data) v = to_byte(v) / 255.0;
  return img;
}

Image upsample_bilinear(const Image& img, int factor) {
  require(factor >= 1, "upsample_bilinear: factor must be positive");
  Image out(img.height * factor, img.width * factor);
  auto src_coord = [factor](int dst, int n, int& i0, int& i1, double& w1) {
    double s = (dst + 0.5) / factor - 0.5;
    s = std::clamp(s, 0.0, static_cast<double>(n - 1));
    i0 = static_cast<int>(std::floor(s));
    i1 = std::min(i0 + 1, n - 1);
    w1 = s - i0;
  };
  for (int y = 0; y < out.height; ++y) {
    int y0, y1;
    double wy;
    src_coord(y, img.height, y0, y1, wy);
    for (int x = 0; x < out.width; ++x) {
      int x0, x1;
      double wx;
      src_coord(x, img.width, x0, x1, wx);
      for (int c = 0; c < Image::kChannels; ++c) {
        const double top = (1 - wx) * img.at(y0, x0, c) + wx * img.at(y0, x1, c);
        const double bot = (1 - wx) * img.at(y1, x0, c) + wx * img.at(y1, x1, c);
        out.at(y, x, c) = (1 - wy) * top + wy * bot;
      }
    }
  }
  return out;
}

std::vector<double> to_gray(const Image& img) {
  std::vector<double> g(static_cast<std::size_t>(img.height) * img.width);
  for (std::size_t i = 0; i < g.size(); ++i)
    g[i] = (img.data[3 * i] + img.data[3 * i + 1] + img.data[3 * i + 2]) / 3.0;
  return g;
}

std::uint64_t content_digest(const Image& img) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&h](std::uint8_t b) {
    h ^= b;
    h *= 0x100000001b3ull;
  };
  for (int shift : {0, 8, 16, 24}) mix(static_cast<std::uint8_t>(img.height >> shift));
  for (int shift : {0, 8, 16, 24}) mix(static_cast<std::uint8_t>(img.width >> shift));
  for (double v : img.data) mix(to_byte(v));
  return h;
}

std::vector<std::uint8_t> encode_ppm(const Image& img) {
  const std::string header = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + img.data.size());
  for (double v : img.data) out.push_back(to_byte(v));
  return out;
}

Image decode_ppm(const std::vector<std::uint8_t>& bytes, const std::string& name) {
  std::size_t pos = 0;
  auto fail = [&](const std::string& what) -> ParseError { return ParseError(name, pos, what); };
  auto skip_space = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_int = [&]() {
    skip_space();
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw fail("expected an unsigned integer in the PPM header");
    long v = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      v = v * 10 + (bytes[pos++] - '0');
      if (v > 1 << 20) throw fail("PPM header value too large");
    }
    return static_cast<int>(v);
  };

  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '6') throw fail("missing P6 magic");
  pos = 2;
  const int w = read_int();
  const int h = read_int();
  const int maxval = read_int();
  if (w <= 0 || h <= 0) throw fail("PPM dimensions must be positive");
  if (maxval != 255) throw fail("only maxval 255 is supported");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw fail("expected a single whitespace byte after maxval");
  ++pos;
  const std::size_t need = static_cast<std::size_t>(w) * h * 3;
  if (bytes.size() - pos < need) {
    pos = bytes.size();
    throw fail("truncated pixel data: expected " + std::to_string(need) + " bytes");
  }
  Image img(h, w);
  for (std::size_t i = 0; i < need; ++i) img.data[i] = bytes[pos + i] / 255.0;
  return img;
}

void write_ppm(const Image& img, const std::filesystem::path& path) {
  const auto bytes = encode_ppm(img);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) throw std::runtime_error("failed writing " + path.string());
}

Image read_ppm(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw ParseError(path.string(), 0, "cannot open file");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_ppm(bytes, path.string());
}

}  // namespace glyphsr
