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

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace glyphsr {

// RGB image, interleaved rows top to bottom, values nominally in [0, 1].
struct Image {
  int height = 0;
  int width = 0;
  std::vector<double> data;  // height * width * 3

  Image() = default;
  Image(int h, int w, double fill = 0.0);

  static constexpr int kChannels = 3;

  double& at(int y, int x, int c) { return data[(static_cast<std::size_t>(y) * width + x) * kChannels + c]; }
  double at(int y, int x, int c) const { return data[(static_cast<std::size_t>(y) * width + x) * kChannels + c]; }
  std::size_t size() const noexcept { return data.size(); }

  friend bool operator==(const Image&, const Image&) = default;
};

Image clamp01(Image img);

// Rounds each value to the nearest multiple of 1/255 (what an 8-bit PPM stores).
Image quantize8(Image img);

// Half-pixel-centred bilinear resize by an integer factor, edges clamped.
Image upsample_bilinear(const Image& img, int factor);

// Per-pixel channel mean, row-major [height * width].
std::vector<double> to_gray(const Image& img);

// 64-bit FNV-1a over the 8-bit rendering of the image.
std::uint64_t content_digest(const Image& img);

// Binary PPM (P6, maxval 255). Reading reports malformed input as ParseError
// with the file name and byte offset.
void write_ppm(const Image& img, const std::filesystem::path& path);
Image read_ppm(const std::filesystem::path& path);

std::vector<std::uint8_t> encode_ppm(const Image& img);
Image decode_ppm(const std::vector<std::uint8_t>& bytes, const std::string& name);

}  // namespace glyphsr
