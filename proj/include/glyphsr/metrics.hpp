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

#include <cstddef>
#include <span>
#include <string_view>

#include "glyphsr/image.hpp"

namespace glyphsr {

inline constexpr double kPsnrCap = 99.0;

double mse(const Image& a, const Image& b);
// 10 log10(1 / MSE) over all channels; kPsnrCap when the images are equal.
double psnr(const Image& a, const Image& b);

struct SsimOptions {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
};

// Mean SSIM over every fully contained window of the grayscale images.
double ssim(const Image& a, const Image& b, const SsimOptions& opts = {});

std::size_t levenshtein(std::string_view a, std::string_view b);
std::size_t levenshtein(std::span<const int> a, std::span<const int> b);

// 1 - ED / max(|p|, |g|); 1 when both are empty.
double ned(std::string_view p, std::string_view g);
double ned(std::span<const int> p, std::span<const int> g);

}  // namespace glyphsr
