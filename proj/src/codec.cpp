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

#include "glyphsr/codec.hpp"

namespace glyphsr {

template <typename T>
LatentGrid<T> encode(const Image& img, int patch) {
  require(patch >= 1, "encode: patch must be positive");
  require(img.height > 0 && img.height % patch == 0 && img.width % patch == 0,
          "encode: image dimensions must be divisible by the patch size");
  LatentGrid<T> lat;
  lat.grid_h = img.height / patch;
  lat.grid_w = img.width / patch;
  const int dim = Image::kChannels * patch * patch;
  lat.tokens = Tensor<T>(Shape{lat.grid_h * lat.grid_w, dim});
  T* out = lat.tokens.ptr();
  for (int gy = 0; gy < lat.grid_h; ++gy)
    for (int gx = 0; gx < lat.grid_w; ++gx)
      for (int py = 0; py < patch; ++py)
        for (int px = 0; px < patch; ++px)
          for (int c = 0; c < Image::kChannels; ++c)
            *out++ = static_cast<T>(img.at(gy * patch + py, gx * patch + px, c));
  return lat;
}

template <typename T>
Image decode_unclamped(const LatentGrid<T>& lat, int patch) {
  require(patch >= 1, "decode: patch must be positive");
  require(lat.tokens.rank() == 2 && lat.tokens.dim(0) == lat.grid_h * lat.grid_w,
          "decode: token count does not match the grid");
  require(lat.token_dim() == Image::kChannels * patch * patch, "decode: token dimension must equal 3 * patch^2");
  Image img(lat.grid_h * patch, lat.grid_w * patch);
  const T* in = lat.tokens.ptr();
  for (int gy = 0; gy < lat.grid_h; ++gy)
    for (int gx = 0; gx < lat.grid_w; ++gx)
      for (int py = 0; py < patch; ++py)
        for (int px = 0; px < patch; ++px)
          for (int c = 0; c < Image::kChannels; ++c)
            img.at(gy * patch + py, gx * patch + px, c) = static_cast<double>(*in++);
  return img;
}

template <typename T>
Image decode(const LatentGrid<T>& lat, int patch) {
  return clamp01(decode_unclamped(lat, patch));
}

template LatentGrid<float> encode(const Image&, int);
template LatentGrid<double> encode(const Image&, int);
template Image decode(const LatentGrid<float>&, int);
template Image decode(const LatentGrid<double>&, int);
template Image decode_unclamped(const LatentGrid<float>&, int);
template Image decode_unclamped(const LatentGrid<double>&, int);

}  // namespace glyphsr
