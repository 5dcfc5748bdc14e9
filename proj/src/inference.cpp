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

#include "glyphsr/inference.hpp"

#include "glyphsr/codec.hpp"
#include "glyphsr/errors.hpp"

namespace glyphsr {

template <typename T>
Image restore(const GeneratorParams<T>& gen, const NoiseSchedule& sched, const Image& lq, const RestoreOptions& opts) {
  const FidelityWeight f(opts.fidelity);
  const int p = gen.config.patch;
  require(lq.height > 0 && lq.width > 0, "restore: empty input image");
  require((4 * lq.height) % p == 0 && (4 * lq.width) % p == 0,
          "restore: upsampled size " + std::to_string(4 * lq.height) + "x" + std::to_string(4 * lq.width) +
              " is not a multiple of the patch size " + std::to_string(p));
  const auto up = encode<T>(upsample_bilinear(lq, 4), p);
  const double t_p = sched.t_p;
  const double t_c = control_t(f, t_p);
  const RngStream root(opts.noise_seed);
  RngStream r1 = root.split(0), r2 = root.split(1);
  const Tensor<T> x_tp = interpolate(up.tokens, Tensor<T>(up.tokens.shape(), r1.normals<T>(up.tokens.size())), t_p);
  const Tensor<T> x_tc =
      t_c > 0 ? interpolate(up.tokens, Tensor<T>(up.tokens.shape(), r2.normals<T>(up.tokens.size())), t_c) : up.tokens;
  const auto caption = prompt_tokens(opts.prompt, opts.tpl, gen.config.max_caption);
  const Tensor<T> v = predict_velocity(gen, x_tp, x_tc, up.grid_h, up.grid_w, t_p, t_c, caption);
  return decode<T>(LatentGrid<T>{up.grid_h, up.grid_w, one_step_update(x_tp, v, t_p)}, p);
}

template Image restore<float>(const GeneratorParams<float>&, const NoiseSchedule&, const Image&, const RestoreOptions&);
template Image restore<double>(const GeneratorParams<double>&, const NoiseSchedule&, const Image&,
                               const RestoreOptions&);

}  // namespace glyphsr
