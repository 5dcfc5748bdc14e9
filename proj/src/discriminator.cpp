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

#include "glyphsr/discriminator.hpp"

#include <cmath>

#include "glyphsr/embeddings.hpp"
#include "glyphsr/errors.hpp"

namespace glyphsr {

using namespace ops;

void DiscriminatorConfig::validate() const {
  require(layers >= 1, "DiscriminatorConfig: layers must be >= 1");
  require(dim > 0 && heads > 0 && dim % heads == 0, "DiscriminatorConfig: dim must be divisible by heads");
  require(dim % 4 == 0, "DiscriminatorConfig: dim must be a multiple of 4");
  require(patch >= 1 && max_caption >= 1 && mlp_ratio >= 1 && conv_hidden >= 1,
          "DiscriminatorConfig: sizes must be positive");
  require(vocab >= Vocab::kSize, "DiscriminatorConfig: vocab smaller than the glyph vocabulary");
  require(t_embed_dim >= 2 && t_embed_dim % 2 == 0, "DiscriminatorConfig: t_embed_dim must be even");
}

namespace {

template <typename T>
void add_linear(ParamStore<T>& store, RngStream& rng, const std::string& p, int in, int out, bool zero = false) {
  store.add(p + ".w", zero ? Tensor<T>(Shape{in, out}) : normal_tensor<T>(rng, Shape{in, out}, 1.0 / std::sqrt(double(in))));
  store.add(p + ".b", Tensor<T>(Shape{out}));
}

template <typename T>
Var<T> lin(Binder<T>& b, const std::string& p, Var<T> x) {
  return linear(x, b(p + ".w"), b(p + ".b"));
}

template <typename T>
Var<T> modulate(Var<T> x, Var<T> shift, Var<T> sc) {
  return add(mul(layernorm(x), add_scalar(sc, T(1))), shift);
}

}  // namespace

template <typename T>
DiscriminatorParams<T> init_discriminator(const DiscriminatorConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  DiscriminatorParams<T> params{cfg, {}};
  auto& s = params.store;
  RngStream rng = RngStream(seed).split(0x64697363);
  const int d = cfg.dim, m = cfg.dim * cfg.mlp_ratio;
  add_linear(s, rng, "d.t_embed.fc1", cfg.t_embed_dim, d);
  add_linear(s, rng, "d.t_embed.fc2", d, d);
  add_linear(s, rng, "d.in", cfg.token_dim(), d);
  s.add("d.text.embed", normal_tensor<T>(rng, Shape{cfg.vocab, d}, 1.0));
  s.add("d.text.pos", normal_tensor<T>(rng, Shape{cfg.max_caption, d}, 0.1));
  for (int l = 0; l < cfg.layers; ++l) {
    const std::string p = "d.L" + std::to_string(l);
    add_linear(s, rng, p + ".mod", d, 9 * d, true);
    for (const char* n : {".q", ".k", ".v", ".out", ".xq", ".xk", ".xv", ".xout"}) add_linear(s, rng, p + n, d, d);
    add_linear(s, rng, p + ".mlp1", d, m);
    add_linear(s, rng, p + ".mlp2", m, d);
  }
  s.add("d.conv1.w", normal_tensor<T>(rng, Shape{cfg.conv_hidden, d, 3, 3}, 1.0 / std::sqrt(9.0 * d)));
  s.add("d.conv1.b", Tensor<T>(Shape{cfg.conv_hidden}));
  s.add("d.conv2.w", normal_tensor<T>(rng, Shape{1, cfg.conv_hidden, 3, 3}, 1.0 / std::sqrt(9.0 * cfg.conv_hidden)));
  s.add("d.conv2.b", Tensor<T>(Shape{1}));
  return params;
}

template <typename T>
Var<T> score_patches(Binder<T>& b, const DiscriminatorConfig& cfg, Var<T> x, int gh, int gw, double t,
                     std::span<const int> caption) {
  cfg.validate();
  require(x.value().rank() == 2 && x.shape()[0] == gh * gw && x.shape()[1] == cfg.token_dim(),
          "score_patches: latent must be [" + std::to_string(gh * gw) + ", " + std::to_string(cfg.token_dim()) +
              "], got " + shape_str(x.shape()));
  require(static_cast<int>(caption.size()) == cfg.max_caption,
          "score_patches: caption must be padded to " + std::to_string(cfg.max_caption) + " tokens");
  require(x.value().all_finite(), "score_patches: non-finite input latent");
  Tape<T>& tape = b.tape();
  const int d = cfg.dim;

  Var<T> c = silu(lin(b, "d.t_embed.fc2", silu(lin(b, "d.t_embed.fc1", tape.constant(timestep_embedding<T>(t, cfg.t_embed_dim))))));
  Var<T> h = add(lin(b, "d.in", x), tape.constant(grid_positions<T>(gh, gw, d)));
  Var<T> txt = add(embedding(b("d.text.embed"), caption), b("d.text.pos"));
  std::vector<std::uint8_t> mask;
  for (int id : caption) mask.push_back(id != Vocab::kPad);

  for (int l = 0; l < cfg.layers; ++l) {
    const std::string p = "d.L" + std::to_string(l);
    Var<T> mod = reshape(lin(b, p + ".mod", c), Shape{9, d});
    auto row = [&](int i) { return slice_rows(mod, i, i + 1); };
    Var<T> a = modulate(h, row(0), row(1));
    a = attention(lin(b, p + ".q", a), lin(b, p + ".k", a), lin(b, p + ".v", a), cfg.heads);
    h = add(h, mul(lin(b, p + ".out", a), row(2)));
    Var<T> xa = modulate(h, row(3), row(4));
    xa = attention(lin(b, p + ".xq", xa), lin(b, p + ".xk", txt), lin(b, p + ".xv", txt), cfg.heads,
                   std::span<const std::uint8_t>(mask));
    h = add(h, mul(lin(b, p + ".xout", xa), row(5)));
    Var<T> f = gelu(lin(b, p + ".mlp1", modulate(h, row(6), row(7))));
    h = add(h, mul(lin(b, p + ".mlp2", f), row(8)));
  }

  Var<T> img = reshape(transpose(layernorm(h)), Shape{d, gh, gw});
  Var<T> y = silu(conv2d(img, b("d.conv1.w"), b("d.conv1.b"), 1));
  y = conv2d(y, b("d.conv2.w"), b("d.conv2.b"), 1);
  return reshape(y, Shape{gh * gw});
}

template <typename T>
Tensor<T> predict_scores(const DiscriminatorParams<T>& params, const Tensor<T>& x, int gh, int gw, double t,
                         std::span<const int> caption) {
  Tape<T> tape;
  Binder<T> bind(tape, params.store);
  return score_patches(bind, params.config, tape.constant(x), gh, gw, t, caption).value();
}

template <typename T>
Var<T> relativistic_prob(Var<T> a, Var<T> b) {
  require(a.shape() == b.shape(), "relativistic_prob: score grids differ in shape");
  return sigmoid(sub(a, b));
}

#define GLYPHSR_INSTANTIATE_DISC(T)                                                                              \
  template DiscriminatorParams<T> init_discriminator<T>(const DiscriminatorConfig&, std::uint64_t);              \
  template Var<T> score_patches<T>(Binder<T>&, const DiscriminatorConfig&, Var<T>, int, int, double,            \
                                   std::span<const int>);                                                        \
  template Tensor<T> predict_scores<T>(const DiscriminatorParams<T>&, const Tensor<T>&, int, int, double,       \
                                       std::span<const int>);                                                    \
  template Var<T> relativistic_prob<T>(Var<T>, Var<T>);

GLYPHSR_INSTANTIATE_DISC(float)
GLYPHSR_INSTANTIATE_DISC(double)

}  // namespace glyphsr
