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

#include "glyphsr/generator.hpp"

#include <algorithm>
#include <cmath>

#include "glyphsr/embeddings.hpp"
#include "glyphsr/errors.hpp"

namespace glyphsr {

using namespace ops;

void GeneratorConfig::validate() const {
  require(layers >= 1, "GeneratorConfig: layers must be >= 1");
  require(dim > 0 && heads > 0 && dim % heads == 0, "GeneratorConfig: dim must be divisible by heads");
  require(dim % 4 == 0, "GeneratorConfig: dim must be a multiple of 4 for 2-D positions");
  require(patch >= 1, "GeneratorConfig: patch must be >= 1");
  require(vocab >= Vocab::kSize, "GeneratorConfig: vocab smaller than the glyph vocabulary");
  require(max_caption >= 1, "GeneratorConfig: max_caption must be >= 1");
  require(lora_rank >= 1, "GeneratorConfig: lora_rank must be >= 1");
  require(lora_alpha > 0, "GeneratorConfig: lora_alpha must be positive");
  require(t_embed_dim >= 2 && t_embed_dim % 2 == 0, "GeneratorConfig: t_embed_dim must be even");
  require(mlp_ratio >= 1, "GeneratorConfig: mlp_ratio must be >= 1");
}

namespace {

constexpr const char* kBlockLinears[] = {"mod", "q", "k", "v", "out", "mlp1", "mlp2"};

std::string layer_prefix(const std::string& stream, int l) { return stream + ".L" + std::to_string(l); }

std::vector<LinearShape> stream_linears(const GeneratorConfig& cfg, const std::string& stream, bool visual) {
  const int d = cfg.dim, m = cfg.dim * cfg.mlp_ratio;
  std::vector<LinearShape> out;
  if (visual) out.push_back({stream + ".in", cfg.token_dim(), d});
  for (int l = 0; l < cfg.layers; ++l) {
    const std::string p = layer_prefix(stream, l);
    out.push_back({p + ".mod", d, 6 * d});
    out.push_back({p + ".q", d, d});
    out.push_back({p + ".k", d, d});
    out.push_back({p + ".v", d, d});
    out.push_back({p + ".out", d, d});
    out.push_back({p + ".mlp1", d, m});
    out.push_back({p + ".mlp2", m, d});
  }
  return out;
}

bool is_zero_init(const std::string& prefix) {
  return prefix.ends_with(".mod") || prefix == "final.head";
}

template <typename T>
void add_linear(ParamStore<T>& store, RngStream& rng, const LinearShape& s) {
  if (is_zero_init(s.prefix))
    store.add(s.prefix + ".w", Tensor<T>(Shape{s.in, s.out}));
  else
    store.add(s.prefix + ".w", normal_tensor<T>(rng, Shape{s.in, s.out}, 1.0 / std::sqrt(double(s.in))));
  store.add(s.prefix + ".b", Tensor<T>(Shape{s.out}));
}

template <typename T>
void draw_lora(ParamStore<T>& store, const GeneratorConfig& cfg, RngStream rng, bool create) {
  for (const auto& s : control_linears(cfg)) {
    Tensor<T> a = normal_tensor<T>(rng, Shape{s.in, cfg.lora_rank}, 1.0 / std::sqrt(double(s.in)));
    Tensor<T> b(Shape{cfg.lora_rank, s.out});
    if (create) {
      store.add(s.prefix + ".lora_a", std::move(a));
      store.add(s.prefix + ".lora_b", std::move(b));
    } else {
      store[s.prefix + ".lora_a"] = std::move(a);
      store[s.prefix + ".lora_b"] = std::move(b);
    }
  }
}

template <typename T>
void copy_prior_to_control(ParamStore<T>& store) {
  for (int i = 0; i < store.size(); ++i) {
    const std::string& n = store.name(i);
    if (!n.starts_with("prior.")) continue;
    store["control." + n.substr(6)] = store.value(i);
  }
}

template <typename T>
struct Modulation {
  Var<T> shift1, scale1, gate1, shift2, scale2, gate2;
};

struct Stream {
  std::string name;
  int cond = 0;  // index into the conditioning vectors
};

template <typename T>
class Net {
 public:
  Net(Binder<T>& bind, const GeneratorConfig& cfg) : b_(bind), cfg_(cfg) { cfg.validate(); }

  Var<T> lin(const std::string& p, Var<T> x) {
    Var<T> y = linear(x, b_(p + ".w"), b_(p + ".b"));
    if (p.starts_with("control."))
      y = add(y, scale(matmul(matmul(x, b_(p + ".lora_a")), b_(p + ".lora_b")), T(cfg_.lora_scale())));
    return y;
  }

  // silu(c(t)), ready to feed the modulation linears.
  Var<T> condition(double t) {
    Var<T> e = b_.tape().constant(timestep_embedding<T>(t, cfg_.t_embed_dim));
    Var<T> c = lin("t_embed.fc2", silu(lin("t_embed.fc1", e)));
    return silu(c);
  }

  Var<T> text_tokens(std::span<const int> caption) {
    require(static_cast<int>(caption.size()) == cfg_.max_caption,
            "generator: caption must be padded to " + std::to_string(cfg_.max_caption) + " tokens, got " +
                std::to_string(caption.size()));
    for (int id : caption) require(id >= 0 && id < cfg_.vocab, "generator: caption token out of vocabulary");
    return add(embedding(b_("text.embed"), caption), b_("text.pos"));
  }

  Var<T> visual_tokens(const std::string& stream, Var<T> x, int gh, int gw) {
    require(x.value().rank() == 2 && x.shape()[0] == gh * gw && x.shape()[1] == cfg_.token_dim(),
            "generator: latent must be [" + std::to_string(gh * gw) + ", " + std::to_string(cfg_.token_dim()) +
                "], got " + shape_str(x.shape()));
    return add(lin(stream + ".in", x), b_.tape().constant(grid_positions<T>(gh, gw, cfg_.dim)));
  }

  Modulation<T> modulation(const std::string& p, Var<T> c) {
    Var<T> m = reshape(lin(p + ".mod", c), Shape{6, cfg_.dim});
    return {slice_rows(m, 0, 1), slice_rows(m, 1, 2), slice_rows(m, 2, 3),
            slice_rows(m, 3, 4), slice_rows(m, 4, 5), slice_rows(m, 5, 6)};
  }

  static Var<T> modulate(Var<T> x, Var<T> shift, Var<T> sc) { return add(mul(layernorm(x), add_scalar(sc, T(1))), shift); }

  // One joint-attention block over all streams; xs is updated in place.
  void block(int l, const std::vector<Stream>& streams, std::vector<Var<T>>& xs, const std::vector<Var<T>>& conds,
             std::span<const std::uint8_t> mask, ForwardTrace<T>* trace) {
    std::vector<Modulation<T>> mods;
    std::vector<Var<T>> qs, ks, vs;
    for (std::size_t s = 0; s < streams.size(); ++s) {
      const std::string p = layer_prefix(streams[s].name, l);
      mods.push_back(modulation(p, conds[static_cast<std::size_t>(streams[s].cond)]));
      Var<T> h = modulate(xs[s], mods.back().shift1, mods.back().scale1);
      qs.push_back(lin(p + ".q", h));
      ks.push_back(lin(p + ".k", h));
      vs.push_back(lin(p + ".v", h));
      if (trace) {
        if (streams[s].name == "prior") {
          trace->prior_k.push_back(ks.back().value());
          trace->prior_v.push_back(vs.back().value());
        } else if (streams[s].name == "control") {
          trace->control_k.push_back(ks.back().value());
          trace->control_v.push_back(vs.back().value());
        }
      }
    }
    Var<T> q = qs.size() == 1 ? qs[0] : concat_rows<T>(qs);
    Var<T> k = ks.size() == 1 ? ks[0] : concat_rows<T>(ks);
    Var<T> v = vs.size() == 1 ? vs[0] : concat_rows<T>(vs);
    Var<T> a = attention(q, k, v, cfg_.heads, mask);
    int row = 0;
    for (std::size_t s = 0; s < streams.size(); ++s) {
      const std::string p = layer_prefix(streams[s].name, l);
      const int n = xs[s].shape()[0];
      Var<T> as = streams.size() == 1 ? a : slice_rows(a, row, row + n);
      row += n;
      const auto& m = mods[s];
      Var<T> x = add(xs[s], mul(lin(p + ".out", as), m.gate1));
      Var<T> h = gelu(lin(p + ".mlp1", modulate(x, m.shift2, m.scale2)));
      xs[s] = add(x, mul(lin(p + ".mlp2", h), m.gate2));
    }
  }

  Var<T> head(Var<T> x, Var<T> c) {
    Var<T> m = reshape(lin("final.mod", c), Shape{2, cfg_.dim});
    return lin("final.head", modulate(x, slice_rows(m, 0, 1), slice_rows(m, 1, 2)));
  }

  Binder<T>& binder() { return b_; }

 private:
  Binder<T>& b_;
  const GeneratorConfig& cfg_;
};

std::vector<std::uint8_t> key_mask(std::span<const int> caption, int visual_tokens) {
  std::vector<std::uint8_t> mask;
  mask.reserve(caption.size() + static_cast<std::size_t>(visual_tokens));
  for (int id : caption) mask.push_back(id != Vocab::kPad);
  mask.insert(mask.end(), static_cast<std::size_t>(visual_tokens), 1);
  return mask;
}

}  // namespace

std::vector<LinearShape> control_linears(const GeneratorConfig& cfg) { return stream_linears(cfg, "control", true); }

template <typename T>
GeneratorParams<T> init_generator(const GeneratorConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  GeneratorParams<T> params{cfg, {}};
  auto& store = params.store;
  RngStream rng = RngStream(seed).split(0x67656e);
  const int d = cfg.dim;

  add_linear(store, rng, {"t_embed.fc1", cfg.t_embed_dim, d});
  add_linear(store, rng, {"t_embed.fc2", d, d});
  store.add("text.embed", normal_tensor<T>(rng, Shape{cfg.vocab, d}, 1.0));
  store.add("text.pos", normal_tensor<T>(rng, Shape{cfg.max_caption, d}, 0.1));
  for (const auto& s : stream_linears(cfg, "text", false)) add_linear(store, rng, s);
  for (const auto& s : stream_linears(cfg, "prior", true)) add_linear(store, rng, s);
  add_linear(store, rng, {"final.mod", d, 2 * d});
  add_linear(store, rng, {"final.head", d, cfg.token_dim()});
  for (const auto& s : control_linears(cfg)) {
    store.add(s.prefix + ".w", Tensor<T>(Shape{s.in, s.out}));
    store.add(s.prefix + ".b", Tensor<T>(Shape{s.out}));
  }
  copy_prior_to_control(store);
  draw_lora(store, cfg, RngStream(seed).split(0x6c6f7261), true);
  return params;
}

template <typename T>
void reset_control_stream(GeneratorParams<T>& params, std::uint64_t seed) {
  copy_prior_to_control(params.store);
  draw_lora(params.store, params.config, RngStream(seed).split(0x6c6f7261), false);
}

template <typename T>
void sync_control_stream(GeneratorParams<T>& params) {
  copy_prior_to_control(params.store);
}

template <typename T>
std::vector<int> trainable_parameters(const GeneratorParams<T>& params, Stage stage) {
  std::vector<int> ids;
  for (int i = 0; i < params.store.size(); ++i) {
    const std::string& n = params.store.name(i);
    const bool lora = n.ends_with(".lora_a") || n.ends_with(".lora_b");
    if (stage == Stage::kPretrain ? !n.starts_with("control.") : lora) ids.push_back(i);
  }
  return ids;
}

template <typename T>
std::vector<bool> trainable_mask(const GeneratorParams<T>& params, Stage stage) {
  std::vector<bool> mask(static_cast<std::size_t>(params.store.size()), false);
  for (int id : trainable_parameters(params, stage)) mask[static_cast<std::size_t>(id)] = true;
  return mask;
}

template <typename T>
Var<T> forward_velocity(Binder<T>& bind, const GeneratorConfig& cfg, Var<T> x_tp, Var<T> x_tc, int gh, int gw,
                        double t_p, double t_c, std::span<const int> caption, ForwardTrace<T>* trace) {
  require(x_tp.shape() == x_tc.shape(), "forward_velocity: prior and control grids differ in shape");
  Net<T> net(bind, cfg);
  const std::vector<Var<T>> conds{net.condition(t_p), net.condition(t_c)};
  const std::vector<Stream> streams{{"text", 0}, {"prior", 0}, {"control", 1}};
  std::vector<Var<T>> xs{net.text_tokens(caption), net.visual_tokens("prior", x_tp, gh, gw),
                         net.visual_tokens("control", x_tc, gh, gw)};
  auto mask = key_mask(caption, 2 * gh * gw);
  for (int l = 0; l < cfg.layers; ++l) net.block(l, streams, xs, conds, mask, trace);
  return net.head(xs[1], conds[0]);
}

template <typename T>
Var<T> forward_pretrain(Binder<T>& bind, const GeneratorConfig& cfg, Var<T> x_t, int gh, int gw, double t,
                        std::span<const int> caption) {
  Net<T> net(bind, cfg);
  const std::vector<Var<T>> conds{net.condition(t)};
  const std::vector<Stream> streams{{"text", 0}, {"prior", 0}};
  std::vector<Var<T>> xs{net.text_tokens(caption), net.visual_tokens("prior", x_t, gh, gw)};
  auto mask = key_mask(caption, gh * gw);
  for (int l = 0; l < cfg.layers; ++l) net.block(l, streams, xs, conds, mask, nullptr);
  return net.head(xs[1], conds[0]);
}

template <typename T>
Var<T> prior_features(Binder<T>& bind, const GeneratorConfig& cfg, Var<T> x, int gh, int gw, int layers) {
  require(layers >= 1 && layers <= cfg.layers, "prior_features: layer count out of range");
  Net<T> net(bind, cfg);
  const std::vector<Var<T>> conds{net.condition(0.0)};
  const std::vector<Stream> streams{{"prior", 0}};
  std::vector<Var<T>> xs{net.visual_tokens("prior", x, gh, gw)};
  for (int l = 0; l < layers; ++l) net.block(l, streams, xs, conds, {}, nullptr);
  return xs[0];
}

template <typename T>
Tensor<T> predict_velocity(const GeneratorParams<T>& params, const Tensor<T>& x_tp, const Tensor<T>& x_tc, int gh,
                           int gw, double t_p, double t_c, std::span<const int> caption) {
  Tape<T> tape;
  Binder<T> bind(tape, params.store);
  return forward_velocity(bind, params.config, tape.constant(x_tp), tape.constant(x_tc), gh, gw, t_p, t_c, caption)
      .value();
}

template <typename T>
Tensor<T> predict_pretrain(const GeneratorParams<T>& params, const Tensor<T>& x_t, int gh, int gw, double t,
                           std::span<const int> caption) {
  Tape<T> tape;
  Binder<T> bind(tape, params.store);
  return forward_pretrain(bind, params.config, tape.constant(x_t), gh, gw, t, caption).value();
}

#define GLYPHSR_INSTANTIATE_GENERATOR(T)                                                                          \
  template GeneratorParams<T> init_generator<T>(const GeneratorConfig&, std::uint64_t);                           \
  template void reset_control_stream<T>(GeneratorParams<T>&, std::uint64_t);                                      \
  template void sync_control_stream<T>(GeneratorParams<T>&);                                                      \
  template std::vector<int> trainable_parameters<T>(const GeneratorParams<T>&, Stage);                            \
  template std::vector<bool> trainable_mask<T>(const GeneratorParams<T>&, Stage);                                 \
  template Var<T> forward_velocity<T>(Binder<T>&, const GeneratorConfig&, Var<T>, Var<T>, int, int, double, double, \
                                      std::span<const int>, ForwardTrace<T>*);                                    \
  template Var<T> forward_pretrain<T>(Binder<T>&, const GeneratorConfig&, Var<T>, int, int, double,              \
                                      std::span<const int>);                                                      \
  template Var<T> prior_features<T>(Binder<T>&, const GeneratorConfig&, Var<T>, int, int, int);                   \
  template Tensor<T> predict_velocity<T>(const GeneratorParams<T>&, const Tensor<T>&, const Tensor<T>&, int, int, \
                                         double, double, std::span<const int>);                                   \
  template Tensor<T> predict_pretrain<T>(const GeneratorParams<T>&, const Tensor<T>&, int, int, double,          \
                                         std::span<const int>);

GLYPHSR_INSTANTIATE_GENERATOR(float)
GLYPHSR_INSTANTIATE_GENERATOR(double)

}  // namespace glyphsr
