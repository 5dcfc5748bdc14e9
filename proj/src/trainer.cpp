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

#include "glyphsr/trainer.hpp"

#include <cstring>

#include "glyphsr/codec.hpp"
#include "glyphsr/errors.hpp"

namespace glyphsr {

using namespace ops;

template <typename T>
std::uint64_t tensor_digest(const Tensor<T>& t) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto mix = [&](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ull;
    }
  };
  for (int d : t.shape()) mix(&d, sizeof d);
  mix(t.ptr(), t.size() * sizeof(T));
  return h;
}

template <typename T>
TrainingExample<T> make_example(const Image& gt, const Image& lq, const std::string& caption, int patch) {
  require(gt.height == 4 * lq.height && gt.width == 4 * lq.width, "make_example: LQ must be 1/4 of the GT size");
  TrainingExample<T> ex;
  auto g = encode<T>(gt, patch);
  ex.gt = std::move(g.tokens);
  ex.grid_h = g.grid_h;
  ex.grid_w = g.grid_w;
  ex.lq = encode<T>(upsample_bilinear(lq, 4), patch).tokens;
  ex.caption = caption;
  return ex;
}

template <typename T>
std::vector<TrainingExample<T>> make_examples(const Dataset& ds, int patch) {
  std::vector<TrainingExample<T>> out;
  out.reserve(ds.items.size());
  for (const auto& item : ds.items) out.push_back(make_example<T>(item.scene.image, item.lq, item.scene.caption, patch));
  return out;
}

namespace {

template <typename T>
OptimizerSlots<T> make_slots(const ParamStore<T>& store, std::vector<int> ids) {
  OptimizerSlots<T> slots;
  for (int id : ids) slots.states.push_back(make_rmsprop_state<T>(store.value(id).shape()));
  slots.ids = std::move(ids);
  return slots;
}

template <typename T>
void apply_updates(ParamStore<T>& store, OptimizerSlots<T>& slots, const std::vector<Tensor<T>>& grads, double lr) {
  for (std::size_t i = 0; i < slots.ids.size(); ++i) {
    const auto id = static_cast<std::size_t>(slots.ids[i]);
    rmsprop_step(store.value(slots.ids[i]), grads[id], slots.states[i], T(lr));
  }
}

template <typename T>
void check_finite(double v, const char* what, const TrainState<T>& st, const RngStream& it) {
  if (!std::isfinite(v))
    throw NonFiniteError(std::string("non-finite ") + what + " at iteration " + std::to_string(st.iteration) +
                         " (batch seed key " + std::to_string(it.key()) + ", counter " + std::to_string(it.counter()) +
                         ")");
}

template <typename T>
Var<T> accumulate(Var<T> acc, Var<T> term) {
  return acc.valid() ? add(acc, term) : term;
}

template <typename T>
Tensor<T> noise_like(RngStream& rng, const Tensor<T>& like) {
  return Tensor<T>(like.shape(), rng.normals<T>(like.size()));
}

std::vector<int> caption_prompt(const std::string& caption, PromptTemplate tpl, bool keep, int max_len) {
  return keep ? prompt_tokens(caption, tpl, max_len) : empty_prompt(max_len);
}

}  // namespace

FaaDraw draw_faa_item(RngStream& rng, const TrainConfig& cfg) {
  FaaDraw d;
  d.f = cfg.f_min + (cfg.f_max - cfg.f_min) * rng.uniform();
  d.keep_prompt = rng.bernoulli(cfg.prompt_keep);
  d.tpl = rng.bernoulli(0.5) ? PromptTemplate::kVerbose : PromptTemplate::kTerse;
  return d;
}

template <typename T>
std::vector<std::uint64_t> frozen_digests(const GeneratorParams<T>& gen) {
  std::vector<std::uint64_t> out;
  for (int i = 0; i < gen.store.size(); ++i) out.push_back(tensor_digest(gen.store.value(i)));
  return out;
}

template <typename T>
void audit_frozen(const Session<T>& s) {
  const auto& ref = s.state.frozen_digests;
  require(ref.size() == static_cast<std::size_t>(s.gen.store.size()), "audit_frozen: no reference digests recorded");
  const auto mask = trainable_mask(s.gen, Stage::kFaa);
  for (int i = 0; i < s.gen.store.size(); ++i) {
    if (mask[static_cast<std::size_t>(i)]) continue;
    if (tensor_digest(s.gen.store.value(i)) != ref[static_cast<std::size_t>(i)])
      throw FrozenDriftError("frozen generator parameter '" + s.gen.store.name(i) + "' changed at iteration " +
                             std::to_string(s.state.iteration));
  }
}

template <typename T>
Session<T> start_pretrain(const TrainConfig& cfg) {
  cfg.validate();
  Session<T> s{cfg, init_generator<T>(cfg.generator, cfg.seed), std::nullopt, {}};
  s.config.stage = Stage::kPretrain;
  s.state.stage = Stage::kPretrain;
  s.state.seed = cfg.seed;
  s.state.g_opt = make_slots(s.gen.store, trainable_parameters(s.gen, Stage::kPretrain));
  return s;
}

template <typename T>
Session<T> start_faa(const TrainConfig& cfg, const GeneratorParams<T>& stage1) {
  cfg.validate();
  require(stage1.config == cfg.generator, "start_faa: stage-1 generator config differs from the training config");
  Session<T> s{cfg, stage1, init_discriminator<T>(cfg.discriminator, RngStream(cfg.seed).split(0x64).key()), {}};
  s.config.stage = Stage::kFaa;
  reset_control_stream(s.gen, RngStream(cfg.seed).split(0x67).key());
  s.state.stage = Stage::kFaa;
  s.state.seed = cfg.seed;
  s.state.g_opt = make_slots(s.gen.store, trainable_parameters(s.gen, Stage::kFaa));
  std::vector<int> all(static_cast<std::size_t>(s.disc->store.size()));
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
  s.state.d_opt = make_slots(s.disc->store, std::move(all));
  s.state.frozen_digests = frozen_digests(s.gen);
  return s;
}

template <typename T>
LossRecord pretrain_step(Session<T>& s, const std::vector<TrainingExample<T>>& data) {
  require(s.state.stage == Stage::kPretrain, "pretrain_step: session is not in the pretraining stage");
  require(!data.empty(), "pretrain_step: no training data");
  const auto& cfg = s.config;
  const auto& gcfg = s.gen.config;
  const NoiseSchedule sched = cfg.schedule();
  const RngStream it = RngStream(s.state.seed).split(static_cast<std::uint64_t>(s.state.iteration));
  RngStream pick = it.split(0);
  const auto mask = trainable_mask(s.gen, Stage::kPretrain);
  auto grads = zero_like(s.gen.store);
  const int total_items = cfg.batch_size * cfg.grad_accum;
  LossRecord rec;
  rec.iteration = s.state.iteration;

  for (int m = 0; m < cfg.grad_accum; ++m) {
    Tape<T> tape;
    Binder<T> bind(tape, s.gen.store, mask);
    Var<T> acc;
    for (int b = 0; b < cfg.batch_size; ++b) {
      const auto& ex = data[static_cast<std::size_t>(pick.uniform_int(0, static_cast<int>(data.size()) - 1))];
      RngStream item = it.split(1 + static_cast<std::uint64_t>(m * cfg.batch_size + b));
      const double t = sched.t_at(item.uniform_int(0, kNumTimesteps - 1));
      const Tensor<T> eps = noise_like(item, ex.gt);
      const bool keep = item.bernoulli(cfg.prompt_keep);
      const auto tpl = item.bernoulli(0.5) ? PromptTemplate::kVerbose : PromptTemplate::kTerse;
      const auto caption = caption_prompt(ex.caption, tpl, keep, gcfg.max_caption);
      Var<T> v = forward_pretrain(bind, gcfg, tape.constant(interpolate(ex.gt, eps, t)), ex.grid_h, ex.grid_w, t,
                                  caption);
      acc = accumulate(acc, flow_matching_loss(v, tape.constant(velocity_target(ex.gt, eps))));
    }
    Var<T> loss = scale(acc, T(1.0 / total_items));
    check_finite(static_cast<double>(loss.value().item()), "flow-matching loss", s.state, it);
    rec.flow += static_cast<double>(loss.value().item());
    bind.collect(tape.backward(loss), grads);
  }
  apply_updates(s.gen.store, s.state.g_opt, grads, cfg.lr_g);
  sync_control_stream(s.gen);
  ++s.state.iteration;
  s.state.history.push_back(rec);
  return rec;
}

template <typename T>
LossRecord faa_train_step(Session<T>& s, const std::vector<TrainingExample<T>>& data) {
  require(s.state.stage == Stage::kFaa && s.disc.has_value(), "faa_train_step: session is not in the FAA stage");
  require(!data.empty(), "faa_train_step: no training data");
  const auto& cfg = s.config;
  const auto& gcfg = s.gen.config;
  const auto& dcfg = s.disc->config;
  const double t_p = cfg.schedule().t_p;
  const RngStream it = RngStream(s.state.seed).split(static_cast<std::uint64_t>(s.state.iteration));
  RngStream pick = it.split(0);
  const int total_items = cfg.batch_size * cfg.grad_accum;
  const T inv_n = T(1.0 / total_items);

  struct Fake {
    const TrainingExample<T>* ex;
    std::vector<int> caption;
    Tensor<T> x_pred;
  };
  std::vector<Fake> fakes;
  fakes.reserve(static_cast<std::size_t>(total_items));

  LossRecord rec;
  rec.iteration = s.state.iteration;

  // Generator: LoRA parameters only.
  const auto gmask = trainable_mask(s.gen, Stage::kFaa);
  auto ggrads = zero_like(s.gen.store);
  for (int m = 0; m < cfg.grad_accum; ++m) {
    Tape<T> tape;
    Binder<T> gb(tape, s.gen.store, gmask);
    Binder<T> db(tape, s.disc->store);
    Var<T> acc;
    for (int b = 0; b < cfg.batch_size; ++b) {
      const auto& ex = data[static_cast<std::size_t>(pick.uniform_int(0, static_cast<int>(data.size()) - 1))];
      RngStream item = it.split(1 + static_cast<std::uint64_t>(m * cfg.batch_size + b));
      const FaaDraw draw = draw_faa_item(item, cfg);
      const FidelityWeight f(draw.f);
      const double t_c = control_t(f, t_p);
      const Tensor<T> x_tp = interpolate(ex.lq, noise_like(item, ex.lq), t_p);
      const Tensor<T> x_tc = t_c > 0 ? interpolate(ex.lq, noise_like(item, ex.lq), t_c) : ex.lq;
      const auto cap_d = prompt_tokens(ex.caption, draw.tpl, gcfg.max_caption);
      const auto cap_g = caption_prompt(ex.caption, draw.tpl, draw.keep_prompt, gcfg.max_caption);

      Var<T> xtp = tape.constant(x_tp);
      Var<T> v = forward_velocity(gb, gcfg, xtp, tape.constant(x_tc), ex.grid_h, ex.grid_w, t_p, t_c, cap_g);
      Var<T> x_pred = sub(xtp, scale(v, T(t_p)));
      Var<T> x_gt = tape.constant(ex.gt);
      const FeatureFn<T> features = [&](Var<T> x) {
        return prior_features(gb, gcfg, x, ex.grid_h, ex.grid_w, cfg.perceptual_layers);
      };
      const RecLoss<T> r = rec_loss(x_pred, x_gt, cfg.weights.lambda1, features);
      Var<T> d_real = score_patches(db, dcfg, x_gt, ex.grid_h, ex.grid_w, 0.0, cap_d);
      Var<T> d_fake = score_patches(db, dcfg, x_pred, ex.grid_h, ex.grid_w, 0.0, cap_d);
      Var<T> adv = adv_g_loss(d_real, d_fake);
      acc = accumulate(acc, total_g_loss(r.total, adv, f, cfg.weights));

      rec.mse += static_cast<double>(r.mse.value().item()) / total_items;
      if (r.perceptual.valid()) rec.perceptual += static_cast<double>(r.perceptual.value().item()) / total_items;
      rec.adv_g += static_cast<double>(adv.value().item()) / total_items;
      rec.f_mean += draw.f / total_items;
      fakes.push_back({&ex, cap_d, x_pred.value()});
    }
    Var<T> loss = scale(acc, inv_n);
    check_finite(static_cast<double>(loss.value().item()), "generator loss", s.state, it);
    gb.collect(tape.backward(loss), ggrads);
  }
  apply_updates(s.gen.store, s.state.g_opt, ggrads, cfg.lr_g);

  // Discriminator on the detached fakes of the same batch.
  const std::vector<bool> dmask(static_cast<std::size_t>(s.disc->store.size()), true);
  auto dgrads = zero_like(s.disc->store);
  for (int m = 0; m < cfg.grad_accum; ++m) {
    Tape<T> tape;
    Binder<T> db(tape, s.disc->store, dmask);
    Var<T> acc;
    for (int b = 0; b < cfg.batch_size; ++b) {
      const int k = m * cfg.batch_size + b;
      const Fake& fk = fakes[static_cast<std::size_t>(k)];
      const auto& ex = *fk.ex;
      Var<T> x_gt = tape.constant(ex.gt);
      const ScoreFn<T> score = [&](Var<T> x) {
        return score_patches(db, dcfg, x, ex.grid_h, ex.grid_w, 0.0, fk.caption);
      };
      Var<T> adv = adv_d_loss(score(x_gt), score(tape.constant(fk.x_pred)));
      RngStream r1_rng = it.split(0x5231000000ull + static_cast<std::uint64_t>(k));
      Var<T> reg = r1_reg(score, x_gt, cfg.weights.r1_sigma, r1_rng);
      acc = accumulate(acc, total_d_loss(adv, reg, cfg.weights.lambda2));
      rec.adv_d += static_cast<double>(adv.value().item()) / total_items;
      rec.reg += static_cast<double>(reg.value().item()) / total_items;
    }
    Var<T> loss = scale(acc, inv_n);
    check_finite(static_cast<double>(loss.value().item()), "discriminator loss", s.state, it);
    db.collect(tape.backward(loss), dgrads);
  }
  apply_updates(s.disc->store, s.state.d_opt, dgrads, cfg.lr_d);

  ++s.state.iteration;
  audit_frozen(s);
  s.state.history.push_back(rec);
  return rec;
}

template <typename T>
void run_training(Session<T>& s, const std::vector<TrainingExample<T>>& data, int until, const ProgressFn& progress) {
  if (until < 0) until = s.config.iterations;
  while (s.state.iteration < until) {
    const LossRecord r = s.state.stage == Stage::kPretrain ? pretrain_step(s, data) : faa_train_step(s, data);
    if (progress) progress(r);
  }
}

#define GLYPHSR_INSTANTIATE_TRAINER(T)                                                                    \
  template std::uint64_t tensor_digest<T>(const Tensor<T>&);                                              \
  template TrainingExample<T> make_example<T>(const Image&, const Image&, const std::string&, int);       \
  template std::vector<TrainingExample<T>> make_examples<T>(const Dataset&, int);                         \
  template std::vector<std::uint64_t> frozen_digests<T>(const GeneratorParams<T>&);                       \
  template void audit_frozen<T>(const Session<T>&);                                                       \
  template Session<T> start_pretrain<T>(const TrainConfig&);                                              \
  template Session<T> start_faa<T>(const TrainConfig&, const GeneratorParams<T>&);                        \
  template LossRecord pretrain_step<T>(Session<T>&, const std::vector<TrainingExample<T>>&);              \
  template LossRecord faa_train_step<T>(Session<T>&, const std::vector<TrainingExample<T>>&);             \
  template void run_training<T>(Session<T>&, const std::vector<TrainingExample<T>>&, int, const ProgressFn&);

GLYPHSR_INSTANTIATE_TRAINER(float)
GLYPHSR_INSTANTIATE_TRAINER(double)

}  // namespace glyphsr
