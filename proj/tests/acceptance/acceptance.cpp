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

// Acceptance suite: one PASS/FAIL line per criterion. The smoke run's
// checkpoints, loss curves and reports are left in the artifacts directory.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "glyphsr/discriminator.hpp"
#include "glyphsr/errors.hpp"
#include "glyphsr/losses.hpp"
#include "glyphsr/metrics.hpp"
#include "glyphsr/studies.hpp"
#include "glyphsr/trainer.hpp"
#include "support/gradcheck_suite.hpp"

namespace fs = std::filesystem;
using namespace glyphsr;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::uint64_t kDataSeed = 1;
constexpr int kTrainScenes = 64;
constexpr int kHeldOut = 16;
constexpr int kNoiseScenes = 32;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(double v, int precision = 6) {
  std::ostringstream o;
  o.precision(precision);
  o << v;
  return o.str();
}

struct Outcome {
  bool passed = false;
  std::string detail;
};

class Suite {
 public:
  explicit Suite(std::set<int> only) : only_(std::move(only)) {}

  bool wants(int id) const { return only_.empty() || only_.contains(id); }

  void run(int id, const std::string& title, const std::function<Outcome()>& fn) {
    if (!wants(id)) return;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    std::cout << (o.passed ? "PASS" : "FAIL") << " criterion " << id << ": " << title << " (" << o.detail << "; "
              << fmt(seconds_since(t0), 3) << " s)" << std::endl;
    failures_ += !o.passed;
  }

  int failures() const { return failures_; }

 private:
  std::set<int> only_;
  int failures_ = 0;
};

// ---- criteria 1-5, 11: algebraic identities and oracles ----------------------

Outcome scheduler_anchors() {
  const auto t0 = Clock::now();
  const double s = fit_shift(kPublishedAnchors);
  double sse = 0, worst = 0;
  for (const auto& a : kPublishedAnchors) {
    const double d = timestep_to_t(a.timestep, s) - a.t;
    sse += d * d;
    worst = std::max(worst, std::abs(d));
  }
  const double dt = seconds_since(t0);
  return {worst <= 0.01 && sse < 3e-4 && dt < 1.0,
          "shift " + fmt(s) + ", t(750) " + fmt(timestep_to_t(750, s), 4) + ", t(500) " + fmt(timestep_to_t(500, s), 4) +
              ", t(250) " + fmt(timestep_to_t(250, s), 4) + ", max dev " + fmt(worst, 3) + ", sse " + fmt(sse, 3) +
              ", fit " + fmt(dt * 1e3, 3) + " ms"};
}

template <typename T>
double one_step_error(double t_p) {
  RngStream rng(12);
  double worst = 0;
  for (int i = 0; i < 100; ++i) {
    const Shape shape{16, 48};
    const Tensor<T> x0(shape, rng.normals<T>(numel(shape)));
    const Tensor<T> eps(shape, rng.normals<T>(numel(shape)));
    const auto back = one_step_update(interpolate(x0, eps, t_p), velocity_target(x0, eps), t_p);
    for (std::size_t k = 0; k < x0.size(); ++k)
      worst = std::max(worst, std::abs(static_cast<double>(back[k]) - static_cast<double>(x0[k])));
  }
  return worst;
}

Outcome one_step_algebra() {
  const double t_p = NoiseSchedule::fitted().t_p;
  const double e64 = one_step_error<double>(t_p), e32 = one_step_error<float>(t_p);
  return {e64 < 1e-6 && e32 < 1e-6, "100 tensors, max |x0' - x0| f64 " + fmt(e64, 3) + ", f32 " + fmt(e32, 3)};
}

Outcome control_mapping() {
  const double t_p = NoiseSchedule::fitted().t_p;
  const LossWeights w;
  const double c1 = control_t(FidelityWeight(1.0), t_p), c0 = control_t(FidelityWeight(0.0), t_p);
  const double w1 = faa_weight(FidelityWeight(1.0), w), w0 = faa_weight(FidelityWeight(0.0), w);
  return {c1 == 0.0 && c0 == t_p && w1 == 0.02 && w0 == 0.1,
          "t_c(1) " + fmt(c1) + ", t_c(0) " + fmt(c0) + " = t_p, weight(1) " + fmt(w1) + ", weight(0) " + fmt(w0)};
}

Outcome relativistic_identities() {
  RngStream rng(44);
  double eq = 0, swap = 0, sum = 0;
  for (int i = 0; i < 100; ++i) {
    Tape<double> tape;
    const int n = rng.uniform_int(1, 64);
    auto a = tape.constant(Tensor<double>(Shape{n}, rng.normals<double>(static_cast<std::size_t>(n), 3.0)));
    auto b = tape.constant(Tensor<double>(Shape{n}, rng.normals<double>(static_cast<std::size_t>(n), 3.0)));
    eq = std::max({eq, std::abs(adv_g_loss(a, a).value().item() - std::log(2.0)),
                   std::abs(adv_d_loss(b, b).value().item() - std::log(2.0))});
    swap = std::max(swap, std::abs(adv_d_loss(a, b).value().item() - adv_g_loss(b, a).value().item()));
    const auto ab = relativistic_prob(a, b).value(), ba = relativistic_prob(b, a).value();
    for (std::size_t k = 0; k < ab.size(); ++k) sum = std::max(sum, std::abs(ab[k] + ba[k] - 1.0));
  }
  return {eq < 1e-6 && swap == 0.0 && sum < 1e-6, "100 draws, |L - ln2| " + fmt(eq, 3) + ", |adv_d(a,b) - adv_g(b,a)| " +
                                                     fmt(swap, 3) + ", |R(a,b) + R(b,a) - 1| " + fmt(sum, 3)};
}

Outcome gradient_oracle() {
  const auto t0 = Clock::now();
  auto cases = testing::primitive_gradient_cases();
  const auto losses = testing::loss_gradient_cases();
  cases.insert(cases.end(), losses.begin(), losses.end());
  double worst = 0;
  std::string worst_name;
  for (const auto& c : cases)
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const double e = c.run(seed);
      if (!(e <= worst)) {
        worst = e;
        worst_name = c.name;
      }
    }
  const double dt = seconds_since(t0);
  return {worst < 1e-4 && dt < 120.0, std::to_string(cases.size()) + " ops and losses x 20 seeds, max rel err " +
                                          fmt(worst, 3) + " (" + worst_name + ")"};
}

std::size_t dp_levenshtein(const std::string& a, const std::string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j)
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + (a[i - 1] != b[j - 1] ? 1u : 0u)});
  return d[a.size()][b.size()];
}

Outcome ned_oracle() {
  RngStream rng(1000);
  int mismatches = 0;
  for (int i = 0; i < 1000; ++i) {
    auto draw = [&] {
      std::string s(static_cast<std::size_t>(rng.uniform_int(0, 16)), ' ');
      for (auto& c : s) c = glyph_char(rng.uniform_int(0, 5));
      return s;
    };
    const std::string a = draw(), b = draw();
    const std::size_t ed = dp_levenshtein(a, b);
    const double expect = a.empty() && b.empty() ? 1.0 : 1.0 - double(ed) / double(std::max(a.size(), b.size()));
    mismatches += levenshtein(a, b) != ed || ned(a, b) != expect;
  }
  const double abc = ned("abc", "abd");
  return {mismatches == 0 && std::abs(abc - 0.6667) < 5e-5,
          "1000 pairs, " + std::to_string(mismatches) + " mismatches, abc/abd " + fmt(abc, 4)};
}

// ---- criterion 12: determinism and persistence ---------------------------------

TrainConfig small_smoke_config(const TrainConfig& smoke) {
  TrainConfig c = smoke;
  c.precision = 64;
  c.batch_size = 4;
  return c;
}

Outcome determinism(const TrainConfig& smoke, const Dataset& train, const fs::path& artifacts) {
  const TrainConfig c = small_smoke_config(smoke);
  const auto data = make_examples<double>(train, c.generator.patch);
  auto s1 = start_pretrain<double>(c);
  run_training(s1, data, 20);
  auto s1b = start_pretrain<double>(c);
  run_training(s1b, data, 20);
  const bool pre_exact = s1.state.history == s1b.state.history && s1.gen.store == s1b.gen.store;

  auto a = start_faa<double>(c, s1.gen), b = start_faa<double>(c, s1.gen);
  run_training(a, data, 20);
  run_training(b, data, 20);
  const bool faa_exact = a.state.history == b.state.history && a.gen.store == b.gen.store && a.disc->store == b.disc->store;

  auto first = start_faa<double>(c, s1.gen);
  run_training(first, data, 10);
  const fs::path dir = artifacts / "determinism_ckpt";
  save_checkpoint(first, dir);
  auto resumed = load_checkpoint<double>(dir);
  const bool roundtrip = resumed.gen.store == first.gen.store && resumed.disc->store == first.disc->store &&
                         resumed.state == first.state;
  run_training(resumed, data, 20);
  double drift = 0;
  for (std::size_t i = 10; i < 20; ++i) {
    const auto &x = a.state.history[i], &y = resumed.state.history[i];
    for (auto [p, q] : {std::pair{x.mse, y.mse}, {x.perceptual, y.perceptual}, {x.adv_g, y.adv_g}, {x.adv_d, y.adv_d},
                        {x.reg, y.reg}})
      drift = std::max(drift, std::abs(p - q));
  }
  fs::remove_all(dir);
  return {pre_exact && faa_exact && roundtrip && drift <= 1e-6,
          std::string("f64 reruns ") + (pre_exact && faa_exact ? "identical" : "DIFFER") + ", save/load " +
              (roundtrip ? "bit exact" : "NOT exact") + ", resume iters 10-20 max loss diff " + fmt(drift, 3)};
}

// ---- criteria 6-10: the pinned smoke run ---------------------------------------

struct SmokeRun {
  bool ran = false;
  std::string error;
  Session<float> stage1;
  Session<float> stage2;
  bool audit_ok = false;
  std::string audit_detail;
  double stage1_seconds = 0, stage2_seconds = 0;
};

SmokeRun run_smoke(const TrainConfig& c1, const TrainConfig& c2, const Dataset& train, const fs::path& artifacts) {
  SmokeRun r;
  const auto data = make_examples<float>(train, c1.generator.patch);
  auto t0 = Clock::now();
  r.stage1 = start_pretrain<float>(c1);
  run_training(r.stage1, data, -1, [](const LossRecord& l) {
    if ((l.iteration + 1) % 1000 == 0) std::cerr << "  stage 1 iter " << l.iteration + 1 << " flow " << l.flow << '\n';
  });
  r.stage1_seconds = seconds_since(t0);
  const fs::path ck1 = artifacts / "stage1";
  save_checkpoint(r.stage1, ck1);
  write_loss_csv(r.stage1.state.history, ck1 / "loss.csv");

  t0 = Clock::now();
  const auto reloaded = load_checkpoint<float>(ck1);
  r.stage2 = start_faa<float>(c2, reloaded.gen);
  run_training(r.stage2, data, 200);
  // Frozen audit against the stage-1 checkpoint on disk.
  const auto mask = trainable_mask(r.stage2.gen, Stage::kFaa);
  int frozen = 0, drifted = 0, lora_changed = 0;
  for (int i = 0; i < r.stage2.gen.store.size(); ++i) {
    const bool same = r.stage2.gen.store.value(i) == reloaded.gen.store.value(i);
    if (mask[static_cast<std::size_t>(i)]) {
      lora_changed += !same;
    } else {
      ++frozen;
      drifted += !same;
    }
  }
  r.audit_ok = drifted == 0 && lora_changed > 0;
  r.audit_detail = std::to_string(frozen) + " frozen tensors, " + std::to_string(drifted) + " differ from stage 1; " +
                   std::to_string(lora_changed) + " LoRA tensors updated";
  run_training(r.stage2, data, -1, [](const LossRecord& l) {
    if ((l.iteration + 1) % 250 == 0)
      std::cerr << "  stage 2 iter " << l.iteration + 1 << " mse " << l.mse << " adv_d " << l.adv_d << '\n';
  });
  r.stage2_seconds = seconds_since(t0);
  const fs::path ck2 = artifacts / "stage2";
  save_checkpoint(r.stage2, ck2);
  write_loss_csv(r.stage2.state.history, ck2 / "loss.csv");
  r.ran = true;
  return r;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"glyphsr acceptance suite"};
  std::string artifacts = "acceptance_artifacts";
  std::string configs = GLYPHSR_CONFIG_DIR;
  std::vector<int> only;
  app.add_option("--artifacts", artifacts, "Directory for smoke-run outputs");
  app.add_option("--configs", configs, "Directory holding smoke_stage1.cfg and smoke_stage2.cfg");
  app.add_option("--only", only, "Run only these criteria");
  CLI11_PARSE(app, argc, argv);

  Suite suite(std::set<int>(only.begin(), only.end()));
  const auto t_all = Clock::now();
  suite.run(1, "scheduler anchors", scheduler_anchors);
  suite.run(2, "one-step algebra", one_step_algebra);
  suite.run(3, "control mapping endpoints", control_mapping);
  suite.run(4, "relativistic identities", relativistic_identities);
  suite.run(5, "gradient oracle", gradient_oracle);
  suite.run(11, "edit-distance oracle", ned_oracle);

  const bool need_smoke = suite.wants(6) || suite.wants(7) || suite.wants(8) || suite.wants(9) || suite.wants(10) ||
                          suite.wants(12);
  if (!need_smoke) return suite.failures() == 0 ? 0 : 1;

  const fs::path art(artifacts);
  fs::create_directories(art);
  TrainConfig c1, c2;
  Dataset train, held, noise_set;
  try {
    c1 = load_train_config(fs::path(configs) / "smoke_stage1.cfg");
    c2 = load_train_config(fs::path(configs) / "smoke_stage2.cfg");
    const SceneConfig sc;
    const DegradationConfig dc;
    train = make_dataset(kTrainScenes, kDataSeed, sc, dc);
    held = make_dataset(kHeldOut, kDataSeed, sc, dc, 1, kTrainScenes);
    noise_set = make_dataset(kNoiseScenes, kDataSeed, sc, dc, 1, kTrainScenes);
    write_dataset(train, art / "data_train");
    write_dataset(held, art / "data_heldout");
    write_dataset(noise_set, art / "data_noise");
  } catch (const std::exception& e) {
    std::cout << "FAIL setup: " << e.what() << std::endl;
    return 1;
  }

  suite.run(12, "determinism and resume", [&] { return determinism(c1, train, art); });

  if (!(suite.wants(6) || suite.wants(7) || suite.wants(8) || suite.wants(9) || suite.wants(10)))
    return suite.failures() == 0 ? 0 : 1;

  SmokeRun smoke;
  try {
    smoke = run_smoke(c1, c2, train, art);
  } catch (const std::exception& e) {
    smoke.error = e.what();
  }
  auto need_run = [&]() -> std::optional<Outcome> {
    if (smoke.ran) return std::nullopt;
    return Outcome{false, "smoke run failed: " + smoke.error};
  };
  const LatticeSpec lattice = LatticeSpec::from(SceneConfig{});

  suite.run(6, "frozen prior after 200 FAA steps", [&] {
    if (auto o = need_run()) return *o;
    return Outcome{smoke.audit_ok, smoke.audit_detail};
  });

  suite.run(7, "discriminator loss calibration", [&] {
    if (auto o = need_run()) return *o;
    const auto& h = smoke.stage2.state.history;
    double m = 0;
    for (std::size_t i = h.size() - 100; i < h.size(); ++i) m += h[i].adv_d;
    m /= 100;
    return Outcome{m < std::log(2.0), "trailing-100 mean adv_d " + fmt(m) + " vs ln2 " + fmt(std::log(2.0))};
  });

  MetricReport sweep;
  std::vector<MetricAggregate> aggs;
  if (smoke.ran) {
    try {
      SweepOptions so;
      so.seed = c2.seed;
      sweep = fidelity_sweep(smoke.stage2.gen, c2.schedule(), held.items, lattice, so);
      merge_into(sweep, bilinear_baseline(held.items, lattice));
      write_report(sweep, art / "reports", "fidelity_sweep");
      aggs = aggregate(sweep);
    } catch (const std::exception& e) {
      smoke.ran = false;
      smoke.error = std::string("evaluation: ") + e.what();
    }
  }

  suite.run(8, "end-to-end smoke run", [&] {
    if (auto o = need_run()) return *o;
    const auto bil = find_aggregate(aggs, "bilinear", 1.0, false);
    const auto sr = find_aggregate(aggs, "sr", 1.0, false);
    const auto srp = find_aggregate(aggs, "sr", 1.0, true);
    const double gain = sr.psnr - bil.psnr;
    const double total = smoke.stage1_seconds + smoke.stage2_seconds;
    return Outcome{gain >= 1.0 && srp.ned >= sr.ned && total < 3600.0,
                   "held-out PSNR " + fmt(sr.psnr, 4) + " dB vs bilinear " + fmt(bil.psnr, 4) + " dB, gain " +
                       fmt(gain, 3) + " dB; NED with prompt " + fmt(srp.ned, 4) + " vs without " + fmt(sr.ned, 4) +
                       "; training " + fmt(smoke.stage1_seconds, 4) + " s + " + fmt(smoke.stage2_seconds, 4) + " s"};
  });

  suite.run(9, "controllability trend", [&] {
    if (auto o = need_run()) return *o;
    const auto a1 = find_aggregate(aggs, "sr", 1.0, false), a5 = find_aggregate(aggs, "sr", 0.5, false),
               a0 = find_aggregate(aggs, "sr", 0.0, false);
    const bool mono = a1.mse_lq <= a5.mse_lq && a5.mse_lq <= a0.mse_lq;
    const bool best = a1.psnr >= a5.psnr && a1.psnr >= a0.psnr;
    return Outcome{mono && best, "MSE to LQ f=1 " + fmt(a1.mse_lq, 4) + ", f=0.5 " + fmt(a5.mse_lq, 4) + ", f=0 " +
                                     fmt(a0.mse_lq, 4) + "; PSNR f=1 " + fmt(a1.psnr, 4) + ", f=0.5 " + fmt(a5.psnr, 4) +
                                     ", f=0 " + fmt(a0.psnr, 4) + " (no prompt)"};
  });

  suite.run(10, "noise study", [&] {
    if (smoke.stage1.state.history.empty()) return Outcome{false, "stage 1 did not run: " + smoke.error};
    NoiseStudyOptions no;
    no.seed = c1.seed;
    const auto rep = noise_study(smoke.stage1.gen, c1.schedule(), noise_set.items, lattice, no);
    write_report(rep, art / "reports", "noise_study");
    const auto na = aggregate(rep);
    bool ok = true;
    std::string detail = std::to_string(noise_set.items.size()) + " scenes;";
    for (const char* v : {"gt", "lq"})
      for (bool p : {false, true}) {
        const double lo = find_aggregate(na, v, 0.29, p).psnr, hi = find_aggregate(na, v, 0.90, p).psnr;
        ok = ok && lo > hi;
        detail += std::string(" ") + v + (p ? "+prompt" : "") + " " + fmt(lo, 4) + " > " + fmt(hi, 4) + ";";
      }
    const double nw = find_aggregate(na, "gt", 0.90, true).ned, nn = find_aggregate(na, "gt", 0.90, false).ned;
    detail += " NED at 0.90 with/without prompt " + fmt(nw, 3) + "/" + fmt(nn, 3);
    return Outcome{ok, detail};
  });

  std::cout << "total " << fmt(seconds_since(t_all), 4) << " s, " << suite.failures() << " failing" << std::endl;
  return suite.failures() == 0 ? 0 : 1;
}
