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

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "glyphsr/errors.hpp"
#include "glyphsr/inference.hpp"
#include "glyphsr/selftest.hpp"
#include "glyphsr/studies.hpp"
#include "glyphsr/trainer.hpp"

namespace fs = std::filesystem;
using namespace glyphsr;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitCheckpoint = 3;

struct Shared {
  std::string config;
  std::uint64_t seed = 0;
  bool seed_given = false;
  std::string out;
  std::string checkpoint;
};

struct MissingCheckpoint : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::uint64_t default_seed() {
  if (const char* s = std::getenv("GLYPHSR_SEED")) {
    try {
      return std::stoull(s);
    } catch (const std::exception&) {
      throw ContractError(std::string("GLYPHSR_SEED is not an unsigned integer: '") + s + "'");
    }
  }
  return 0;
}

std::vector<double> parse_list(const std::string& s, const char* what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw ContractError(std::string("bad value '") + tok + "' in " + what);
    }
  }
  require(!out.empty(), std::string(what) + " is empty");
  return out;
}

void require_checkpoint(const std::string& dir) {
  if (dir.empty()) throw MissingCheckpoint("--checkpoint is required");
  if (!fs::exists(fs::path(dir) / "manifest.json")) throw MissingCheckpoint("no checkpoint at " + dir);
}

std::string checkpoint_dtype(const std::string& dir) {
  require_checkpoint(dir);
  return read_checkpoint_manifest(dir).at("dtype").get<std::string>();
}

TrainConfig base_config(const Shared& sh) {
  TrainConfig c = sh.config.empty() ? TrainConfig{} : load_train_config(sh.config);
  if (sh.seed_given) c.seed = sh.seed;
  return c;
}

void log_progress(const LossRecord& r, int every) {
  if (every <= 0 || (r.iteration + 1) % every != 0) return;
  std::cerr << "iter " << r.iteration + 1;
  if (r.flow != 0) std::cerr << " flow " << r.flow;
  if (r.mse != 0) std::cerr << " mse " << r.mse << " perc " << r.perceptual << " adv_g " << r.adv_g << " adv_d "
                            << r.adv_d << " r1 " << r.reg;
  std::cerr << '\n';
}

template <typename T>
void train_loop(Session<T>& s, const Dataset& ds, const fs::path& out, int save_every, int log_every) {
  const auto data = make_examples<T>(ds, s.gen.config.patch);
  fs::create_directories(out);
  while (s.state.iteration < s.config.iterations) {
    const int next = save_every > 0 ? std::min(s.config.iterations, (s.state.iteration / save_every + 1) * save_every)
                                    : s.config.iterations;
    run_training(s, data, next, [&](const LossRecord& r) { log_progress(r, log_every); });
    save_checkpoint(s, out);
    write_loss_csv(s.state.history, out / "loss.csv");
  }
  save_checkpoint(s, out);
  write_loss_csv(s.state.history, out / "loss.csv");
  std::cout << "wrote checkpoint " << out.string() << " at iteration " << s.state.iteration << '\n';
}

struct TrainFlags {
  std::string data;
  std::string resume;
  int iterations = -1;
  int save_every = 0;
  int log_every = 100;
};

template <typename T>
int run_pretrain(const Shared& sh, const TrainFlags& tf) {
  const Dataset ds = read_dataset(tf.data);
  Session<T> s;
  if (!tf.resume.empty()) {
    require_checkpoint(tf.resume);
    s = load_checkpoint<T>(tf.resume);
    require(s.state.stage == Stage::kPretrain, "--resume checkpoint is not a pretraining checkpoint");
  } else {
    TrainConfig c = base_config(sh);
    c.stage = Stage::kPretrain;
    if (tf.iterations >= 0) c.iterations = tf.iterations;
    s = start_pretrain<T>(c);
  }
  if (tf.iterations >= 0) s.config.iterations = tf.iterations;
  train_loop(s, ds, sh.out, tf.save_every, tf.log_every);
  return 0;
}

template <typename T>
int run_train(const Shared& sh, const TrainFlags& tf) {
  const Dataset ds = read_dataset(tf.data);
  Session<T> s;
  if (!tf.resume.empty()) {
    require_checkpoint(tf.resume);
    s = load_checkpoint<T>(tf.resume);
    require(s.state.stage == Stage::kFaa, "--resume checkpoint is not an FAA checkpoint");
  } else {
    require_checkpoint(sh.checkpoint);
    const auto stage1 = load_checkpoint<T>(sh.checkpoint);
    TrainConfig c = sh.config.empty() ? stage1.config : load_train_config(sh.config);
    if (sh.seed_given) c.seed = sh.seed;
    if (sh.config.empty()) c.iterations = TrainConfig{}.iterations;
    c.stage = Stage::kFaa;
    if (tf.iterations >= 0) c.iterations = tf.iterations;
    s = start_faa<T>(c, stage1.gen);
  }
  if (tf.iterations >= 0) s.config.iterations = tf.iterations;
  train_loop(s, ds, sh.out, tf.save_every, tf.log_every);
  return 0;
}

int training_precision(const Shared& sh, const TrainFlags& tf) {
  if (!tf.resume.empty()) return checkpoint_dtype(tf.resume) == "f64" ? 64 : 32;
  if (!sh.config.empty()) return load_train_config(sh.config).precision;
  if (!sh.checkpoint.empty()) return checkpoint_dtype(sh.checkpoint) == "f64" ? 64 : 32;
  return 32;
}

struct InferFlags {
  std::vector<std::string> inputs;
  double fidelity = 1.0;
  std::string prompt;
};

template <typename T>
int run_infer(const Shared& sh, const InferFlags& inf) {
  const auto s = load_checkpoint<T>(sh.checkpoint);
  const auto sched = s.config.schedule();
  std::vector<fs::path> files;
  for (const auto& in : inf.inputs) {
    if (fs::is_directory(in)) {
      for (const auto& e : fs::directory_iterator(in))
        if (e.path().extension() == ".ppm") files.push_back(e.path());
    } else {
      files.emplace_back(in);
    }
  }
  std::sort(files.begin(), files.end());
  require(!files.empty(), "infer: no input images");
  fs::create_directories(sh.out);
  RestoreOptions o;
  o.fidelity = inf.fidelity;
  o.prompt = inf.prompt;
  o.noise_seed = sh.seed;
  for (const auto& f : files) {
    const Image out = restore(s.gen, sched, read_ppm(f), o);
    write_ppm(out, fs::path(sh.out) / f.filename());
    std::cout << f.string() << " -> " << (fs::path(sh.out) / f.filename()).string() << " (" << out.width << "x"
              << out.height << ")\n";
  }
  return 0;
}

struct StudyFlags {
  std::string data;
  std::string prompt_mode = "both";
  std::string ts = "0.90,0.29";
  int steps = 20;
  std::string fidelities = "1.0,0.5,0.0";
  double fidelity = 1.0;
  int limit = 0;
};

std::vector<DatasetItem> study_items(const Dataset& ds, int limit) {
  auto items = ds.items;
  if (limit > 0 && static_cast<std::size_t>(limit) < items.size()) items.resize(static_cast<std::size_t>(limit));
  return items;
}

void print_aggregates(const MetricReport& rep) {
  std::cout << "variant,setting,prompt,count,psnr,ssim,ned,mse_lq\n";
  for (const auto& a : aggregate(rep))
    std::cout << a.variant << ',' << a.setting << ',' << (a.prompt ? "with" : "without") << ',' << a.count << ','
              << a.psnr << ',' << a.ssim << ',' << a.ned << ',' << a.mse_lq << '\n';
}

template <typename T>
int run_study(const Shared& sh, const StudyFlags& st, const std::string& which) {
  const auto s = load_checkpoint<T>(sh.checkpoint);
  const Dataset ds = read_dataset(st.data);
  const auto items = study_items(ds, st.limit);
  const auto lattice = LatticeSpec::from(ds.meta.scene);
  const auto sched = s.config.schedule();
  MetricReport rep;
  if (which == "noise-study") {
    NoiseStudyOptions o;
    o.t_s = parse_list(st.ts, "--ts");
    o.n_steps = st.steps;
    o.prompt = parse_prompt_mode(st.prompt_mode);
    o.seed = sh.seed;
    rep = noise_study(s.gen, sched, items, lattice, o);
  } else {
    require(s.state.stage == Stage::kFaa, which + " needs an FAA checkpoint");
    SweepOptions o;
    o.fidelities = which == "eval" ? std::vector<double>{st.fidelity} : parse_list(st.fidelities, "--fidelities");
    o.prompt = parse_prompt_mode(st.prompt_mode);
    o.seed = sh.seed;
    rep = fidelity_sweep(s.gen, sched, items, lattice, o);
    if (which == "eval") merge_into(rep, bilinear_baseline(items, lattice));
  }
  rep.config["checkpoint"] = sh.checkpoint;
  rep.config["data"] = st.data;
  const std::string stem = which == "noise-study" ? "noise_study" : which == "eval" ? "eval" : "fidelity_sweep";
  write_report(rep, sh.out, stem);
  print_aggregates(rep);
  return 0;
}

template <typename F>
int dispatch_dtype(const std::string& checkpoint, F&& f) {
  require_checkpoint(checkpoint);
  return checkpoint_dtype(checkpoint) == "f64" ? f(double{}) : f(float{});
}

void add_shared(CLI::App* cmd, Shared& sh, bool config, bool checkpoint, bool out) {
  if (config) cmd->add_option("--config", sh.config, "Training config file (key = value)")->check(CLI::ExistingFile);
  cmd->add_option_function<std::uint64_t>(
      "--seed",
      [&sh](const std::uint64_t& v) {
        sh.seed = v;
        sh.seed_given = true;
      },
      "Seed (default: $GLYPHSR_SEED or 0)");
  if (checkpoint) cmd->add_option("--checkpoint", sh.checkpoint, "Checkpoint directory");
  if (out) cmd->add_option("--out", sh.out, "Output directory")->required();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"glyphsr: one-step text-image super-resolution at desk scale"};
  app.require_subcommand(1);
  Shared sh;
  TrainFlags tf;
  InferFlags inf;
  StudyFlags st;

  int count = 64, first_index = 0, threads = 1, image_size = 32;
  auto* gen = app.add_subcommand("gen-data", "Synthesize a glyph-scene dataset");
  add_shared(gen, sh, false, false, true);
  gen->add_option("--count", count, "Number of scenes")->check(CLI::PositiveNumber);
  gen->add_option("--first-index", first_index, "Index of the first scene (held-out sets start past the training set)")
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--image-size", image_size, "GT edge length in pixels")->check(CLI::PositiveNumber);
  gen->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* pre = app.add_subcommand("pretrain", "Stage 1: rectified-flow pretraining");
  add_shared(pre, sh, true, false, true);
  pre->add_option("--data", tf.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  pre->add_option("--resume", tf.resume, "Continue from a pretraining checkpoint");
  pre->add_option("--iterations", tf.iterations, "Override the configured iteration count");
  pre->add_option("--save-every", tf.save_every, "Write the checkpoint every N iterations");
  pre->add_option("--log-every", tf.log_every, "Print losses every N iterations (0: quiet)");

  auto* train = app.add_subcommand("train", "Stage 2: fidelity-aware adversarial training");
  add_shared(train, sh, true, true, true);
  train->add_option("--data", tf.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  train->add_option("--resume", tf.resume, "Continue from an FAA checkpoint");
  train->add_option("--iterations", tf.iterations, "Override the configured iteration count");
  train->add_option("--save-every", tf.save_every, "Write the checkpoint every N iterations");
  train->add_option("--log-every", tf.log_every, "Print losses every N iterations (0: quiet)");

  auto* infer = app.add_subcommand("infer", "Restore LQ images (PPM) at 4x");
  add_shared(infer, sh, false, true, true);
  infer->add_option("inputs", inf.inputs, "LQ PPM files or directories")->required();
  infer->add_option("--fidelity", inf.fidelity, "Fidelity weight f in [0, 1]")->check(CLI::Range(0.0, 1.0));
  infer->add_option("--prompt", inf.prompt, "Caption text (A-Z, 0-9); empty for no prompt");

  auto* eval = app.add_subcommand("eval", "Score one-step restoration and the bilinear baseline on a dataset");
  add_shared(eval, sh, false, true, true);
  eval->add_option("--data", st.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  eval->add_option("--fidelity", st.fidelity, "Fidelity weight f in [0, 1]")->check(CLI::Range(0.0, 1.0));
  eval->add_option("--prompt-mode", st.prompt_mode, "with, without or both");
  eval->add_option("--limit", st.limit, "Use only the first N scenes");

  auto* noise = app.add_subcommand("noise-study", "Noise then multi-step denoise GT and LQ with the stage-1 prior");
  add_shared(noise, sh, false, true, true);
  noise->add_option("--data", st.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  noise->add_option("--ts", st.ts, "Comma-separated noise levels t_s");
  noise->add_option("--steps", st.steps, "Euler steps")->check(CLI::PositiveNumber);
  noise->add_option("--prompt-mode", st.prompt_mode, "with, without or both");
  noise->add_option("--limit", st.limit, "Use only the first N scenes");

  auto* sweep = app.add_subcommand("sweep-fidelity", "One-step restoration over several fidelity weights");
  add_shared(sweep, sh, false, true, true);
  sweep->add_option("--data", st.data, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  sweep->add_option("--fidelities", st.fidelities, "Comma-separated fidelity weights");
  sweep->add_option("--prompt-mode", st.prompt_mode, "with, without or both");
  sweep->add_option("--limit", st.limit, "Use only the first N scenes");

  auto* self = app.add_subcommand("selftest", "Run the invariant suite");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (!sh.seed_given) sh.seed = default_seed();

    if (*gen) {
      SceneConfig sc;
      sc.image_size = image_size;
      const auto ds = make_dataset(count, sh.seed, sc, DegradationConfig{}, threads, first_index);
      write_dataset(ds, sh.out);
      std::cout << "wrote " << count << " scenes to " << sh.out << '\n';
      return 0;
    }
    if (*pre) return training_precision(sh, tf) == 64 ? run_pretrain<double>(sh, tf) : run_pretrain<float>(sh, tf);
    if (*train) {
      if (tf.resume.empty()) require_checkpoint(sh.checkpoint);
      return training_precision(sh, tf) == 64 ? run_train<double>(sh, tf) : run_train<float>(sh, tf);
    }
    if (*infer)
      return dispatch_dtype(sh.checkpoint, [&](auto tag) { return run_infer<decltype(tag)>(sh, inf); });
    for (auto* sub : {eval, noise, sweep})
      if (*sub)
        return dispatch_dtype(sh.checkpoint,
                              [&](auto tag) { return run_study<decltype(tag)>(sh, st, sub->get_name()); });
    if (*self) {
      bool ok = true;
      for (const auto& c : run_selftest()) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
        ok = ok && c.passed;
      }
      return ok ? 0 : 1;
    }
  } catch (const MissingCheckpoint& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheckpoint;
  } catch (const CheckpointError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCheckpoint;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
