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

#include "glyphsr/studies.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "glyphsr/codec.hpp"
#include "glyphsr/errors.hpp"
#include "glyphsr/inference.hpp"
#include "glyphsr/metrics.hpp"

namespace glyphsr {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<bool> prompt_flags(PromptMode m) {
  switch (m) {
    case PromptMode::kWith:
      return {true};
    case PromptMode::kWithout:
      return {false};
    case PromptMode::kBoth:
      break;
  }
  return {true, false};
}

bool same_key(const MetricAggregate& a, const MetricRow& r) {
  return a.study == r.study && a.variant == r.variant && a.setting == r.setting && a.prompt == r.prompt;
}

MetricRow score(const std::string& study, const DatasetItem& item, const std::string& variant, double setting,
                bool prompt, const Image& out, const Image& reference, const LatticeSpec& lattice) {
  MetricRow r;
  r.study = study;
  r.id = item.id;
  r.variant = variant;
  r.setting = setting;
  r.prompt = prompt;
  r.psnr = psnr(out, reference);
  r.ssim = ssim(out, reference);
  r.ocr = toy_ocr(out, lattice);
  r.caption = item.scene.caption;
  r.ned = ned(r.ocr, r.caption);
  r.mse_lq = kNaN;
  return r;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

nlohmann::json number_or_null(double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); }

}  // namespace

const char* prompt_mode_name(PromptMode m) {
  switch (m) {
    case PromptMode::kWith:
      return "with";
    case PromptMode::kWithout:
      return "without";
    case PromptMode::kBoth:
      break;
  }
  return "both";
}

PromptMode parse_prompt_mode(const std::string& s) {
  if (s == "with") return PromptMode::kWith;
  if (s == "without") return PromptMode::kWithout;
  if (s == "both") return PromptMode::kBoth;
  throw ContractError("prompt mode must be one of with, without, both; got '" + s + "'");
}

std::vector<MetricAggregate> aggregate(const MetricReport& report) {
  std::vector<MetricAggregate> out;
  for (const auto& r : report.rows) {
    auto it = std::find_if(out.begin(), out.end(), [&](const MetricAggregate& a) { return same_key(a, r); });
    if (it == out.end()) {
      out.push_back({r.study, r.variant, r.setting, r.prompt, 0, 0, 0, 0, 0});
      it = out.end() - 1;
    }
    ++it->count;
    it->psnr += r.psnr;
    it->ssim += r.ssim;
    it->ned += r.ned;
    it->mse_lq += r.mse_lq;
  }
  for (auto& a : out) {
    a.psnr /= a.count;
    a.ssim /= a.count;
    a.ned /= a.count;
    a.mse_lq /= a.count;
  }
  return out;
}

MetricAggregate find_aggregate(const std::vector<MetricAggregate>& aggs, const std::string& variant, double setting,
                               bool prompt) {
  for (const auto& a : aggs)
    if (a.variant == variant && std::abs(a.setting - setting) < 1e-12 && a.prompt == prompt) return a;
  throw ContractError("no aggregate for variant '" + variant + "' at setting " + std::to_string(setting) +
                      (prompt ? " with" : " without") + " prompt");
}

void merge_into(MetricReport& a, const MetricReport& b) {
  a.rows.insert(a.rows.end(), b.rows.begin(), b.rows.end());
  if (a.config.is_null()) a.config = nlohmann::json::object();
  for (const auto& [k, v] : b.config.items()) a.config[k] = v;
}

void write_report(const MetricReport& report, const std::filesystem::path& dir, const std::string& stem) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream csv(dir / (stem + ".csv"));
    if (!csv) throw ContractError("cannot write " + (dir / (stem + ".csv")).string());
    csv.precision(10);
    csv << "study,id,variant,setting,prompt,psnr,ssim,ned,mse_lq,ocr,caption\n";
    for (const auto& r : report.rows) {
      csv << r.study << ',' << r.id << ',' << r.variant << ',' << r.setting << ',' << (r.prompt ? "with" : "without")
          << ',' << r.psnr << ',' << r.ssim << ',' << r.ned << ',';
      if (std::isfinite(r.mse_lq)) csv << r.mse_lq;
      csv << ',' << csv_field(r.ocr) << ',' << csv_field(r.caption) << '\n';
    }
  }
  nlohmann::json aggs = nlohmann::json::array();
  for (const auto& a : aggregate(report))
    aggs.push_back({{"study", a.study},
                    {"variant", a.variant},
                    {"setting", a.setting},
                    {"prompt", a.prompt ? "with" : "without"},
                    {"count", a.count},
                    {"psnr", a.psnr},
                    {"ssim", a.ssim},
                    {"ned", a.ned},
                    {"mse_lq", number_or_null(a.mse_lq)}});
  nlohmann::json unavailable = nlohmann::json::object();
  for (const char* k : {"lpips", "dists", "fid", "musiq", "maniqa", "clip_t"}) unavailable[k] = "unavailable";
  const nlohmann::json j{{"config", report.config}, {"aggregates", aggs}, {"learned_metrics", unavailable}};
  std::ofstream(dir / (stem + ".json")) << j.dump(2) << '\n';
}

template <typename T>
MetricReport noise_study(const GeneratorParams<T>& gen, const NoiseSchedule& sched, const std::vector<DatasetItem>& scenes,
                         const LatticeSpec& lattice, const NoiseStudyOptions& opts) {
  require(opts.n_steps >= 1, "noise_study: n_steps must be >= 1");
  for (double t : opts.t_s) require(t >= 0 && t <= 1, "noise_study: t_s must lie in [0, 1]");
  const int p = gen.config.patch;
  MetricReport rep;
  rep.config = {{"study", "noise"},
                {"t_s", opts.t_s},
                {"n_steps", opts.n_steps},
                {"prompt", prompt_mode_name(opts.prompt)},
                {"seed", opts.seed},
                {"shift", sched.shift}};
  const RngStream root(opts.seed);
  for (double t_s : opts.t_s)
    for (std::size_t i = 0; i < scenes.size(); ++i) {
      const auto& item = scenes[i];
      const Image lq_up = clamp01(upsample_bilinear(item.lq, 4));
      const std::pair<const char*, const Image*> variants[] = {{"gt", &item.scene.image}, {"lq", &lq_up}};
      for (std::size_t v = 0; v < 2; ++v) {
        const auto clean = encode<T>(*variants[v].second, p);
        RngStream rng = root.split(2 * i + v);
        const Tensor<T> eps(clean.tokens.shape(), rng.normals<T>(clean.tokens.size()));
        const Tensor<T> x_ts = interpolate(clean.tokens, eps, t_s);
        for (bool prompt : prompt_flags(opts.prompt)) {
          const auto caption = prompt ? prompt_tokens(item.scene.caption, PromptTemplate::kTerse, gen.config.max_caption)
                                      : empty_prompt(gen.config.max_caption);
          const VelocityFn<T> model = [&](const Tensor<T>& x, double t) {
            return predict_pretrain(gen, x, clean.grid_h, clean.grid_w, t, caption);
          };
          const Tensor<T> x0 = euler_denoise_from(model, x_ts, t_s, opts.n_steps, sched.shift);
          const Image out = decode<T>(LatentGrid<T>{clean.grid_h, clean.grid_w, x0}, p);
          rep.rows.push_back(score("noise", item, variants[v].first, t_s, prompt, out, *variants[v].second, lattice));
        }
      }
    }
  return rep;
}

template <typename T>
MetricReport fidelity_sweep(const GeneratorParams<T>& gen, const NoiseSchedule& sched,
                            const std::vector<DatasetItem>& scenes, const LatticeSpec& lattice, const SweepOptions& opts) {
  for (double f : opts.fidelities) (void)FidelityWeight(f);
  MetricReport rep;
  rep.config = {{"study", "fidelity"},
                {"fidelities", opts.fidelities},
                {"prompt", prompt_mode_name(opts.prompt)},
                {"seed", opts.seed},
                {"t_p", sched.t_p}};
  const RngStream root(opts.seed);
  for (double f : opts.fidelities)
    for (std::size_t i = 0; i < scenes.size(); ++i) {
      const auto& item = scenes[i];
      const Image lq_up = clamp01(upsample_bilinear(item.lq, 4));
      for (bool prompt : prompt_flags(opts.prompt)) {
        RestoreOptions ro;
        ro.fidelity = f;
        ro.prompt = prompt ? item.scene.caption : "";
        ro.noise_seed = root.split(i).key();
        const Image out = restore(gen, sched, item.lq, ro);
        MetricRow r = score("fidelity", item, "sr", f, prompt, out, item.scene.image, lattice);
        r.mse_lq = mse(out, lq_up);
        rep.rows.push_back(std::move(r));
      }
    }
  return rep;
}

MetricReport bilinear_baseline(const std::vector<DatasetItem>& scenes, const LatticeSpec& lattice) {
  MetricReport rep;
  rep.config = {{"baseline", "bilinear_x4"}};
  for (const auto& item : scenes) {
    const Image up = clamp01(upsample_bilinear(item.lq, 4));
    MetricRow r = score("fidelity", item, "bilinear", 1.0, false, up, item.scene.image, lattice);
    r.mse_lq = 0.0;
    rep.rows.push_back(std::move(r));
  }
  return rep;
}

#define GLYPHSR_INSTANTIATE_STUDIES(T)                                                                              \
  template MetricReport noise_study<T>(const GeneratorParams<T>&, const NoiseSchedule&,                             \
                                       const std::vector<DatasetItem>&, const LatticeSpec&, const NoiseStudyOptions&); \
  template MetricReport fidelity_sweep<T>(const GeneratorParams<T>&, const NoiseSchedule&,                          \
                                          const std::vector<DatasetItem>&, const LatticeSpec&, const SweepOptions&);

GLYPHSR_INSTANTIATE_STUDIES(float)
GLYPHSR_INSTANTIATE_STUDIES(double)

}  // namespace glyphsr
