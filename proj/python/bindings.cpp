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

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "glyphsr/errors.hpp"
#include "glyphsr/inference.hpp"
#include "glyphsr/losses.hpp"
#include "glyphsr/metrics.hpp"
#include "glyphsr/selftest.hpp"
#include "glyphsr/trainer.hpp"

namespace py = pybind11;
using namespace glyphsr;

namespace {

using ImageArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

Image to_image(const ImageArray& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw ContractError("expected an array of shape (height, width, 3)");
  Image img(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)));
  std::copy(a.data(), a.data() + a.size(), img.data.begin());
  return img;
}

ImageArray to_array(const Image& img) {
  ImageArray a({img.height, img.width, 3});
  std::copy(img.data.begin(), img.data.end(), a.mutable_data());
  return a;
}

template <typename T>
Image restore_with(const std::string& dir, const Image& lq, const RestoreOptions& o) {
  const auto s = load_checkpoint<T>(dir);
  return restore(s.gen, s.config.schedule(), lq, o);
}

}  // namespace

PYBIND11_MODULE(_glyphsr, m) {
  m.doc() = "glyphsr core bindings";
  py::register_exception<ContractError>(m, "ContractError", PyExc_ValueError);
  py::register_exception<CheckpointError>(m, "CheckpointError", PyExc_IOError);

  m.def("fit_shift", [] { return fit_shift(kPublishedAnchors); }, "Shift fitted to the published (timestep, t) anchors");
  m.def("timestep_to_t", &timestep_to_t, py::arg("timestep"), py::arg("shift"));
  m.def(
      "control_t", [](double f, double t_p) { return control_t(FidelityWeight(f), t_p); }, py::arg("f"),
      py::arg("t_p"));
  m.def(
      "faa_weight", [](double f) { return faa_weight(FidelityWeight(f), LossWeights{}); }, py::arg("f"));

  m.def(
      "psnr", [](const ImageArray& a, const ImageArray& b) { return psnr(to_image(a), to_image(b)); }, py::arg("a"),
      py::arg("b"));
  m.def(
      "ssim", [](const ImageArray& a, const ImageArray& b) { return ssim(to_image(a), to_image(b)); }, py::arg("a"),
      py::arg("b"));
  m.def(
      "ned", [](const std::string& p, const std::string& g) { return ned(p, g); }, py::arg("p"), py::arg("g"));
  m.def(
      "levenshtein", [](const std::string& a, const std::string& b) { return levenshtein(a, b); }, py::arg("a"),
      py::arg("b"));

  m.def(
      "render_scene",
      [](std::uint64_t seed, int image_size) {
        SceneConfig c;
        c.image_size = image_size;
        const auto s = render_scene(seed, c);
        return py::make_tuple(to_array(s.image), s.caption);
      },
      py::arg("seed"), py::arg("image_size") = 32, "Returns (image, caption)");
  m.def(
      "degrade", [](const ImageArray& img, std::uint64_t seed) { return to_array(degrade(to_image(img), {}, seed)); },
      py::arg("image"), py::arg("seed"));
  m.def(
      "toy_ocr",
      [](const ImageArray& img) {
        const Image im = to_image(img);
        SceneConfig c;
        c.image_size = im.height;
        return toy_ocr(im, LatticeSpec::from(c));
      },
      py::arg("image"));

  m.def(
      "restore",
      [](const std::string& checkpoint, const ImageArray& lq, double fidelity, const std::string& prompt,
         std::uint64_t seed) {
        RestoreOptions o;
        o.fidelity = fidelity;
        o.prompt = prompt;
        o.noise_seed = seed;
        const Image in = to_image(lq);
        const auto dtype = read_checkpoint_manifest(checkpoint).at("dtype").get<std::string>();
        return to_array(dtype == "f64" ? restore_with<double>(checkpoint, in, o) : restore_with<float>(checkpoint, in, o));
      },
      py::arg("checkpoint"), py::arg("lq"), py::arg("fidelity") = 1.0, py::arg("prompt") = "", py::arg("seed") = 0);

  m.def("train_config_defaults", [] { return format_train_config(TrainConfig{}); });

  m.def("run_selftest", [] {
    py::list out;
    for (const auto& c : run_selftest()) out.append(py::make_tuple(c.name, c.passed, c.detail));
    return out;
  });
}
