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

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "glyphsr/errors.hpp"
#include "glyphsr/trainer.hpp"

namespace glyphsr {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

namespace {

constexpr const char* kFormat = "glyphsr-checkpoint";
constexpr int kVersion = 1;
constexpr char kStateMagic[4] = {'G', 'S', 'R', 'S'};

std::uint64_t fnv(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex(std::uint64_t v) {
  std::ostringstream o;
  o << std::hex << std::setw(16) << std::setfill('0') << v;
  return o.str();
}

template <typename T>
const char* dtype_name() {
  return sizeof(T) == 4 ? "f32" : "f64";
}

class Writer {
 public:
  template <typename V>
  void put(V v) {
    char b[sizeof(V)];
    std::memcpy(b, &v, sizeof(V));
    out_.append(b, sizeof(V));
  }
  template <typename T>
  void put_tensor(const Tensor<T>& t) {
    put<std::uint64_t>(t.size());
    out_.append(reinterpret_cast<const char*>(t.ptr()), t.size() * sizeof(T));
  }
  std::string& bytes() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(const std::string& bytes, std::string file) : b_(bytes), file_(std::move(file)) {}
  template <typename V>
  V get() {
    need(sizeof(V));
    V v;
    std::memcpy(&v, b_.data() + pos_, sizeof(V));
    pos_ += sizeof(V);
    return v;
  }
  // Reads a tensor stored with element type S into shape `shape`, converting to T.
  template <typename T, typename S>
  Tensor<T> get_tensor(const Shape& shape) {
    const auto n = get<std::uint64_t>();
    if (n != static_cast<std::uint64_t>(numel(shape)))
      throw CheckpointError(file_ + ": stored tensor has " + std::to_string(n) + " elements, expected " +
                            std::to_string(numel(shape)));
    need(n * sizeof(S));
    std::vector<T> data(n);
    for (std::size_t i = 0; i < n; ++i) {
      S v;
      std::memcpy(&v, b_.data() + pos_ + i * sizeof(S), sizeof(S));
      data[i] = static_cast<T>(v);
    }
    pos_ += n * sizeof(S);
    return Tensor<T>(shape, std::move(data));
  }
  bool done() const { return pos_ == b_.size(); }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > b_.size()) throw CheckpointError(file_ + ": truncated at byte " + std::to_string(pos_));
  }
  const std::string& b_;
  std::string file_;
  std::size_t pos_ = 0;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw CheckpointError("cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CheckpointError("cannot write " + p.string());
}

template <typename T>
void put_slots(Writer& w, const OptimizerSlots<T>& slots) {
  w.put<std::uint64_t>(slots.ids.size());
  for (std::size_t i = 0; i < slots.ids.size(); ++i) {
    w.put<std::int32_t>(slots.ids[i]);
    w.put<double>(static_cast<double>(slots.states[i].alpha));
    w.put<double>(static_cast<double>(slots.states[i].eps));
    w.put_tensor(slots.states[i].square_avg);
  }
}

template <typename T, typename S>
OptimizerSlots<T> get_slots(Reader& r, const ParamStore<T>& store) {
  OptimizerSlots<T> slots;
  const auto n = r.template get<std::uint64_t>();
  for (std::uint64_t i = 0; i < n; ++i) {
    const int id = r.template get<std::int32_t>();
    if (id < 0 || id >= store.size()) throw CheckpointError("optimizer slot refers to unknown parameter " + std::to_string(id));
    RmsPropState<T> st;
    st.alpha = static_cast<T>(r.template get<double>());
    st.eps = static_cast<T>(r.template get<double>());
    st.square_avg = r.template get_tensor<T, S>(store.value(id).shape());
    slots.ids.push_back(id);
    slots.states.push_back(std::move(st));
  }
  return slots;
}

template <typename T, typename S>
void read_store(const std::string& blob, const std::string& file, const json& tensors, const std::string& prefix,
                ParamStore<T>& store) {
  for (int i = 0; i < store.size(); ++i) {
    const std::string name = prefix + store.name(i);
    const auto it = std::find_if(tensors.begin(), tensors.end(), [&](const json& t) { return t.at("name") == name; });
    if (it == tensors.end()) throw CheckpointError("checkpoint lacks tensor " + name);
    const Shape& shape = store.value(i).shape();
    if (it->at("shape").template get<Shape>() != shape)
      throw CheckpointError("tensor " + name + " has shape " + shape_str(it->at("shape").template get<Shape>()) +
                            ", the configured model expects " + shape_str(shape));
    const auto offset = it->at("offset").template get<std::size_t>();
    const auto bytes = it->at("bytes").template get<std::size_t>();
    const auto n = static_cast<std::size_t>(numel(shape));
    if (bytes != n * sizeof(S) || offset + bytes > blob.size())
      throw CheckpointError(file + ": tensor " + name + " lies outside the blob");
    std::vector<T> data(n);
    for (std::size_t k = 0; k < n; ++k) {
      S v;
      std::memcpy(&v, blob.data() + offset + k * sizeof(S), sizeof(S));
      data[k] = static_cast<T>(v);
    }
    store.value(i) = Tensor<T>(shape, std::move(data));
  }
}

template <typename T, typename S>
Session<T> load_as(const fs::path& dir, const json& manifest, const std::string& weights, const std::string& state) {
  const TrainConfig cfg = parse_train_config(manifest.at("config").get<std::string>(), (dir / "manifest.json").string());
  if (hex(config_digest(cfg)) != manifest.at("config_digest").get<std::string>())
    throw CheckpointError((dir / "manifest.json").string() + ": config digest mismatch");

  Session<T> s{cfg, init_generator<T>(cfg.generator, 0), std::nullopt, {}};
  const bool has_disc = manifest.at("has_discriminator").get<bool>();
  if (has_disc) s.disc = init_discriminator<T>(cfg.discriminator, 0);

  const json& tensors = manifest.at("tensors");
  const std::string wfile = (dir / "weights.bin").string();
  read_store<T, S>(weights, wfile, tensors, "generator/", s.gen.store);
  if (has_disc) read_store<T, S>(weights, wfile, tensors, "discriminator/", s.disc->store);

  Reader r(state, (dir / "state.bin").string());
  char magic[4];
  for (char& c : magic) c = r.get<char>();
  if (std::memcmp(magic, kStateMagic, 4) != 0) throw CheckpointError((dir / "state.bin").string() + ": bad magic");
  s.state.stage = r.get<std::uint32_t>() == 0 ? Stage::kPretrain : Stage::kFaa;
  s.state.iteration = static_cast<int>(r.get<std::int64_t>());
  s.state.seed = r.get<std::uint64_t>();
  s.state.g_opt = get_slots<T, S>(r, s.gen.store);
  if (has_disc) s.state.d_opt = get_slots<T, S>(r, s.disc->store);
  const auto nd = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < nd; ++i) s.state.frozen_digests.push_back(r.get<std::uint64_t>());
  const auto nh = r.get<std::uint64_t>();
  for (std::uint64_t i = 0; i < nh; ++i) {
    LossRecord rec;
    rec.iteration = r.get<std::int32_t>();
    for (double* f : {&rec.flow, &rec.mse, &rec.perceptual, &rec.adv_g, &rec.adv_d, &rec.reg, &rec.f_mean}) *f = r.get<double>();
    s.state.history.push_back(rec);
  }
  if (!r.done()) throw CheckpointError((dir / "state.bin").string() + ": trailing bytes");
  // Digests were taken in the stored precision; retake them after conversion.
  if (!std::is_same_v<T, S> && !s.state.frozen_digests.empty()) s.state.frozen_digests = frozen_digests(s.gen);
  return s;
}

}  // namespace

template <typename T>
void save_checkpoint(const Session<T>& s, const fs::path& dir) {
  fs::create_directories(dir);
  json tensors = json::array();
  std::string weights;
  auto add_store = [&](const ParamStore<T>& store, const std::string& prefix) {
    for (int i = 0; i < store.size(); ++i) {
      const auto& t = store.value(i);
      const std::size_t bytes = t.size() * sizeof(T);
      tensors.push_back({{"name", prefix + store.name(i)},
                         {"shape", t.shape()},
                         {"dtype", dtype_name<T>()},
                         {"offset", weights.size()},
                         {"bytes", bytes}});
      weights.append(reinterpret_cast<const char*>(t.ptr()), bytes);
    }
  };
  add_store(s.gen.store, "generator/");
  if (s.disc) add_store(s.disc->store, "discriminator/");

  Writer w;
  for (char c : kStateMagic) w.put<char>(c);
  w.put<std::uint32_t>(s.state.stage == Stage::kPretrain ? 0 : 1);
  w.put<std::int64_t>(s.state.iteration);
  w.put<std::uint64_t>(s.state.seed);
  put_slots(w, s.state.g_opt);
  if (s.disc) put_slots(w, s.state.d_opt);
  w.put<std::uint64_t>(s.state.frozen_digests.size());
  for (auto d : s.state.frozen_digests) w.put<std::uint64_t>(d);
  w.put<std::uint64_t>(s.state.history.size());
  for (const auto& rec : s.state.history) {
    w.put<std::int32_t>(rec.iteration);
    for (double f : {rec.flow, rec.mse, rec.perceptual, rec.adv_g, rec.adv_d, rec.reg, rec.f_mean}) w.put<double>(f);
  }

  const json manifest = {{"format", kFormat},
                         {"version", kVersion},
                         {"dtype", dtype_name<T>()},
                         {"stage", s.state.stage == Stage::kPretrain ? "pretrain" : "faa"},
                         {"iteration", s.state.iteration},
                         {"config", format_train_config(s.config)},
                         {"config_digest", hex(config_digest(s.config))},
                         {"has_discriminator", s.disc.has_value()},
                         {"tensors", tensors},
                         {"weights_digest", hex(fnv(weights))},
                         {"state_digest", hex(fnv(w.bytes()))}};
  spit(dir / "weights.bin", weights);
  spit(dir / "state.bin", w.bytes());
  spit(dir / "manifest.json", manifest.dump(2) + "\n");
}

json read_checkpoint_manifest(const fs::path& dir) {
  const fs::path path = dir / "manifest.json";
  if (!fs::exists(path)) throw CheckpointError("no checkpoint at " + dir.string() + " (missing manifest.json)");
  json manifest;
  try {
    manifest = json::parse(slurp(path));
  } catch (const json::parse_error& e) {
    throw CheckpointError(path.string() + ": " + e.what());
  }
  if (manifest.value("format", "") != kFormat) throw CheckpointError(path.string() + ": not a checkpoint manifest");
  if (manifest.value("version", -1) != kVersion)
    throw CheckpointError(path.string() + ": unsupported checkpoint version " + manifest.value("version", json(-1)).dump() +
                          " (expected " + std::to_string(kVersion) + ")");
  return manifest;
}

template <typename T>
Session<T> load_checkpoint(const fs::path& dir) {
  const json manifest = read_checkpoint_manifest(dir);
  const std::string weights = slurp(dir / "weights.bin");
  const std::string state = slurp(dir / "state.bin");
  if (hex(fnv(weights)) != manifest.at("weights_digest").get<std::string>())
    throw CheckpointError((dir / "weights.bin").string() + ": digest mismatch, the weight blob is corrupted");
  if (hex(fnv(state)) != manifest.at("state_digest").get<std::string>())
    throw CheckpointError((dir / "state.bin").string() + ": digest mismatch, the state blob is corrupted");
  try {
    const std::string dtype = manifest.at("dtype").get<std::string>();
    if (dtype == "f32") return load_as<T, float>(dir, manifest, weights, state);
    if (dtype == "f64") return load_as<T, double>(dir, manifest, weights, state);
    throw CheckpointError("unsupported dtype " + dtype);
  } catch (const json::exception& e) {
    throw CheckpointError((dir / "manifest.json").string() + ": " + e.what());
  } catch (const ParseError& e) {
    throw CheckpointError(e.what());
  }
}

void write_loss_csv(const std::vector<LossRecord>& history, const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "iteration,flow,mse,perceptual,adv_g,adv_d,reg,f_mean\n";
  out.precision(9);
  for (const auto& r : history)
    out << r.iteration << ',' << r.flow << ',' << r.mse << ',' << r.perceptual << ',' << r.adv_g << ',' << r.adv_d
        << ',' << r.reg << ',' << r.f_mean << '\n';
}

template void save_checkpoint<float>(const Session<float>&, const fs::path&);
template void save_checkpoint<double>(const Session<double>&, const fs::path&);
template Session<float> load_checkpoint<float>(const fs::path&);
template Session<double> load_checkpoint<double>(const fs::path&);

}  // namespace glyphsr
