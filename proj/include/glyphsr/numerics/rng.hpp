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

#pragma once

#include <cstdint>
#include <vector>

namespace glyphsr {

// Counter-based generator (Philox4x32-10). A stream is a (key, counter)
// pair; split() derives an independent child key without advancing the
// parent, so per-item and per-iteration streams can be rebuilt from the
// root seed alone.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed = 0) : key_(seed) {}
  RngStream(std::uint64_t key, std::uint64_t counter) : key_(key), counter_(counter) {}

  RngStream split(std::uint64_t tag) const;

  std::uint64_t next_u64();
  double uniform();  // [0, 1)
  double normal();
  // Inclusive range.
  int uniform_int(int lo, int hi);
  bool bernoulli(double p) { return uniform() < p; }

  template <typename T>
  std::vector<T> normals(std::size_t n, double stddev = 1.0) {
    std::vector<T> out(n);
    for (auto& v : out) v = static_cast<T>(stddev * normal());
    return out;
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

  friend bool operator==(const RngStream&, const RngStream&) = default;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

// Raw Philox4x32-10 block, exposed for tests against published vectors.
void philox4x32_10(const std::uint32_t counter[4], const std::uint32_t key[2], std::uint32_t out[4]);

}  // namespace glyphsr
