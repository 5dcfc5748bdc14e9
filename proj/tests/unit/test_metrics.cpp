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

#include <doctest.h>

#include <cmath>
#include <vector>

#include "glyphsr/errors.hpp"
#include "glyphsr/metrics.hpp"
#include "glyphsr/numerics/rng.hpp"

using namespace glyphsr;

namespace {

// Full-matrix Levenshtein used as the reference.
std::size_t levenshtein_oracle(const std::string& a, const std::string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1, std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i)
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = d[i - 1][j - 1] + (a[i - 1] != b[j - 1]);
      d[i][j] = std::min(sub, std::min(d[i - 1][j], d[i][j - 1]) + 1);
    }
  return d[a.size()][b.size()];
}

std::string random_string(RngStream& rng) {
  const int n = rng.uniform_int(0, 12);
  std::string s;
  for (int i = 0; i < n; ++i) s.push_back(static_cast<char>('a' + rng.uniform_int(0, 3)));
  return s;
}

Image random_image(std::uint64_t seed, int h, int w) {
  RngStream rng(seed);
  Image img(h, w);
  for (auto& v : img.data) v = rng.uniform();
  return img;
}

}  // namespace

TEST_CASE("psnr examples") {
  const Image a = random_image(3, 16, 16);
  CHECK(psnr(a, a) == kPsnrCap);
  CHECK(psnr(Image(4, 4, 0.5), Image(4, 4, 0.0)) == doctest::Approx(6.0206).epsilon(1e-5));
  CHECK(psnr(Image(4, 4, 0.1), Image(4, 4, 0.0)) == doctest::Approx(20.0).epsilon(1e-12));
  CHECK_THROWS_AS(psnr(Image(4, 4), Image(4, 8)), ContractError);
}

TEST_CASE("psnr decreases with noise level") {
  double prev = kPsnrCap + 1;
  for (double sigma : {0.01, 0.05, 0.2}) {
    double mean = 0;
    for (std::uint64_t s = 0; s < 20; ++s) {
      const Image a = random_image(s, 16, 16);
      Image b = a;
      RngStream rng = RngStream(s).split(7);
      for (auto& v : b.data) v += sigma * rng.normal();
      mean += psnr(a, b) / 20;
    }
    CHECK(mean < prev);
    prev = mean;
  }
}

TEST_CASE("ssim examples") {
  const Image a = random_image(11, 24, 24);
  CHECK(ssim(a, a) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ssim(Image(16, 16, 0.5), Image(16, 16, 0.5)) == 1.0);
  Image inv = a;
  for (auto& v : inv.data) v = 1.0 - v;
  const double s = ssim(a, inv);
  CHECK(s >= -1.0);
  CHECK(s < 0.5);
  CHECK_THROWS_AS(ssim(Image(8, 8), Image(8, 8)), ContractError);
}

TEST_CASE("ned examples") {
  CHECK(ned("abc", "abc") == 1.0);
  CHECK(ned("abc", "abd") == doctest::Approx(0.6667).epsilon(1e-4));
  CHECK(ned("", "abc") == 0.0);
  CHECK(ned("", "") == 1.0);
  const std::vector<int> p{1, 2, 3}, g{1, 2};
  CHECK(ned(p, g) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("levenshtein matches the quadratic oracle") {
  RngStream rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const std::string a = random_string(rng), b = random_string(rng);
    REQUIRE(levenshtein(a, b) == levenshtein_oracle(a, b));
    CHECK(ned(a, b) == ned(b, a));
    CHECK(ned(a, b) >= 0.0);
    CHECK(ned(a, b) <= 1.0);
  }
}
