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

#include "glyphsr/numerics/gradcheck.hpp"
#include "glyphsr/numerics/ops.hpp"
#include "glyphsr/numerics/rmsprop.hpp"
#include "glyphsr/numerics/rng.hpp"
#include "support/gradcheck_suite.hpp"

using namespace glyphsr;
using glyphsr::testing::random_tensor;

TEST_CASE("philox matches published known-answer vectors") {
  std::uint32_t out[4];
  {
    const std::uint32_t ctr[4] = {0, 0, 0, 0};
    const std::uint32_t key[2] = {0, 0};
    philox4x32_10(ctr, key, out);
    CHECK(out[0] == 0x6627e8d5u);
    CHECK(out[1] == 0xe169c58du);
    CHECK(out[2] == 0xbc57ac4cu);
    CHECK(out[3] == 0x9b00dbd8u);
  }
  {
    const std::uint32_t ctr[4] = {0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u};
    const std::uint32_t key[2] = {0xa4093822u, 0x299f31d0u};
    philox4x32_10(ctr, key, out);
    CHECK(out[0] == 0xd16cfe09u);
    CHECK(out[1] == 0x94fdccebu);
    CHECK(out[2] == 0x5001e420u);
    CHECK(out[3] == 0x24126ea1u);
  }
}

TEST_CASE("rng streams split deterministically and independently") {
  RngStream root(42);
  auto a = root.split(1), b = root.split(1), c = root.split(2);
  CHECK(a == b);
  CHECK(a.next_u64() == b.next_u64());
  CHECK(a.next_u64() != c.next_u64());
  // Splitting does not advance the parent.
  CHECK(root.counter() == 0);

  RngStream rng(7);
  double m = 0, m2 = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = rng.normal();
    m += z;
    m2 += z * z;
  }
  CHECK(std::abs(m / n) < 0.03);
  CHECK(std::abs(m2 / n - 1.0) < 0.05);
}

TEST_CASE("backward: sum gives ones") {
  Tape<double> tape;
  auto x = tape.leaf(Tensor<double>(Shape{2, 2}, {1.0, -2.0, 3.0, 0.5}));
  auto grads = tape.backward(ops::sum(x));
  CHECK(grads.at(x.id) == Tensor<double>(Shape{2, 2}, 1.0));
}

TEST_CASE("backward: mse at its minimum has zero gradient") {
  Tape<double> tape;
  Tensor<double> v(Shape{3}, {0.2, 0.4, -1.0});
  auto x = tape.leaf(v);
  auto y = tape.constant(v);
  auto grads = tape.backward(ops::mse(x, y));
  for (double g : grads.at(x.id).data()) CHECK(g == 0.0);
}

TEST_CASE("backward: sigmoid(w*x) at w=0, x=1 has slope 0.25") {
  Tape<double> tape;
  auto w = tape.leaf(Tensor<double>::scalar(0.0));
  auto x = tape.constant(Tensor<double>::scalar(1.0));
  auto grads = tape.backward(ops::sigmoid(ops::mul(w, x)));
  CHECK(grads.at(w.id).item() == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("backward: unreachable leaves get zeros and non-scalar losses are rejected") {
  Tape<double> tape;
  auto x = tape.leaf(Tensor<double>(Shape{3}, 1.0));
  auto unused = tape.leaf(Tensor<double>(Shape{2, 2}, 5.0));
  auto grads = tape.backward(ops::sum(ops::scale(x, 2.0)));
  CHECK(grads.at(unused.id) == Tensor<double>(Shape{2, 2}, 0.0));
  CHECK_THROWS_AS(tape.backward(ops::scale(x, 2.0)), ContractError);
}

TEST_CASE("backward is linear in the loss") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    RngStream rng(seed);
    const auto a = random_tensor(rng, Shape{4, 3});
    const auto b = random_tensor(rng, Shape{3, 2});
    auto loss1 = [](Var<double> x, Var<double> y) { return ops::mean(ops::gelu(ops::matmul(x, y))); };
    auto loss2 = [](Var<double> x, Var<double>) { return ops::sum(ops::sigmoid(x)); };

    Tape<double> t1, t2, t12;
    auto x1 = t1.leaf(a), y1 = t1.leaf(b);
    auto g1 = t1.backward(loss1(x1, y1));
    auto x2 = t2.leaf(a), y2 = t2.leaf(b);
    auto g2 = t2.backward(loss2(x2, y2));
    auto x12 = t12.leaf(a), y12 = t12.leaf(b);
    auto g12 = t12.backward(ops::add(loss1(x12, y12), loss2(x12, y12)));
    for (std::size_t i = 0; i < a.size(); ++i)
      CHECK(std::abs(g12.at(x12.id)[i] - (g1.at(x1.id)[i] + g2.at(x2.id)[i])) < 1e-12);
    for (std::size_t i = 0; i < b.size(); ++i)
      CHECK(std::abs(g12.at(y12.id)[i] - (g1.at(y1.id)[i] + g2.at(y2.id)[i])) < 1e-12);
  }
}

TEST_CASE("forward results are bit-reproducible") {
  auto run = [] {
    RngStream rng(99);
    Tape<float> tape;
    auto q = tape.constant(random_tensor(rng, Shape{6, 8}).cast<float>());
    auto k = tape.constant(random_tensor(rng, Shape{6, 8}).cast<float>());
    return ops::layernorm(ops::attention(q, k, k, 2)).value();
  };
  CHECK(run() == run());
}

TEST_CASE("finite_diff_check on sum(x^2) and mean(sigmoid(x))") {
  RngStream rng(3);
  const auto x = random_tensor(rng, Shape{4, 5});
  GradCheckOptions opts;
  opts.h = 1e-5;
  CHECK(finite_diff_check([](Tape<double>&, Var<double> v) { return ops::sum(ops::mul(v, v)); }, x, opts) < 1e-6);
  CHECK(finite_diff_check([](Tape<double>&, Var<double> v) { return ops::mean(ops::sigmoid(v)); }, x, opts) < 1e-5);
}

TEST_CASE("finite_diff_check names the failing function on non-finite gradients") {
  const Tensor<double> x(Shape{2}, {-1.0, 2.0});
  GradCheckOptions opts;
  opts.label = "log_of_negative";
  try {
    finite_diff_check([](Tape<double>&, Var<double> v) { return ops::sum(ops::log(v)); }, x, opts);
    FAIL("expected NonFiniteError");
  } catch (const NonFiniteError& e) {
    const std::string what = e.what();
    CHECK(what.find("log_of_negative") != std::string::npos);
    CHECK(what.find("log") != std::string::npos);
  }
}

TEST_CASE("every primitive op passes the central-difference oracle over 20 seeds") {
  for (const auto& c : glyphsr::testing::primitive_gradient_cases()) {
    double worst = 0;
    for (std::uint64_t seed = 0; seed < 20; ++seed) worst = std::max(worst, c.run(seed));
    INFO(c.name << " worst relative error " << worst);
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("attention ignores masked keys and zeroes rows with no valid key") {
  RngStream rng(11);
  Tape<double> tape;
  auto q = tape.constant(random_tensor(rng, Shape{2, 4}));
  auto k = random_tensor(rng, Shape{3, 4});
  auto v = random_tensor(rng, Shape{3, 4});
  const std::vector<std::uint8_t> mask{1, 0, 1};
  auto base = ops::attention(q, tape.constant(k), tape.constant(v), 2, mask).value();
  // Perturbing a masked key/value changes nothing.
  for (int j = 0; j < 4; ++j) {
    k.at(1, j) += 3.0;
    v.at(1, j) -= 2.0;
  }
  CHECK(ops::attention(q, tape.constant(k), tape.constant(v), 2, mask).value() == base);
  const std::vector<std::uint8_t> none{0, 0, 0};
  auto z = ops::attention(q, tape.constant(k), tape.constant(v), 2, none).value();
  for (double x : z.data()) CHECK(x == 0.0);
}

TEST_CASE("rmsprop_step") {
  SUBCASE("zero gradient leaves the parameter and decays the state") {
    Tensor<double> p(Shape{2}, {1.0, -3.0});
    auto st = make_rmsprop_state<double>(Shape{2});
    st.square_avg = Tensor<double>(Shape{2}, {0.5, 2.0});
    rmsprop_step(p, Tensor<double>(Shape{2}, 0.0), st, 5e-5);
    CHECK(p == Tensor<double>(Shape{2}, {1.0, -3.0}));
    CHECK(st.square_avg[0] == doctest::Approx(0.45));
    CHECK(st.square_avg[1] == doctest::Approx(1.8));
  }
  SUBCASE("unit gradient from zero state") {
    Tensor<double> p = Tensor<double>::scalar(0.0);
    auto st = make_rmsprop_state<double>(Shape{1});
    rmsprop_step(p, Tensor<double>::scalar(1.0), st, 5e-5);
    CHECK(st.square_avg[0] == doctest::Approx(0.1).epsilon(1e-14));
    CHECK(p[0] == doctest::Approx(-1.5811e-4).epsilon(1e-4));
    rmsprop_step(p, Tensor<double>::scalar(1.0), st, 5e-5);
    CHECK(st.square_avg[0] == doctest::Approx(0.19).epsilon(1e-14));
  }
  SUBCASE("shape mismatch is a contract violation") {
    Tensor<double> p(Shape{2});
    auto st = make_rmsprop_state<double>(Shape{2});
    CHECK_THROWS_AS(rmsprop_step(p, Tensor<double>(Shape{3}), st, 1e-3), ContractError);
  }
  SUBCASE("state stays non-negative") {
    RngStream rng(5);
    Tensor<double> p(Shape{16});
    auto st = make_rmsprop_state<double>(Shape{16});
    for (int i = 0; i < 50; ++i) {
      rmsprop_step(p, random_tensor(rng, Shape{16}, -10, 10), st, 1e-2);
      for (double v : st.square_avg.data()) REQUIRE(v >= 0.0);
    }
  }
}
