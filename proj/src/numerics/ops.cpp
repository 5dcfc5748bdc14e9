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

#include "glyphsr/numerics/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace glyphsr::ops {

namespace {

template <typename T>
using RowMat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename T>
using MatMap = Eigen::Map<RowMat<T>>;
template <typename T>
using ConstMatMap = Eigen::Map<const RowMat<T>>;
template <typename T>
using StridedMap = Eigen::Map<RowMat<T>, 0, Eigen::OuterStride<>>;
template <typename T>
using ConstStridedMap = Eigen::Map<const RowMat<T>, 0, Eigen::OuterStride<>>;

enum class Broadcast { kSame, kScalar, kRow };

template <typename T>
Broadcast broadcast_kind(const Tensor<T>& a, const Tensor<T>& b, const char* op) {
  if (a.shape() == b.shape()) return Broadcast::kSame;
  if (b.size() == 1) return Broadcast::kScalar;
  if (a.rank() >= 1 && b.size() == static_cast<std::size_t>(a.shape().back())) return Broadcast::kRow;
  throw ContractError(std::string(op) + ": cannot broadcast " + shape_str(b.shape()) + " onto " + shape_str(a.shape()));
}

inline std::size_t bindex(Broadcast kind, std::size_t i, std::size_t row) {
  switch (kind) {
    case Broadcast::kSame:
      return i;
    case Broadcast::kScalar:
      return 0;
    case Broadcast::kRow:
      return i % row;
  }
  return 0;
}

// Reduces a full-size gradient onto b's broadcast shape.
template <typename T>
Tensor<T> reduce_to(const Tensor<T>& full, const Tensor<T>& like, Broadcast kind) {
  if (kind == Broadcast::kSame) return full;
  Tensor<T> out(like.shape());
  const std::size_t row = out.size();
  for (std::size_t i = 0; i < full.size(); ++i) out[bindex(kind, i, row)] += full[i];
  return out;
}

template <typename T, typename F, typename DF>
Var<T> unary(Var<T> a, const char* name, F f, DF df) {
  const Tensor<T>& x = a.value();
  Tensor<T> y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  const int ia = a.id;
  return a.tape->record(std::move(y), {ia}, name, [ia, df](Tape<T>& tape, int self, const Tensor<T>& g) {
    if (!tape.requires_grad(ia)) return;
    const Tensor<T>& x = tape.value(ia);
    const Tensor<T>& y = tape.value(self);
    Tensor<T>& dx = tape.grad_buffer(ia);
    for (std::size_t i = 0; i < x.size(); ++i) dx[i] += g[i] * df(x[i], y[i]);
  });
}

void check_same_tape(const void* a, const void* b, const char* op) {
  if (a != b) throw ContractError(std::string(op) + ": operands live on different tapes");
}

}  // namespace

template <typename T>
Var<T> add(Var<T> a, Var<T> b) {
  check_same_tape(a.tape, b.tape, "add");
  const auto kind = broadcast_kind(a.value(), b.value(), "add");
  const Tensor<T>& x = a.value();
  const Tensor<T>& z = b.value();
  Tensor<T> y(x.shape());
  const std::size_t row = z.size();
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + z[bindex(kind, i, row)];
  const int ia = a.id, ib = b.id;
  return a.tape->record(std::move(y), {ia, ib}, "add", [ia, ib, kind](Tape<T>& tape, int, const Tensor<T>& g) {
    tape.accumulate(ia, g);
    if (tape.requires_grad(ib)) tape.accumulate(ib, reduce_to(g, tape.value(ib), kind));
  });
}

template <typename T>
Var<T> sub(Var<T> a, Var<T> b) {
  check_same_tape(a.tape, b.tape, "sub");
  const auto kind = broadcast_kind(a.value(), b.value(), "sub");
  const Tensor<T>& x = a.value();
  const Tensor<T>& z = b.value();
  Tensor<T> y(x.shape());
  const std::size_t row = z.size();
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] - z[bindex(kind, i, row)];
  const int ia = a.id, ib = b.id;
  return a.tape->record(std::move(y), {ia, ib}, "sub", [ia, ib, kind](Tape<T>& tape, int, const Tensor<T>& g) {
    tape.accumulate(ia, g);
    if (tape.requires_grad(ib)) {
      Tensor<T> r = reduce_to(g, tape.value(ib), kind);
      for (auto& v : r.storage()) v = -v;
      tape.accumulate(ib, r);
    }
  });
}

template <typename T>
Var<T> mul(Var<T> a, Var<T> b) {
  check_same_tape(a.tape, b.tape, "mul");
  const auto kind = broadcast_kind(a.value(), b.value(), "mul");
  const Tensor<T>& x = a.value();
  const Tensor<T>& z = b.value();
  Tensor<T> y(x.shape());
  const std::size_t row = z.size();
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] * z[bindex(kind, i, row)];
  const int ia = a.id, ib = b.id;
  return a.tape->record(std::move(y), {ia, ib}, "mul", [ia, ib, kind](Tape<T>& tape, int, const Tensor<T>& g) {
    const Tensor<T>& x = tape.value(ia);
    const Tensor<T>& z = tape.value(ib);
    const std::size_t row = z.size();
    if (tape.requires_grad(ia)) {
      Tensor<T>& dx = tape.grad_buffer(ia);
      for (std::size_t i = 0; i < x.size(); ++i) dx[i] += g[i] * z[bindex(kind, i, row)];
    }
    if (tape.requires_grad(ib)) {
      Tensor<T>& dz = tape.grad_buffer(ib);
      for (std::size_t i = 0; i < x.size(); ++i) dz[bindex(kind, i, row)] += g[i] * x[i];
    }
  });
}

template <typename T>
Var<T> scale(Var<T> a, T c) {
  return unary(a, "scale", [c](T x) { return c * x; }, [c](T, T) { return c; });
}

template <typename T>
Var<T> add_scalar(Var<T> a, T c) {
  return unary(a, "add_scalar", [c](T x) { return x + c; }, [](T, T) { return T(1); });
}

template <typename T>
Var<T> matmul(Var<T> a, Var<T> b) {
  check_same_tape(a.tape, b.tape, "matmul");
  const Tensor<T>& x = a.value();
  const Tensor<T>& z = b.value();
  require(x.rank() == 2 && z.rank() == 2 && x.dim(1) == z.dim(0),
          "matmul: incompatible shapes " + shape_str(x.shape()) + " x " + shape_str(z.shape()));
  const int n = x.dim(0), k = x.dim(1), m = z.dim(1);
  Tensor<T> y(Shape{n, m});
  MatMap<T>(y.ptr(), n, m).noalias() = ConstMatMap<T>(x.ptr(), n, k) * ConstMatMap<T>(z.ptr(), k, m);
  const int ia = a.id, ib = b.id;
  return a.tape->record(std::move(y), {ia, ib}, "matmul", [ia, ib, n, k, m](Tape<T>& tape, int, const Tensor<T>& g) {
    ConstMatMap<T> gm(g.ptr(), n, m);
    if (tape.requires_grad(ia)) {
      MatMap<T>(tape.grad_buffer(ia).ptr(), n, k).noalias() += gm * ConstMatMap<T>(tape.value(ib).ptr(), k, m).transpose();
    }
    if (tape.requires_grad(ib)) {
      MatMap<T>(tape.grad_buffer(ib).ptr(), k, m).noalias() += ConstMatMap<T>(tape.value(ia).ptr(), n, k).transpose() * gm;
    }
  });
}

template <typename T>
Var<T> transpose(Var<T> a) {
  const Tensor<T>& x = a.value();
  require(x.rank() == 2, "transpose: expects a 2-D tensor");
  const int n = x.dim(0), m = x.dim(1);
  Tensor<T> y(Shape{m, n});
  MatMap<T>(y.ptr(), m, n) = ConstMatMap<T>(x.ptr(), n, m).transpose();
  const int ia = a.id;
  return a.tape->record(std::move(y), {ia}, "transpose", [ia, n, m](Tape<T>& tape, int, const Tensor<T>& g) {
    MatMap<T>(tape.grad_buffer(ia).ptr(), n, m) += ConstMatMap<T>(g.ptr(), m, n).transpose();
  });
}

template <typename T>
Var<T> reshape(Var<T> a, Shape shape) {
  Tensor<T> y = a.value().reshaped(std::move(shape));
  const int ia = a.id;
  return a.tape->record(std::move(y), {ia}, "reshape", [ia](Tape<T>& tape, int, const Tensor<T>& g) {
    Tensor<T>& dx = tape.grad_buffer(ia);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g[i];
  });
}

template <typename T>
Var<T> layernorm(Var<T> a, T eps) {
  const Tensor<T>& x = a.value();
  const int d = x.shape().back();
  const std::size_t rows = x.size() / static_cast<std::size_t>(d);
  Tensor<T> y(x.shape());
  std::vector<T> inv_std(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x.ptr() + r * d;
    T mu = 0;
    for (int j = 0; j < d; ++j) mu += xr[j];
    mu /= d;
    T var = 0;
    for (int j = 0; j < d; ++j) var += (xr[j] - mu) * (xr[j] - mu);
    var /= d;
    inv_std[r] = T(1) / std::sqrt(var + eps);
    for (int j = 0; j < d; ++j) y[r * d + j] = (xr[j] - mu) * inv_std[r];
  }
  const int ia = a.id;
  return a.tape->record(std::move(y), {ia}, "layernorm",
                        [ia, d, rows, inv_std = std::move(inv_std)](Tape<T>& tape, int self, const Tensor<T>& g) {
                          const Tensor<T>& y = tape.value(self);
                          Tensor<T>& dx = tape.grad_buffer(ia);
                          for (std::size_t r = 0; r < rows; ++r) {
                            const T* gr = g.ptr() + r * d;
                            const T* yr = y.ptr() + r * d;
                            T gmean = 0, gy = 0;
                            for (int j = 0; j < d; ++j) {
                              gmean += gr[j];
                              gy += gr[j] * yr[j];
                            }
                            gmean /= d;
                            gy /= d;
                            for (int j = 0; j < d; ++j) dx[r * d + j] += inv_std[r] * (gr[j] - gmean - yr[j] * gy);
                          }
                        });
}

template <typename T>
Var<T> softmax_rows(Var<T> a) {
  const Tensor<T>& x = a.value();
  const int d = x.shape().back();
  const std::size_t rows = x.size() / static_cast<std::size_t>(d);
  Tensor<T> y(x.shape());
  for (std::size_t r = 0; r < rows; ++r) {
    const T* xr = x.ptr() + r * d;
    T* yr = y.ptr() + r * d;
    const T mx = *std::max_element(xr, xr + d);
    T z = 0;
    for (int j = 0; j < d; ++j) z += (yr[j] = std::exp(xr[j] - mx));
    for (int j = 0; j < d; ++j) yr[j] /= z;
  }
  const int ia = a.id;
  return a.tape->record(std::move(y), {ia}, "softmax", [ia, d, rows](Tape<T>& tape, int self, const Tensor<T>& g) {
    const Tensor<T>& y = tape.value(self);
    Tensor<T>& dx = tape.grad_buffer(ia);
    for (std::size_t r = 0; r < rows; ++r) {
      const T* gr = g.ptr() + r * d;
      const T* yr = y.ptr() + r * d;
      T dot = 0;
      for (int j = 0; j < d; ++j) dot += gr[j] * yr[j];
      for (int j = 0; j < d; ++j) dx[r * d + j] += yr[j] * (gr[j] - dot);
    }
  });
}

template <typename T>
Var<T> sigmoid(Var<T> a) {
  return unary(
      a, "sigmoid",
      [](T x) { return x >= 0 ? T(1) / (T(1) + std::exp(-x)) : std::exp(x) / (T(1) + std::exp(x)); },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Var<T> silu(Var<T> a) {
  return unary(
      a, "silu", [](T x) { return x / (T(1) + std::exp(-x)); },
      [](T x, T) {
        const T s = T(1) / (T(1) + std::exp(-x));
        return s * (T(1) + x * (T(1) - s));
      });
}

template <typename T>
Var<T> gelu(Var<T> a) {
  constexpr T c = T(0.7978845608028654);  // sqrt(2/pi)
  constexpr T k = T(0.044715);
  return unary(
      a, "gelu", [](T x) { return T(0.5) * x * (T(1) + std::tanh(c * (x + k * x * x * x))); },
      [](T x, T) {
        const T th = std::tanh(c * (x + k * x * x * x));
        return T(0.5) * (T(1) + th) + T(0.5) * x * (T(1) - th * th) * c * (T(1) + T(3) * k * x * x);
      });
}

template <typename T>
Var<T> log(Var<T> a, T floor) {
  return unary(
      a, "log", [floor](T x) { return std::log(std::max(x, floor)); },
      [floor](T x, T) { return x < floor ? T(0) : T(1) / x; });
}

template <typename T>
Var<T> power(Var<T> a, T exponent) {
  return unary(
      a, "power", [exponent](T x) { return std::pow(x, exponent); },
      [exponent](T x, T) { return exponent * std::pow(x, exponent - T(1)); });
}

template <typename T>
Var<T> sum(Var<T> a) {
  const Tensor<T>& x = a.value();
  T s = 0;
  for (T v : x.data()) s += v;
  const int ia = a.id;
  return a.tape->record(Tensor<T>::scalar(s), {ia}, "sum", [ia](Tape<T>& tape, int, const Tensor<T>& g) {
    Tensor<T>& dx = tape.grad_buffer(ia);
    for (auto& v : dx.storage()) v += g[0];
  });
}

template <typename T>
Var<T> mean(Var<T> a) {
  return scale(sum(a), T(1) / static_cast<T>(a.size()));
}

template <typename T>
Var<T> mse(Var<T> a, Var<T> b) {
  check_same_tape(a.tape, b.tape, "mse");
  const Tensor<T>& x = a.value();
  const Tensor<T>& z = b.value();
  require(x.shape() == z.shape(), "mse: shape mismatch " + shape_str(x.shape()) + " vs " + shape_str(z.shape()));
  T s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - z[i]) * (x[i] - z[i]);
  const T n = static_cast<T>(x.size());
  const int ia = a.id, ib = b.id;
  return a.tape->record(Tensor<T>::scalar(s / n), {ia, ib}, "mse", [ia, ib, n](Tape<T>& tape, int, const Tensor<T>& g) {
    const Tensor<T>& x = tape.value(ia);
    const Tensor<T>& z = tape.value(ib);
    const T c = T(2) * g[0] / n;
    if (tape.requires_grad(ia)) {
      Tensor<T>& dx = tape.grad_buffer(ia);
      for (std::size_t i = 0; i < x.size(); ++i) dx[i] += c * (x[i] - z[i]);
    }
    if (tape.requires_grad(ib)) {
      Tensor<T>& dz = tape.grad_buffer(ib);
      for (std::size_t i = 0; i < x.size(); ++i) dz[i] -= c * (x[i] - z[i]);
    }
  });
}

template <typename T>
Var<T> embedding(Var<T> table, std::span<const int> ids) {
  const Tensor<T>& w = table.value();
  require(w.rank() == 2, "embedding: table must be [vocab, dim]");
  require(!ids.empty(), "embedding: empty id list");
  const int vocab = w.dim(0), d = w.dim(1);
  Tensor<T> y(Shape{static_cast<int>(ids.size()), d});
  for (std::size_t i = 0; i < ids.size(); ++i) {
    require(ids[i] >= 0 && ids[i] < vocab, "embedding: token id out of vocabulary");
    std::copy_n(w.ptr() + static_cast<std::size_t>(ids[i]) * d, d, y.ptr() + i * d);
  }
  const int it = table.id;
  return table.tape->record(std::move(y), {it}, "embedding",
                            [it, d, ids = std::vector<int>(ids.begin(), ids.end())](Tape<T>& tape, int, const Tensor<T>& g) {
                              Tensor<T>& dw = tape.grad_buffer(it);
                              for (std::size_t i = 0; i < ids.size(); ++i)
                                for (int j = 0; j < d; ++j) dw[static_cast<std::size_t>(ids[i]) * d + j] += g[i * d + j];
                            });
}

template <typename T>
Var<T> slice_rows(Var<T> a, int begin, int end) {
  const Tensor<T>& x = a.value();
  require(x.rank() >= 1 && 0 <= begin && begin < end && end <= x.dim(0), "slice_rows: bad range");
  const std::size_t row = x.size() / static_cast<std::size_t>(x.dim(0));
  Shape shape = x.shape();
  shape[0] = end - begin;
  AlignedVector<T> data(x.ptr() + begin * row, x.ptr() + end * row);
  const int ia = a.id;
  return a.tape->record(Tensor<T>(std::move(shape), std::move(data)), {ia}, "slice",
                        [ia, begin, row](Tape<T>& tape, int, const Tensor<T>& g) {
                          Tensor<T>& dx = tape.grad_buffer(ia);
                          for (std::size_t i = 0; i < g.size(); ++i) dx[begin * row + i] += g[i];
                        });
}

template <typename T>
Var<T> concat_rows(std::span<const Var<T>> parts) {
  require(!parts.empty(), "concat_rows: nothing to concatenate");
  Tape<T>* tape = parts[0].tape;
  Shape trailing(parts[0].shape().begin() + 1, parts[0].shape().end());
  int rows = 0;
  std::vector<int> ids;
  AlignedVector<T> data;
  for (const auto& p : parts) {
    check_same_tape(tape, p.tape, "concat_rows");
    require(Shape(p.shape().begin() + 1, p.shape().end()) == trailing, "concat_rows: trailing shapes differ");
    rows += p.shape()[0];
    ids.push_back(p.id);
    data.insert(data.end(), p.value().data().begin(), p.value().data().end());
  }
  Shape shape = parts[0].shape();
  shape[0] = rows;
  return tape->record(Tensor<T>(std::move(shape), std::move(data)), ids, "concat",
                      [ids](Tape<T>& tape, int, const Tensor<T>& g) {
                        std::size_t off = 0;
                        for (int id : ids) {
                          const std::size_t n = tape.value(id).size();
                          if (tape.requires_grad(id)) {
                            Tensor<T>& dx = tape.grad_buffer(id);
                            for (std::size_t i = 0; i < n; ++i) dx[i] += g[off + i];
                          }
                          off += n;
                        }
                      });
}

namespace {

// cols [c*k*k, ho*wo]
template <typename T>
void im2col(const T* x, int c, int h, int w, int k, int pad, int ho, int wo, T* cols) {
  for (int ci = 0; ci < c; ++ci)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        T* dst = cols + ((ci * k + ky) * k + kx) * ho * wo;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy + ky - pad;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox + kx - pad;
            dst[oy * wo + ox] = (iy >= 0 && iy < h && ix >= 0 && ix < w) ? x[(ci * h + iy) * w + ix] : T(0);
          }
        }
      }
}

template <typename T>
void col2im_add(const T* cols, int c, int h, int w, int k, int pad, int ho, int wo, T* x) {
  for (int ci = 0; ci < c; ++ci)
    for (int ky = 0; ky < k; ++ky)
      for (int kx = 0; kx < k; ++kx) {
        const T* src = cols + ((ci * k + ky) * k + kx) * ho * wo;
        for (int oy = 0; oy < ho; ++oy) {
          const int iy = oy + ky - pad;
          if (iy < 0 || iy >= h) continue;
          for (int ox = 0; ox < wo; ++ox) {
            const int ix = ox + kx - pad;
            if (ix >= 0 && ix < w) x[(ci * h + iy) * w + ix] += src[oy * wo + ox];
          }
        }
      }
}

}  // namespace

template <typename T>
Var<T> conv2d(Var<T> x, Var<T> w, Var<T> b, int pad) {
  check_same_tape(x.tape, w.tape, "conv2d");
  check_same_tape(x.tape, b.tape, "conv2d");
  const Tensor<T>& xv = x.value();
  const Tensor<T>& wv = w.value();
  require(xv.rank() == 3 && wv.rank() == 4 && wv.dim(1) == xv.dim(0) && wv.dim(2) == wv.dim(3),
          "conv2d: expects x [c,h,w] and w [o,c,k,k], got " + shape_str(xv.shape()) + " and " + shape_str(wv.shape()));
  require(b.size() == static_cast<std::size_t>(wv.dim(0)), "conv2d: bias length must equal output channels");
  const int c = xv.dim(0), h = xv.dim(1), wd = xv.dim(2), o = wv.dim(0), k = wv.dim(2);
  const int ho = h + 2 * pad - k + 1, wo = wd + 2 * pad - k + 1;
  require(ho > 0 && wo > 0, "conv2d: kernel larger than padded input");
  const int ckk = c * k * k, hw = ho * wo;
  AlignedVector<T> cols(static_cast<std::size_t>(ckk) * hw);
  im2col(xv.ptr(), c, h, wd, k, pad, ho, wo, cols.data());
  Tensor<T> y(Shape{o, ho, wo});
  MatMap<T> ym(y.ptr(), o, hw);
  ym.noalias() = ConstMatMap<T>(wv.ptr(), o, ckk) * ConstMatMap<T>(cols.data(), ckk, hw);
  const T* bv = b.value().ptr();
  for (int oc = 0; oc < o; ++oc) ym.row(oc).array() += bv[oc];
  const int ix = x.id, iw = w.id, ib = b.id;
  return x.tape->record(
      std::move(y), {ix, iw, ib}, "conv2d",
      [=, cols = std::move(cols)](Tape<T>& tape, int, const Tensor<T>& g) {
        ConstMatMap<T> gm(g.ptr(), o, hw);
        if (tape.requires_grad(iw))
          MatMap<T>(tape.grad_buffer(iw).ptr(), o, ckk).noalias() += gm * ConstMatMap<T>(cols.data(), ckk, hw).transpose();
        if (tape.requires_grad(ib)) {
          Tensor<T>& db = tape.grad_buffer(ib);
          for (int oc = 0; oc < o; ++oc) db[oc] += gm.row(oc).sum();
        }
        if (tape.requires_grad(ix)) {
          RowMat<T> dcols = ConstMatMap<T>(tape.value(iw).ptr(), o, ckk).transpose() * gm;
          col2im_add(dcols.data(), c, h, wd, k, pad, ho, wo, tape.grad_buffer(ix).ptr());
        }
      });
}

template <typename T>
Var<T> attention(Var<T> q, Var<T> k, Var<T> v, int heads, std::span<const std::uint8_t> key_mask) {
  check_same_tape(q.tape, k.tape, "attention");
  check_same_tape(q.tape, v.tape, "attention");
  const Tensor<T>& qv = q.value();
  const Tensor<T>& kv = k.value();
  const Tensor<T>& vv = v.value();
  require(qv.rank() == 2 && kv.rank() == 2 && vv.rank() == 2, "attention: q, k, v must be 2-D");
  const int nq = qv.dim(0), nk = kv.dim(0), d = qv.dim(1);
  require(kv.dim(1) == d && vv.dim(1) == d && vv.dim(0) == nk, "attention: q/k/v shapes disagree");
  require(heads > 0 && d % heads == 0, "attention: width not divisible by heads");
  require(key_mask.empty() || key_mask.size() == static_cast<std::size_t>(nk), "attention: key mask length mismatch");
  const int dh = d / heads;
  const T scale = T(1) / std::sqrt(static_cast<T>(dh));
  std::vector<std::uint8_t> mask(key_mask.begin(), key_mask.end());
  if (mask.empty()) mask.assign(static_cast<std::size_t>(nk), 1);
  const bool any_valid = std::find(mask.begin(), mask.end(), 1) != mask.end();

  // probs [heads, nq, nk]
  AlignedVector<T> probs(static_cast<std::size_t>(heads) * nq * nk, T(0));
  Tensor<T> out(Shape{nq, d});
  if (any_valid) {
    for (int h = 0; h < heads; ++h) {
      ConstStridedMap<T> qh(qv.ptr() + h * dh, nq, dh, Eigen::OuterStride<>(d));
      ConstStridedMap<T> kh(kv.ptr() + h * dh, nk, dh, Eigen::OuterStride<>(d));
      ConstStridedMap<T> vh(vv.ptr() + h * dh, nk, dh, Eigen::OuterStride<>(d));
      MatMap<T> p(probs.data() + static_cast<std::size_t>(h) * nq * nk, nq, nk);
      p.noalias() = (qh * kh.transpose()) * scale;
      for (int i = 0; i < nq; ++i) {
        T mx = -std::numeric_limits<T>::infinity();
        for (int j = 0; j < nk; ++j)
          if (mask[j]) mx = std::max(mx, p(i, j));
        T z = 0;
        for (int j = 0; j < nk; ++j) {
          p(i, j) = mask[j] ? std::exp(p(i, j) - mx) : T(0);
          z += p(i, j);
        }
        p.row(i) /= z;
      }
      StridedMap<T>(out.ptr() + h * dh, nq, dh, Eigen::OuterStride<>(d)).noalias() = p * vh;
    }
  }
  const int iq = q.id, ik = k.id, iv = v.id;
  return q.tape->record(
      std::move(out), {iq, ik, iv}, "attention",
      [=, probs = std::move(probs)](Tape<T>& tape, int, const Tensor<T>& g) {
        if (!any_valid) return;
        const Tensor<T>& qv = tape.value(iq);
        const Tensor<T>& kv = tape.value(ik);
        const Tensor<T>& vv = tape.value(iv);
        const bool gq = tape.requires_grad(iq), gk = tape.requires_grad(ik), gv = tape.requires_grad(iv);
        T* dq = gq ? tape.grad_buffer(iq).ptr() : nullptr;
        T* dk = gk ? tape.grad_buffer(ik).ptr() : nullptr;
        T* dv = gv ? tape.grad_buffer(iv).ptr() : nullptr;
        RowMat<T> dp(nq, nk);
        for (int h = 0; h < heads; ++h) {
          ConstMatMap<T> p(probs.data() + static_cast<std::size_t>(h) * nq * nk, nq, nk);
          ConstStridedMap<T> go(g.ptr() + h * dh, nq, dh, Eigen::OuterStride<>(d));
          if (gv) StridedMap<T>(dv + h * dh, nk, dh, Eigen::OuterStride<>(d)).noalias() += p.transpose() * go;
          if (!gq && !gk) continue;
          ConstStridedMap<T> vh(vv.ptr() + h * dh, nk, dh, Eigen::OuterStride<>(d));
          dp.noalias() = go * vh.transpose();
          for (int i = 0; i < nq; ++i) {
            const T dot = (dp.row(i).array() * p.row(i).array()).sum();
            dp.row(i) = (p.row(i).array() * (dp.row(i).array() - dot)).matrix() * scale;
          }
          if (gq)
            StridedMap<T>(dq + h * dh, nq, dh, Eigen::OuterStride<>(d)).noalias() +=
                dp * ConstStridedMap<T>(kv.ptr() + h * dh, nk, dh, Eigen::OuterStride<>(d));
          if (gk)
            StridedMap<T>(dk + h * dh, nk, dh, Eigen::OuterStride<>(d)).noalias() +=
                dp.transpose() * ConstStridedMap<T>(qv.ptr() + h * dh, nq, dh, Eigen::OuterStride<>(d));
        }
      });
}

#define GLYPHSR_INSTANTIATE_OPS(T)                                                           \
  template Var<T> add(Var<T>, Var<T>);                                                       \
  template Var<T> sub(Var<T>, Var<T>);                                                       \
  template Var<T> mul(Var<T>, Var<T>);                                                       \
  template Var<T> scale(Var<T>, T);                                                          \
  template Var<T> add_scalar(Var<T>, T);                                                     \
  template Var<T> matmul(Var<T>, Var<T>);                                                    \
  template Var<T> transpose(Var<T>);                                                         \
  template Var<T> reshape(Var<T>, Shape);                                                    \
  template Var<T> layernorm(Var<T>, T);                                                      \
  template Var<T> softmax_rows(Var<T>);                                                      \
  template Var<T> sigmoid(Var<T>);                                                           \
  template Var<T> silu(Var<T>);                                                              \
  template Var<T> gelu(Var<T>);                                                              \
  template Var<T> log(Var<T>, T);                                                            \
  template Var<T> power(Var<T>, T);                                                          \
  template Var<T> sum(Var<T>);                                                               \
  template Var<T> mean(Var<T>);                                                              \
  template Var<T> mse(Var<T>, Var<T>);                                                       \
  template Var<T> embedding(Var<T>, std::span<const int>);                                   \
  template Var<T> slice_rows(Var<T>, int, int);                                              \
  template Var<T> concat_rows(std::span<const Var<T>>);                                      \
  template Var<T> conv2d(Var<T>, Var<T>, Var<T>, int);                                       \
  template Var<T> attention(Var<T>, Var<T>, Var<T>, int, std::span<const std::uint8_t>);

GLYPHSR_INSTANTIATE_OPS(float)
GLYPHSR_INSTANTIATE_OPS(double)

}  // namespace glyphsr::ops
