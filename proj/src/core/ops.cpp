// Copyright 2026 The Hacomp Authors. All Rights Reserved.
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

#include "core/ops.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <memory>

#include "core/fft.hpp"
#include "core/kernels.hpp"

namespace hacomp {
namespace ops {

namespace {

using Data = std::shared_ptr<ArrayData>;

std::vector<double>& GradBuf(const Data& d) {
  if (d->grad.empty()) d->grad.assign(d->v.size(), 0.0);
  return d->grad;
}

bool Tracks(Tape* t, const Array& a) { return t != nullptr && a.TracksGradOn(t); }

void CheckSameShape(const Array& a, const Array& b, const char* op) {
  Check(a.shape() == b.shape(), std::string(op) + ": shape mismatch " +
                                    ShapeToString(a.shape()) + " vs " +
                                    ShapeToString(b.shape()));
}

// Shapes equal, or either side scalar.
void CheckBroadcastable(const Array& a, const Array& b, const char* op) {
  if (a.size() == 1 || b.size() == 1) return;
  CheckSameShape(a, b, op);
}

// Generic binary elementwise with scalar broadcast on either side.
// fwd(a, b) -> value; dfa/dfb give local partials as fn of (a, b, out).
template <typename F, typename Da, typename Db>
Array Binary(Tape* t, const Array& a, const Array& b, const char* name, F fwd,
             Da dfa, Db dfb) {
  CheckBroadcastable(a, b, name);
  const bool a_scalar = a.size() == 1;
  const bool b_scalar = b.size() == 1;
  const Array& big = a_scalar ? b : a;
  Array out = Array::Zeros(big.shape());
  const int64_t n = out.size();
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
  for (int64_t i = 0; i < n; ++i)
    po[i] = fwd(pa[a_scalar ? 0 : i], pb[b_scalar ? 0 : i]);
  if (Tracks(t, a) || Tracks(t, b)) {
    const bool need_a = Tracks(t, a);
    const bool need_b = Tracks(t, b);
    Data da = a.ptr(), db = b.ptr(), dout = out.ptr();
    t->Record(dout, [=]() {
      const std::vector<double>& g = dout->grad;
      const int64_t n2 = static_cast<int64_t>(g.size());
      if (need_a) {
        std::vector<double>& ga = GradBuf(da);
        for (int64_t i = 0; i < n2; ++i)
          ga[a_scalar ? 0 : i] +=
              g[i] * dfa(da->v[a_scalar ? 0 : i], db->v[b_scalar ? 0 : i]);
      }
      if (need_b) {
        std::vector<double>& gb = GradBuf(db);
        for (int64_t i = 0; i < n2; ++i)
          gb[b_scalar ? 0 : i] +=
              g[i] * dfb(da->v[a_scalar ? 0 : i], db->v[b_scalar ? 0 : i]);
      }
    });
  }
  return out;
}

template <typename F, typename D>
Array Unary(Tape* t, const Array& a, const char* name, F fwd, D dfa) {
  (void)name;
  Array out = Array::Zeros(a.shape());
  const int64_t n = out.size();
  const double* pa = a.data();
  double* po = out.data();
  for (int64_t i = 0; i < n; ++i) po[i] = fwd(pa[i]);
  if (Tracks(t, a)) {
    Data da = a.ptr(), dout = out.ptr();
    t->Record(dout, [=]() {
      const std::vector<double>& g = dout->grad;
      std::vector<double>& ga = GradBuf(da);
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * dfa(da->v[i], dout->v[i]);
    });
  }
  return out;
}

// Rows/cols view of a 1-D or 2-D array: 1-D is a single row.
void RowsCols(const Array& a, int64_t* rows, int64_t* cols) {
  if (a.rank() == 1) {
    *rows = 1;
    *cols = a.dim(0);
  } else {
    Check(a.rank() == 2, "expected 1-D or 2-D array, got " + ShapeToString(a.shape()));
    *rows = a.dim(0);
    *cols = a.dim(1);
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// elementwise

Array Add(Tape* t, const Array& a, const Array& b) {
  return Binary(
      t, a, b, "add", [](double x, double y) { return x + y; },
      [](double, double) { return 1.0; }, [](double, double) { return 1.0; });
}

Array Sub(Tape* t, const Array& a, const Array& b) {
  return Binary(
      t, a, b, "sub", [](double x, double y) { return x - y; },
      [](double, double) { return 1.0; }, [](double, double) { return -1.0; });
}

Array Mul(Tape* t, const Array& a, const Array& b) {
  return Binary(
      t, a, b, "mul", [](double x, double y) { return x * y; },
      [](double, double y) { return y; }, [](double x, double) { return x; });
}

Array Neg(Tape* t, const Array& a) {
  return Unary(
      t, a, "neg", [](double x) { return -x; },
      [](double, double) { return -1.0; });
}

Array Square(Tape* t, const Array& a) {
  return Unary(
      t, a, "square", [](double x) { return x * x; },
      [](double x, double) { return 2.0 * x; });
}

Array Abs(Tape* t, const Array& a) {
  // Subgradient 0 at the origin.
  return Unary(
      t, a, "abs", [](double x) { return std::fabs(x); },
      [](double x, double) { return x > 0 ? 1.0 : (x < 0 ? -1.0 : 0.0); });
}

Array Sqrt(Tape* t, const Array& a) {
  return Unary(
      t, a, "sqrt", [](double x) { return std::sqrt(x); },
      [](double, double y) { return 0.5 / y; });
}

Array Scale(Tape* t, const Array& a, double c) {
  return Unary(
      t, a, "scale", [c](double x) { return c * x; },
      [c](double, double) { return c; });
}

Array AddConst(Tape* t, const Array& a, double c) {
  return Unary(
      t, a, "add_const", [c](double x) { return x + c; },
      [](double, double) { return 1.0; });
}

Array PowConst(Tape* t, const Array& a, double p) {
  return Unary(
      t, a, "pow_const", [p](double x) { return std::pow(x, p); },
      [p](double x, double y) { return p * y / x; });
}

Array Sigmoid(Tape* t, const Array& a) {
  auto sig = [](double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  };
  return Unary(
      t, a, "sigmoid", sig, [](double, double y) { return y * (1.0 - y); });
}

Array AlgebraicSigmoid(Tape* t, const Array& a) {
  return Unary(
      t, a, "alg_sigmoid",
      [](double x) { return 0.5 * (1.0 + x / std::sqrt(1.0 + x * x)); },
      [](double x, double) {
        const double d = 1.0 + x * x;
        return 0.5 / (d * std::sqrt(d));
      });
}

Array Softplus(Tape* t, const Array& a) {
  auto sp = [](double x) { return std::max(x, 0.0) + std::log1p(std::exp(-std::fabs(x))); };
  auto sig = [](double x) {
    return x >= 0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x));
  };
  return Unary(
      t, a, "softplus", sp, [sig](double x, double) { return sig(x); });
}

Array SmoothRelu(Tape* t, const Array& a, double eps) {
  const double e2 = eps * eps;
  return Unary(
      t, a, "smooth_relu",
      [e2](double x) { return 0.5 * (x + std::sqrt(x * x + e2)); },
      [e2](double x, double) { return 0.5 * (1.0 + x / std::sqrt(x * x + e2)); });
}

Array Affine(Tape* t, const Array& x, double a, double b) {
  return Unary(
      t, x, "affine", [a, b](double v) { return a * v + b; },
      [a](double, double) { return a; });
}

Array LinComb3(Tape* t, const Array& x1, const Array& x2, const Array& x3,
               double c1, double c2, double c3, double bias) {
  CheckSameShape(x1, x2, "lincomb3");
  CheckSameShape(x1, x3, "lincomb3");
  Array out = Array::Zeros(x1.shape());
  const int64_t n = out.size();
  for (int64_t i = 0; i < n; ++i)
    out.data()[i] =
        c1 * x1.data()[i] + c2 * x2.data()[i] + c3 * x3.data()[i] + bias;
  if (Tracks(t, x1) || Tracks(t, x2) || Tracks(t, x3)) {
    const bool n1 = Tracks(t, x1), n2 = Tracks(t, x2), n3 = Tracks(t, x3);
    Data d1 = x1.ptr(), d2 = x2.ptr(), d3 = x3.ptr(), dout = out.ptr();
    t->Record(dout, [=]() {
      const std::vector<double>& g = dout->grad;
      if (n1) {
        std::vector<double>& g1 = GradBuf(d1);
        for (size_t i = 0; i < g.size(); ++i) g1[i] += c1 * g[i];
      }
      if (n2) {
        std::vector<double>& g2 = GradBuf(d2);
        for (size_t i = 0; i < g.size(); ++i) g2[i] += c2 * g[i];
      }
      if (n3) {
        std::vector<double>& g3 = GradBuf(d3);
        for (size_t i = 0; i < g.size(); ++i) g3[i] += c3 * g[i];
      }
    });
  }
  return out;
}

Array RepeatRows(Tape* t, const Array& x, int64_t n) {
  Check(x.rank() == 1, "repeat_rows: expects a 1-D signal");
  Check(n >= 1, "repeat_rows: n must be >= 1");
  const int64_t cols = x.dim(0);
  Array out = Array::Zeros({n, cols});
  for (int64_t r = 0; r < n; ++r)
    std::memcpy(out.data() + r * cols, x.data(),
                sizeof(double) * static_cast<size_t>(cols));
  if (Tracks(t, x)) {
    Data dx = x.ptr(), dout = out.ptr();
    t->Record(dout, [=]() {
      std::vector<double>& gx = GradBuf(dx);
      const std::vector<double>& g = dout->grad;
      for (int64_t r = 0; r < n; ++r)
        for (int64_t c = 0; c < cols; ++c) gx[c] += g[r * cols + c];
    });
  }
  return out;
}

Array ScaleRows(Tape* t, const Array& a, const std::vector<double>& row_weights) {
  int64_t rows, cols;
  RowsCols(a, &rows, &cols);
  Check(static_cast<int64_t>(row_weights.size()) == rows,
        "scale_rows: weight count " + std::to_string(row_weights.size()) +
            " != row count " + std::to_string(rows));
  Array out = Array::Zeros(a.shape());
  for (int64_t r = 0; r < rows; ++r)
    for (int64_t c = 0; c < cols; ++c)
      out.data()[r * cols + c] = a.data()[r * cols + c] * row_weights[r];
  if (Tracks(t, a)) {
    Data da = a.ptr(), dout = out.ptr();
    auto w = std::make_shared<std::vector<double>>(row_weights);
    t->Record(dout, [=]() {
      std::vector<double>& ga = GradBuf(da);
      const std::vector<double>& g = dout->grad;
      for (int64_t r = 0; r < rows; ++r)
        for (int64_t c = 0; c < cols; ++c)
          ga[r * cols + c] += g[r * cols + c] * (*w)[r];
    });
  }
  return out;
}

Array MulMask(Tape* t, const Array& a, const std::vector<double>& mask) {
  int64_t rows, cols;
  RowsCols(a, &rows, &cols);
  const bool per_col = static_cast<int64_t>(mask.size()) == cols && rows > 1;
  Check(per_col || static_cast<int64_t>(mask.size()) == a.size(),
        "mul_mask: mask size " + std::to_string(mask.size()) +
            " matches neither elements nor columns of " +
            ShapeToString(a.shape()));
  Array out = Array::Zeros(a.shape());
  for (int64_t r = 0; r < rows; ++r)
    for (int64_t c = 0; c < cols; ++c)
      out.data()[r * cols + c] =
          a.data()[r * cols + c] * mask[per_col ? c : r * cols + c];
  if (Tracks(t, a)) {
    Data da = a.ptr(), dout = out.ptr();
    auto m = std::make_shared<std::vector<double>>(mask);
    t->Record(dout, [=]() {
      std::vector<double>& ga = GradBuf(da);
      const std::vector<double>& g = dout->grad;
      for (int64_t r = 0; r < rows; ++r)
        for (int64_t c = 0; c < cols; ++c)
          ga[r * cols + c] += g[r * cols + c] * (*m)[per_col ? c : r * cols + c];
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// reductions

Array Reduce(Tape* t, const Array& a, int axis, ReduceKind kind) {
  Check(axis == -1 || axis < a.rank(),
        "reduce: axis " + std::to_string(axis) + " out of range for " +
            ShapeToString(a.shape()));
  int64_t rows, cols;
  RowsCols(a, &rows, &cols);

  // Normalize to one of: all, over rows (axis 0 of 2-D), over cols.
  enum { kAll, kOverRows, kOverCols } mode;
  if (axis == -1 || a.rank() == 1) {
    mode = kAll;
  } else {
    mode = (axis == 0) ? kOverRows : kOverCols;
  }

  std::vector<int64_t> out_shape;
  int64_t out_n;
  if (mode == kAll) {
    out_shape = {1};
    out_n = 1;
  } else if (mode == kOverRows) {
    out_shape = {cols};
    out_n = cols;
  } else {
    out_shape = {rows};
    out_n = rows;
  }
  Array out = Array::Zeros(out_shape);
  auto argmax = std::make_shared<std::vector<int64_t>>();
  const double* pa = a.data();
  double* po = out.data();

  auto reduce_group = [&](int64_t out_i, int64_t count, auto index_fn) {
    if (kind == ReduceKind::kMax) {
      int64_t best = index_fn(0);
      double bv = pa[best];
      for (int64_t j = 1; j < count; ++j) {
        const int64_t idx = index_fn(j);
        if (pa[idx] > bv) {  // strict: first maximal element wins ties
          bv = pa[idx];
          best = idx;
        }
      }
      po[out_i] = bv;
      (*argmax)[out_i] = best;
    } else {
      double s = 0;
      for (int64_t j = 0; j < count; ++j) s += pa[index_fn(j)];
      po[out_i] = (kind == ReduceKind::kMean) ? s / static_cast<double>(count) : s;
    }
  };

  if (kind == ReduceKind::kMax) argmax->assign(out_n, 0);
  if (mode == kAll) {
    reduce_group(0, a.size(), [](int64_t j) { return j; });
  } else if (mode == kOverRows) {
    for (int64_t c = 0; c < cols; ++c)
      reduce_group(c, rows, [&, c](int64_t j) { return j * cols + c; });
  } else {
    for (int64_t r = 0; r < rows; ++r)
      reduce_group(r, cols, [&, r](int64_t j) { return r * cols + j; });
  }

  if (Tracks(t, a)) {
    Data da = a.ptr(), dout = out.ptr();
    const int64_t group =
        (mode == kAll) ? a.size() : (mode == kOverRows ? rows : cols);
    t->Record(dout, [=]() {
      std::vector<double>& ga = GradBuf(da);
      const std::vector<double>& g = dout->grad;
      const double inv = 1.0 / static_cast<double>(group);
      auto scatter = [&](int64_t out_i, int64_t count, auto index_fn) {
        if (kind == ReduceKind::kMax) {
          ga[(*argmax)[out_i]] += g[out_i];
        } else {
          const double gg = (kind == ReduceKind::kMean) ? g[out_i] * inv : g[out_i];
          for (int64_t j = 0; j < count; ++j) ga[index_fn(j)] += gg;
        }
      };
      if (mode == kAll) {
        scatter(0, static_cast<int64_t>(da->v.size()), [](int64_t j) { return j; });
      } else if (mode == kOverRows) {
        for (int64_t c = 0; c < cols; ++c)
          scatter(c, rows, [&, c](int64_t j) { return j * cols + c; });
      } else {
        for (int64_t r = 0; r < rows; ++r)
          scatter(r, cols, [&, r](int64_t j) { return r * cols + j; });
      }
    });
  }
  return out;
}

Array SumAll(Tape* t, const Array& a) { return Reduce(t, a, -1, ReduceKind::kSum); }
Array MeanAll(Tape* t, const Array& a) { return Reduce(t, a, -1, ReduceKind::kMean); }

Array Mae(Tape* t, const Array& a, const Array& b) {
  CheckSameShape(a, b, "mae");
  return MaskedMae(t, a, b, {}, {});
}

Array MaskedMae(Tape* t, const Array& a, const Array& b,
                const std::vector<double>& row_weights,
                const std::vector<double>& mask) {
  CheckSameShape(a, b, "mae");
  int64_t rows, cols;
  RowsCols(a, &rows, &cols);
  const bool has_w = !row_weights.empty();
  if (has_w)
    Check(static_cast<int64_t>(row_weights.size()) == rows,
          "mae: weight count != rows");
  const bool has_m = !mask.empty();
  const bool m_per_col = has_m && static_cast<int64_t>(mask.size()) == cols && rows > 1;
  if (has_m && !m_per_col)
    Check(static_cast<int64_t>(mask.size()) == a.size(),
          "mae: mask size matches neither elements nor columns");

  double acc = 0.0;
  int64_t retained = 0;
  for (int64_t r = 0; r < rows; ++r) {
    const double w = has_w ? row_weights[r] : 1.0;
    for (int64_t c = 0; c < cols; ++c) {
      const int64_t i = r * cols + c;
      const double m = has_m ? mask[m_per_col ? c : i] : 1.0;
      if (m == 0.0) continue;
      acc += w * std::fabs(a.data()[i] - b.data()[i]);
      ++retained;
    }
  }
  const double value = retained ? acc / static_cast<double>(retained) : 0.0;
  Array out = Array::Scalar(value);
  if (Tracks(t, a) || Tracks(t, b)) {
    const bool need_a = Tracks(t, a);
    const bool need_b = Tracks(t, b);
    Data da = a.ptr(), db = b.ptr(), dout = out.ptr();
    auto w = std::make_shared<std::vector<double>>(row_weights);
    auto m = std::make_shared<std::vector<double>>(mask);
    t->Record(dout, [=]() {
      if (!retained) return;
      const double g = dout->grad[0] / static_cast<double>(retained);
      std::vector<double>* ga = need_a ? &GradBuf(da) : nullptr;
      std::vector<double>* gb = need_b ? &GradBuf(db) : nullptr;
      for (int64_t r = 0; r < rows; ++r) {
        const double wr = has_w ? (*w)[r] : 1.0;
        for (int64_t c = 0; c < cols; ++c) {
          const int64_t i = r * cols + c;
          const double mm = has_m ? (*m)[m_per_col ? c : i] : 1.0;
          if (mm == 0.0) continue;
          const double d = da->v[i] - db->v[i];
          const double s = d > 0 ? 1.0 : (d < 0 ? -1.0 : 0.0);
          if (ga) (*ga)[i] += g * wr * s;
          if (gb) (*gb)[i] -= g * wr * s;
        }
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// structure

Array SliceCols(Tape* t, const Array& a, int64_t start, int64_t len) {
  int64_t rows, cols;
  RowsCols(a, &rows, &cols);
  Check(start >= 0 && len >= 0 && start + len <= cols,
        "slice: [" + std::to_string(start) + ", " + std::to_string(start + len) +
            ") out of range for " + std::to_string(cols) + " columns");
  std::vector<int64_t> shape = a.rank() == 1
                                   ? std::vector<int64_t>{len}
                                   : std::vector<int64_t>{rows, len};
  Array out = Array::Zeros(shape);
  for (int64_t r = 0; r < rows; ++r)
    std::memcpy(out.data() + r * len, a.data() + r * cols + start,
                sizeof(double) * static_cast<size_t>(len));
  if (Tracks(t, a)) {
    Data da = a.ptr(), dout = out.ptr();
    t->Record(dout, [=]() {
      std::vector<double>& ga = GradBuf(da);
      const std::vector<double>& g = dout->grad;
      for (int64_t r = 0; r < rows; ++r)
        for (int64_t c = 0; c < len; ++c) ga[r * cols + start + c] += g[r * len + c];
    });
  }
  return out;
}

Array ConcatCols(Tape* t, const std::vector<Array>& parts) {
  Check(!parts.empty(), "concat: no parts");
  int64_t rows, cols0;
  RowsCols(parts[0], &rows, &cols0);
  int64_t total = 0;
  for (const Array& p : parts) {
    int64_t r, c;
    RowsCols(p, &r, &c);
    Check(r == rows, "concat: row count mismatch");
    Check(p.rank() == parts[0].rank(), "concat: rank mismatch");
    total += c;
  }
  std::vector<int64_t> shape = parts[0].rank() == 1
                                   ? std::vector<int64_t>{total}
                                   : std::vector<int64_t>{rows, total};
  Array out = Array::Zeros(shape);
  int64_t off = 0;
  for (const Array& p : parts) {
    int64_t r, c;
    RowsCols(p, &r, &c);
    for (int64_t rr = 0; rr < rows; ++rr)
      std::memcpy(out.data() + rr * total + off, p.data() + rr * c,
                  sizeof(double) * static_cast<size_t>(c));
    off += c;
  }
  bool any = false;
  for (const Array& p : parts) any = any || Tracks(t, p);
  if (any) {
    std::vector<Data> dp;
    std::vector<bool> need;
    std::vector<int64_t> widths, offsets;
    int64_t o = 0;
    for (const Array& p : parts) {
      int64_t r, c;
      RowsCols(p, &r, &c);
      dp.push_back(p.ptr());
      need.push_back(Tracks(t, p));
      widths.push_back(c);
      offsets.push_back(o);
      o += c;
    }
    Data dout = out.ptr();
    t->Record(dout, [=]() {
      const std::vector<double>& g = dout->grad;
      for (size_t i = 0; i < dp.size(); ++i) {
        if (!need[i]) continue;
        std::vector<double>& ga = GradBuf(dp[i]);
        for (int64_t rr = 0; rr < rows; ++rr)
          for (int64_t c = 0; c < widths[i]; ++c)
            ga[rr * widths[i] + c] += g[rr * total + offsets[i] + c];
      }
    });
  }
  return out;
}

Array ConcatRows(Tape* t, const Array& a, const Array& b) {
  Check(a.rank() == 2 && b.rank() == 2, "concat_rows: expects 2-D arrays");
  Check(a.dim(1) == b.dim(1), "concat_rows: column count mismatch " +
                                  std::to_string(a.dim(1)) + " vs " +
                                  std::to_string(b.dim(1)));
  const int64_t cols = a.dim(1);
  Array out = Array::Zeros({a.dim(0) + b.dim(0), cols});
  std::memcpy(out.data(), a.data(), sizeof(double) * static_cast<size_t>(a.size()));
  std::memcpy(out.data() + a.size(), b.data(),
              sizeof(double) * static_cast<size_t>(b.size()));
  if (Tracks(t, a) || Tracks(t, b)) {
    const bool need_a = Tracks(t, a);
    const bool need_b = Tracks(t, b);
    Data da = a.ptr(), db = b.ptr(), dout = out.ptr();
    const int64_t na = a.size();
    t->Record(dout, [=]() {
      const std::vector<double>& g = dout->grad;
      if (need_a) {
        std::vector<double>& ga = GradBuf(da);
        for (int64_t i = 0; i < na; ++i) ga[i] += g[i];
      }
      if (need_b) {
        std::vector<double>& gb = GradBuf(db);
        for (size_t i = na; i < g.size(); ++i) gb[i - na] += g[i];
      }
    });
  }
  return out;
}

Array SpliceCols(Tape* t, const Array& base, const Array& patch, int64_t offset) {
  Check(base.rank() == patch.rank(), "splice: rank mismatch");
  int64_t rows, cols, prows, pcols;
  RowsCols(base, &rows, &cols);
  RowsCols(patch, &prows, &pcols);
  Check(rows == prows, "splice: row count mismatch");
  Check(offset >= 0 && offset + pcols <= cols,
        "splice: patch [" + std::to_string(offset) + ", " +
            std::to_string(offset + pcols) + ") exceeds " + std::to_string(cols) +
            " columns");
  Array out = Array::Zeros(base.shape());
  std::memcpy(out.data(), base.data(),
              sizeof(double) * static_cast<size_t>(base.size()));
  for (int64_t r = 0; r < rows; ++r)
    std::memcpy(out.data() + r * cols + offset, patch.data() + r * pcols,
                sizeof(double) * static_cast<size_t>(pcols));
  if (Tracks(t, base) || Tracks(t, patch)) {
    const bool need_base = Tracks(t, base);
    const bool need_patch = Tracks(t, patch);
    Data db = base.ptr(), dp = patch.ptr(), dout = out.ptr();
    t->Record(dout, [=]() {
      const std::vector<double>& g = dout->grad;
      if (need_patch) {
        std::vector<double>& gp = GradBuf(dp);
        for (int64_t r = 0; r < rows; ++r)
          for (int64_t c = 0; c < pcols; ++c)
            gp[r * pcols + c] += g[r * cols + offset + c];
      }
      if (need_base) {
        std::vector<double>& gb = GradBuf(db);
        for (int64_t r = 0; r < rows; ++r)
          for (int64_t c = 0; c < cols; ++c)
            if (c < offset || c >= offset + pcols) gb[r * cols + c] += g[r * cols + c];
      }
    });
  }
  return out;
}

Array Reshape(Tape* t, const Array& a, std::vector<int64_t> shape) {
  Check(NumElements(shape) == a.size(),
        "reshape: cannot view " + ShapeToString(a.shape()) + " as " +
            ShapeToString(shape));
  Array out = Array::FromVector(shape, a.values());
  if (Tracks(t, a)) {
    Data da = a.ptr(), dout = out.ptr();
    t->Record(dout, [=]() {
      std::vector<double>& ga = GradBuf(da);
      const std::vector<double>& g = dout->grad;
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// convolutions

int64_t ConvOutLen(int64_t t_in, int64_t stride) {
  return (t_in + stride - 1) / stride;
}

int64_t ConvPadLeft(int64_t t_in, int64_t k, int64_t stride) {
  const int64_t t_out = ConvOutLen(t_in, stride);
  const int64_t total = std::max<int64_t>(0, (t_out - 1) * stride + k - t_in);
  return total / 2;  // odd totals put the extra zero on the right
}

Array Conv1d(Tape* t, const Array& input, const Array& kernels,
             const Array& bias, int64_t stride) {
  Check(input.rank() == 2, "conv1d: input must be [channels x time], got " +
                               ShapeToString(input.shape()));
  Check(kernels.rank() == 3, "conv1d: kernels must be [out x in x k], got " +
                                 ShapeToString(kernels.shape()));
  Check(stride >= 1, "conv1d: stride must be >= 1");
  const int64_t ci = input.dim(0), t_in = input.dim(1);
  const int64_t co = kernels.dim(0), k = kernels.dim(2);
  Check(kernels.dim(1) == ci,
        "conv1d: kernel input-channel dim " + std::to_string(kernels.dim(1)) +
            " != input channel dim " + std::to_string(ci));
  Check(bias.rank() == 1 && bias.dim(0) == co,
        "conv1d: bias dim " + ShapeToString(bias.shape()) +
            " != output channels " + std::to_string(co));
  const int64_t t_out = ConvOutLen(t_in, stride);
  const int64_t pad_left = ConvPadLeft(t_in, k, stride);
  const int64_t pad_total = std::max<int64_t>(0, (t_out - 1) * stride + k - t_in);
  Check(k <= t_in + pad_total, "conv1d: kernel length " + std::to_string(k) +
                                   " exceeds padded input length");

  Array out = Array::Zeros({co, t_out});
  kernels::Conv1dForward(input.data(), ci, t_in, kernels.data(), co, k,
                         bias.data(), stride, pad_left, out.data(), t_out);

  if (Tracks(t, input) || Tracks(t, kernels) || Tracks(t, bias)) {
    const bool need_in = Tracks(t, input);
    const bool need_w = Tracks(t, kernels);
    const bool need_b = Tracks(t, bias);
    Data din = input.ptr(), dw = kernels.ptr(), db = bias.ptr(), dout = out.ptr();
    t->Record(dout, [=]() {
      const std::vector<double>& g = dout->grad;
      if (need_in) {
        kernels::Conv1dGradInput(g.data(), co, t_out, dw->v.data(), ci, k,
                                 stride, pad_left, GradBuf(din).data(), t_in,
                                 /*accumulate=*/true);
      }
      if (need_w) {
        kernels::Conv1dGradKernels(din->v.data(), ci, t_in, g.data(), co, t_out,
                                   k, stride, pad_left, GradBuf(dw).data());
      }
      if (need_b) {
        std::vector<double>& gb = GradBuf(db);
        for (int64_t c = 0; c < co; ++c) {
          double s = 0;
          for (int64_t to = 0; to < t_out; ++to) s += g[c * t_out + to];
          gb[c] += s;
        }
      }
    });
  }
  return out;
}

Array Conv1dTransposed(Tape* t, const Array& input, const Array& kernels,
                       const Array& bias, int64_t stride) {
  Check(input.rank() == 2, "conv1d_transposed: input must be [channels x time]");
  Check(kernels.rank() == 3,
        "conv1d_transposed: kernels must be [in x out x k], got " +
            ShapeToString(kernels.shape()));
  Check(stride >= 1, "conv1d_transposed: stride must be >= 1");
  const int64_t ci = input.dim(0), t_in = input.dim(1);
  Check(kernels.dim(0) == ci,
        "conv1d_transposed: kernel input-channel dim " +
            std::to_string(kernels.dim(0)) + " != input channel dim " +
            std::to_string(ci));
  const int64_t co = kernels.dim(1), k = kernels.dim(2);
  Check(bias.rank() == 1 && bias.dim(0) == co,
        "conv1d_transposed: bias dim " + ShapeToString(bias.shape()) +
            " != output channels " + std::to_string(co));
  const int64_t t_out = stride * t_in;
  const int64_t pad_left = ConvPadLeft(t_out, k, stride);

  Array out = Array::Zeros({co, t_out});
  kernels::Conv1dGradInput(input.data(), ci, t_in, kernels.data(), co, k,
                           stride, pad_left, out.data(), t_out,
                           /*accumulate=*/false);
  for (int64_t c = 0; c < co; ++c) {
    const double b = bias.data()[c];
    for (int64_t tt = 0; tt < t_out; ++tt) out.data()[c * t_out + tt] += b;
  }

  if (Tracks(t, input) || Tracks(t, kernels) || Tracks(t, bias)) {
    const bool need_in = Tracks(t, input);
    const bool need_w = Tracks(t, kernels);
    const bool need_b = Tracks(t, bias);
    Data din = input.ptr(), dw = kernels.ptr(), db = bias.ptr(), dout = out.ptr();
    t->Record(dout, [=]() {
      const std::vector<double>& g = dout->grad;
      if (need_in) {
        // Adjoint of the transposed op is the plain strided correlation.
        std::vector<double> tmp(static_cast<size_t>(ci * t_in));
        kernels::Conv1dForward(g.data(), co, t_out, dw->v.data(), ci, k,
                               nullptr, stride, pad_left, tmp.data(), t_in);
        std::vector<double>& gi = GradBuf(din);
        for (size_t i = 0; i < tmp.size(); ++i) gi[i] += tmp[i];
      }
      if (need_w) {
        kernels::Conv1dGradKernels(g.data(), co, t_out, din->v.data(), ci, t_in,
                                   k, stride, pad_left, GradBuf(dw).data());
      }
      if (need_b) {
        std::vector<double>& gb = GradBuf(db);
        for (int64_t c = 0; c < co; ++c) {
          double s = 0;
          for (int64_t tt = 0; tt < t_out; ++tt) s += g[c * t_out + tt];
          gb[c] += s;
        }
      }
    });
  }
  return out;
}

Array Prelu(Tape* t, const Array& input, const Array& alpha) {
  int64_t rows, cols;
  RowsCols(input, &rows, &cols);
  Check(alpha.rank() == 1, "prelu: alpha must be 1-D");
  const bool shared = alpha.dim(0) == 1;
  Check(shared || alpha.dim(0) == rows,
        "prelu: alpha dim " + std::to_string(alpha.dim(0)) +
            " != channel count " + std::to_string(rows));
  for (double a : alpha.values())
    Check(std::isfinite(a), "prelu: non-finite alpha");
  Array out = Array::Zeros(input.shape());
  for (int64_t r = 0; r < rows; ++r) {
    const double a = alpha.data()[shared ? 0 : r];
    for (int64_t c = 0; c < cols; ++c) {
      const double x = input.data()[r * cols + c];
      out.data()[r * cols + c] = x >= 0 ? x : a * x;
    }
  }
  if (Tracks(t, input) || Tracks(t, alpha)) {
    const bool need_in = Tracks(t, input);
    const bool need_a = Tracks(t, alpha);
    Data din = input.ptr(), da = alpha.ptr(), dout = out.ptr();
    t->Record(dout, [=]() {
      const std::vector<double>& g = dout->grad;
      std::vector<double>* gi = need_in ? &GradBuf(din) : nullptr;
      std::vector<double>* ga = need_a ? &GradBuf(da) : nullptr;
      for (int64_t r = 0; r < rows; ++r) {
        const double a = da->v[shared ? 0 : r];
        double acc_a = 0;
        for (int64_t c = 0; c < cols; ++c) {
          const int64_t i = r * cols + c;
          const double x = din->v[i];
          if (gi) (*gi)[i] += g[i] * (x >= 0 ? 1.0 : a);
          if (x < 0) acc_a += g[i] * x;
        }
        if (ga) (*ga)[shared ? 0 : r] += acc_a;
      }
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// spectra

int64_t StftFrameCount(int64_t t, int64_t window_len, int64_t hop) {
  return 1 + (t - window_len) / hop;
}

namespace {

std::vector<double> HannPeriodic(int64_t n) {
  std::vector<double> w(static_cast<size_t>(n));
  for (int64_t i = 0; i < n; ++i)
    w[i] = 0.5 - 0.5 * std::cos(6.283185307179586476925286766559 *
                                static_cast<double>(i) / static_cast<double>(n));
  return w;
}

}  // namespace

Array StftMag(Tape* t, const Array& signal, int64_t window_len, int64_t hop,
              bool squared, bool complex_out) {
  Check(!(squared && complex_out), "stft: squared and complex_out are exclusive");
  Check(window_len >= 2 && hop >= 1, "stft: bad window/hop");
  int64_t rows, cols;
  RowsCols(signal, &rows, &cols);
  Check(cols >= window_len, "stft: signal length " + std::to_string(cols) +
                                " < window " + std::to_string(window_len));
  const int64_t frames = StftFrameCount(cols, window_len, hop);
  const int64_t bins = window_len / 2 + 1;
  const int64_t bins_out = complex_out ? 2 * bins : bins;
  std::vector<int64_t> shape = signal.rank() == 1
                                   ? std::vector<int64_t>{frames, bins_out}
                                   : std::vector<int64_t>{rows, frames * bins_out};
  Array out = Array::Zeros(shape);
  const std::vector<double> win = HannPeriodic(window_len);

  // Spectra stored for the magnitude backward pass (linear in the complex
  // case, so nothing to keep there).
  auto spectra = std::make_shared<std::vector<fft::Complex>>();
  if (!complex_out)
    spectra->assign(static_cast<size_t>(rows * frames * bins), fft::Complex(0, 0));

  const double* ps = signal.data();
  double* po = out.data();
  kernels::ParallelFor(rows * frames, [&](int64_t rf) {
    const int64_t r = rf / frames;
    const int64_t f = rf % frames;
    std::vector<double> frame(static_cast<size_t>(window_len));
    for (int64_t i = 0; i < window_len; ++i)
      frame[i] = ps[r * cols + f * hop + i] * win[i];
    std::vector<fft::Complex> spec = fft::ForwardReal(frame.data(), window_len);
    double* dst = po + r * frames * bins_out + f * bins_out;
    for (int64_t b = 0; b < bins; ++b) {
      const double re = spec[b].real(), im = spec[b].imag();
      if (complex_out) {
        dst[b] = re;
        dst[bins + b] = im;
      } else {
        const double mag = std::hypot(re, im);
        dst[b] = squared ? mag * mag : mag;
        (*spectra)[static_cast<size_t>((r * frames + f) * bins + b)] = spec[b];
      }
    }
  });

  if (Tracks(t, signal)) {
    Data dsig = signal.ptr(), dout = out.ptr();
    auto winp = std::make_shared<std::vector<double>>(win);
    t->Record(dout, [=]() {
      const std::vector<double>& g = dout->grad;
      std::vector<double>& gs = GradBuf(dsig);
      // Per-frame contributions land in scratch first; frames overlap in the
      // signal, so accumulation happens in a fixed serial order afterwards.
      std::vector<double> scratch(static_cast<size_t>(rows * frames * window_len));
      kernels::ParallelFor(rows * frames, [&](int64_t rf) {
        const int64_t r = rf / frames;
        const int64_t f = rf % frames;
        const double* gf = g.data() + r * frames * bins_out + f * bins_out;
        std::vector<fft::Complex> u(static_cast<size_t>(window_len),
                                    fft::Complex(0, 0));
        for (int64_t b = 0; b < bins; ++b) {
          if (complex_out) {
            u[b] = fft::Complex(gf[b], -gf[bins + b]);
          } else {
            const fft::Complex x =
                (*spectra)[static_cast<size_t>((r * frames + f) * bins + b)];
            const double mag = std::abs(x);
            if (squared) {
              u[b] = 2.0 * gf[b] * std::conj(x);
            } else if (mag > 0.0) {
              u[b] = gf[b] * std::conj(x) / mag;
            }  // zero-magnitude bins contribute nothing (documented)
          }
        }
        fft::Forward(&u);
        double* dst = scratch.data() + rf * window_len;
        for (int64_t i = 0; i < window_len; ++i) dst[i] = u[i].real() * (*winp)[i];
      });
      for (int64_t r = 0; r < rows; ++r)
        for (int64_t f = 0; f < frames; ++f) {
          const double* src = scratch.data() + (r * frames + f) * window_len;
          double* dst = gs.data() + r * cols + f * hop;
          for (int64_t i = 0; i < window_len; ++i) dst[i] += src[i];
        }
    });
  }
  return out;
}

Array FftMag(Tape* t, const Array& signal) {
  Check(signal.rank() == 1, "fft_mag: expects a 1-D signal");
  const int64_t n = signal.dim(0);
  Check(n >= 2 && n % 2 == 0, "fft_mag: length must be even, got " + std::to_string(n));
  const int64_t bins = n / 2 + 1;
  std::vector<fft::Complex> spec = fft::ForwardReal(signal.data(), n);
  Array out = Array::Zeros({bins});
  for (int64_t b = 0; b < bins; ++b) out.data()[b] = std::abs(spec[b]);
  if (Tracks(t, signal)) {
    Data dsig = signal.ptr(), dout = out.ptr();
    auto sp = std::make_shared<std::vector<fft::Complex>>(std::move(spec));
    t->Record(dout, [=]() {
      const std::vector<double>& g = dout->grad;
      std::vector<double>& gs = GradBuf(dsig);
      std::vector<fft::Complex> u(static_cast<size_t>(n), fft::Complex(0, 0));
      for (int64_t b = 0; b < bins; ++b) {
        const double mag = std::abs((*sp)[b]);
        if (mag > 0.0) u[b] = g[b] * std::conj((*sp)[b]) / mag;
      }
      fft::Forward(&u);
      for (int64_t i = 0; i < n; ++i) gs[i] += u[i].real();
    });
  }
  return out;
}

// ---------------------------------------------------------------------------
// fixed linear filters

Array BiquadCascade(Tape* t, const Array& a, std::vector<double> coeffs,
                    int64_t sections) {
  int64_t rows, cols;
  RowsCols(a, &rows, &cols);
  Check(static_cast<int64_t>(coeffs.size()) == rows * sections * 5,
        "biquad: coefficient count " + std::to_string(coeffs.size()) +
            " != rows*sections*5");
  Array out = Array::Zeros(a.shape());
  kernels::BiquadRows(a.data(), rows, cols, coeffs.data(), sections, out.data());
  if (Tracks(t, a)) {
    Data da = a.ptr(), dout = out.ptr();
    auto cf = std::make_shared<std::vector<double>>(std::move(coeffs));
    t->Record(dout, [=]() {
      std::vector<double>& ga = GradBuf(da);
      std::vector<double> tmp(da->v.size());
      kernels::BiquadRowsAdjoint(dout->grad.data(), rows, cols, cf->data(),
                                 sections, tmp.data());
      for (size_t i = 0; i < tmp.size(); ++i) ga[i] += tmp[i];
    });
  }
  return out;
}

Array OnePoleLowpass(Tape* t, const Array& a, double alpha) {
  int64_t rows, cols;
  RowsCols(a, &rows, &cols);
  Check(alpha > 0.0 && alpha <= 1.0, "one_pole: alpha must be in (0, 1]");
  Array out = Array::Zeros(a.shape());
  kernels::OnePoleRows(a.data(), rows, cols, alpha, out.data());
  if (Tracks(t, a)) {
    Data da = a.ptr(), dout = out.ptr();
    t->Record(dout, [=]() {
      std::vector<double>& ga = GradBuf(da);
      std::vector<double> tmp(da->v.size());
      kernels::OnePoleRowsAdjoint(dout->grad.data(), rows, cols, alpha, tmp.data());
      for (size_t i = 0; i < tmp.size(); ++i) ga[i] += tmp[i];
    });
  }
  return out;
}

}  // namespace ops
}  // namespace hacomp
