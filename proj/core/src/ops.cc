// Copyright 2026 The PMA-URL Authors.
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

#include "pma/ops.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <utility>

#include "pma/errors.h"

namespace pma {
namespace {

template <typename T>
using NodePtr = std::shared_ptr<internal::Node<T>>;
template <typename T>
using BackwardFn = std::function<void(internal::Node<T>&)>;

[[noreturn]] void ShapeError(const char* op, const std::string& detail) {
  throw Error(ErrorCode::kShapeMismatch, std::string(op) + ": " + detail);
}

int NormalizeAxis(const char* op, int axis, int rank) {
  int a = axis < 0 ? axis + rank : axis;
  if (a < 0 || a >= rank) {
    ShapeError(op, "axis " + std::to_string(axis) + " invalid for rank " +
                       std::to_string(rank));
  }
  return a;
}

// Splits a shape around `axis` into (outer, extent, inner).
struct AxisSplit {
  int64_t outer = 1;
  int64_t extent = 1;
  int64_t inner = 1;
};

AxisSplit SplitAt(const Shape& shape, int axis) {
  AxisSplit s;
  for (int i = 0; i < axis; ++i) s.outer *= shape[static_cast<size_t>(i)];
  s.extent = shape[static_cast<size_t>(axis)];
  for (size_t i = static_cast<size_t>(axis) + 1; i < shape.size(); ++i) {
    s.inner *= shape[i];
  }
  return s;
}

template <typename T>
void CheckFinite(const char* op, const Shape& shape,
                 const std::vector<T>& data) {
  // v - v is NaN exactly when v is NaN or infinite.
  T acc = 0;
  const T* p = data.data();
  const size_t n = data.size();
#pragma omp simd reduction(+ : acc)
  for (size_t i = 0; i < n; ++i) acc += p[i] - p[i];
  if (acc != T(0) || std::isnan(acc)) {
    size_t bad = 0;
    while (bad < n && std::isfinite(p[bad])) ++bad;
    throw Error(ErrorCode::kNonFiniteValue,
                std::string(op) + " produced a non-finite value at flat index " +
                    std::to_string(bad) + " of shape " + ShapeString(shape));
  }
}

template <typename T>
bool Tracks(std::initializer_list<const Tensor<T>*> inputs) {
  if (!GradEnabled()) return false;
  for (const Tensor<T>* t : inputs) {
    if (t->requires_grad()) return true;
  }
  return false;
}

template <typename T>
Tensor<T> MakeResult(const char* op, Shape shape, std::vector<T> data,
                     bool track, std::vector<NodePtr<T>> parents,
                     BackwardFn<T> backward) {
  CheckFinite(op, shape, data);
  auto node = std::make_shared<internal::Node<T>>();
  node->shape = std::move(shape);
  node->data = std::move(data);
  node->op = op;
  node->is_leaf = false;
  if (track) {
    node->requires_grad = true;
    node->parents = std::move(parents);
    node->backward = std::move(backward);
  }
  return Tensor<T>(std::move(node));
}

template <typename T>
inline void Axpy(T alpha, const T* x, T* y, int64_t n) {
#pragma omp simd
  for (int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

template <typename T>
inline T Dot(const T* x, const T* y, int64_t n) {
  T acc = 0;
#pragma omp simd reduction(+ : acc)
  for (int64_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}

// C(M,N) += A(M,K) B(K,N), or A(M,K) B(N,K)^T when transpose_b.
template <typename T>
void Gemm(const T* a, const T* b, T* c, int64_t m, int64_t k, int64_t n,
          bool transpose_b) {
  if (!transpose_b) {
    for (int64_t i = 0; i < m; ++i) {
      T* crow = c + i * n;
      const T* arow = a + i * k;
      for (int64_t p = 0; p < k; ++p) {
        T v = arow[p];
        if (v != T(0)) Axpy(v, b + p * n, crow, n);
      }
    }
  } else {
    for (int64_t i = 0; i < m; ++i) {
      const T* arow = a + i * k;
      T* crow = c + i * n;
      for (int64_t j = 0; j < n; ++j) crow[j] += Dot(arow, b + j * k, k);
    }
  }
}

// Broadcast bookkeeping: right-aligned shapes, stride 0 on broadcast axes.
struct Broadcast {
  Shape out;
  std::vector<int64_t> stride_a;
  std::vector<int64_t> stride_b;
  bool same = false;
};

std::vector<int64_t> RowMajorStrides(const Shape& shape) {
  std::vector<int64_t> strides(shape.size(), 1);
  for (int i = static_cast<int>(shape.size()) - 2; i >= 0; --i) {
    strides[static_cast<size_t>(i)] =
        strides[static_cast<size_t>(i) + 1] * shape[static_cast<size_t>(i) + 1];
  }
  return strides;
}

Broadcast PlanBroadcast(const char* op, const Shape& a, const Shape& b) {
  Broadcast plan;
  if (a == b) {
    plan.out = a;
    plan.same = true;
    return plan;
  }
  size_t rank = std::max(a.size(), b.size());
  plan.out.assign(rank, 1);
  plan.stride_a.assign(rank, 0);
  plan.stride_b.assign(rank, 0);
  auto sa = RowMajorStrides(a);
  auto sb = RowMajorStrides(b);
  for (size_t i = 0; i < rank; ++i) {
    int64_t da = i + a.size() >= rank ? a[i + a.size() - rank] : 1;
    int64_t db = i + b.size() >= rank ? b[i + b.size() - rank] : 1;
    if (da != db && da != 1 && db != 1) {
      ShapeError(op, "cannot broadcast " + ShapeString(a) + " with " +
                         ShapeString(b));
    }
    plan.out[i] = std::max(da, db);
    if (da != 1) plan.stride_a[i] = sa[i + a.size() - rank];
    if (db != 1) plan.stride_b[i] = sb[i + b.size() - rank];
  }
  return plan;
}

template <typename F>
void ForEachBroadcast(const Broadcast& plan, F&& f) {
  const int64_t n = NumElements(plan.out);
  if (plan.same) {
    for (int64_t o = 0; o < n; ++o) f(o, o, o);
    return;
  }
  const int rank = static_cast<int>(plan.out.size());
  std::vector<int64_t> index(static_cast<size_t>(rank), 0);
  int64_t ia = 0, ib = 0;
  for (int64_t o = 0; o < n; ++o) {
    f(o, ia, ib);
    for (int d = rank - 1; d >= 0; --d) {
      size_t u = static_cast<size_t>(d);
      ++index[u];
      ia += plan.stride_a[u];
      ib += plan.stride_b[u];
      if (index[u] < plan.out[u]) break;
      ia -= plan.stride_a[u] * plan.out[u];
      ib -= plan.stride_b[u] * plan.out[u];
      index[u] = 0;
    }
  }
}

enum class BinaryKind { kAdd, kSub, kMul };

template <typename T>
Tensor<T> Binary(const char* op, BinaryKind kind, const Tensor<T>& a,
                 const Tensor<T>& b) {
  Broadcast plan = PlanBroadcast(op, a.shape(), b.shape());
  std::vector<T> out(static_cast<size_t>(NumElements(plan.out)));
  const T* pa = a.data().data();
  const T* pb = b.data().data();
  T* po = out.data();
  if (plan.same) {
    const int64_t n = static_cast<int64_t>(out.size());
    switch (kind) {
      case BinaryKind::kAdd:
#pragma omp simd
        for (int64_t i = 0; i < n; ++i) po[i] = pa[i] + pb[i];
        break;
      case BinaryKind::kSub:
#pragma omp simd
        for (int64_t i = 0; i < n; ++i) po[i] = pa[i] - pb[i];
        break;
      case BinaryKind::kMul:
#pragma omp simd
        for (int64_t i = 0; i < n; ++i) po[i] = pa[i] * pb[i];
        break;
    }
  } else {
    ForEachBroadcast(plan, [&](int64_t o, int64_t ia, int64_t ib) {
      switch (kind) {
        case BinaryKind::kAdd: po[o] = pa[ia] + pb[ib]; break;
        case BinaryKind::kSub: po[o] = pa[ia] - pb[ib]; break;
        case BinaryKind::kMul: po[o] = pa[ia] * pb[ib]; break;
      }
    });
  }
  bool track = Tracks({&a, &b});
  BackwardFn<T> backward;
  if (track) {
    backward = [plan, kind](internal::Node<T>& self) {
      const T* g = self.grad.data();
      const T* va = self.parents[0]->data.data();
      const T* vb = self.parents[1]->data.data();
      bool need_a = self.ParentNeedsGrad(0);
      bool need_b = self.ParentNeedsGrad(1);
      T* ga = need_a ? self.ParentGrad(0).data() : nullptr;
      T* gb = need_b ? self.ParentGrad(1).data() : nullptr;
      ForEachBroadcast(plan, [&](int64_t o, int64_t ia, int64_t ib) {
        switch (kind) {
          case BinaryKind::kAdd:
            if (ga) ga[ia] += g[o];
            if (gb) gb[ib] += g[o];
            break;
          case BinaryKind::kSub:
            if (ga) ga[ia] += g[o];
            if (gb) gb[ib] -= g[o];
            break;
          case BinaryKind::kMul:
            if (ga) ga[ia] += g[o] * vb[ib];
            if (gb) gb[ib] += g[o] * va[ia];
            break;
        }
      });
    };
  }
  return MakeResult<T>(op, plan.out, std::move(out), track,
                       {a.node(), b.node()}, std::move(backward));
}

// Applies f elementwise; df(x, y) is the derivative given input x, output y.
template <typename T, typename F, typename DF>
Tensor<T> Unary(const char* op, const Tensor<T>& x, F f, DF df) {
  std::vector<T> out(x.size());
  const T* px = x.data().data();
  for (size_t i = 0; i < out.size(); ++i) out[i] = f(px[i]);
  bool track = Tracks({&x});
  BackwardFn<T> backward;
  if (track) {
    backward = [df](internal::Node<T>& self) {
      auto gx = self.ParentGrad(0);
      const T* px = self.parents[0]->data.data();
      const T* py = self.data.data();
      const T* g = self.grad.data();
      for (size_t i = 0; i < gx.size(); ++i) gx[i] += g[i] * df(px[i], py[i]);
    };
  }
  return MakeResult<T>(op, x.shape(), std::move(out), track, {x.node()},
                       std::move(backward));
}

}  // namespace

template <typename T>
Tensor<T> MatMul(const Tensor<T>& a, const Tensor<T>& b, bool transpose_b) {
  constexpr const char* kOp = "matmul";
  if (a.rank() < 1) ShapeError(kOp, "lhs must have rank >= 1");
  if (b.rank() != 2 && b.rank() != 3) ShapeError(kOp, "rhs must be rank 2 or 3");
  const int64_t k = a.dim(-1);
  const int64_t kb = transpose_b ? b.dim(-1) : b.dim(-2);
  const int64_t n = transpose_b ? b.dim(-2) : b.dim(-1);
  if (k != kb) {
    ShapeError(kOp, ShapeString(a.shape()) + " x " + ShapeString(b.shape()) +
                        (transpose_b ? "^T" : ""));
  }
  int64_t batch = 1;
  int64_t m = 0;
  Shape out_shape;
  const bool batched = b.rank() == 3;
  if (batched) {
    if (a.rank() != 3 || a.dim(0) != b.dim(0)) {
      ShapeError(kOp, "batched operands " + ShapeString(a.shape()) + " x " +
                          ShapeString(b.shape()));
    }
    batch = a.dim(0);
    m = a.dim(1);
    out_shape = {batch, m, n};
  } else {
    m = NumElements(Shape(a.shape().begin(), a.shape().end() - 1));
    out_shape = a.shape();
    out_shape.back() = n;
  }
  std::vector<T> out(static_cast<size_t>(batch * m * n), T(0));
  const T* pa = a.data().data();
  const T* pb = b.data().data();
  const int64_t b_stride = batched ? k * n : 0;
  for (int64_t s = 0; s < batch; ++s) {
    Gemm(pa + s * m * k, pb + s * b_stride, out.data() + s * m * n, m, k, n,
         transpose_b);
  }
  bool track = Tracks({&a, &b});
  BackwardFn<T> backward;
  if (track) {
    backward = [batch, m, k, n, b_stride, transpose_b](internal::Node<T>& self) {
      const T* g = self.grad.data();
      const T* va = self.parents[0]->data.data();
      const T* vb = self.parents[1]->data.data();
      T* ga = self.ParentNeedsGrad(0) ? self.ParentGrad(0).data() : nullptr;
      T* gb = self.ParentNeedsGrad(1) ? self.ParentGrad(1).data() : nullptr;
      for (int64_t s = 0; s < batch; ++s) {
        const T* gs = g + s * m * n;
        const T* as = va + s * m * k;
        const T* bs = vb + s * b_stride;
        if (ga) {
          T* gas = ga + s * m * k;
          if (!transpose_b) {
            // dA = dC B^T
            for (int64_t i = 0; i < m; ++i) {
              for (int64_t p = 0; p < k; ++p) {
                gas[i * k + p] += Dot(gs + i * n, bs + p * n, n);
              }
            }
          } else {
            // dA = dC B
            for (int64_t i = 0; i < m; ++i) {
              for (int64_t j = 0; j < n; ++j) {
                T v = gs[i * n + j];
                if (v != T(0)) Axpy(v, bs + j * k, gas + i * k, k);
              }
            }
          }
        }
        if (gb) {
          T* gbs = gb + s * b_stride;
          if (!transpose_b) {
            // dB = A^T dC
            for (int64_t i = 0; i < m; ++i) {
              for (int64_t p = 0; p < k; ++p) {
                T v = as[i * k + p];
                if (v != T(0)) Axpy(v, gs + i * n, gbs + p * n, n);
              }
            }
          } else {
            // dB = dC^T A
            for (int64_t i = 0; i < m; ++i) {
              for (int64_t j = 0; j < n; ++j) {
                T v = gs[i * n + j];
                if (v != T(0)) Axpy(v, as + i * k, gbs + j * k, k);
              }
            }
          }
        }
      }
    };
  }
  return MakeResult<T>(kOp, std::move(out_shape), std::move(out), track,
                       {a.node(), b.node()}, std::move(backward));
}

template <typename T>
Tensor<T> Add(const Tensor<T>& a, const Tensor<T>& b) {
  return Binary("add", BinaryKind::kAdd, a, b);
}

template <typename T>
Tensor<T> Sub(const Tensor<T>& a, const Tensor<T>& b) {
  return Binary("sub", BinaryKind::kSub, a, b);
}

template <typename T>
Tensor<T> Mul(const Tensor<T>& a, const Tensor<T>& b) {
  return Binary("mul", BinaryKind::kMul, a, b);
}

template <typename T>
Tensor<T> Scale(const Tensor<T>& a, double factor) {
  T f = static_cast<T>(factor);
  return Unary(
      "scale", a, [f](T x) { return x * f; }, [f](T, T) { return f; });
}

template <typename T>
Tensor<T> Concat(std::span<const Tensor<T>> parts, int axis) {
  constexpr const char* kOp = "concat";
  if (parts.empty()) ShapeError(kOp, "no inputs");
  const Shape& first = parts[0].shape();
  int ax = NormalizeAxis(kOp, axis, static_cast<int>(first.size()));
  Shape out_shape = first;
  out_shape[static_cast<size_t>(ax)] = 0;
  for (const auto& p : parts) {
    if (p.rank() != static_cast<int>(first.size())) ShapeError(kOp, "rank mismatch");
    for (int d = 0; d < p.rank(); ++d) {
      if (d != ax && p.shape()[static_cast<size_t>(d)] != first[static_cast<size_t>(d)]) {
        ShapeError(kOp, ShapeString(p.shape()) + " vs " + ShapeString(first));
      }
    }
    out_shape[static_cast<size_t>(ax)] += p.shape()[static_cast<size_t>(ax)];
  }
  AxisSplit split = SplitAt(out_shape, ax);
  std::vector<T> out(static_cast<size_t>(NumElements(out_shape)));
  std::vector<int64_t> widths;
  int64_t offset = 0;
  for (const auto& p : parts) {
    int64_t w = p.shape()[static_cast<size_t>(ax)] * split.inner;
    const T* src = p.data().data();
    for (int64_t o = 0; o < split.outer; ++o) {
      std::copy(src + o * w, src + (o + 1) * w,
                out.data() + o * split.extent * split.inner + offset);
    }
    widths.push_back(w);
    offset += w;
  }
  bool track = false;
  std::vector<NodePtr<T>> parents;
  for (const auto& p : parts) {
    track = track || p.requires_grad();
    parents.push_back(p.node());
  }
  track = track && GradEnabled();
  BackwardFn<T> backward;
  if (track) {
    int64_t row = split.extent * split.inner;
    int64_t outer = split.outer;
    backward = [widths, row, outer](internal::Node<T>& self) {
      int64_t off = 0;
      for (size_t i = 0; i < widths.size(); ++i) {
        int64_t w = widths[i];
        if (self.ParentNeedsGrad(i)) {
          T* g = self.ParentGrad(i).data();
          for (int64_t o = 0; o < outer; ++o) {
            const T* src = self.grad.data() + o * row + off;
            for (int64_t j = 0; j < w; ++j) g[o * w + j] += src[j];
          }
        }
        off += w;
      }
    };
  }
  return MakeResult<T>(kOp, std::move(out_shape), std::move(out), track,
                       std::move(parents), std::move(backward));
}

template <typename T>
Tensor<T> Stack(std::span<const Tensor<T>> parts) {
  if (parts.empty()) ShapeError("stack", "no inputs");
  std::vector<Tensor<T>> expanded;
  expanded.reserve(parts.size());
  for (const auto& p : parts) {
    if (p.shape() != parts[0].shape()) {
      ShapeError("stack", ShapeString(p.shape()) + " vs " +
                              ShapeString(parts[0].shape()));
    }
    Shape s = p.shape();
    s.insert(s.begin(), 1);
    expanded.push_back(Reshape(p, s));
  }
  return Concat<T>(expanded, 0);
}

template <typename T>
Tensor<T> Slice(const Tensor<T>& a, int axis, int64_t start, int64_t length) {
  constexpr const char* kOp = "slice";
  int ax = NormalizeAxis(kOp, axis, a.rank());
  int64_t extent = a.shape()[static_cast<size_t>(ax)];
  if (start < 0 || length < 0 || start + length > extent) {
    ShapeError(kOp, "range [" + std::to_string(start) + ", " +
                        std::to_string(start + length) + ") outside extent " +
                        std::to_string(extent));
  }
  AxisSplit split = SplitAt(a.shape(), ax);
  Shape out_shape = a.shape();
  out_shape[static_cast<size_t>(ax)] = length;
  std::vector<T> out(static_cast<size_t>(NumElements(out_shape)));
  const int64_t w = length * split.inner;
  const int64_t row = extent * split.inner;
  const int64_t off = start * split.inner;
  const T* src = a.data().data();
  for (int64_t o = 0; o < split.outer; ++o) {
    std::copy(src + o * row + off, src + o * row + off + w, out.data() + o * w);
  }
  bool track = Tracks({&a});
  BackwardFn<T> backward;
  if (track) {
    int64_t outer = split.outer;
    backward = [outer, w, row, off](internal::Node<T>& self) {
      T* g = self.ParentGrad(0).data();
      for (int64_t o = 0; o < outer; ++o) {
        for (int64_t j = 0; j < w; ++j) g[o * row + off + j] += self.grad[static_cast<size_t>(o * w + j)];
      }
    };
  }
  return MakeResult<T>(kOp, std::move(out_shape), std::move(out), track,
                       {a.node()}, std::move(backward));
}

template <typename T>
Tensor<T> Reshape(const Tensor<T>& a, Shape shape) {
  constexpr const char* kOp = "reshape";
  int infer = -1;
  int64_t known = 1;
  for (size_t i = 0; i < shape.size(); ++i) {
    if (shape[i] == -1) {
      if (infer >= 0) ShapeError(kOp, "more than one -1");
      infer = static_cast<int>(i);
    } else {
      known *= shape[i];
    }
  }
  if (infer >= 0) {
    if (known == 0 || static_cast<int64_t>(a.size()) % known != 0) {
      ShapeError(kOp, "cannot infer extent for " + ShapeString(a.shape()));
    }
    shape[static_cast<size_t>(infer)] = static_cast<int64_t>(a.size()) / known;
  }
  if (NumElements(shape) != static_cast<int64_t>(a.size())) {
    ShapeError(kOp, ShapeString(a.shape()) + " -> " + ShapeString(shape));
  }
  std::vector<T> out(a.data().begin(), a.data().end());
  bool track = Tracks({&a});
  BackwardFn<T> backward;
  if (track) {
    backward = [](internal::Node<T>& self) {
      auto g = self.ParentGrad(0);
      for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];
    };
  }
  return MakeResult<T>(kOp, std::move(shape), std::move(out), track,
                       {a.node()}, std::move(backward));
}

template <typename T>
Tensor<T> Permute(const Tensor<T>& a, std::vector<int> order) {
  constexpr const char* kOp = "permute";
  const int rank = a.rank();
  if (static_cast<int>(order.size()) != rank) ShapeError(kOp, "order length != rank");
  std::vector<bool> seen(static_cast<size_t>(rank), false);
  for (int& o : order) {
    o = NormalizeAxis(kOp, o, rank);
    if (seen[static_cast<size_t>(o)]) ShapeError(kOp, "repeated axis");
    seen[static_cast<size_t>(o)] = true;
  }
  auto in_strides = RowMajorStrides(a.shape());
  Shape out_shape(static_cast<size_t>(rank));
  std::vector<int64_t> strides(static_cast<size_t>(rank));
  for (int i = 0; i < rank; ++i) {
    out_shape[static_cast<size_t>(i)] = a.shape()[static_cast<size_t>(order[static_cast<size_t>(i)])];
    strides[static_cast<size_t>(i)] = in_strides[static_cast<size_t>(order[static_cast<size_t>(i)])];
  }
  // Maps each output flat index to its input flat index.
  const int64_t n = NumElements(out_shape);
  std::vector<int64_t> source(static_cast<size_t>(n));
  {
    std::vector<int64_t> index(static_cast<size_t>(rank), 0);
    int64_t in = 0;
    for (int64_t o = 0; o < n; ++o) {
      source[static_cast<size_t>(o)] = in;
      for (int d = rank - 1; d >= 0; --d) {
        size_t u = static_cast<size_t>(d);
        ++index[u];
        in += strides[u];
        if (index[u] < out_shape[u]) break;
        in -= strides[u] * out_shape[u];
        index[u] = 0;
      }
    }
  }
  std::vector<T> out(static_cast<size_t>(n));
  const T* src = a.data().data();
  for (int64_t o = 0; o < n; ++o) out[static_cast<size_t>(o)] = src[source[static_cast<size_t>(o)]];
  bool track = Tracks({&a});
  BackwardFn<T> backward;
  if (track) {
    backward = [source = std::move(source)](internal::Node<T>& self) {
      T* g = self.ParentGrad(0).data();
      for (size_t o = 0; o < source.size(); ++o) g[source[o]] += self.grad[o];
    };
  }
  return MakeResult<T>(kOp, std::move(out_shape), std::move(out), track,
                       {a.node()}, std::move(backward));
}

template <typename T>
Tensor<T> Conv1d(const Tensor<T>& x, const Tensor<T>& weight, int stride,
                 ConvPadding padding) {
  constexpr const char* kOp = "conv1d";
  if (x.rank() != 2 && x.rank() != 3) ShapeError(kOp, "input must be rank 2 or 3");
  if (weight.rank() != 3) ShapeError(kOp, "weight must be (window, Cin, Cout)");
  if (stride < 1 || padding.left < 0 || padding.right < 0) {
    ShapeError(kOp, "invalid stride or padding");
  }
  const int64_t batch = x.rank() == 3 ? x.dim(0) : 1;
  const int64_t len = x.dim(-2);
  const int64_t cin = x.dim(-1);
  const int64_t window = weight.dim(0);
  const int64_t cout = weight.dim(2);
  if (weight.dim(1) != cin) {
    ShapeError(kOp, "input " + ShapeString(x.shape()) + " vs weight " +
                        ShapeString(weight.shape()));
  }
  const int64_t padded = len + padding.left + padding.right;
  if (padded < window) ShapeError(kOp, "window longer than padded input");
  const int64_t out_len = (padded - window) / stride + 1;
  Shape out_shape = x.rank() == 3 ? Shape{batch, out_len, cout}
                                  : Shape{out_len, cout};
  std::vector<T> out(static_cast<size_t>(batch * out_len * cout), T(0));
  const T* px = x.data().data();
  const T* pw = weight.data().data();
  const int64_t pad_left = padding.left;
  for (int64_t b = 0; b < batch; ++b) {
    for (int64_t t = 0; t < out_len; ++t) {
      T* orow = out.data() + (b * out_len + t) * cout;
      for (int64_t k = 0; k < window; ++k) {
        int64_t src = t * stride + k - pad_left;
        if (src < 0 || src >= len) continue;
        const T* xrow = px + (b * len + src) * cin;
        const T* wk = pw + k * cin * cout;
        for (int64_t c = 0; c < cin; ++c) {
          if (xrow[c] != T(0)) Axpy(xrow[c], wk + c * cout, orow, cout);
        }
      }
    }
  }
  bool track = Tracks({&x, &weight});
  BackwardFn<T> backward;
  if (track) {
    backward = [=](internal::Node<T>& self) {
      const T* g = self.grad.data();
      const T* vx = self.parents[0]->data.data();
      const T* vw = self.parents[1]->data.data();
      T* gx = self.ParentNeedsGrad(0) ? self.ParentGrad(0).data() : nullptr;
      T* gw = self.ParentNeedsGrad(1) ? self.ParentGrad(1).data() : nullptr;
      for (int64_t b = 0; b < batch; ++b) {
        for (int64_t t = 0; t < out_len; ++t) {
          const T* grow = g + (b * out_len + t) * cout;
          for (int64_t k = 0; k < window; ++k) {
            int64_t src = t * stride + k - pad_left;
            if (src < 0 || src >= len) continue;
            const T* xrow = vx + (b * len + src) * cin;
            const T* wk = vw + k * cin * cout;
            for (int64_t c = 0; c < cin; ++c) {
              if (gx) gx[(b * len + src) * cin + c] += Dot(grow, wk + c * cout, cout);
              if (gw && xrow[c] != T(0)) {
                Axpy(xrow[c], grow, gw + (k * cin + c) * cout, cout);
              }
            }
          }
        }
      }
    };
  }
  return MakeResult<T>(kOp, std::move(out_shape), std::move(out), track,
                       {x.node(), weight.node()}, std::move(backward));
}

template <typename T>
Tensor<T> Pool(const Tensor<T>& x, int axis, const PoolBins& bins,
               PoolKind kind) {
  const char* op = kind == PoolKind::kMax ? "max_pool" : "avg_pool";
  int ax = NormalizeAxis(op, axis, x.rank());
  AxisSplit split = SplitAt(x.shape(), ax);
  if (bins.empty()) ShapeError(op, "no bins");
  for (const auto& [begin, end] : bins) {
    if (begin < 0 || end > split.extent || begin >= end) {
      ShapeError(op, "bin [" + std::to_string(begin) + ", " +
                         std::to_string(end) + ") invalid for extent " +
                         std::to_string(split.extent));
    }
  }
  const int64_t nbins = static_cast<int64_t>(bins.size());
  Shape out_shape = x.shape();
  out_shape[static_cast<size_t>(ax)] = nbins;
  std::vector<T> out(static_cast<size_t>(split.outer * nbins * split.inner));
  std::vector<int64_t> argmax;
  if (kind == PoolKind::kMax) argmax.resize(out.size());
  const T* px = x.data().data();
  for (int64_t o = 0; o < split.outer; ++o) {
    for (int64_t b = 0; b < nbins; ++b) {
      auto [begin, end] = bins[static_cast<size_t>(b)];
      for (int64_t i = 0; i < split.inner; ++i) {
        size_t dst = static_cast<size_t>((o * nbins + b) * split.inner + i);
        int64_t base = o * split.extent * split.inner + i;
        if (kind == PoolKind::kMax) {
          int64_t best = base + begin * split.inner;
          for (int64_t p = begin + 1; p < end; ++p) {
            int64_t at = base + p * split.inner;
            if (px[at] > px[best]) best = at;
          }
          out[dst] = px[best];
          argmax[dst] = best;
        } else {
          T acc = 0;
          for (int64_t p = begin; p < end; ++p) acc += px[base + p * split.inner];
          out[dst] = acc / static_cast<T>(end - begin);
        }
      }
    }
  }
  bool track = Tracks({&x});
  BackwardFn<T> backward;
  if (track) {
    if (kind == PoolKind::kMax) {
      backward = [argmax = std::move(argmax)](internal::Node<T>& self) {
        T* g = self.ParentGrad(0).data();
        for (size_t o = 0; o < argmax.size(); ++o) g[argmax[o]] += self.grad[o];
      };
    } else {
      backward = [bins, split, nbins](internal::Node<T>& self) {
        T* g = self.ParentGrad(0).data();
        for (int64_t o = 0; o < split.outer; ++o) {
          for (int64_t b = 0; b < nbins; ++b) {
            auto [begin, end] = bins[static_cast<size_t>(b)];
            T inv = T(1) / static_cast<T>(end - begin);
            for (int64_t i = 0; i < split.inner; ++i) {
              T go = self.grad[static_cast<size_t>((o * nbins + b) * split.inner + i)] * inv;
              int64_t base = o * split.extent * split.inner + i;
              for (int64_t p = begin; p < end; ++p) g[base + p * split.inner] += go;
            }
          }
        }
      };
    }
  }
  return MakeResult<T>(op, std::move(out_shape), std::move(out), track,
                       {x.node()}, std::move(backward));
}

namespace {

PoolBins SlidingBins(const char* op, int64_t extent, int window, int stride) {
  if (window < 1 || stride < 1) ShapeError(op, "window and stride must be >= 1");
  if (window > extent) ShapeError(op, "window longer than axis");
  PoolBins bins;
  for (int64_t start = 0; start + window <= extent; start += stride) {
    bins.emplace_back(start, start + window);
  }
  return bins;
}

}  // namespace

template <typename T>
Tensor<T> MaxPool(const Tensor<T>& x, int window, int stride, int axis) {
  int ax = NormalizeAxis("max_pool", axis, x.rank());
  return Pool(x, ax, SlidingBins("max_pool", x.dim(ax), window, stride),
              PoolKind::kMax);
}

template <typename T>
Tensor<T> AvgPool(const Tensor<T>& x, int window, int stride, int axis) {
  int ax = NormalizeAxis("avg_pool", axis, x.rank());
  return Pool(x, ax, SlidingBins("avg_pool", x.dim(ax), window, stride),
              PoolKind::kAverage);
}

template <typename T>
Tensor<T> Softmax(const Tensor<T>& x, int axis) {
  constexpr const char* kOp = "softmax";
  int ax = NormalizeAxis(kOp, axis, x.rank());
  AxisSplit s = SplitAt(x.shape(), ax);
  std::vector<T> out(x.size());
  const T* px = x.data().data();
  for (int64_t o = 0; o < s.outer; ++o) {
    for (int64_t i = 0; i < s.inner; ++i) {
      int64_t base = o * s.extent * s.inner + i;
      T mx = px[base];
      for (int64_t p = 1; p < s.extent; ++p) mx = std::max(mx, px[base + p * s.inner]);
      T total = 0;
      for (int64_t p = 0; p < s.extent; ++p) {
        T e = std::exp(px[base + p * s.inner] - mx);
        out[static_cast<size_t>(base + p * s.inner)] = e;
        total += e;
      }
      for (int64_t p = 0; p < s.extent; ++p) out[static_cast<size_t>(base + p * s.inner)] /= total;
    }
  }
  bool track = Tracks({&x});
  BackwardFn<T> backward;
  if (track) {
    backward = [s](internal::Node<T>& self) {
      T* g = self.ParentGrad(0).data();
      const T* y = self.data.data();
      const T* go = self.grad.data();
      for (int64_t o = 0; o < s.outer; ++o) {
        for (int64_t i = 0; i < s.inner; ++i) {
          int64_t base = o * s.extent * s.inner + i;
          T dot = 0;
          for (int64_t p = 0; p < s.extent; ++p) {
            int64_t at = base + p * s.inner;
            dot += go[at] * y[at];
          }
          for (int64_t p = 0; p < s.extent; ++p) {
            int64_t at = base + p * s.inner;
            g[at] += y[at] * (go[at] - dot);
          }
        }
      }
    };
  }
  return MakeResult<T>(kOp, x.shape(), std::move(out), track, {x.node()},
                       std::move(backward));
}

template <typename T>
Tensor<T> MaskedSoftmax(const Tensor<T>& x,
                        std::span<const uint8_t> key_valid) {
  constexpr const char* kOp = "masked_softmax";
  if (x.rank() < 1) ShapeError(kOp, "rank 0 input");
  const int64_t n = x.dim(-1);
  if (static_cast<int64_t>(key_valid.size()) != n) {
    ShapeError(kOp, "mask length " + std::to_string(key_valid.size()) +
                        " vs last extent " + std::to_string(n));
  }
  const int64_t rows = static_cast<int64_t>(x.size()) / std::max<int64_t>(n, 1);
  std::vector<T> out(x.size(), T(0));
  const T* px = x.data().data();
  bool any_valid = std::any_of(key_valid.begin(), key_valid.end(),
                               [](uint8_t v) { return v != 0; });
  if (any_valid) {
    for (int64_t r = 0; r < rows; ++r) {
      const T* row = px + r * n;
      T* orow = out.data() + r * n;
      T mx = -std::numeric_limits<T>::infinity();
      for (int64_t j = 0; j < n; ++j) {
        if (key_valid[static_cast<size_t>(j)]) mx = std::max(mx, row[j]);
      }
      T total = 0;
      for (int64_t j = 0; j < n; ++j) {
        if (key_valid[static_cast<size_t>(j)]) {
          orow[j] = std::exp(row[j] - mx);
          total += orow[j];
        }
      }
      for (int64_t j = 0; j < n; ++j) orow[j] /= total;
    }
  }
  bool track = Tracks({&x});
  BackwardFn<T> backward;
  if (track) {
    backward = [rows, n](internal::Node<T>& self) {
      T* g = self.ParentGrad(0).data();
      const T* y = self.data.data();
      const T* go = self.grad.data();
      for (int64_t r = 0; r < rows; ++r) {
        T dot = Dot(go + r * n, y + r * n, n);
        for (int64_t j = 0; j < n; ++j) {
          g[r * n + j] += y[r * n + j] * (go[r * n + j] - dot);
        }
      }
    };
  }
  return MakeResult<T>(kOp, x.shape(), std::move(out), track, {x.node()},
                       std::move(backward));
}

template <typename T>
Tensor<T> LayerNorm(const Tensor<T>& x, int axis, double eps) {
  constexpr const char* kOp = "layer_norm";
  int ax = NormalizeAxis(kOp, axis, x.rank());
  if (!(eps > 0.0)) throw Error(ErrorCode::kInvalidArgument, "layer_norm eps must be > 0");
  AxisSplit s = SplitAt(x.shape(), ax);
  std::vector<T> out(x.size());
  std::vector<T> inv_std(static_cast<size_t>(s.outer * s.inner));
  const T* px = x.data().data();
  const T e = static_cast<T>(eps);
  for (int64_t o = 0; o < s.outer; ++o) {
    for (int64_t i = 0; i < s.inner; ++i) {
      int64_t base = o * s.extent * s.inner + i;
      T mean = 0;
      for (int64_t p = 0; p < s.extent; ++p) mean += px[base + p * s.inner];
      mean /= static_cast<T>(s.extent);
      T var = 0;
      for (int64_t p = 0; p < s.extent; ++p) {
        T d = px[base + p * s.inner] - mean;
        var += d * d;
      }
      var /= static_cast<T>(s.extent);
      T is = T(1) / std::sqrt(var + e);
      inv_std[static_cast<size_t>(o * s.inner + i)] = is;
      for (int64_t p = 0; p < s.extent; ++p) {
        out[static_cast<size_t>(base + p * s.inner)] = (px[base + p * s.inner] - mean) * is;
      }
    }
  }
  bool track = Tracks({&x});
  BackwardFn<T> backward;
  if (track) {
    backward = [s, inv_std = std::move(inv_std)](internal::Node<T>& self) {
      T* g = self.ParentGrad(0).data();
      const T* y = self.data.data();
      const T* go = self.grad.data();
      const T n = static_cast<T>(s.extent);
      for (int64_t o = 0; o < s.outer; ++o) {
        for (int64_t i = 0; i < s.inner; ++i) {
          int64_t base = o * s.extent * s.inner + i;
          T mean_g = 0;
          T mean_gy = 0;
          for (int64_t p = 0; p < s.extent; ++p) {
            int64_t at = base + p * s.inner;
            mean_g += go[at];
            mean_gy += go[at] * y[at];
          }
          mean_g /= n;
          mean_gy /= n;
          T is = inv_std[static_cast<size_t>(o * s.inner + i)];
          for (int64_t p = 0; p < s.extent; ++p) {
            int64_t at = base + p * s.inner;
            g[at] += is * (go[at] - mean_g - y[at] * mean_gy);
          }
        }
      }
    };
  }
  return MakeResult<T>(kOp, x.shape(), std::move(out), track, {x.node()},
                       std::move(backward));
}

template <typename T>
Tensor<T> Gelu(const Tensor<T>& x) {
  return Unary(
      "gelu", x,
      [](T v) {
        return static_cast<T>(0.5) * v *
               (T(1) + std::erf(v * static_cast<T>(std::numbers::sqrt2 / 2)));
      },
      [](T v, T) {
        T cdf = static_cast<T>(0.5) *
                (T(1) + std::erf(v * static_cast<T>(std::numbers::sqrt2 / 2)));
        T pdf = std::exp(static_cast<T>(-0.5) * v * v) *
                static_cast<T>(0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2);
        return cdf + v * pdf;
      });
}

template <typename T>
Tensor<T> Sigmoid(const Tensor<T>& x) {
  return Unary(
      "sigmoid", x,
      [](T v) {
        if (v >= 0) return T(1) / (T(1) + std::exp(-v));
        T e = std::exp(v);
        return e / (T(1) + e);
      },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Tensor<T> Tanh(const Tensor<T>& x) {
  return Unary(
      "tanh", x, [](T v) { return std::tanh(v); },
      [](T, T y) { return T(1) - y * y; });
}

template <typename T>
Tensor<T> Relu(const Tensor<T>& x) {
  return Unary(
      "relu", x, [](T v) { return v > T(0) ? v : T(0); },
      [](T v, T) { return v > T(0) ? T(1) : T(0); });
}

template <typename T>
Tensor<T> Dropout(const Tensor<T>& x, double rate, Rng& rng, bool training) {
  if (!(rate >= 0.0 && rate < 1.0)) {
    throw Error(ErrorCode::kInvalidArgument,
                "dropout rate must be in [0, 1), got " + std::to_string(rate));
  }
  if (!training || rate == 0.0) return x;
  const T keep_scale = static_cast<T>(1.0 / (1.0 - rate));
  std::vector<T> mask(x.size());
  for (auto& m : mask) m = rng.Uniform() < rate ? T(0) : keep_scale;
  std::vector<T> out(x.size());
  const T* px = x.data().data();
  for (size_t i = 0; i < out.size(); ++i) out[i] = px[i] * mask[i];
  bool track = Tracks({&x});
  BackwardFn<T> backward;
  if (track) {
    backward = [mask = std::move(mask)](internal::Node<T>& self) {
      auto g = self.ParentGrad(0);
      for (size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i] * mask[i];
    };
  }
  return MakeResult<T>("dropout", x.shape(), std::move(out), track,
                       {x.node()}, std::move(backward));
}

template <typename T>
Tensor<T> EmbeddingLookup(const Tensor<T>& table,
                          std::span<const int32_t> ids) {
  constexpr const char* kOp = "embedding_lookup";
  if (table.rank() != 2) ShapeError(kOp, "table must be (V, D)");
  const int64_t vocab = table.dim(0);
  const int64_t width = table.dim(1);
  for (int32_t id : ids) {
    if (id < 0 || id >= vocab) {
      throw Error(ErrorCode::kIdOutOfRange,
                  "id " + std::to_string(id) + " outside table of " +
                      std::to_string(vocab) + " rows");
    }
  }
  std::vector<T> out(ids.size() * static_cast<size_t>(width));
  const T* pt = table.data().data();
  for (size_t r = 0; r < ids.size(); ++r) {
    std::copy(pt + ids[r] * width, pt + (ids[r] + 1) * width,
              out.data() + static_cast<int64_t>(r) * width);
  }
  bool track = Tracks({&table});
  BackwardFn<T> backward;
  if (track) {
    std::vector<int32_t> rows(ids.begin(), ids.end());
    backward = [rows = std::move(rows), width](internal::Node<T>& self) {
      T* g = self.ParentGrad(0).data();
      for (size_t r = 0; r < rows.size(); ++r) {
        Axpy(T(1), self.grad.data() + static_cast<int64_t>(r) * width,
             g + rows[r] * width, width);
      }
    };
  }
  return MakeResult<T>(kOp, Shape{static_cast<int64_t>(ids.size()), width},
                       std::move(out), track, {table.node()},
                       std::move(backward));
}

template <typename T>
Tensor<T> CrossEntropyWithLogits(const Tensor<T>& logits,
                                 std::span<const int32_t> labels,
                                 std::span<const double> class_weights) {
  constexpr const char* kOp = "cross_entropy";
  if (logits.rank() != 2) ShapeError(kOp, "logits must be (B, K)");
  const int64_t batch = logits.dim(0);
  const int64_t classes = logits.dim(1);
  if (static_cast<int64_t>(labels.size()) != batch) {
    ShapeError(kOp, std::to_string(labels.size()) + " labels for batch " +
                        std::to_string(batch));
  }
  if (!class_weights.empty() &&
      static_cast<int64_t>(class_weights.size()) != classes) {
    ShapeError(kOp, "class weight count differs from K");
  }
  for (int32_t y : labels) {
    if (y < 0 || y >= classes) {
      throw Error(ErrorCode::kLabelOutOfRange,
                  "label " + std::to_string(y) + " not in [0, " +
                      std::to_string(classes) + ")");
    }
  }
  const T* px = logits.data().data();
  std::vector<T> probs(logits.size());
  std::vector<T> weights(static_cast<size_t>(batch));
  T weight_total = 0;
  T loss = 0;
  for (int64_t b = 0; b < batch; ++b) {
    const T* row = px + b * classes;
    T mx = *std::max_element(row, row + classes);
    T total = 0;
    for (int64_t k = 0; k < classes; ++k) {
      T e = std::exp(row[k] - mx);
      probs[static_cast<size_t>(b * classes + k)] = e;
      total += e;
    }
    for (int64_t k = 0; k < classes; ++k) probs[static_cast<size_t>(b * classes + k)] /= total;
    int32_t y = labels[static_cast<size_t>(b)];
    T w = class_weights.empty() ? T(1) : static_cast<T>(class_weights[static_cast<size_t>(y)]);
    weights[static_cast<size_t>(b)] = w;
    weight_total += w;
    loss += w * (std::log(total) + mx - row[y]);
  }
  if (!(weight_total > T(0))) {
    throw Error(ErrorCode::kInvalidArgument, "cross_entropy: total weight is zero");
  }
  loss /= weight_total;
  bool track = Tracks({&logits});
  BackwardFn<T> backward;
  if (track) {
    std::vector<int32_t> ys(labels.begin(), labels.end());
    backward = [probs = std::move(probs), weights = std::move(weights),
                ys = std::move(ys), classes, weight_total](internal::Node<T>& self) {
      T* g = self.ParentGrad(0).data();
      T go = self.grad[0] / weight_total;
      for (size_t b = 0; b < ys.size(); ++b) {
        T scale = go * weights[b];
        for (int64_t k = 0; k < classes; ++k) {
          size_t at = b * static_cast<size_t>(classes) + static_cast<size_t>(k);
          g[at] += scale * (probs[at] - (k == ys[b] ? T(1) : T(0)));
        }
      }
    };
  }
  return MakeResult<T>(kOp, Shape{}, std::vector<T>{loss}, track,
                       {logits.node()}, std::move(backward));
}

template <typename T>
Tensor<T> Sum(const Tensor<T>& x) {
  T total = 0;
  for (T v : x.data()) total += v;
  bool track = Tracks({&x});
  BackwardFn<T> backward;
  if (track) {
    backward = [](internal::Node<T>& self) {
      auto g = self.ParentGrad(0);
      for (auto& v : g) v += self.grad[0];
    };
  }
  return MakeResult<T>("sum", Shape{}, std::vector<T>{total}, track,
                       {x.node()}, std::move(backward));
}

template <typename T>
Tensor<T> Mean(const Tensor<T>& x) {
  if (x.size() == 0) ShapeError("mean", "empty input");
  return Scale(Sum(x), 1.0 / static_cast<double>(x.size()));
}

namespace {

enum class ReduceKind { kSum, kMean, kMax };

template <typename T>
Tensor<T> Reduce(const char* op, const Tensor<T>& x, int axis,
                 ReduceKind kind) {
  int ax = NormalizeAxis(op, axis, x.rank());
  AxisSplit s = SplitAt(x.shape(), ax);
  if (s.extent == 0) ShapeError(op, "reducing an empty axis");
  Shape out_shape = x.shape();
  out_shape.erase(out_shape.begin() + ax);
  std::vector<T> out(static_cast<size_t>(s.outer * s.inner));
  std::vector<int64_t> argmax;
  if (kind == ReduceKind::kMax) argmax.resize(out.size());
  const T* px = x.data().data();
  for (int64_t o = 0; o < s.outer; ++o) {
    for (int64_t i = 0; i < s.inner; ++i) {
      int64_t base = o * s.extent * s.inner + i;
      size_t dst = static_cast<size_t>(o * s.inner + i);
      if (kind == ReduceKind::kMax) {
        int64_t best = base;
        for (int64_t p = 1; p < s.extent; ++p) {
          if (px[base + p * s.inner] > px[best]) best = base + p * s.inner;
        }
        out[dst] = px[best];
        argmax[dst] = best;
      } else {
        T acc = 0;
        for (int64_t p = 0; p < s.extent; ++p) acc += px[base + p * s.inner];
        out[dst] = kind == ReduceKind::kMean ? acc / static_cast<T>(s.extent) : acc;
      }
    }
  }
  bool track = Tracks({&x});
  BackwardFn<T> backward;
  if (track) {
    backward = [s, kind, argmax = std::move(argmax)](internal::Node<T>& self) {
      T* g = self.ParentGrad(0).data();
      if (kind == ReduceKind::kMax) {
        for (size_t o = 0; o < argmax.size(); ++o) g[argmax[o]] += self.grad[o];
        return;
      }
      T scale = kind == ReduceKind::kMean ? T(1) / static_cast<T>(s.extent) : T(1);
      for (int64_t o = 0; o < s.outer; ++o) {
        for (int64_t i = 0; i < s.inner; ++i) {
          T go = self.grad[static_cast<size_t>(o * s.inner + i)] * scale;
          int64_t base = o * s.extent * s.inner + i;
          for (int64_t p = 0; p < s.extent; ++p) g[base + p * s.inner] += go;
        }
      }
    };
  }
  return MakeResult<T>(op, std::move(out_shape), std::move(out), track,
                       {x.node()}, std::move(backward));
}

}  // namespace

template <typename T>
Tensor<T> SumAxis(const Tensor<T>& x, int axis) {
  return Reduce("sum_axis", x, axis, ReduceKind::kSum);
}

template <typename T>
Tensor<T> MeanAxis(const Tensor<T>& x, int axis) {
  return Reduce("mean_axis", x, axis, ReduceKind::kMean);
}

template <typename T>
Tensor<T> MaxAxis(const Tensor<T>& x, int axis) {
  return Reduce("max_axis", x, axis, ReduceKind::kMax);
}

template <typename T>
Tensor<T> GruScan(const Tensor<T>& x_proj, const Tensor<T>& w_rec,
                  const Tensor<T>& b_rec, bool reverse) {
  if (w_rec.rank() != 2 || w_rec.dim(1) != 3 * w_rec.dim(0)) {
    throw Error(ErrorCode::kShapeMismatch,
                "gru recurrent weight must be (g, 3g), got " +
                    ShapeString(w_rec.shape()));
  }
  const int64_t g = w_rec.dim(0);
  const int64_t g3 = 3 * g;
  if (x_proj.rank() != 2 || x_proj.dim(1) != g3 || b_rec.rank() != 1 ||
      b_rec.dim(0) != g3) {
    throw Error(ErrorCode::kShapeMismatch,
                "gru inputs " + ShapeString(x_proj.shape()) + " / " +
                    ShapeString(b_rec.shape()) + " do not match g=" +
                    std::to_string(g));
  }
  const int64_t steps = x_proj.dim(0);
  const T* px = x_proj.data().data();
  const T* pw = w_rec.data().data();
  const T* pb = b_rec.data().data();
  std::vector<T> out(static_cast<size_t>(steps * g));
  // Per step: r, z, n and the recurrent candidate term h W_n + b_n.
  std::vector<T> cache(static_cast<size_t>(steps * 4 * g));
  std::vector<T> hr(static_cast<size_t>(g3));
  std::vector<T> zero(static_cast<size_t>(g), T(0));
  const T* h_prev = zero.data();
  for (int64_t s = 0; s < steps; ++s) {
    const int64_t t = reverse ? steps - 1 - s : s;
    std::copy(pb, pb + g3, hr.begin());
    Gemm(h_prev, pw, hr.data(), 1, g, g3, false);
    const T* xt = px + t * g3;
    T* c = cache.data() + t * 4 * g;
    T* h = out.data() + t * g;
    for (int64_t i = 0; i < g; ++i) {
      T r = T(1) / (T(1) + std::exp(-(xt[i] + hr[static_cast<size_t>(i)])));
      T z = T(1) / (T(1) + std::exp(-(xt[g + i] + hr[static_cast<size_t>(g + i)])));
      T hn = hr[static_cast<size_t>(2 * g + i)];
      T n = std::tanh(xt[2 * g + i] + r * hn);
      c[i] = r;
      c[g + i] = z;
      c[2 * g + i] = n;
      c[3 * g + i] = hn;
      h[i] = (T(1) - z) * h_prev[i] + z * n;
    }
    h_prev = h;
  }
  bool track = Tracks({&x_proj, &w_rec, &b_rec});
  BackwardFn<T> backward;
  if (track) {
    backward = [cache = std::move(cache), steps, g, reverse](
                   internal::Node<T>& self) {
      const int64_t g3 = 3 * g;
      const T* gout = self.grad.data();
      const T* hs = self.data.data();
      const T* pw = self.parents[1]->data.data();
      std::vector<T> dx(static_cast<size_t>(steps * g3));
      std::vector<T> dw(static_cast<size_t>(g * g3), T(0));
      std::vector<T> db(static_cast<size_t>(g3), T(0));
      std::vector<T> dh(static_cast<size_t>(g), T(0));
      std::vector<T> zero(static_cast<size_t>(g), T(0));
      for (int64_t s = steps - 1; s >= 0; --s) {
        const int64_t t = reverse ? steps - 1 - s : s;
        const int64_t prev = reverse ? t + 1 : t - 1;
        const T* h_prev = s == 0 ? zero.data() : hs + prev * g;
        const T* c = cache.data() + t * 4 * g;
        T* dxt = dx.data() + t * g3;
        for (int64_t i = 0; i < g; ++i) dh[static_cast<size_t>(i)] += gout[t * g + i];
        std::vector<T> dh_prev(static_cast<size_t>(g));
        for (int64_t i = 0; i < g; ++i) {
          const T r = c[i];
          const T z = c[g + i];
          const T n = c[2 * g + i];
          const T hn = c[3 * g + i];
          const T d = dh[static_cast<size_t>(i)];
          const T dz = d * (n - h_prev[i]);
          const T dn_pre = d * z * (T(1) - n * n);
          const T dr = dn_pre * hn;
          dxt[i] = dr * r * (T(1) - r);
          dxt[g + i] = dz * z * (T(1) - z);
          dxt[2 * g + i] = dn_pre;
          dh_prev[static_cast<size_t>(i)] = d * (T(1) - z);
        }
        // Gradient of the recurrent pre-activations: [dr, dz, dn * r].
        std::vector<T> dhr(static_cast<size_t>(g3));
        for (int64_t i = 0; i < g; ++i) {
          dhr[static_cast<size_t>(i)] = dxt[i];
          dhr[static_cast<size_t>(g + i)] = dxt[g + i];
          dhr[static_cast<size_t>(2 * g + i)] = dxt[2 * g + i] * c[i];
        }
        for (int64_t j = 0; j < g3; ++j) db[static_cast<size_t>(j)] += dhr[static_cast<size_t>(j)];
        for (int64_t i = 0; i < g; ++i) {
          if (h_prev[i] != T(0)) Axpy(h_prev[i], dhr.data(), dw.data() + i * g3, g3);
          dh_prev[static_cast<size_t>(i)] += Dot(pw + i * g3, dhr.data(), g3);
        }
        dh.swap(dh_prev);
      }
      if (self.ParentNeedsGrad(0)) {
        auto gx = self.ParentGrad(0);
        for (size_t i = 0; i < dx.size(); ++i) gx[i] += dx[i];
      }
      if (self.ParentNeedsGrad(1)) {
        auto gw = self.ParentGrad(1);
        for (size_t i = 0; i < dw.size(); ++i) gw[i] += dw[i];
      }
      if (self.ParentNeedsGrad(2)) {
        auto gb = self.ParentGrad(2);
        for (size_t i = 0; i < db.size(); ++i) gb[i] += db[i];
      }
    };
  }
  return MakeResult<T>("gru_scan", {steps, g}, std::move(out), track,
                       {x_proj.node(), w_rec.node(), b_rec.node()},
                       std::move(backward));
}

#define PMA_INSTANTIATE_OPS(T)                                                \
  template Tensor<T> MatMul(const Tensor<T>&, const Tensor<T>&, bool);        \
  template Tensor<T> Add(const Tensor<T>&, const Tensor<T>&);                 \
  template Tensor<T> Sub(const Tensor<T>&, const Tensor<T>&);                 \
  template Tensor<T> Mul(const Tensor<T>&, const Tensor<T>&);                 \
  template Tensor<T> Scale(const Tensor<T>&, double);                         \
  template Tensor<T> Concat(std::span<const Tensor<T>>, int);                 \
  template Tensor<T> Stack(std::span<const Tensor<T>>);                       \
  template Tensor<T> Slice(const Tensor<T>&, int, int64_t, int64_t);          \
  template Tensor<T> Reshape(const Tensor<T>&, Shape);                        \
  template Tensor<T> Permute(const Tensor<T>&, std::vector<int>);             \
  template Tensor<T> Conv1d(const Tensor<T>&, const Tensor<T>&, int,          \
                            ConvPadding);                                     \
  template Tensor<T> Pool(const Tensor<T>&, int, const PoolBins&, PoolKind);  \
  template Tensor<T> MaxPool(const Tensor<T>&, int, int, int);                \
  template Tensor<T> AvgPool(const Tensor<T>&, int, int, int);                \
  template Tensor<T> Softmax(const Tensor<T>&, int);                          \
  template Tensor<T> MaskedSoftmax(const Tensor<T>&,                          \
                                   std::span<const uint8_t>);                 \
  template Tensor<T> LayerNorm(const Tensor<T>&, int, double);                \
  template Tensor<T> Gelu(const Tensor<T>&);                                  \
  template Tensor<T> Sigmoid(const Tensor<T>&);                               \
  template Tensor<T> Tanh(const Tensor<T>&);                                  \
  template Tensor<T> Relu(const Tensor<T>&);                                  \
  template Tensor<T> Dropout(const Tensor<T>&, double, Rng&, bool);           \
  template Tensor<T> EmbeddingLookup(const Tensor<T>&,                        \
                                     std::span<const int32_t>);               \
  template Tensor<T> CrossEntropyWithLogits(                                  \
      const Tensor<T>&, std::span<const int32_t>, std::span<const double>);   \
  template Tensor<T> GruScan(const Tensor<T>&, const Tensor<T>&,            \
                             const Tensor<T>&, bool);                        \
  template Tensor<T> Sum(const Tensor<T>&);                                   \
  template Tensor<T> Mean(const Tensor<T>&);                                  \
  template Tensor<T> SumAxis(const Tensor<T>&, int);                          \
  template Tensor<T> MeanAxis(const Tensor<T>&, int);                         \
  template Tensor<T> MaxAxis(const Tensor<T>&, int);

PMA_INSTANTIATE_OPS(float)
PMA_INSTANTIATE_OPS(double)

#undef PMA_INSTANTIATE_OPS

}  // namespace pma
