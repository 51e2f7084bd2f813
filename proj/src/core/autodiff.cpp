// Copyright 2026 The mtlb Authors
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

#include "mtlb/core/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mtlb/core/errors.hpp"

namespace mtlb
{

const Tensor & Var::value() const
{
  if (graph_ == nullptr) throw StateError("use of an unbound Var");
  return graph_->value(id_);
}

Var Graph::constant(Tensor value)
{
  require_finite(value, "constant");
  nodes_.push_back(Node{std::move(value), std::nullopt, {}, {}, std::nullopt, "constant", false});
  return Var(this, nodes_.size() - 1);
}

Var Graph::variable(Tensor value)
{
  require_finite(value, "variable");
  nodes_.push_back(Node{std::move(value), std::nullopt, {}, {}, std::nullopt, "variable", true});
  return Var(this, nodes_.size() - 1);
}

Var Graph::parameter(const ParameterStore & store, ParamId id)
{
  const auto & e = store.entry(id);
  nodes_.push_back(Node{e.value, std::nullopt, {}, {}, id, "parameter", e.trainable && grad_enabled_});
  return Var(this, nodes_.size() - 1);
}

Var Graph::record(Tensor value, std::vector<std::size_t> inputs, BackwardFn fn, const char * op)
{
  if (backward_done_) throw StateError("graph already differentiated; build a new one");
  require_finite(value, op);
  bool needs = false;
  for (auto in : inputs) needs = needs || nodes_[in].requires_grad;
  Node node{std::move(value), std::nullopt, std::move(inputs), {}, std::nullopt, op, needs};
  if (needs) node.backward = std::move(fn);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

const Tensor * Graph::grad(std::size_t id) const
{
  const auto & g = nodes_.at(id).grad;
  return g ? &*g : nullptr;
}

Tensor & Graph::grad_buffer(std::size_t id)
{
  auto & node = nodes_[id];
  if (!node.grad) node.grad = Tensor(node.value.shape(), 0.0);
  return *node.grad;
}

void Graph::backward(Var loss)
{
  if (nodes_.empty() || loss.graph() != this) {
    throw StateError("backward called before any forward pass was recorded");
  }
  if (backward_done_) throw StateError("backward called twice on one graph");
  if (nodes_[loss.id()].value.size() != 1) {
    throw DimensionError("backward needs a scalar loss, got " + shape_to_string(loss.shape()));
  }
  backward_done_ = true;
  if (!nodes_[loss.id()].requires_grad) return;
  grad_buffer(loss.id())[0] = 1.0;
  for (std::size_t i = loss.id() + 1; i-- > 0;) {
    auto & node = nodes_[i];
    if (node.grad && node.backward) node.backward(*this, i);
  }
}

void Graph::backward(Var loss, ParameterStore & store)
{
  backward(loss);
  for (const auto & node : nodes_) {
    if (node.param && node.grad && store.trainable(*node.param)) {
      store.accumulate_grad(*node.param, *node.grad);
    }
  }
}

namespace
{

Graph & graph_of(Var a)
{
  if (!a.valid()) throw StateError("use of an unbound Var");
  return *a.graph();
}

void same_graph(Var a, Var b)
{
  if (a.graph() != b.graph()) throw StateError("operands belong to different graphs");
}

void require_rank(const Tensor & t, std::size_t rank, const char * op)
{
  if (t.rank() != rank) {
    throw DimensionError(
      std::string(op) + ": expected rank " + std::to_string(rank) + ", got " + shape_to_string(t.shape()));
  }
}

void require_same_shape(const Tensor & a, const Tensor & b, const char * op)
{
  if (a.shape() != b.shape()) {
    throw DimensionError(
      std::string(op) + ": shape mismatch " + shape_to_string(a.shape()) + " vs " +
      shape_to_string(b.shape()));
  }
}

// Accumulates `src` into the gradient of node `id` when it needs one.
void accumulate(Graph & g, std::size_t id, const Tensor & src)
{
  if (!g.requires_grad(id)) return;
  auto dst = g.grad_buffer(id).data();
  auto s = src.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += s[i];
}

template <class F, class DF>
Var unary(Var a, const char * op, F && f, DF df)
{
  auto & g = graph_of(a);
  const auto & x = a.value();
  Tensor out(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = f(x[i]);
  return g.record(
    std::move(out), {a.id()},
    [ia = a.id(), df](Graph & g, std::size_t self) {
      if (!g.requires_grad(ia)) return;
      const auto & x = g.value(ia);
      const auto & y = g.value(self);
      const auto & gy = *g.grad(self);
      auto & gx = g.grad_buffer(ia);
      for (std::size_t i = 0; i < x.size(); ++i) gx[i] += gy[i] * df(x[i], y[i]);
    },
    op);
}

}  // namespace

Var matmul(Var a, Var b)
{
  same_graph(a, b);
  auto & g = graph_of(a);
  const auto & A = a.value();
  const auto & B = b.value();
  require_rank(A, 2, "matmul");
  require_rank(B, 2, "matmul");
  const std::size_t n = A.dim(0), k = A.dim(1), m = B.dim(1);
  if (B.dim(0) != k) {
    throw DimensionError(
      "matmul: inner dimensions differ " + shape_to_string(A.shape()) + " . " + shape_to_string(B.shape()));
  }
  Tensor C({n, m});
  for (std::size_t i = 0; i < n; ++i) {
    double * c = &C[i * m];
    for (std::size_t p = 0; p < k; ++p) {
      const double av = A[i * k + p];
      if (av == 0.0) continue;
      const double * brow = &B[p * m];
      for (std::size_t j = 0; j < m; ++j) c[j] += av * brow[j];
    }
  }
  return g.record(
    std::move(C), {a.id(), b.id()},
    [ia = a.id(), ib = b.id(), n, k, m](Graph & g, std::size_t self) {
      const auto & G = *g.grad(self);
      const auto & A = g.value(ia);
      const auto & B = g.value(ib);
      if (g.requires_grad(ia)) {
        auto & gA = g.grad_buffer(ia);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            double acc = 0.0;
            for (std::size_t j = 0; j < m; ++j) acc += G[i * m + j] * B[p * m + j];
            gA[i * k + p] += acc;
          }
        }
      }
      if (g.requires_grad(ib)) {
        auto & gB = g.grad_buffer(ib);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t p = 0; p < k; ++p) {
            const double av = A[i * k + p];
            if (av == 0.0) continue;
            for (std::size_t j = 0; j < m; ++j) gB[p * m + j] += av * G[i * m + j];
          }
        }
      }
    },
    "matmul");
}

Var matmul_nt(Var a, Var b)
{
  same_graph(a, b);
  auto & g = graph_of(a);
  const auto & A = a.value();
  const auto & B = b.value();
  require_rank(A, 2, "matmul_nt");
  require_rank(B, 2, "matmul_nt");
  const std::size_t n = A.dim(0), k = A.dim(1), m = B.dim(0);
  if (B.dim(1) != k) {
    throw DimensionError(
      "matmul_nt: inner dimensions differ " + shape_to_string(A.shape()) + " . " +
      shape_to_string(B.shape()) + "^T");
  }
  Tensor C({n, m});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += A[i * k + p] * B[j * k + p];
      C[i * m + j] = acc;
    }
  }
  return g.record(
    std::move(C), {a.id(), b.id()},
    [ia = a.id(), ib = b.id(), n, k, m](Graph & g, std::size_t self) {
      const auto & G = *g.grad(self);
      const auto & A = g.value(ia);
      const auto & B = g.value(ib);
      if (g.requires_grad(ia)) {
        auto & gA = g.grad_buffer(ia);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < m; ++j) {
            const double gv = G[i * m + j];
            if (gv == 0.0) continue;
            for (std::size_t p = 0; p < k; ++p) gA[i * k + p] += gv * B[j * k + p];
          }
        }
      }
      if (g.requires_grad(ib)) {
        auto & gB = g.grad_buffer(ib);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < m; ++j) {
            const double gv = G[i * m + j];
            if (gv == 0.0) continue;
            for (std::size_t p = 0; p < k; ++p) gB[j * k + p] += gv * A[i * k + p];
          }
        }
      }
    },
    "matmul_nt");
}

Var add(Var a, Var b)
{
  same_graph(a, b);
  require_same_shape(a.value(), b.value(), "add");
  Tensor out = a.value();
  const auto & B = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += B[i];
  return graph_of(a).record(
    std::move(out), {a.id(), b.id()},
    [ia = a.id(), ib = b.id()](Graph & g, std::size_t self) {
      const Tensor G = *g.grad(self);
      accumulate(g, ia, G);
      accumulate(g, ib, G);
    },
    "add");
}

Var sub(Var a, Var b)
{
  same_graph(a, b);
  require_same_shape(a.value(), b.value(), "sub");
  Tensor out = a.value();
  const auto & B = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= B[i];
  return graph_of(a).record(
    std::move(out), {a.id(), b.id()},
    [ia = a.id(), ib = b.id()](Graph & g, std::size_t self) {
      const Tensor & G = *g.grad(self);
      accumulate(g, ia, G);
      if (g.requires_grad(ib)) {
        auto & gb = g.grad_buffer(ib);
        for (std::size_t i = 0; i < G.size(); ++i) gb[i] -= G[i];
      }
    },
    "sub");
}

Var mul(Var a, Var b)
{
  same_graph(a, b);
  require_same_shape(a.value(), b.value(), "mul");
  Tensor out = a.value();
  const auto & B = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= B[i];
  return graph_of(a).record(
    std::move(out), {a.id(), b.id()},
    [ia = a.id(), ib = b.id()](Graph & g, std::size_t self) {
      const Tensor & G = *g.grad(self);
      const auto & A = g.value(ia);
      const auto & B = g.value(ib);
      if (g.requires_grad(ia)) {
        auto & ga = g.grad_buffer(ia);
        for (std::size_t i = 0; i < G.size(); ++i) ga[i] += G[i] * B[i];
      }
      if (g.requires_grad(ib)) {
        auto & gb = g.grad_buffer(ib);
        for (std::size_t i = 0; i < G.size(); ++i) gb[i] += G[i] * A[i];
      }
    },
    "mul");
}

Var div(Var a, Var b)
{
  same_graph(a, b);
  require_same_shape(a.value(), b.value(), "div");
  Tensor out = a.value();
  const auto & B = b.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] /= B[i];
  return graph_of(a).record(
    std::move(out), {a.id(), b.id()},
    [ia = a.id(), ib = b.id()](Graph & g, std::size_t self) {
      const Tensor & G = *g.grad(self);
      const auto & B = g.value(ib);
      const auto & Y = g.value(self);
      if (g.requires_grad(ia)) {
        auto & ga = g.grad_buffer(ia);
        for (std::size_t i = 0; i < G.size(); ++i) ga[i] += G[i] / B[i];
      }
      if (g.requires_grad(ib)) {
        auto & gb = g.grad_buffer(ib);
        for (std::size_t i = 0; i < G.size(); ++i) gb[i] -= G[i] * Y[i] / B[i];
      }
    },
    "div");
}

Var add_rowvec(Var a, Var row)
{
  same_graph(a, row);
  const auto & A = a.value();
  const auto & R = row.value();
  require_rank(A, 2, "add_rowvec");
  const std::size_t n = A.dim(0), m = A.dim(1);
  if (R.size() != m) {
    throw DimensionError(
      "add_rowvec: row of " + shape_to_string(R.shape()) + " does not fit " + shape_to_string(A.shape()));
  }
  Tensor out = A;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] += R[j];
  }
  return graph_of(a).record(
    std::move(out), {a.id(), row.id()},
    [ia = a.id(), ir = row.id(), n, m](Graph & g, std::size_t self) {
      const Tensor & G = *g.grad(self);
      accumulate(g, ia, G);
      if (g.requires_grad(ir)) {
        auto & gr = g.grad_buffer(ir);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < m; ++j) gr[j] += G[i * m + j];
        }
      }
    },
    "add_rowvec");
}

Var scale(Var a, double s)
{
  Tensor out = a.value();
  for (auto & v : out.data()) v *= s;
  return graph_of(a).record(
    std::move(out), {a.id()},
    [ia = a.id(), s](Graph & g, std::size_t self) {
      const Tensor & G = *g.grad(self);
      auto & ga = g.grad_buffer(ia);
      for (std::size_t i = 0; i < G.size(); ++i) ga[i] += s * G[i];
    },
    "scale");
}

Var add_scalar(Var a, double s)
{
  Tensor out = a.value();
  for (auto & v : out.data()) v += s;
  return graph_of(a).record(
    std::move(out), {a.id()},
    [ia = a.id()](Graph & g, std::size_t self) { accumulate(g, ia, *g.grad(self)); }, "add_scalar");
}

Var relu(Var a)
{
  return unary(
    a, "relu", [](double x) { return x > 0.0 ? x : 0.0; },
    [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var exp(Var a)
{
  return unary(
    a, "exp", [](double x) { return std::exp(x); }, [](double, double y) { return y; });
}

Var log(Var a)
{
  for (double v : a.value().data()) {
    if (!(v > 0.0)) throw NumericError("log of non-positive value");
  }
  return unary(
    a, "log", [](double x) { return std::log(x); }, [](double x, double) { return 1.0 / x; });
}

Var tanh(Var a)
{
  return unary(
    a, "tanh", [](double x) { return std::tanh(x); }, [](double, double y) { return 1.0 - y * y; });
}

Var clamp(Var a, double lo, double hi)
{
  if (!(lo < hi)) throw ConfigError("clamp: lower bound must be below upper bound");
  return unary(
    a, "clamp", [lo, hi](double x) { return std::clamp(x, lo, hi); },
    [lo, hi](double x, double) { return x > lo && x < hi ? 1.0 : 0.0; });
}

Var square(Var a)
{
  return unary(
    a, "square", [](double x) { return x * x; }, [](double x, double) { return 2.0 * x; });
}

Var sum(Var a)
{
  double total = 0.0;
  for (double v : a.value().data()) total += v;
  return graph_of(a).record(
    Tensor::scalar(total), {a.id()},
    [ia = a.id()](Graph & g, std::size_t self) {
      const double gv = (*g.grad(self))[0];
      for (auto & v : g.grad_buffer(ia).data()) v += gv;
    },
    "sum");
}

Var mean(Var a)
{
  const auto n = static_cast<double>(a.value().size());
  if (n == 0) throw DimensionError("mean of empty tensor");
  return scale(sum(a), 1.0 / n);
}

Var reshape(Var a, Shape shape)
{
  Tensor out = a.value().reshaped(std::move(shape));
  return graph_of(a).record(
    std::move(out), {a.id()},
    [ia = a.id()](Graph & g, std::size_t self) {
      const Tensor & G = *g.grad(self);
      auto & ga = g.grad_buffer(ia);
      for (std::size_t i = 0; i < G.size(); ++i) ga[i] += G[i];
    },
    "reshape");
}

Var concat_cols(std::span<const Var> parts)
{
  if (parts.empty()) throw DimensionError("concat_cols of nothing");
  auto & g = graph_of(parts[0]);
  const std::size_t n = parts[0].value().rows();
  std::vector<std::size_t> widths;
  std::vector<std::size_t> ids;
  std::size_t total = 0;
  for (const auto & p : parts) {
    same_graph(parts[0], p);
    if (p.value().rows() != n) throw DimensionError("concat_cols: row counts differ");
    widths.push_back(p.value().cols());
    ids.push_back(p.id());
    total += p.value().cols();
  }
  Tensor out({n, total});
  std::size_t offset = 0;
  for (std::size_t q = 0; q < parts.size(); ++q) {
    const auto & P = parts[q].value();
    for (std::size_t i = 0; i < n; ++i) {
      std::copy_n(&P[i * widths[q]], widths[q], &out[i * total + offset]);
    }
    offset += widths[q];
  }
  return g.record(
    std::move(out), ids,
    [ids, widths, n, total](Graph & g, std::size_t self) {
      const Tensor & G = *g.grad(self);
      std::size_t offset = 0;
      for (std::size_t q = 0; q < ids.size(); ++q) {
        if (g.requires_grad(ids[q])) {
          auto & gp = g.grad_buffer(ids[q]);
          for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < widths[q]; ++j) gp[i * widths[q] + j] += G[i * total + offset + j];
          }
        }
        offset += widths[q];
      }
    },
    "concat_cols");
}

Var concat_rows(std::span<const Var> parts)
{
  if (parts.empty()) throw DimensionError("concat_rows of nothing");
  auto & g = graph_of(parts[0]);
  const std::size_t m = parts[0].value().cols();
  std::vector<std::size_t> ids;
  std::vector<std::size_t> sizes;
  std::vector<double> data;
  std::size_t rows = 0;
  for (const auto & p : parts) {
    same_graph(parts[0], p);
    if (p.value().cols() != m) throw DimensionError("concat_rows: column counts differ");
    ids.push_back(p.id());
    sizes.push_back(p.value().size());
    rows += p.value().rows();
    data.insert(data.end(), p.value().storage().begin(), p.value().storage().end());
  }
  return g.record(
    Tensor({rows, m}, std::move(data)), ids,
    [ids, sizes](Graph & g, std::size_t self) {
      const Tensor & G = *g.grad(self);
      std::size_t offset = 0;
      for (std::size_t q = 0; q < ids.size(); ++q) {
        if (g.requires_grad(ids[q])) {
          auto & gp = g.grad_buffer(ids[q]);
          for (std::size_t i = 0; i < sizes[q]; ++i) gp[i] += G[offset + i];
        }
        offset += sizes[q];
      }
    },
    "concat_rows");
}

Var slice_cols(Var a, std::size_t begin, std::size_t count)
{
  const auto & A = a.value();
  require_rank(A, 2, "slice_cols");
  if (begin + count > A.cols()) throw DimensionError("slice_cols: range exceeds column count");
  std::vector<std::size_t> cols(count);
  for (std::size_t j = 0; j < count; ++j) cols[j] = begin + j;
  return select_cols(a, cols);
}

Var select_cols(Var a, std::span<const std::size_t> columns)
{
  const auto & A = a.value();
  require_rank(A, 2, "select_cols");
  const std::size_t n = A.rows(), m = A.cols(), w = columns.size();
  for (auto c : columns) {
    if (c >= m) throw DimensionError("select_cols: column index out of range");
  }
  Tensor out({n, w});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < w; ++j) out[i * w + j] = A[i * m + columns[j]];
  }
  std::vector<std::size_t> cols(columns.begin(), columns.end());
  return graph_of(a).record(
    std::move(out), {a.id()},
    [ia = a.id(), cols = std::move(cols), n, m](Graph & g, std::size_t self) {
      const Tensor & G = *g.grad(self);
      auto & ga = g.grad_buffer(ia);
      const std::size_t w = cols.size();
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < w; ++j) ga[i * m + cols[j]] += G[i * w + j];
      }
    },
    "select_cols");
}

Var gather_rows(Var a, std::span<const std::size_t> rows)
{
  const auto & A = a.value();
  require_rank(A, 2, "gather_rows");
  const std::size_t n = A.rows(), m = A.cols();
  Tensor out({rows.size(), m});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= n) throw DimensionError("gather_rows: row index out of range");
    std::copy_n(&A[rows[r] * m], m, &out[r * m]);
  }
  std::vector<std::size_t> idx(rows.begin(), rows.end());
  return graph_of(a).record(
    std::move(out), {a.id()},
    [ia = a.id(), idx = std::move(idx), m](Graph & g, std::size_t self) {
      const Tensor & G = *g.grad(self);
      auto & ga = g.grad_buffer(ia);
      for (std::size_t r = 0; r < idx.size(); ++r) {
        for (std::size_t j = 0; j < m; ++j) ga[idx[r] * m + j] += G[r * m + j];
      }
    },
    "gather_rows");
}

Var masked_softmax_rows(Var logits, std::span<const char> mask)
{
  const auto & L = logits.value();
  require_rank(L, 2, "masked_softmax_rows");
  const std::size_t n = L.rows(), m = L.cols();
  if (!mask.empty() && mask.size() != n * m) throw DimensionError("masked_softmax_rows: mask size");
  Tensor out({n, m});
  for (std::size_t i = 0; i < n; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) {
      if (mask.empty() || mask[i * m + j]) mx = std::max(mx, L[i * m + j]);
    }
    if (!std::isfinite(mx)) throw DegenerateInputError("softmax row " + std::to_string(i) + " is fully masked");
    double z = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (mask.empty() || mask[i * m + j]) {
        out[i * m + j] = std::exp(L[i * m + j] - mx);
        z += out[i * m + j];
      }
    }
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] /= z;
  }
  return graph_of(logits).record(
    std::move(out), {logits.id()},
    [ia = logits.id(), n, m](Graph & g, std::size_t self) {
      const Tensor & G = *g.grad(self);
      const Tensor & Y = g.value(self);
      auto & ga = g.grad_buffer(ia);
      for (std::size_t i = 0; i < n; ++i) {
        double dot = 0.0;
        for (std::size_t j = 0; j < m; ++j) dot += G[i * m + j] * Y[i * m + j];
        for (std::size_t j = 0; j < m; ++j) ga[i * m + j] += Y[i * m + j] * (G[i * m + j] - dot);
      }
    },
    "masked_softmax_rows");
}

Var logsumexp_rows(Var a)
{
  const auto & A = a.value();
  require_rank(A, 2, "logsumexp_rows");
  const std::size_t n = A.rows(), m = A.cols();
  Tensor out({n, 1});
  for (std::size_t i = 0; i < n; ++i) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < m; ++j) mx = std::max(mx, A[i * m + j]);
    double z = 0.0;
    for (std::size_t j = 0; j < m; ++j) z += std::exp(A[i * m + j] - mx);
    out[i] = mx + std::log(z);
  }
  return graph_of(a).record(
    std::move(out), {a.id()},
    [ia = a.id(), n, m](Graph & g, std::size_t self) {
      const Tensor & G = *g.grad(self);
      const Tensor & Y = g.value(self);
      const Tensor & A = g.value(ia);
      auto & ga = g.grad_buffer(ia);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) ga[i * m + j] += G[i] * std::exp(A[i * m + j] - Y[i]);
      }
    },
    "logsumexp_rows");
}

Var layer_norm_rows(Var a, Var gain, Var bias, double eps)
{
  same_graph(a, gain);
  same_graph(a, bias);
  const auto & A = a.value();
  require_rank(A, 2, "layer_norm_rows");
  const std::size_t n = A.rows(), m = A.cols();
  if (gain.value().size() != m || bias.value().size() != m) {
    throw DimensionError("layer_norm_rows: gain/bias width mismatch");
  }
  Tensor normalized({n, m});
  std::vector<double> inv_std(n);
  for (std::size_t i = 0; i < n; ++i) {
    double mu = 0.0;
    for (std::size_t j = 0; j < m; ++j) mu += A[i * m + j];
    mu /= static_cast<double>(m);
    double var = 0.0;
    for (std::size_t j = 0; j < m; ++j) var += (A[i * m + j] - mu) * (A[i * m + j] - mu);
    var /= static_cast<double>(m);
    inv_std[i] = 1.0 / std::sqrt(var + eps);
    for (std::size_t j = 0; j < m; ++j) normalized[i * m + j] = (A[i * m + j] - mu) * inv_std[i];
  }
  const auto & Gm = gain.value();
  const auto & Bs = bias.value();
  Tensor out({n, m});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) out[i * m + j] = normalized[i * m + j] * Gm[j] + Bs[j];
  }
  return graph_of(a).record(
    std::move(out), {a.id(), gain.id(), bias.id()},
    [ia = a.id(), ig = gain.id(), ib = bias.id(), n, m, xhat = std::move(normalized),
     inv_std = std::move(inv_std)](Graph & g, std::size_t self) {
      const Tensor & G = *g.grad(self);
      const Tensor & Gm = g.value(ig);
      if (g.requires_grad(ig)) {
        auto & gg = g.grad_buffer(ig);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < m; ++j) gg[j] += G[i * m + j] * xhat[i * m + j];
        }
      }
      if (g.requires_grad(ib)) {
        auto & gb = g.grad_buffer(ib);
        for (std::size_t i = 0; i < n; ++i) {
          for (std::size_t j = 0; j < m; ++j) gb[j] += G[i * m + j];
        }
      }
      if (g.requires_grad(ia)) {
        auto & ga = g.grad_buffer(ia);
        const auto md = static_cast<double>(m);
        for (std::size_t i = 0; i < n; ++i) {
          double mean_d = 0.0, mean_dx = 0.0;
          for (std::size_t j = 0; j < m; ++j) {
            const double d = G[i * m + j] * Gm[j];
            mean_d += d;
            mean_dx += d * xhat[i * m + j];
          }
          mean_d /= md;
          mean_dx /= md;
          for (std::size_t j = 0; j < m; ++j) {
            const double d = G[i * m + j] * Gm[j];
            ga[i * m + j] += inv_std[i] * (d - mean_d - xhat[i * m + j] * mean_dx);
          }
        }
      }
    },
    "layer_norm_rows");
}

Var max_pool(Var x, std::span<const char> mask)
{
  const auto & X = x.value();
  require_rank(X, 3, "max_pool");
  const std::size_t n = X.dim(0), p = X.dim(1), d = X.dim(2);
  if (mask.size() != n * p) throw DimensionError("max_pool: mask must be N x P");
  Tensor out({n, d});
  std::vector<std::size_t> argmax(n * d, 0);
  for (std::size_t i = 0; i < n; ++i) {
    bool any = false;
    for (std::size_t q = 0; q < p; ++q) {
      if (!mask[i * p + q]) continue;
      for (std::size_t c = 0; c < d; ++c) {
        const double v = X[(i * p + q) * d + c];
        if (!any || v > out[i * d + c]) {
          out[i * d + c] = v;
          argmax[i * d + c] = q;
        }
      }
      any = true;
    }
    if (!any) throw DegenerateInputError("max_pool: polyline " + std::to_string(i) + " has no valid element");
  }
  return graph_of(x).record(
    std::move(out), {x.id()},
    [ix = x.id(), argmax = std::move(argmax), n, p, d](Graph & g, std::size_t self) {
      const Tensor & G = *g.grad(self);
      auto & gx = g.grad_buffer(ix);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t c = 0; c < d; ++c) gx[(i * p + argmax[i * d + c]) * d + c] += G[i * d + c];
      }
    },
    "max_pool");
}

Var sinusoidal_pe(Var positions, std::size_t dim, double base)
{
  const auto & P = positions.value();
  require_rank(P, 2, "sinusoidal_pe");
  const std::size_t n = P.rows(), c = P.cols();
  if (dim == 0 || dim % 2 != 0) throw ConfigError("sinusoidal_pe: width must be even, got " + std::to_string(dim));
  if (c == 0 || dim % c != 0 || (dim / c) % 2 != 0) {
    throw ConfigError(
      "sinusoidal_pe: width " + std::to_string(dim) + " cannot be split into even blocks for " +
      std::to_string(c) + " coordinates");
  }
  const std::size_t per = dim / c;
  std::vector<double> freq(per / 2);
  for (std::size_t f = 0; f < freq.size(); ++f) {
    freq[f] = std::pow(base, -2.0 * static_cast<double>(f) / static_cast<double>(per));
  }
  Tensor out({n, dim});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < c; ++a) {
      const double x = P[i * c + a];
      for (std::size_t f = 0; f < freq.size(); ++f) {
        out[i * dim + a * per + 2 * f] = std::sin(freq[f] * x);
        out[i * dim + a * per + 2 * f + 1] = std::cos(freq[f] * x);
      }
    }
  }
  return graph_of(positions).record(
    std::move(out), {positions.id()},
    [ip = positions.id(), freq = std::move(freq), n, c, dim, per](Graph & g, std::size_t self) {
      const Tensor & G = *g.grad(self);
      const Tensor & Y = g.value(self);
      auto & gp = g.grad_buffer(ip);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t a = 0; a < c; ++a) {
          double acc = 0.0;
          for (std::size_t f = 0; f < freq.size(); ++f) {
            const std::size_t s = i * dim + a * per + 2 * f;
            // d sin = w cos, d cos = -w sin
            acc += freq[f] * (G[s] * Y[s + 1] - G[s + 1] * Y[s]);
          }
          gp[i * c + a] += acc;
        }
      }
    },
    "sinusoidal_pe");
}

}  // namespace mtlb
