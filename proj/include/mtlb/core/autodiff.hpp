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

#ifndef MTLB__CORE__AUTODIFF_HPP_
#define MTLB__CORE__AUTODIFF_HPP_

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "mtlb/core/parameter_store.hpp"
#include "mtlb/core/tensor.hpp"

namespace mtlb
{

class Graph;

/// Handle to a node of a Graph. Cheap to copy; only valid while its graph lives.
class Var
{
public:
  Var() = default;
  Var(Graph * graph, std::size_t id) : graph_(graph), id_(id) {}

  const Tensor & value() const;
  const Shape & shape() const { return value().shape(); }
  std::size_t id() const { return id_; }
  Graph * graph() const { return graph_; }
  bool valid() const { return graph_ != nullptr; }

private:
  Graph * graph_{nullptr};
  std::size_t id_{0};
};

/**
 * @brief Reverse-mode tape.
 *
 * Nodes are appended in forward order and the backward pass walks them in
 * exact reverse order. A node only keeps its backward closure when at least
 * one of its inputs needs a gradient, so frozen parameters and constants
 * never receive one.
 */
class Graph
{
public:
  using BackwardFn = std::function<void(Graph &, std::size_t)>;

  Graph() = default;
  Graph(const Graph &) = delete;
  Graph & operator=(const Graph &) = delete;
  Graph(Graph &&) = default;
  Graph & operator=(Graph &&) = default;

  Var constant(Tensor value);
  /// Leaf that receives a gradient (used for input sensitivities and tests).
  Var variable(Tensor value);
  /// Inference mode: parameters bound afterwards never require a gradient.
  void set_grad_enabled(bool enabled) { grad_enabled_ = enabled; }
  bool grad_enabled() const { return grad_enabled_; }

  /// Leaf bound to a store entry; requires a gradient iff the entry is trainable.
  Var parameter(const ParameterStore & store, ParamId id);

  /// Appends an op node. `fn` reads this node's gradient and accumulates into inputs.
  Var record(Tensor value, std::vector<std::size_t> inputs, BackwardFn fn, const char * op);

  void backward(Var loss);
  /// Runs backward and adds every trainable parameter gradient into `store`.
  void backward(Var loss, ParameterStore & store);

  std::size_t size() const { return nodes_.size(); }
  const Tensor & value(std::size_t id) const { return nodes_[id].value; }
  const Tensor * grad(std::size_t id) const;
  const Tensor * grad(Var v) const { return grad(v.id()); }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }
  const char * op_name(std::size_t id) const { return nodes_[id].op; }
  const std::vector<std::size_t> & inputs(std::size_t id) const { return nodes_[id].inputs; }

  /// Gradient buffer of `id`, zero-initialized on first use.
  Tensor & grad_buffer(std::size_t id);

private:
  struct Node
  {
    Tensor value;
    std::optional<Tensor> grad;
    std::vector<std::size_t> inputs;
    BackwardFn backward;
    std::optional<ParamId> param;
    const char * op{""};
    bool requires_grad{false};
  };

  std::vector<Node> nodes_;
  bool backward_done_{false};
  bool grad_enabled_{true};
};

// ---------------------------------------------------------------------------
// Differentiable operations. All inputs must belong to the same graph.

Var matmul(Var a, Var b);     // [n x k] . [k x m]
Var matmul_nt(Var a, Var b);  // [n x k] . [m x k]^T
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
Var add_rowvec(Var a, Var row);  // a[n x m] + row[m], broadcast over rows
Var scale(Var a, double s);
Var add_scalar(Var a, double s);
Var relu(Var a);
Var exp(Var a);
Var log(Var a);
Var tanh(Var a);
/// Gradient passes only strictly inside (lo, hi).
Var clamp(Var a, double lo, double hi);
Var square(Var a);
Var sum(Var a);
Var mean(Var a);
Var reshape(Var a, Shape shape);

Var concat_cols(std::span<const Var> parts);
Var concat_rows(std::span<const Var> parts);
Var slice_cols(Var a, std::size_t begin, std::size_t count);
Var select_cols(Var a, std::span<const std::size_t> columns);
Var gather_rows(Var a, std::span<const std::size_t> rows);

/// Row-wise softmax over a 2-D tensor. `mask` (row-major, same size) marks
/// admissible entries; masked entries get weight exactly 0.
Var masked_softmax_rows(Var logits, std::span<const char> mask = {});
Var logsumexp_rows(Var a);  // [n x m] -> [n x 1]
Var layer_norm_rows(Var a, Var gain, Var bias, double eps = 1e-5);

/// Masked max over axis 1 of [N x P x D]. Each row needs one valid entry.
Var max_pool(Var x, std::span<const char> mask);

/// Sinusoidal position encoding of [N x c] positions (c = 1 or 2) into
/// [N x dim]; each coordinate uses dim/c channels of interleaved sin/cos.
Var sinusoidal_pe(Var positions, std::size_t dim, double base = 10000.0);

}  // namespace mtlb

#endif  // MTLB__CORE__AUTODIFF_HPP_
