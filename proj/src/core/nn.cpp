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

#include "mtlb/core/nn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mtlb/core/errors.hpp"

namespace mtlb
{

void MlpSpec::validate() const
{
  if (widths.size() < 2) throw ConfigError("MLP needs an input width and at least one layer");
  for (auto w : widths) {
    if (w == 0) throw ConfigError("MLP widths must be positive");
  }
}

void AttentionSpec::validate() const
{
  if (model_dim == 0 || heads == 0) throw ConfigError("attention dims must be positive");
  if (model_dim % heads != 0) {
    throw ConfigError(
      "attention model dim " + std::to_string(model_dim) + " not divisible by " + std::to_string(heads) +
      " heads");
  }
}

Linear Linear::create(const ParamScope & scope, std::size_t in, std::size_t out)
{
  Linear l;
  l.weight = scope.store->add(scope.prefix + "weight", xavier_uniform(in, out, *scope.rng), scope.group);
  l.bias = scope.store->add(scope.prefix + "bias", zeros({out}), scope.group);
  return l;
}

Var Linear::forward(Graph & g, const ParameterStore & store, Var x) const
{
  return add_rowvec(matmul(x, g.parameter(store, weight)), g.parameter(store, bias));
}

Mlp Mlp::create(const ParamScope & scope, MlpSpec spec)
{
  spec.validate();
  Mlp mlp;
  for (std::size_t i = 0; i + 1 < spec.widths.size(); ++i) {
    mlp.layers.push_back(
      Linear::create(scope.sub("layer" + std::to_string(i)), spec.widths[i], spec.widths[i + 1]));
  }
  mlp.spec = std::move(spec);
  return mlp;
}

Var Mlp::forward(Graph & g, const ParameterStore & store, Var x) const
{
  return mlp_forward(g, store, x, spec, layers);
}

Var mlp_forward(Graph & g, const ParameterStore & store, Var x, const MlpSpec & spec, std::span<const Linear> layers)
{
  spec.validate();
  if (layers.size() + 1 != spec.widths.size()) throw DimensionError("MLP layer list does not match spec");
  if (x.value().rank() != 2 || x.value().cols() != spec.in()) {
    throw DimensionError(
      "MLP input " + shape_to_string(x.shape()) + " does not match input width " + std::to_string(spec.in()));
  }
  for (std::size_t i = 0; i < layers.size(); ++i) {
    const auto & w = store.value(layers[i].weight);
    if (w.dim(0) != spec.widths[i] || w.dim(1) != spec.widths[i + 1]) {
      throw DimensionError("MLP layer " + std::to_string(i) + " weights do not match spec widths");
    }
    x = layers[i].forward(g, store, x);
    if (i + 1 < layers.size()) x = relu(x);
  }
  return x;
}

LayerNorm LayerNorm::create(const ParamScope & scope, std::size_t dim)
{
  return LayerNorm{
    scope.store->add(scope.prefix + "gain", ones({dim}), scope.group),
    scope.store->add(scope.prefix + "bias", zeros({dim}), scope.group)};
}

Var LayerNorm::forward(Graph & g, const ParameterStore & store, Var x) const
{
  return layer_norm_rows(x, g.parameter(store, gain), g.parameter(store, bias));
}

MultiHeadAttention MultiHeadAttention::create(
  const ParamScope & scope, AttentionSpec spec, std::size_t query_dim, std::size_t key_dim, std::size_t value_dim)
{
  spec.validate();
  MultiHeadAttention a;
  a.spec = spec;
  a.query = Linear::create(scope.sub("q"), query_dim, spec.model_dim);
  a.key = Linear::create(scope.sub("k"), key_dim, spec.model_dim);
  a.value = Linear::create(scope.sub("v"), value_dim, spec.model_dim);
  a.output = Linear::create(scope.sub("o"), spec.model_dim, spec.model_dim);
  return a;
}

Var MultiHeadAttention::forward(
  Graph & g, const ParameterStore & store, Var q, Var k, Var v, std::span<const char> mask,
  std::vector<Tensor> * weights_out) const
{
  spec.validate();
  if (k.value().rows() != v.value().rows()) throw DimensionError("attention: keys and values differ in token count");
  const Var Q = query.forward(g, store, q);
  const Var K = key.forward(g, store, k);
  const Var V = value.forward(g, store, v);
  const std::size_t hd = spec.head_dim();
  const double scale_factor = 1.0 / std::sqrt(static_cast<double>(hd));
  std::vector<Var> heads;
  heads.reserve(spec.heads);
  for (std::size_t h = 0; h < spec.heads; ++h) {
    const Var qh = slice_cols(Q, h * hd, hd);
    const Var kh = slice_cols(K, h * hd, hd);
    const Var vh = slice_cols(V, h * hd, hd);
    const Var weights = masked_softmax_rows(scale(matmul_nt(qh, kh), scale_factor), mask);
    if (weights_out != nullptr) weights_out->push_back(weights.value());
    heads.push_back(matmul(weights, vh));
  }
  const Var merged = heads.size() == 1 ? heads.front() : concat_cols(heads);
  return output.forward(g, store, merged);
}

Var mhsa(
  Graph & g, const ParameterStore & store, const MultiHeadAttention & attn, Var q, Var k, Var v,
  std::span<const char> mask, std::vector<Tensor> * weights_out)
{
  return attn.forward(g, store, q, k, v, mask, weights_out);
}

Var mhca(
  Graph & g, const ParameterStore & store, const MultiHeadAttention & attn, Var q, Var k, Var v,
  std::span<const char> mask, std::vector<Tensor> * weights_out)
{
  return attn.forward(g, store, q, k, v, mask, weights_out);
}

namespace
{

double sq_dist(const Tensor & points, std::size_t i, const Tensor & centers, std::size_t c)
{
  const double dx = points.at(i, 0) - centers.at(c, 0);
  const double dy = points.at(i, 1) - centers.at(c, 1);
  return dx * dx + dy * dy;
}

// Returns the nearest center, lowest index on ties.
std::size_t nearest(const Tensor & points, std::size_t i, const Tensor & centers, double * dist)
{
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centers.rows(); ++c) {
    const double d = sq_dist(points, i, centers, c);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  if (dist != nullptr) *dist = best_d;
  return best;
}

}  // namespace

double kmeans_inertia(const Tensor & points, const Tensor & centers)
{
  double total = 0.0;
  for (std::size_t i = 0; i < points.rows(); ++i) {
    double d = 0.0;
    nearest(points, i, centers, &d);
    total += d;
  }
  return total;
}

KMeansResult kmeans(const Tensor & points, std::size_t k, std::uint64_t seed, std::size_t max_iters)
{
  if (points.rank() != 2 || points.cols() != 2) throw DimensionError("kmeans expects [M x 2] points");
  const std::size_t m = points.rows();
  if (k == 0) throw ConfigError("kmeans: k must be positive");
  if (m < k) {
    throw ConfigError("kmeans: " + std::to_string(m) + " points cannot form " + std::to_string(k) + " clusters");
  }
  std::mt19937_64 rng(seed);
  Tensor centers({k, 2});

  // k-means++ seeding.
  std::uniform_int_distribution<std::size_t> first(0, m - 1);
  const std::size_t f = first(rng);
  centers.at(0, 0) = points.at(f, 0);
  centers.at(0, 1) = points.at(f, 1);
  std::vector<double> d2(m, std::numeric_limits<double>::infinity());
  for (std::size_t c = 1; c < k; ++c) {
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      d2[i] = std::min(d2[i], sq_dist(points, i, centers, c - 1));
      total += d2[i];
    }
    std::size_t pick = 0;
    if (total > 0.0) {
      std::uniform_real_distribution<double> u(0.0, total);
      double r = u(rng);
      pick = m - 1;
      for (std::size_t i = 0; i < m; ++i) {
        r -= d2[i];
        if (r <= 0.0 && d2[i] > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = first(rng);
    }
    centers.at(c, 0) = points.at(pick, 0);
    centers.at(c, 1) = points.at(pick, 1);
  }

  KMeansResult result;
  result.assignment.assign(m, 0);
  std::vector<std::size_t> previous;
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    std::vector<double> dist(m, 0.0);
    for (std::size_t i = 0; i < m; ++i) result.assignment[i] = nearest(points, i, centers, &dist[i]);
    if (iter > 0 && result.assignment == previous) break;
    previous = result.assignment;

    Tensor sums({k, 2});
    std::vector<std::size_t> counts(k, 0);
    for (std::size_t i = 0; i < m; ++i) {
      const auto c = result.assignment[i];
      sums.at(c, 0) += points.at(i, 0);
      sums.at(c, 1) += points.at(i, 1);
      ++counts[c];
    }
    std::vector<char> taken(m, 0);
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) {
        centers.at(c, 0) = sums.at(c, 0) / static_cast<double>(counts[c]);
        centers.at(c, 1) = sums.at(c, 1) / static_cast<double>(counts[c]);
        continue;
      }
      // Empty cluster: re-seed at the point farthest from its current center.
      std::size_t far = 0;
      double far_d = -1.0;
      for (std::size_t i = 0; i < m; ++i) {
        if (!taken[i] && dist[i] > far_d) {
          far_d = dist[i];
          far = i;
        }
      }
      taken[far] = 1;
      dist[far] = 0.0;
      centers.at(c, 0) = points.at(far, 0);
      centers.at(c, 1) = points.at(far, 1);
    }
    result.inertia.push_back(kmeans_inertia(points, centers));
  }
  result.centers = std::move(centers);
  return result;
}

}  // namespace mtlb
