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

#ifndef MTLB__CORE__NN_HPP_
#define MTLB__CORE__NN_HPP_

#include <cstddef>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "mtlb/core/autodiff.hpp"
#include "mtlb/core/parameter_store.hpp"

namespace mtlb
{

/// Layer widths including the input width: {in, hidden..., out}.
/// ReLU between layers, identity on the final one.
struct MlpSpec
{
  std::vector<std::size_t> widths;

  void validate() const;
  std::size_t in() const { return widths.front(); }
  std::size_t out() const { return widths.back(); }
};

struct AttentionSpec
{
  std::size_t model_dim{0};
  std::size_t heads{1};

  void validate() const;
  std::size_t head_dim() const { return model_dim / heads; }
};

/// Everything needed to register a module's tensors.
struct ParamScope
{
  ParameterStore * store;
  std::string prefix;
  ParamGroup group;
  std::mt19937_64 * rng;

  ParamScope sub(const std::string & name) const { return {store, prefix + name + ".", group, rng}; }
};

struct Linear
{
  ParamId weight;  // [in x out]
  ParamId bias;    // [out]

  static Linear create(const ParamScope & scope, std::size_t in, std::size_t out);
  Var forward(Graph & g, const ParameterStore & store, Var x) const;
};

struct Mlp
{
  MlpSpec spec;
  std::vector<Linear> layers;

  static Mlp create(const ParamScope & scope, MlpSpec spec);
  Var forward(Graph & g, const ParameterStore & store, Var x) const;
};

/// Free-function form of Mlp::forward over an explicit spec + layer list.
Var mlp_forward(Graph & g, const ParameterStore & store, Var x, const MlpSpec & spec, std::span<const Linear> layers);

struct LayerNorm
{
  ParamId gain;
  ParamId bias;

  static LayerNorm create(const ParamScope & scope, std::size_t dim);
  Var forward(Graph & g, const ParameterStore & store, Var x) const;
};

/**
 * @brief Multi-head scaled dot-product attention with separate input widths.
 *
 * Projects query/key/value to the model width, splits into heads, applies
 * softmax(Q K^T / sqrt(D/H)) V per head and an output projection. The same
 * kernel serves self- and cross-attention. An optional row-major mask
 * (queries x keys) restricts the admissible keys of each query.
 */
struct MultiHeadAttention
{
  AttentionSpec spec;
  Linear query;
  Linear key;
  Linear value;
  Linear output;

  static MultiHeadAttention create(
    const ParamScope & scope, AttentionSpec spec, std::size_t query_dim, std::size_t key_dim,
    std::size_t value_dim);

  /// `weights_out`, when given, receives one [Nq x Nk] attention matrix per head.
  Var forward(
    Graph & g, const ParameterStore & store, Var q, Var k, Var v, std::span<const char> mask = {},
    std::vector<Tensor> * weights_out = nullptr) const;
};

/// Self-attention entry point: query, key and value derive from one token set.
Var mhsa(
  Graph & g, const ParameterStore & store, const MultiHeadAttention & attn, Var q, Var k, Var v,
  std::span<const char> mask = {}, std::vector<Tensor> * weights_out = nullptr);

/// Cross-attention entry point: queries come from a different token set than keys/values.
Var mhca(
  Graph & g, const ParameterStore & store, const MultiHeadAttention & attn, Var q, Var k, Var v,
  std::span<const char> mask = {}, std::vector<Tensor> * weights_out = nullptr);

struct KMeansResult
{
  Tensor centers;                // [k x 2]
  std::vector<double> inertia;   // per Lloyd iteration, non-increasing
  std::vector<std::size_t> assignment;
};

/// Lloyd's algorithm with seeded k-means++ initialization on [M x 2] points.
KMeansResult kmeans(const Tensor & points, std::size_t k, std::uint64_t seed, std::size_t max_iters = 100);

/// Sum of squared distances from every point to its nearest center.
double kmeans_inertia(const Tensor & points, const Tensor & centers);

}  // namespace mtlb

#endif  // MTLB__CORE__NN_HPP_
