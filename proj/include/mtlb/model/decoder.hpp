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

#ifndef MTLB__MODEL__DECODER_HPP_
#define MTLB__MODEL__DECODER_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mtlb/core/autodiff.hpp"
#include "mtlb/core/nn.hpp"
#include "mtlb/model/encoder.hpp"

namespace mtlb
{

/// 𝒦 intention points [K x 2] in meters, ego frame.
struct IntentionSet
{
  Tensor points;

  std::size_t count() const { return points.rank() == 2 ? points.rows() : 0; }
};

/// k-means over focal endpoints [M x 2]. Throws ConfigError when M < k.
IntentionSet fit_intentions(const Tensor & endpoints, std::size_t k, std::uint64_t seed);

/// MLP(PE(points / unit)); used for both the static and the dynamic query with separate MLPs.
Var intention_query(Graph & g, const ParameterStore & store, const Mlp & mlp, Var points_m, double unit_length);
Var static_intention_query(
  Graph & g, const ParameterStore & store, const Mlp & mlp, const IntentionSet & intentions, double unit_length);
Var dynamic_search_query(Graph & g, const ParameterStore & store, const Mlp & mlp, Var endpoints_m, double unit_length);

/// Per mode, the m map tokens nearest to its endpoint (ties by token index). Empty when there are no map tokens.
std::vector<std::vector<std::size_t>> dynamic_map_collect(
  const Tensor & endpoints, const std::vector<Vec2> & map_positions, std::size_t m);

/// Output layout of the prediction head for each mode row.
struct HeadLayout
{
  std::size_t steps{0};

  static constexpr std::size_t kParams = 5;  // mu_x, mu_y, log sigma_x, log sigma_y, atanh rho
  std::size_t width() const { return steps * kParams + 1; }
  std::size_t column(std::size_t t, std::size_t p) const { return t * kParams + p; }
  std::size_t logit_column() const { return steps * kParams; }
};

/// Link-function constants; sigma and rho are clamped as in common MTR training recipes.
struct HeadLinks
{
  double unit_length{10.0};
  double log_sigma_min{-1.6094379124341003};  // sigma >= 0.2 m
  double log_sigma_max{5.0};
  double rho_limit{0.5};
};

struct DecoderLayer
{
  MultiHeadAttention self_attention;
  LayerNorm self_norm;
  MultiHeadAttention agent_attention;  // query [C, Q_S], key [F_a, PE], value F_a
  LayerNorm agent_norm;
  MultiHeadAttention map_attention;    // query [C, Q_S], key [F_m, PE], value F_m
  LayerNorm map_norm;
  Mlp fuse;                            // [C_a, C_m] -> C
  Mlp head;                            // C -> K x (5T + 1)

  static DecoderLayer create(const ParamScope & scope, const AttentionSpec & spec, std::size_t future_steps);
};

struct LayerOutput
{
  Var content;    // C^j [K x D]
  Var raw;        // head output [K x (5T + 1)]
  Var endpoints;  // Y^j_T [K x 2], meters
};

struct DecoderState
{
  std::size_t layer{0};  // number of layers applied
  Var content;           // C^j
  Var endpoints;         // Y^j_T, meters; Y^0_T = intention points
  std::vector<LayerOutput> outputs;
};

DecoderState initial_decoder_state(Graph & g, const IntentionSet & intentions, std::size_t width);

struct DecoderContext
{
  Var intention_query;  // Q_I
  const Mlp * dynamic_mlp{nullptr};
  std::size_t map_collect{16};
  std::size_t max_layers{0};
  HeadLinks links;
  std::size_t future_steps{0};
};

/// One refinement step j-1 -> j. Throws StateError once `max_layers` layers have been applied.
DecoderState decoder_layer(
  Graph & g, const ParameterStore & store, const DecoderLayer & layer, const DecoderState & state,
  const SceneTokens & tokens, const DecoderContext & ctx);

/**
 * @brief Constrained mixture for one decoder layer.
 *
 * Means and sigmas are in meters. Confidences are a softmax over the mode
 * logits and sum to one.
 */
struct PredictionSet
{
  Tensor mean;   // [K x T x 2]
  Tensor sigma;  // [K x T x 2]
  Tensor rho;    // [K x T]
  std::vector<double> confidence;

  std::size_t modes() const { return confidence.size(); }
  std::size_t steps() const { return mean.rank() == 3 ? mean.dim(1) : 0; }
  /// Mode k trajectory [T x 2].
  Tensor trajectory(std::size_t k) const;
  /// Throws NumericError when a structural invariant does not hold.
  void validate() const;
};

/// Applies the link functions to a raw head output [K x (5T + 1)].
PredictionSet gmm_head(const Tensor & raw, std::size_t steps, const HeadLinks & links);

/// P_h(o) = sum_k c_k N(o; mu_kh, Sigma_kh).
double mixture_density(const PredictionSet & pred, std::size_t step, const Vec2 & o);

/// Greedy NMS on endpoints, refilled by confidence when fewer than `target` survive.
PredictionSet select_modes(const PredictionSet & pred, std::size_t target, double nms_radius);
std::vector<std::size_t> select_mode_indices(const PredictionSet & pred, std::size_t target, double nms_radius);

}  // namespace mtlb

#endif  // MTLB__MODEL__DECODER_HPP_
