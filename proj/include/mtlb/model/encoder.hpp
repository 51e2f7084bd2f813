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

#ifndef MTLB__MODEL__ENCODER_HPP_
#define MTLB__MODEL__ENCODER_HPP_

#include <cstddef>
#include <vector>

#include "mtlb/core/autodiff.hpp"
#include "mtlb/core/nn.hpp"
#include "mtlb/scene/vectorize.hpp"

namespace mtlb
{

enum class TokenKind : std::uint8_t { Agent, Map };

/// Encoder tokens F_c: agent rows first, then map rows.
struct SceneTokens
{
  Var features;                 // [(N_a + N_m) x D]
  std::vector<Vec2> positions;  // meters, ego frame
  std::vector<TokenKind> kinds;
  std::size_t num_agents{0};
  std::size_t num_map{0};

  std::size_t count() const { return num_agents + num_map; }
};

/// PointNet-style polyline encoder: pointwise MLP, then masked max-pool over points.
struct PolylineEncoder
{
  Mlp mlp;

  static PolylineEncoder create(const ParamScope & scope, std::size_t channels, std::size_t width);
  /// Throws DegenerateInputError when a polyline has no valid point.
  Var forward(Graph & g, const ParameterStore & store, const PolylineBatch & batch) const;
  Var forward(Graph & g, const ParameterStore & store, const Tensor & points, std::span<const char> mask) const;
};

SceneTokens encode_polylines(
  Graph & g, const ParameterStore & store, const PolylineEncoder & agent_encoder, const PolylineEncoder & map_encoder,
  const VectorizedScene & scene);

/// Indices of the k nearest tokens per token (self included), distance ties broken by index.
std::vector<std::vector<std::size_t>> knn_indices(const std::vector<Vec2> & positions, std::size_t k);
/// Row-major [N x N] admissibility mask built from knn_indices.
std::vector<char> knn_mask(const std::vector<Vec2> & positions, std::size_t k);

/// Self-attention block: Q = K = F + PE(pos), V = F; residual + LayerNorm, FFN, residual + LayerNorm.
struct EncoderLayer
{
  MultiHeadAttention attention;
  LayerNorm norm1;
  Mlp feed_forward;
  LayerNorm norm2;

  static EncoderLayer create(const ParamScope & scope, const AttentionSpec & spec);
  Var forward(Graph & g, const ParameterStore & store, Var x, Var pos_encoding, std::span<const char> mask) const;
};

/// Positions in meters are divided by `unit_length` before the sinusoidal encoding.
Var token_position_encoding(Graph & g, const std::vector<Vec2> & positions, std::size_t dim, double unit_length);

/// Runs `layers` with each token restricted to its k nearest tokens. Throws ConfigError when k is 0.
SceneTokens local_self_attention(
  Graph & g, const ParameterStore & store, std::span<const EncoderLayer> layers, const SceneTokens & tokens,
  std::size_t k, double unit_length);

/// Same layers without any neighbor restriction.
SceneTokens dense_self_attention(
  Graph & g, const ParameterStore & store, std::span<const EncoderLayer> layers, const SceneTokens & tokens,
  double unit_length);

struct DenseFutureHead
{
  Mlp predictor;       // D -> D -> T*4
  PolylineEncoder future_encoder;  // 4 -> D -> D, pooled over T
  Mlp fuse;            // 2D -> D -> D
  std::size_t future_steps{0};

  static DenseFutureHead create(const ParamScope & scope, std::size_t width, std::size_t future_steps);
};

struct DenseFutureResult
{
  Var futures;  // [N_a x T*4], model units; row-major view of N_a x T x 4
  SceneTokens tokens;
};

/// Predicts coarse agent futures, re-encodes them and refreshes the agent tokens. Map rows are copied unchanged.
DenseFutureResult dense_future_predict(
  Graph & g, const ParameterStore & store, const DenseFutureHead & head, const SceneTokens & tokens);

}  // namespace mtlb

#endif  // MTLB__MODEL__ENCODER_HPP_
