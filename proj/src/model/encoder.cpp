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

#include "mtlb/model/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mtlb/core/errors.hpp"

namespace mtlb
{

PolylineEncoder PolylineEncoder::create(const ParamScope & scope, std::size_t channels, std::size_t width)
{
  return PolylineEncoder{Mlp::create(scope.sub("mlp"), MlpSpec{{channels, width, width}})};
}

Var PolylineEncoder::forward(Graph & g, const ParameterStore & store, const PolylineBatch & batch) const
{
  return forward(g, store, batch.data, batch.mask);
}

Var PolylineEncoder::forward(
  Graph & g, const ParameterStore & store, const Tensor & points, std::span<const char> mask) const
{
  if (points.rank() != 3) throw DimensionError("polyline encoder expects [N x P x C] input");
  const std::size_t n = points.dim(0), p = points.dim(1), c = points.dim(2);
  if (mask.size() != n * p) throw DimensionError("polyline encoder: mask size does not match N x P");
  const Var flat = g.constant(points.reshaped({n * p, c}));
  const Var feat = mlp.forward(g, store, flat);
  const std::size_t d = feat.value().cols();
  return max_pool(reshape(feat, {n, p, d}), mask);
}

SceneTokens encode_polylines(
  Graph & g, const ParameterStore & store, const PolylineEncoder & agent_encoder, const PolylineEncoder & map_encoder,
  const VectorizedScene & scene)
{
  if (scene.agents.count() == 0) throw InputError("encode_polylines: no agent polylines");
  SceneTokens t;
  t.num_agents = scene.agents.count();
  t.num_map = scene.map.count();
  std::vector<Var> parts{agent_encoder.forward(g, store, scene.agents)};
  if (t.num_map > 0) parts.push_back(map_encoder.forward(g, store, scene.map));
  t.features = parts.size() == 1 ? parts[0] : concat_rows(parts);
  t.positions = scene.agent_positions;
  t.positions.insert(t.positions.end(), scene.map_positions.begin(), scene.map_positions.end());
  t.kinds.assign(t.num_agents, TokenKind::Agent);
  t.kinds.resize(t.count(), TokenKind::Map);
  return t;
}

std::vector<std::vector<std::size_t>> knn_indices(const std::vector<Vec2> & positions, std::size_t k)
{
  if (k == 0) throw ConfigError("knn: neighbor count must be positive");
  const std::size_t n = positions.size();
  const std::size_t kk = std::min(k, n);
  std::vector<std::vector<std::size_t>> out(n);
  std::vector<std::size_t> order(n);
  std::vector<double> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double dx = positions[j][0] - positions[i][0];
      const double dy = positions[j][1] - positions[i][1];
      dist[j] = dx * dx + dy * dy;
    }
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
    out[i].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(kk));
  }
  return out;
}

std::vector<char> knn_mask(const std::vector<Vec2> & positions, std::size_t k)
{
  const std::size_t n = positions.size();
  std::vector<char> mask(n * n, 0);
  const auto nn = knn_indices(positions, k);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j : nn[i]) mask[i * n + j] = 1;
  }
  return mask;
}

EncoderLayer EncoderLayer::create(const ParamScope & scope, const AttentionSpec & spec)
{
  spec.validate();
  const std::size_t d = spec.model_dim;
  EncoderLayer l;
  l.attention = MultiHeadAttention::create(scope.sub("attn"), spec, d, d, d);
  l.norm1 = LayerNorm::create(scope.sub("norm1"), d);
  l.feed_forward = Mlp::create(scope.sub("ffn"), MlpSpec{{d, 2 * d, d}});
  l.norm2 = LayerNorm::create(scope.sub("norm2"), d);
  return l;
}

Var EncoderLayer::forward(
  Graph & g, const ParameterStore & store, Var x, Var pos_encoding, std::span<const char> mask) const
{
  const Var qk = add(x, pos_encoding);
  const Var attended = mhsa(g, store, attention, qk, qk, x, mask);
  const Var h = norm1.forward(g, store, add(x, attended));
  return norm2.forward(g, store, add(h, feed_forward.forward(g, store, h)));
}

Var token_position_encoding(Graph & g, const std::vector<Vec2> & positions, std::size_t dim, double unit_length)
{
  Tensor p({positions.size(), 2});
  for (std::size_t i = 0; i < positions.size(); ++i) {
    p.at(i, 0) = positions[i][0] / unit_length;
    p.at(i, 1) = positions[i][1] / unit_length;
  }
  return sinusoidal_pe(g.constant(std::move(p)), dim);
}

namespace
{

SceneTokens run_layers(
  Graph & g, const ParameterStore & store, std::span<const EncoderLayer> layers, const SceneTokens & tokens,
  std::span<const char> mask, double unit_length)
{
  SceneTokens out = tokens;
  if (layers.empty()) return out;
  const std::size_t d = tokens.features.value().cols();
  const Var pe = token_position_encoding(g, tokens.positions, d, unit_length);
  for (const auto & layer : layers) out.features = layer.forward(g, store, out.features, pe, mask);
  return out;
}

}  // namespace

SceneTokens local_self_attention(
  Graph & g, const ParameterStore & store, std::span<const EncoderLayer> layers, const SceneTokens & tokens,
  std::size_t k, double unit_length)
{
  const auto mask = knn_mask(tokens.positions, k);
  return run_layers(g, store, layers, tokens, mask, unit_length);
}

SceneTokens dense_self_attention(
  Graph & g, const ParameterStore & store, std::span<const EncoderLayer> layers, const SceneTokens & tokens,
  double unit_length)
{
  return run_layers(g, store, layers, tokens, {}, unit_length);
}

DenseFutureHead DenseFutureHead::create(const ParamScope & scope, std::size_t width, std::size_t future_steps)
{
  DenseFutureHead h;
  h.predictor = Mlp::create(scope.sub("predictor"), MlpSpec{{width, width, future_steps * kFutureChannels}});
  h.future_encoder = PolylineEncoder::create(scope.sub("future_encoder"), kFutureChannels, width);
  h.fuse = Mlp::create(scope.sub("fuse"), MlpSpec{{2 * width, width, width}});
  h.future_steps = future_steps;
  return h;
}

DenseFutureResult dense_future_predict(
  Graph & g, const ParameterStore & store, const DenseFutureHead & head, const SceneTokens & tokens)
{
  const std::size_t na = tokens.num_agents, nm = tokens.num_map, T = head.future_steps;
  std::vector<std::size_t> agent_rows(na), map_rows(nm);
  std::iota(agent_rows.begin(), agent_rows.end(), 0);
  std::iota(map_rows.begin(), map_rows.end(), na);
  const Var agents = gather_rows(tokens.features, agent_rows);
  const Var futures = head.predictor.forward(g, store, agents);
  const std::size_t d = agents.value().cols();

  // Re-encode each predicted future as a T-point polyline.
  const Var points = reshape(futures, {na * T, kFutureChannels});
  const Var feat = head.future_encoder.mlp.forward(g, store, points);
  const std::vector<char> all_valid(na * T, 1);
  const Var pooled = max_pool(reshape(feat, {na, T, d}), all_valid);
  const Var fused = head.fuse.forward(g, store, concat_cols(std::vector<Var>{agents, pooled}));

  DenseFutureResult r;
  r.futures = futures;
  r.tokens = tokens;
  if (nm > 0) {
    r.tokens.features = concat_rows(std::vector<Var>{fused, gather_rows(tokens.features, map_rows)});
  } else {
    r.tokens.features = fused;
  }
  return r;
}

}  // namespace mtlb
