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

#include "mtlb/model/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "mtlb/core/errors.hpp"

namespace mtlb
{

IntentionSet fit_intentions(const Tensor & endpoints, std::size_t k, std::uint64_t seed)
{
  if (endpoints.rank() != 2 || endpoints.cols() != 2) throw DimensionError("fit_intentions expects [M x 2] endpoints");
  if (endpoints.rows() < k) {
    throw ConfigError(
      "fit_intentions: " + std::to_string(endpoints.rows()) + " endpoints cannot seed " + std::to_string(k) +
      " intentions");
  }
  return IntentionSet{kmeans(endpoints, k, seed).centers};
}

Var intention_query(Graph & g, const ParameterStore & store, const Mlp & mlp, Var points_m, double unit_length)
{
  const std::size_t d = mlp.spec.in();
  return mlp.forward(g, store, sinusoidal_pe(scale(points_m, 1.0 / unit_length), d));
}

Var static_intention_query(
  Graph & g, const ParameterStore & store, const Mlp & mlp, const IntentionSet & intentions, double unit_length)
{
  return intention_query(g, store, mlp, g.constant(intentions.points), unit_length);
}

Var dynamic_search_query(Graph & g, const ParameterStore & store, const Mlp & mlp, Var endpoints_m, double unit_length)
{
  return intention_query(g, store, mlp, endpoints_m, unit_length);
}

std::vector<std::vector<std::size_t>> dynamic_map_collect(
  const Tensor & endpoints, const std::vector<Vec2> & map_positions, std::size_t m)
{
  const std::size_t k = endpoints.rows();
  std::vector<std::vector<std::size_t>> out(k);
  const std::size_t n = map_positions.size();
  if (n == 0 || m == 0) return out;
  const std::size_t take = std::min(m, n);
  std::vector<double> dist(n);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double dx = map_positions[j][0] - endpoints.at(i, 0);
      const double dy = map_positions[j][1] - endpoints.at(i, 1);
      dist[j] = dx * dx + dy * dy;
    }
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return dist[a] < dist[b]; });
    out[i].assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take));
  }
  return out;
}

DecoderLayer DecoderLayer::create(const ParamScope & scope, const AttentionSpec & spec, std::size_t future_steps)
{
  spec.validate();
  const std::size_t d = spec.model_dim;
  DecoderLayer l;
  l.self_attention = MultiHeadAttention::create(scope.sub("self_attn"), spec, d, d, d);
  l.self_norm = LayerNorm::create(scope.sub("self_norm"), d);
  l.agent_attention = MultiHeadAttention::create(scope.sub("agent_attn"), spec, 2 * d, 2 * d, d);
  l.agent_norm = LayerNorm::create(scope.sub("agent_norm"), d);
  l.map_attention = MultiHeadAttention::create(scope.sub("map_attn"), spec, 2 * d, 2 * d, d);
  l.map_norm = LayerNorm::create(scope.sub("map_norm"), d);
  l.fuse = Mlp::create(scope.sub("fuse"), MlpSpec{{2 * d, d, d}});
  l.head = Mlp::create(scope.sub("head"), MlpSpec{{d, d, HeadLayout{future_steps}.width()}});
  return l;
}

DecoderState initial_decoder_state(Graph & g, const IntentionSet & intentions, std::size_t width)
{
  DecoderState s;
  s.content = g.constant(Tensor({intentions.count(), width}));
  s.endpoints = g.constant(intentions.points);
  return s;
}

DecoderState decoder_layer(
  Graph & g, const ParameterStore & store, const DecoderLayer & layer, const DecoderState & state,
  const SceneTokens & tokens, const DecoderContext & ctx)
{
  if (state.layer >= ctx.max_layers) {
    throw StateError("decoder: all " + std::to_string(ctx.max_layers) + " configured layers were already applied");
  }
  if (ctx.dynamic_mlp == nullptr) throw StateError("decoder: missing dynamic query MLP");
  const double unit = ctx.links.unit_length;
  const std::size_t d = state.content.value().cols();
  const std::size_t na = tokens.num_agents, nm = tokens.num_map;

  // (a) query self-attention with the static intention query as positional term.
  const Var q_self = add(state.content, ctx.intention_query);
  const Var c_qc = layer.self_norm.forward(
    g, store, add(q_self, mhsa(g, store, layer.self_attention, q_self, q_self, state.content)));

  // (b) agent cross-attention with the dynamic search query.
  const Var q_search = dynamic_search_query(g, store, *ctx.dynamic_mlp, state.endpoints, unit);
  const Var query = concat_cols(std::vector<Var>{c_qc, q_search});
  const Var pe = token_position_encoding(g, tokens.positions, d, unit);
  std::vector<std::size_t> agent_rows(na), map_rows(nm);
  std::iota(agent_rows.begin(), agent_rows.end(), 0);
  std::iota(map_rows.begin(), map_rows.end(), na);
  const Var f_a = gather_rows(tokens.features, agent_rows);
  const Var k_a = concat_cols(std::vector<Var>{f_a, gather_rows(pe, agent_rows)});
  const Var c_a = layer.agent_norm.forward(g, store, add(c_qc, mhca(g, store, layer.agent_attention, query, k_a, f_a)));

  // (c) map cross-attention over the dynamically collected map tokens.
  Var c_m = c_qc;
  if (nm > 0) {
    std::vector<Vec2> map_pos(tokens.positions.begin() + static_cast<std::ptrdiff_t>(na), tokens.positions.end());
    const auto picked = dynamic_map_collect(state.endpoints.value(), map_pos, ctx.map_collect);
    const std::size_t k = picked.size();
    std::vector<char> mask(k * nm, 0);
    for (std::size_t i = 0; i < k; ++i) {
      for (std::size_t j : picked[i]) mask[i * nm + j] = 1;
    }
    const Var f_m = gather_rows(tokens.features, map_rows);
    const Var k_m = concat_cols(std::vector<Var>{f_m, gather_rows(pe, map_rows)});
    c_m = layer.map_norm.forward(g, store, add(c_qc, mhca(g, store, layer.map_attention, query, k_m, f_m, mask)));
  }

  // (d) fusion and (e) prediction head.
  DecoderState next;
  next.layer = state.layer + 1;
  next.content = layer.fuse.forward(g, store, concat_cols(std::vector<Var>{c_a, c_m}));
  const Var raw = layer.head.forward(g, store, next.content);
  const HeadLayout lay{ctx.future_steps};
  const std::vector<std::size_t> end_cols{lay.column(ctx.future_steps - 1, 0), lay.column(ctx.future_steps - 1, 1)};
  next.endpoints = scale(select_cols(raw, end_cols), unit);
  next.outputs = state.outputs;
  next.outputs.push_back(LayerOutput{next.content, raw, next.endpoints});
  return next;
}

Tensor PredictionSet::trajectory(std::size_t k) const
{
  const std::size_t T = steps();
  Tensor out({T, 2});
  for (std::size_t t = 0; t < T; ++t) {
    out.at(t, 0) = mean.at(k, t, 0);
    out.at(t, 1) = mean.at(k, t, 1);
  }
  return out;
}

void PredictionSet::validate() const
{
  const std::size_t K = modes(), T = steps();
  if (mean.shape() != Shape{K, T, 2} || sigma.shape() != Shape{K, T, 2} || rho.shape() != Shape{K, T}) {
    throw NumericError("prediction set: inconsistent tensor shapes");
  }
  double total = 0.0;
  for (double c : confidence) {
    if (!(c >= 0.0 && c <= 1.0)) throw NumericError("prediction set: confidence outside [0, 1]");
    total += c;
  }
  if (K > 0 && std::abs(total - 1.0) > 1e-9) throw NumericError("prediction set: confidences do not sum to 1");
  for (double s : sigma.data()) {
    if (!(s > 0.0) || !std::isfinite(s)) throw NumericError("prediction set: sigma must be positive and finite");
  }
  for (double r : rho.data()) {
    if (!(r > -1.0 && r < 1.0)) throw NumericError("prediction set: rho outside (-1, 1)");
  }
  if (!mean.all_finite()) throw NumericError("prediction set: non-finite mean");
}

PredictionSet gmm_head(const Tensor & raw, std::size_t steps, const HeadLinks & links)
{
  const HeadLayout lay{steps};
  if (raw.rank() != 2 || raw.cols() != lay.width()) {
    throw DimensionError(
      "gmm_head: expected [K x " + std::to_string(lay.width()) + "] input, got " + shape_to_string(raw.shape()));
  }
  if (!raw.all_finite()) throw NumericError("gmm_head: non-finite head activations");
  const std::size_t K = raw.rows();
  const double log_unit = std::log(links.unit_length);
  PredictionSet p;
  p.mean = Tensor({K, steps, 2});
  p.sigma = Tensor({K, steps, 2});
  p.rho = Tensor({K, steps});
  p.confidence.assign(K, 0.0);
  double max_logit = -1e300;
  for (std::size_t k = 0; k < K; ++k) max_logit = std::max(max_logit, raw.at(k, lay.logit_column()));
  double z = 0.0;
  for (std::size_t k = 0; k < K; ++k) {
    for (std::size_t t = 0; t < steps; ++t) {
      for (std::size_t a = 0; a < 2; ++a) {
        p.mean.at(k, t, a) = links.unit_length * raw.at(k, lay.column(t, a));
        const double ls = std::clamp(raw.at(k, lay.column(t, 2 + a)) + log_unit, links.log_sigma_min, links.log_sigma_max);
        p.sigma.at(k, t, a) = std::exp(ls);
      }
      p.rho.at(k, t) = std::clamp(std::tanh(raw.at(k, lay.column(t, 4))), -links.rho_limit, links.rho_limit);
    }
    p.confidence[k] = std::exp(raw.at(k, lay.logit_column()) - max_logit);
    z += p.confidence[k];
  }
  for (double & c : p.confidence) c /= z;
  return p;
}

double mixture_density(const PredictionSet & pred, std::size_t step, const Vec2 & o)
{
  if (step >= pred.steps()) throw InputError("mixture_density: step out of range");
  double total = 0.0;
  for (std::size_t k = 0; k < pred.modes(); ++k) {
    const double sx = pred.sigma.at(k, step, 0), sy = pred.sigma.at(k, step, 1);
    if (!(sx > 0.0 && sy > 0.0)) throw NumericError("mixture_density: sigma must be positive");
    const double r = pred.rho.at(k, step);
    const double zx = (o[0] - pred.mean.at(k, step, 0)) / sx;
    const double zy = (o[1] - pred.mean.at(k, step, 1)) / sy;
    const double om = 1.0 - r * r;
    const double q = (zx * zx + zy * zy - 2.0 * r * zx * zy) / om;
    total += pred.confidence[k] * std::exp(-0.5 * q) / (2.0 * std::numbers::pi * sx * sy * std::sqrt(om));
  }
  return total;
}

std::vector<std::size_t> select_mode_indices(const PredictionSet & pred, std::size_t target, double nms_radius)
{
  const std::size_t K = pred.modes();
  std::vector<std::size_t> all(K);
  std::iota(all.begin(), all.end(), 0);
  if (K <= target) return all;
  std::vector<std::size_t> order = all;
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return pred.confidence[a] > pred.confidence[b];
  });
  const std::size_t T = pred.steps();
  std::vector<std::size_t> chosen, suppressed;
  for (std::size_t k : order) {
    if (chosen.size() == target) break;
    bool keep = true;
    for (std::size_t c : chosen) {
      const double dx = pred.mean.at(k, T - 1, 0) - pred.mean.at(c, T - 1, 0);
      const double dy = pred.mean.at(k, T - 1, 1) - pred.mean.at(c, T - 1, 1);
      if (std::hypot(dx, dy) < nms_radius) {
        keep = false;
        break;
      }
    }
    (keep ? chosen : suppressed).push_back(k);
  }
  for (std::size_t k : suppressed) {
    if (chosen.size() == target) break;
    chosen.push_back(k);
  }
  return chosen;
}

PredictionSet select_modes(const PredictionSet & pred, std::size_t target, double nms_radius)
{
  const auto idx = select_mode_indices(pred, target, nms_radius);
  const std::size_t T = pred.steps(), n = idx.size();
  PredictionSet out;
  out.mean = Tensor({n, T, 2});
  out.sigma = Tensor({n, T, 2});
  out.rho = Tensor({n, T});
  double z = 0.0;
  for (std::size_t i = 0; i < n; ++i) z += pred.confidence[idx[i]];
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = idx[i];
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t a = 0; a < 2; ++a) {
        out.mean.at(i, t, a) = pred.mean.at(k, t, a);
        out.sigma.at(i, t, a) = pred.sigma.at(k, t, a);
      }
      out.rho.at(i, t) = pred.rho.at(k, t);
    }
    out.confidence.push_back(z > 0.0 ? pred.confidence[k] / z : 1.0 / static_cast<double>(n));
  }
  return out;
}

}  // namespace mtlb
