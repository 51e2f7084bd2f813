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

#include "mtlb/train/loss.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "mtlb/core/errors.hpp"

namespace mtlb
{

std::size_t nearest_intention(const IntentionSet & intentions, const Vec2 & endpoint)
{
  if (intentions.count() == 0) throw InputError("nearest_intention: no intention points");
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < intentions.count(); ++k) {
    const double dx = intentions.points.at(k, 0) - endpoint[0];
    const double dy = intentions.points.at(k, 1) - endpoint[1];
    const double d = dx * dx + dy * dy;
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return best;
}

Vec2 gt_endpoint(const FocalFuture & future)
{
  for (std::size_t t = future.valid.size(); t-- > 0;) {
    if (future.valid[t]) return {future.positions.at(t, 0), future.positions.at(t, 1)};
  }
  throw InputError("focal agent has no valid future state");
}

Var gaussian_nll(Var raw, const Tensor & gt, const std::vector<char> & valid, const HeadLinks & links)
{
  const std::size_t T = gt.rows();
  if (raw.shape() != Shape{T, HeadLayout::kParams} || valid.size() != T) {
    throw DimensionError("gaussian_nll: expected [" + std::to_string(T) + " x 5] head rows and " +
                         std::to_string(T) + " flags, got " + shape_to_string(raw.shape()));
  }
  std::vector<std::size_t> rows;
  for (std::size_t t = 0; t < T; ++t) {
    if (valid[t]) rows.push_back(t);
  }
  if (rows.empty()) throw InputError("gaussian_nll: no valid ground-truth step");
  Graph & g = *raw.graph();
  Tensor target({rows.size(), 2});
  for (std::size_t i = 0; i < rows.size(); ++i) {
    target.at(i, 0) = gt.at(rows[i], 0);
    target.at(i, 1) = gt.at(rows[i], 1);
  }
  const Var r = gather_rows(raw, rows);
  const Var mu = scale(slice_cols(r, 0, 2), links.unit_length);
  const Var log_sigma =
    clamp(add_scalar(slice_cols(r, 2, 2), std::log(links.unit_length)), links.log_sigma_min, links.log_sigma_max);
  const Var rho = clamp(tanh(slice_cols(r, 4, 1)), -links.rho_limit, links.rho_limit);
  const Var z = div(sub(g.constant(std::move(target)), mu), exp(log_sigma));
  const Var zx = slice_cols(z, 0, 1);
  const Var zy = slice_cols(z, 1, 1);
  const Var one_minus = add_scalar(scale(square(rho), -1.0), 1.0);
  const Var quad = sub(add(square(zx), square(zy)), scale(mul(mul(rho, zx), zy), 2.0));
  const Var per_step = add(
    add(add(slice_cols(log_sigma, 0, 1), slice_cols(log_sigma, 1, 1)), scale(log(one_minus), 0.5)),
    div(quad, scale(one_minus, 2.0)));
  return add_scalar(mean(per_step), std::log(2.0 * std::numbers::pi));
}

Var mode_cross_entropy(Var raw, std::size_t target, const HeadLayout & layout)
{
  const std::size_t K = raw.shape()[0];
  if (target >= K) throw InputError("mode_cross_entropy: target mode out of range");
  const Var logits = reshape(slice_cols(raw, layout.logit_column(), 1), {1, K});
  return sum(sub(logsumexp_rows(logits), slice_cols(logits, target, 1)));
}

Var dense_future_loss(Var prediction, const Tensor & target, const std::vector<char> & mask)
{
  Graph & g = *prediction.graph();
  const std::size_t N = prediction.shape()[0];
  const std::size_t W = prediction.shape()[1];
  if (target.size() != N * W || mask.size() * kFutureChannels != N * W) {
    throw DimensionError("dense_future_loss: prediction " + shape_to_string(prediction.shape()) +
                         " does not match target " + shape_to_string(target.shape()));
  }
  Tensor weights({N, W});
  Tensor flat({N, W});
  std::size_t count = 0;
  for (std::size_t i = 0; i < N * W; ++i) {
    flat[i] = target[i];
    if (mask[i / kFutureChannels]) {
      weights[i] = 1.0;
      ++count;
    }
  }
  if (count == 0) return g.constant(Tensor({}, 0.0));
  const Var diff = sub(prediction, g.constant(std::move(flat)));
  return scale(sum(mul(square(diff), g.constant(std::move(weights)))), 1.0 / static_cast<double>(count));
}

LossTerms training_loss(
  Graph & g, const ModelOutput & out, const VectorizedScene & scene, const IntentionSet & intentions,
  const ModelConfig & config)
{
  if (out.layers.empty()) throw StateError("training_loss: forward pass produced no decoder layer");
  LossTerms terms;
  const std::size_t T = config.future_steps;
  const HeadLayout layout{T};
  const HeadLinks links = config.links();
  terms.target_mode = nearest_intention(intentions, gt_endpoint(scene.focal_future));
  const std::size_t kstar = terms.target_mode;

  const Var dense = dense_future_loss(out.dense_future, scene.agent_futures, scene.agent_future_mask);
  terms.dense = dense.value()[0];
  std::vector<Var> parts;
  for (const auto & layer : out.layers) {
    const Var row = gather_rows(layer.raw, std::span(&kstar, 1));
    const Var steps = reshape(slice_cols(row, 0, T * HeadLayout::kParams), {T, HeadLayout::kParams});
    const Var nll = gaussian_nll(steps, scene.focal_future.positions, scene.focal_future.valid, links);
    const Var ce = mode_cross_entropy(layer.raw, kstar, layout);
    terms.nll.push_back(nll.value()[0]);
    terms.ce.push_back(ce.value()[0]);
    parts.push_back(add(add(nll, ce), dense));
  }
  Var total = parts.front();
  for (std::size_t i = 1; i < parts.size(); ++i) total = add(total, parts[i]);
  terms.total = total;

  if (!std::isfinite(total.value()[0])) {
    std::ostringstream msg;
    msg << "training_loss is not finite (dense=" << terms.dense;
    for (std::size_t j = 0; j < terms.nll.size(); ++j) {
      msg << ", layer " << j << ": nll=" << terms.nll[j] << " ce=" << terms.ce[j];
    }
    msg << ")";
    throw NumericError(msg.str());
  }
  return terms;
}

}  // namespace mtlb
