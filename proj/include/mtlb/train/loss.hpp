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

#ifndef MTLB__TRAIN__LOSS_HPP_
#define MTLB__TRAIN__LOSS_HPP_

#include <cstddef>
#include <vector>

#include "mtlb/core/autodiff.hpp"
#include "mtlb/model/motion_transformer.hpp"

namespace mtlb
{

/// Index of the intention point nearest to `endpoint` (lowest index on ties).
std::size_t nearest_intention(const IntentionSet & intentions, const Vec2 & endpoint);

/// Last valid ground-truth position of the focal agent; throws InputError if none is valid.
Vec2 gt_endpoint(const FocalFuture & future);

/**
 * @brief Mean per-step bivariate Gaussian negative log-likelihood.
 *
 * `raw` is one mode's head output reshaped to [T x 5] in head units; `gt` is
 * [T x 2] in meters. Only rows with `valid` set contribute.
 */
Var gaussian_nll(Var raw, const Tensor & gt, const std::vector<char> & valid, const HeadLinks & links);

/// Cross-entropy of the [K] logits in `raw` (head layout) against mode `target`.
Var mode_cross_entropy(Var raw, std::size_t target, const HeadLayout & layout);

/// Masked mean squared error of dense-future predictions, model units. Zero when nothing is valid.
Var dense_future_loss(Var prediction, const Tensor & target, const std::vector<char> & mask);

struct LossTerms
{
  Var total;
  std::vector<double> nll;  // per decoder layer
  std::vector<double> ce;   // per decoder layer
  double dense{0.0};
  std::size_t target_mode{0};
};

/// Sum over decoder layers of NLL + cross-entropy + dense-future L2. Throws NumericError when a term is not finite.
LossTerms training_loss(
  Graph & g, const ModelOutput & out, const VectorizedScene & scene, const IntentionSet & intentions,
  const ModelConfig & config);

}  // namespace mtlb

#endif  // MTLB__TRAIN__LOSS_HPP_
