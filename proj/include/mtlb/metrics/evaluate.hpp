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

#ifndef MTLB__METRICS__EVALUATE_HPP_
#define MTLB__METRICS__EVALUATE_HPP_

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "mtlb/metrics/metrics.hpp"
#include "mtlb/model/motion_transformer.hpp"

namespace mtlb
{

/// Maps an ego-frame scene to a full 𝒦-mode prediction.
using Predictor = std::function<PredictionSet(const VectorizedScene &)>;

Predictor model_predictor(const MotionTransformer & model);

/// Emits the ground truth as mode 0 with confidence 1; the remaining modes are far-off copies with confidence 0.
Predictor oracle_predictor(std::size_t modes);

/// Ground truth, selected modes and shape label for one scene.
EvalRecord make_eval_record(const VectorizedScene & scene, const PredictionSet & selected);

struct EvalOptions
{
  MetricsConfig metrics;
  std::size_t output_modes{6};
  double nms_radius{2.0};
  std::size_t threads{1};
};

std::vector<EvalRecord> build_eval_records(
  const Predictor & predictor, std::span<const VectorizedScene> scenes, const EvalOptions & options);

/// Deterministic for a fixed predictor; the worker count only affects speed.
MetricsReport evaluate(const Predictor & predictor, std::span<const VectorizedScene> scenes, const EvalOptions & options);
MetricsReport evaluate(const MotionTransformer & model, std::span<const VectorizedScene> scenes, const EvalOptions & options);

/// Worker count from MTLB_THREADS (default 1, capped at hardware concurrency).
std::size_t default_thread_count();

}  // namespace mtlb

#endif  // MTLB__METRICS__EVALUATE_HPP_
