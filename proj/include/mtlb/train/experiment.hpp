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

#ifndef MTLB__TRAIN__EXPERIMENT_HPP_
#define MTLB__TRAIN__EXPERIMENT_HPP_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mtlb/metrics/evaluate.hpp"
#include "mtlb/scene/dataset.hpp"
#include "mtlb/train/checkpoint.hpp"
#include "mtlb/train/optimizer.hpp"
#include "mtlb/train/transfer.hpp"

namespace mtlb
{

struct TrainConfig
{
  std::size_t epochs{10};
  double lr{1e-3};  // initial plateau
  AdamWConfig adam;
  double grad_clip{5.0};
  std::size_t batch{1};

  void validate() const;
};

/// One training stage of an experiment.
struct StagePlan
{
  std::string name;  // "source", "target" or "joint"
  Method freeze{Method::FT};
  bool add_feature_reuse{false};
};

struct ExperimentSpec
{
  Method method{Method::SB};
  ModelConfig model;
  TrainConfig train;
  EvalOptions eval;
  std::uint64_t seed{0};
  /// Required for FT, FTD, FTE and FR.
  std::optional<Checkpoint> source_checkpoint;

  /// Stages this spec runs (stage 1 of two-stage methods is supplied by the checkpoint).
  std::vector<StagePlan> stages() const;
  void validate() const;
};

struct StageTiming
{
  std::string stage;
  double seconds{0.0};
  std::size_t steps{0};
};

struct StageLog
{
  std::vector<double> epoch_loss;  // mean training loss per epoch
};

struct ExperimentResult
{
  Method method{Method::SB};
  Checkpoint checkpoint;
  MetricsReport source_test;
  MetricsReport target_test;
  std::vector<StageTiming> timings;
  std::vector<StageLog> logs;

  double stage_seconds() const;
};

/// Ego-frame scenes of one split, in split order.
std::vector<VectorizedScene> prepare_split(const DatasetHandle & dataset, Split split, const ModelConfig & config);

/// Ground-truth endpoints [M x 2] of prepared scenes, meters.
Tensor focal_endpoints(std::span<const VectorizedScene> scenes);

using StepCallback = std::function<void(std::size_t step, double loss)>;

/**
 * @brief Runs `epochs × steps_per_epoch` single-scene AdamW steps.
 *
 * `draw(epoch, step)` picks the scene for each step. The learning rate follows
 * the staircase over the stage's own epoch budget.
 */
StageLog train_stage(
  MotionTransformer & model, OptimizerState & optimizer, const TrainConfig & config, std::size_t steps_per_epoch,
  const std::function<const VectorizedScene &(std::size_t epoch, std::size_t step)> & draw,
  const StepCallback & on_step = {});

ExperimentResult run_experiment(
  const ExperimentSpec & spec, const DatasetHandle & source, const DatasetHandle & target);

}  // namespace mtlb

#endif  // MTLB__TRAIN__EXPERIMENT_HPP_
