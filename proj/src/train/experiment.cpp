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

#include "mtlb/train/experiment.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <string>

#include "mtlb/core/errors.hpp"
#include "mtlb/core/kv_config.hpp"
#include "mtlb/train/loss.hpp"

namespace mtlb
{

void TrainConfig::validate() const
{
  if (epochs == 0) throw ConfigError("train.epochs must be positive");
  if (!(lr > 0.0) || !std::isfinite(lr)) throw ConfigError("train.lr must be positive");
  if (!(grad_clip > 0.0)) throw ConfigError("train.grad_clip must be positive");
  if (batch != 1) throw ConfigError("train.batch: only batch size 1 is supported");
  adam.validate();
}

std::vector<StagePlan> ExperimentSpec::stages() const
{
  switch (method) {
    case Method::SB: return {{"source", Method::SB, false}};
    case Method::TB: return {{"target", Method::TB, false}};
    case Method::MTL: return {{"joint", Method::MTL, false}};
    case Method::FT: return {{"target", Method::FT, false}};
    case Method::FTD: return {{"target", Method::FTD, false}};
    case Method::FTE: return {{"target", Method::FTE, false}};
    case Method::FR: return {{"target", Method::FR, true}};
  }
  return {};
}

void ExperimentSpec::validate() const
{
  model.validate();
  train.validate();
  if (is_two_stage(method)) {
    if (!source_checkpoint) {
      throw ConfigError(std::string("method ") + std::string(to_string(method)) +
                        " needs a source-trained checkpoint (stage-1 dependency)");
    }
    if (source_checkpoint->kind != CheckpointKind::Model) {
      throw ConfigError("the stage-1 dependency must be a model checkpoint");
    }
    if (source_checkpoint->feature_reuse) throw ConfigError("the stage-1 checkpoint already has feature-reuse blocks");
  }
}

double ExperimentResult::stage_seconds() const
{
  double s = 0.0;
  for (const auto & t : timings) s += t.seconds;
  return s;
}

std::vector<VectorizedScene> prepare_split(const DatasetHandle & dataset, Split split, const ModelConfig & config)
{
  std::vector<VectorizedScene> out;
  for (const Scenario * s : dataset.subset(split)) out.push_back(prepare_scene(*s, config));
  return out;
}

Tensor focal_endpoints(std::span<const VectorizedScene> scenes)
{
  Tensor e({scenes.size(), 2});
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    const Vec2 p = gt_endpoint(scenes[i].focal_future);
    e.at(i, 0) = p[0];
    e.at(i, 1) = p[1];
  }
  return e;
}

StageLog train_stage(
  MotionTransformer & model, OptimizerState & optimizer, const TrainConfig & config, std::size_t steps_per_epoch,
  const std::function<const VectorizedScene &(std::size_t epoch, std::size_t step)> & draw,
  const StepCallback & on_step)
{
  config.validate();
  if (steps_per_epoch == 0) throw ConfigError("train_stage: empty training split");
  LrSchedule schedule;
  schedule.initial = config.lr;
  schedule.total_epochs = static_cast<double>(config.epochs);
  auto & store = model.store();
  optimizer.sync(store);
  StageLog log;
  std::size_t global = 0;
  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double total = 0.0;
    for (std::size_t step = 0; step < steps_per_epoch; ++step) {
      const VectorizedScene & scene = draw(epoch, step);
      store.zero_grad();
      Graph g;
      const auto out = model.forward(g, scene);
      const auto terms = training_loss(g, out, scene, model.intentions(), model.config());
      g.backward(terms.total, store);
      clip_grad_norm(store, config.grad_clip);
      const double progress =
        static_cast<double>(epoch) + static_cast<double>(step) / static_cast<double>(steps_per_epoch);
      adamw_step(store, optimizer, lr_at(schedule, progress));
      store.zero_grad();
      const double loss = terms.total.value()[0];
      total += loss;
      if (on_step) on_step(global, loss);
      ++global;
    }
    log.epoch_loss.push_back(total / static_cast<double>(steps_per_epoch));
  }
  return log;
}

ExperimentResult run_experiment(const ExperimentSpec & spec, const DatasetHandle & source, const DatasetHandle & target)
{
  spec.validate();
  if (source.role != DatasetRole::Source) throw ConfigError("run_experiment: first dataset must have the source role");
  if (target.role != DatasetRole::Target) throw ConfigError("run_experiment: second dataset must have the target role");
  const ModelConfig & mc = is_two_stage(spec.method) ? spec.source_checkpoint->config : spec.model;

  const auto source_train = prepare_split(source, Split::Train, mc);
  const auto target_train = prepare_split(target, Split::Train, mc);
  const auto source_test = prepare_split(source, Split::Test, mc);
  const auto target_test = prepare_split(target, Split::Test, mc);

  ExperimentResult result;
  result.method = spec.method;
  std::optional<MotionTransformer> model;
  if (is_two_stage(spec.method)) {
    model.emplace(restore_model(*spec.source_checkpoint));
  } else {
    model.emplace(mc, spec.seed);
    Tensor endpoints;
    if (spec.method == Method::SB) {
      endpoints = focal_endpoints(source_train);
    } else if (spec.method == Method::TB) {
      endpoints = focal_endpoints(target_train);
    } else {
      const auto a = focal_endpoints(source_train);
      const auto b = focal_endpoints(target_train);
      endpoints = Tensor({a.rows() + b.rows(), 2});
      for (std::size_t i = 0; i < a.size(); ++i) endpoints[i] = a[i];
      for (std::size_t i = 0; i < b.size(); ++i) endpoints[a.size() + i] = b[i];
    }
    model->set_intentions(fit_intentions(endpoints, mc.modes, mix_seed(spec.seed, 1)));
  }

  for (const auto & stage : spec.stages()) {
    if (stage.add_feature_reuse) model->add_feature_reuse_blocks();
    apply_freeze_mask(model->store(), stage.freeze);
    auto optimizer = OptimizerState::for_store(model->store(), spec.train.adam);
    std::mt19937_64 rng(mix_seed(spec.seed, 2));

    std::function<const VectorizedScene &(std::size_t, std::size_t)> draw;
    std::size_t steps = 0;
    std::vector<std::size_t> order;
    std::size_t order_epoch = static_cast<std::size_t>(-1);
    std::optional<MtlBatchSampler> sampler;
    const std::vector<VectorizedScene> * pool = nullptr;
    if (stage.name == "joint") {
      if (source_train.empty() || target_train.empty()) throw ConfigError("MTL needs non-empty train splits on both datasets");
      sampler.emplace(source_train.size(), target_train.size(), mix_seed(spec.seed, 3));
      steps = source_train.size() + target_train.size();
      draw = [&](std::size_t, std::size_t) -> const VectorizedScene & {
        const auto d = sampler->next();
        return d.origin == DatasetRole::Source ? source_train[d.index] : target_train[d.index];
      };
    } else {
      pool = stage.name == "source" ? &source_train : &target_train;
      if (pool->empty()) throw ConfigError("train split of the " + stage.name + " dataset is empty");
      steps = pool->size();
      draw = [&](std::size_t epoch, std::size_t step) -> const VectorizedScene & {
        if (epoch != order_epoch) {
          order = shuffled_order(pool->size(), rng);
          order_epoch = epoch;
        }
        return (*pool)[order[step]];
      };
    }

    const auto t0 = std::chrono::steady_clock::now();
    result.logs.push_back(train_stage(*model, optimizer, spec.train, steps, draw));
    const auto t1 = std::chrono::steady_clock::now();
    result.timings.push_back({stage.name, std::chrono::duration<double>(t1 - t0).count(), steps * spec.train.epochs});
    result.checkpoint = make_checkpoint(*model, &optimizer);
  }

  EvalOptions eval = spec.eval;
  eval.output_modes = mc.output_modes;
  eval.nms_radius = mc.nms_radius;
  result.source_test = evaluate(*model, source_test, eval);
  result.target_test = evaluate(*model, target_test, eval);
  return result;
}

}  // namespace mtlb
