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

#include "mtlb/metrics/evaluate.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>

#include "mtlb/core/errors.hpp"

namespace mtlb
{

Predictor model_predictor(const MotionTransformer & model)
{
  return [&model](const VectorizedScene & scene) { return model.predict(scene); };
}

Predictor oracle_predictor(std::size_t modes)
{
  return [modes](const VectorizedScene & scene) {
    const auto & ff = scene.focal_future;
    const std::size_t T = ff.positions.rows();
    PredictionSet p;
    p.mean = Tensor({modes, T, 2});
    p.sigma = Tensor({modes, T, 2}, 1.0);
    p.rho = Tensor({modes, T});
    p.confidence.assign(modes, 0.0);
    p.confidence[0] = 1.0;
    for (std::size_t k = 0; k < modes; ++k) {
      const double offset = 100.0 * static_cast<double>(k);
      for (std::size_t t = 0; t < T; ++t) {
        p.mean.at(k, t, 0) = ff.positions.at(t, 0);
        p.mean.at(k, t, 1) = ff.positions.at(t, 1) + offset;
      }
    }
    return p;
  };
}

EvalRecord make_eval_record(const VectorizedScene & scene, const PredictionSet & selected)
{
  const auto & ff = scene.focal_future;
  EvalRecord r;
  r.gt = ff.positions;
  r.gt_heading = ff.headings;
  r.gt_valid = ff.valid;
  r.initial_speed = ff.current_speed;
  for (std::size_t k = 0; k < selected.modes(); ++k) r.modes.push_back(selected.trajectory(k));
  r.confidence = selected.confidence;
  // Shape label from the ground truth up to its last valid step, relative to the ego pose.
  std::size_t last = 0;
  for (std::size_t t = 0; t < ff.valid.size(); ++t) {
    if (ff.valid[t]) last = t;
  }
  Tensor pos({last + 1, 2});
  std::vector<double> head(last + 1);
  for (std::size_t t = 0; t <= last; ++t) {
    pos.at(t, 0) = ff.positions.at(t, 0);
    pos.at(t, 1) = ff.positions.at(t, 1);
    head[t] = ff.headings[t];
  }
  r.category = last >= 1 ? classify_shape(pos, head) : ShapeCategory::Stationary;
  return r;
}

std::vector<EvalRecord> build_eval_records(
  const Predictor & predictor, std::span<const VectorizedScene> scenes, const EvalOptions & options)
{
  std::vector<EvalRecord> out(scenes.size());
  auto work = [&](std::size_t i) {
    const auto pred = predictor(scenes[i]);
    const auto selected = select_modes(pred, options.output_modes, options.nms_radius);
    selected.validate();
    out[i] = make_eval_record(scenes[i], selected);
  };
  const std::size_t threads = std::max<std::size_t>(1, std::min(options.threads, scenes.size()));
  if (threads == 1) {
    for (std::size_t i = 0; i < scenes.size(); ++i) work(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < threads; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < scenes.size(); i += threads) work(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto & t : pool) t.join();
  for (auto & e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

MetricsReport evaluate(const Predictor & predictor, std::span<const VectorizedScene> scenes, const EvalOptions & options)
{
  if (scenes.empty()) throw InputError("evaluate: the split is empty");
  const auto records = build_eval_records(predictor, scenes, options);
  return compute_metrics(records, options.metrics);
}

MetricsReport evaluate(const MotionTransformer & model, std::span<const VectorizedScene> scenes, const EvalOptions & options)
{
  return evaluate(model_predictor(model), scenes, options);
}

std::size_t default_thread_count()
{
  const char * env = std::getenv("MTLB_THREADS");
  std::size_t n = 1;
  if (env != nullptr && *env != '\0') {
    try {
      n = static_cast<std::size_t>(std::stoul(env));
    } catch (const std::exception &) {
      throw ConfigError("MTLB_THREADS must be a positive integer, got '" + std::string(env) + "'");
    }
    if (n == 0) throw ConfigError("MTLB_THREADS must be a positive integer");
  }
  const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
  return std::min(n, hw);
}

}  // namespace mtlb
