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

#include "mtlb/train/optimizer.hpp"

#include <cmath>
#include <string>

#include "mtlb/core/errors.hpp"

namespace mtlb
{

void AdamWConfig::validate() const
{
  if (!(beta1 >= 0.0 && beta1 < 1.0)) throw ConfigError("adamw: beta1 must be in [0, 1)");
  if (!(beta2 >= 0.0 && beta2 < 1.0)) throw ConfigError("adamw: beta2 must be in [0, 1)");
  if (!(eps > 0.0)) throw ConfigError("adamw: eps must be positive");
  if (!(weight_decay >= 0.0)) throw ConfigError("adamw: weight decay must be non-negative");
}

OptimizerState OptimizerState::for_store(const ParameterStore & store, const AdamWConfig & config)
{
  config.validate();
  OptimizerState s;
  s.config = config;
  s.sync(store);
  return s;
}

void OptimizerState::sync(const ParameterStore & store)
{
  const auto & entries = store.entries();
  if (m.size() > entries.size()) throw StateError("optimizer state has more moments than the store has tensors");
  for (std::size_t i = 0; i < m.size(); ++i) {
    if (m[i].shape() != entries[i].value.shape() || v[i].shape() != entries[i].value.shape()) {
      throw DimensionError("optimizer moments for '" + entries[i].name + "' do not match the tensor shape");
    }
  }
  for (std::size_t i = m.size(); i < entries.size(); ++i) {
    m.emplace_back(entries[i].value.shape());
    v.emplace_back(entries[i].value.shape());
  }
}

void adamw_step(ParameterStore & store, OptimizerState & state, double lr)
{
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw InputError("adamw_step: learning rate must be finite and non-negative");
  state.sync(store);
  auto & entries = store.entries();
  for (const auto & e : entries) {
    if (!e.trainable && e.grad) throw StateError("adamw_step: gradient present on frozen tensor '" + e.name + "'");
  }
  const auto & c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto & e = entries[i];
    if (!e.trainable) continue;
    Tensor & m = state.m[i];
    Tensor & v = state.v[i];
    const Tensor * grad = e.grad ? &*e.grad : nullptr;
    for (std::size_t j = 0; j < e.value.size(); ++j) {
      const double g = grad != nullptr ? (*grad)[j] : 0.0;
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g;
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g * g;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      const double theta = e.value[j];
      e.value[j] = theta - lr * (mhat / (std::sqrt(vhat) + c.eps) + c.weight_decay * theta);
    }
  }
}

double clip_grad_norm(ParameterStore & store, double max_norm)
{
  if (!(max_norm > 0.0)) throw InputError("clip_grad_norm: max_norm must be positive");
  double sq = 0.0;
  for (const auto & e : store.entries()) {
    if (!e.grad) continue;
    for (std::size_t j = 0; j < e.grad->size(); ++j) sq += (*e.grad)[j] * (*e.grad)[j];
  }
  const double norm = std::sqrt(sq);
  if (!std::isfinite(norm)) throw NumericError("clip_grad_norm: gradient norm is not finite");
  if (norm > max_norm) {
    const double s = max_norm / norm;
    for (auto & e : store.entries()) {
      if (!e.grad) continue;
      for (std::size_t j = 0; j < e.grad->size(); ++j) (*e.grad)[j] *= s;
    }
  }
  return norm;
}

void LrSchedule::validate() const
{
  if (!(initial > 0.0) || !std::isfinite(initial)) throw ConfigError("lr schedule: initial rate must be positive");
  if (!(total_epochs > 0.0)) throw ConfigError("lr schedule: epoch budget must be positive");
}

std::array<double, 5> LrSchedule::plateaus() const
{
  // Exact reference values when `initial` equals the first plateau.
  const double ratio = initial / kPlateaus[0];
  std::array<double, 5> out{};
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = kPlateaus[i] * ratio;
  return out;
}

double lr_at(const LrSchedule & schedule, double epoch)
{
  schedule.validate();
  if (!(epoch >= 0.0)) throw InputError("lr_at: epoch must be non-negative");
  if (epoch > schedule.total_epochs) {
    throw InputError("lr_at: epoch " + std::to_string(epoch) + " is past the budget of " +
                     std::to_string(schedule.total_epochs));
  }
  const double ref = epoch * (LrSchedule::kReferenceEpochs / schedule.total_epochs);
  std::size_t i = 0;
  while (i < LrSchedule::kBoundaries.size() && ref >= LrSchedule::kBoundaries[i]) ++i;
  return schedule.plateaus()[i];
}

double scale_lr(double recommended_lr, std::size_t recommended_batch, std::size_t actual_batch)
{
  if (recommended_batch == 0 || actual_batch == 0) throw InputError("scale_lr: batch sizes must be positive");
  if (!(recommended_lr > 0.0)) throw InputError("scale_lr: learning rate must be positive");
  return recommended_lr * std::sqrt(static_cast<double>(actual_batch) / static_cast<double>(recommended_batch));
}

}  // namespace mtlb
