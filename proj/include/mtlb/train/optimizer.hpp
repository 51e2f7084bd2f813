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

#ifndef MTLB__TRAIN__OPTIMIZER_HPP_
#define MTLB__TRAIN__OPTIMIZER_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "mtlb/core/parameter_store.hpp"

namespace mtlb
{

struct AdamWConfig
{
  double beta1{0.9};
  double beta2{0.999};
  double eps{1e-8};
  double weight_decay{0.01};  // λ

  void validate() const;
};

/// First and second moments per store entry, aligned by index.
struct OptimizerState
{
  AdamWConfig config;
  std::vector<Tensor> m;
  std::vector<Tensor> v;
  std::uint64_t step{0};

  static OptimizerState for_store(const ParameterStore & store, const AdamWConfig & config = {});
  /// Adds zero moments for entries registered after construction.
  void sync(const ParameterStore & store);
};

/**
 * @brief One decoupled-weight-decay Adam step:
 * θ ← θ − η (m̂ / (√v̂ + ε) + λ θ).
 *
 * Trainable entries without a gradient buffer use a zero gradient. Frozen
 * entries and their moments are left untouched; a gradient on a frozen entry
 * throws StateError.
 */
void adamw_step(ParameterStore & store, OptimizerState & state, double lr);

/// Global L2 norm of all gradient buffers before clipping.
double clip_grad_norm(ParameterStore & store, double max_norm);

/// Staircase schedule defined on a 30-epoch reference axis and stretched over `total_epochs`.
struct LrSchedule
{
  static constexpr double kReferenceEpochs = 30.0;
  static constexpr std::array<double, 4> kBoundaries{22.0, 24.0, 26.0, 28.0};
  static constexpr std::array<double, 5> kPlateaus{1.18e-5, 5.9e-6, 2.9e-6, 1.4e-6, 7e-7};

  double initial{kPlateaus[0]};
  double total_epochs{kReferenceEpochs};

  void validate() const;
  /// Plateau values scaled to `initial`, non-increasing.
  std::array<double, 5> plateaus() const;
};

/// Learning rate at a (possibly fractional) epoch in [0, total_epochs].
double lr_at(const LrSchedule & schedule, double epoch);

/// Square-root batch scaling: η · √(actual / recommended).
double scale_lr(double recommended_lr, std::size_t recommended_batch, std::size_t actual_batch);

}  // namespace mtlb

#endif  // MTLB__TRAIN__OPTIMIZER_HPP_
