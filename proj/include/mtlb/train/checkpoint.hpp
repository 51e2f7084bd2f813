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

#ifndef MTLB__TRAIN__CHECKPOINT_HPP_
#define MTLB__TRAIN__CHECKPOINT_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtlb/model/motion_transformer.hpp"
#include "mtlb/train/optimizer.hpp"

namespace mtlb
{

enum class CheckpointKind : std::uint8_t { Model = 0, Oracle = 1 };

/**
 * @brief Serializable model snapshot.
 *
 * An Oracle checkpoint carries only a config; evaluating it replays the ground
 * truth as the top mode (test fixture for the metric pipeline).
 */
struct Checkpoint
{
  struct TensorRecord
  {
    std::string name;
    ParamGroup group{ParamGroup::Encoder};
    bool trainable{true};
    Tensor value;
    std::optional<Tensor> m;
    std::optional<Tensor> v;
  };

  CheckpointKind kind{CheckpointKind::Model};
  ModelConfig config;
  std::uint64_t seed{0};
  bool feature_reuse{false};
  Tensor intentions;  // [K x 2], meters
  std::vector<TensorRecord> tensors;
  std::optional<AdamWConfig> optimizer;
  std::uint64_t optimizer_step{0};

  const TensorRecord * find(std::string_view name) const;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

Checkpoint make_checkpoint(const MotionTransformer & model, const OptimizerState * optimizer = nullptr);
Checkpoint oracle_checkpoint(const ModelConfig & config);

std::string encode_checkpoint(const Checkpoint & checkpoint);
/// Throws FormatError on any structural problem.
Checkpoint decode_checkpoint(std::string_view bytes);
void save_checkpoint(const std::string & path, const Checkpoint & checkpoint);
Checkpoint load_checkpoint(const std::string & path);

/// Rebuilds the model; `config` overrides the stored one and must agree on every tensor shape
/// (DimensionError naming the first mismatch otherwise).
MotionTransformer restore_model(const Checkpoint & checkpoint, const std::optional<ModelConfig> & config = {});
/// Optimizer moments aligned with `store`, or nullopt when none were saved.
std::optional<OptimizerState> restore_optimizer(const Checkpoint & checkpoint, const ParameterStore & store);

}  // namespace mtlb

#endif  // MTLB__TRAIN__CHECKPOINT_HPP_
