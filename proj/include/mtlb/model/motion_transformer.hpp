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

#ifndef MTLB__MODEL__MOTION_TRANSFORMER_HPP_
#define MTLB__MODEL__MOTION_TRANSFORMER_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "mtlb/core/kv_config.hpp"
#include "mtlb/core/parameter_store.hpp"
#include "mtlb/model/decoder.hpp"
#include "mtlb/model/encoder.hpp"
#include "mtlb/scene/scenario.hpp"
#include "mtlb/scene/vectorize.hpp"

namespace mtlb
{

struct ModelConfig
{
  std::size_t d_model{32};
  std::size_t heads{2};
  std::size_t encoder_layers{2};
  std::size_t decoder_layers{2};
  std::size_t knn{8};
  std::size_t modes{6};          // 𝒦
  std::size_t output_modes{6};   // after select_modes
  double nms_radius{2.0};        // meters
  std::size_t map_collect{16};
  std::size_t history_steps{11};
  std::size_t future_steps{30};
  std::size_t max_agents{16};
  std::size_t max_map_polylines{32};
  std::size_t map_segment_points{20};
  double unit_length{10.0};

  void validate() const;
  VectorizeConfig vectorize_config() const;
  HeadLinks links() const { return HeadLinks{unit_length}; }
};

/// Reads `model.*` keys; absent keys keep the defaults.
ModelConfig model_config_from(const KeyValueConfig & kv);
std::vector<std::string> model_config_keys();
void write_model_config(const ModelConfig & config, KeyValueConfig & kv);

struct ModelOutput
{
  SceneTokens tokens;
  Var dense_future;                  // [N_a x T*4], model units
  std::vector<LayerOutput> layers;   // every decoder layer, in order
  std::size_t output_layer{0};       // index into `layers` used for predictions
};

/**
 * @brief Encoder-decoder trajectory model with a tagged parameter registry.
 *
 * Parameters are registered in a fixed order, so two models built from the
 * same config and seed are bit-identical.
 */
class MotionTransformer
{
public:
  MotionTransformer(ModelConfig config, std::uint64_t seed);

  const ModelConfig & config() const { return config_; }
  ParameterStore & store() { return store_; }
  const ParameterStore & store() const { return store_; }

  const IntentionSet & intentions() const { return intentions_; }
  /// Throws DimensionError unless there are exactly `modes` points.
  void set_intentions(IntentionSet intentions);

  /// Appends one encoder layer and one decoder layer with its own head, tagged auxiliary_new.
  /// Throws StateError on a second call.
  void add_feature_reuse_blocks();
  bool has_feature_reuse() const { return fr_encoder_.has_value(); }

  ModelOutput forward(Graph & g, const VectorizedScene & scene) const;
  /// Inference on an ego-frame scene: all 𝒦 modes of the output layer.
  PredictionSet predict(const VectorizedScene & scene) const;
  std::uint64_t seed() const { return seed_; }

private:
  ModelConfig config_;
  std::uint64_t seed_;
  ParameterStore store_;
  IntentionSet intentions_;
  PolylineEncoder agent_encoder_;
  PolylineEncoder map_encoder_;
  std::vector<EncoderLayer> encoder_layers_;
  DenseFutureHead dense_future_;
  Mlp static_query_;
  Mlp dynamic_query_;
  std::vector<DecoderLayer> decoder_layers_;
  std::optional<EncoderLayer> fr_encoder_;
  std::optional<DecoderLayer> fr_decoder_;
};

/// Ego-frame transform followed by vectorization.
VectorizedScene prepare_scene(const Scenario & scenario, const ModelConfig & config);

}  // namespace mtlb

#endif  // MTLB__MODEL__MOTION_TRANSFORMER_HPP_
