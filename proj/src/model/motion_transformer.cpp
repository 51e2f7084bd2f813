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

#include "mtlb/model/motion_transformer.hpp"

#include <random>
#include <string>

#include "mtlb/core/errors.hpp"
#include "mtlb/scene/transform.hpp"

namespace mtlb
{

void ModelConfig::validate() const
{
  AttentionSpec{d_model, heads}.validate();
  if (d_model % 4 != 0) throw ConfigError("model.d_model must be a multiple of 4 for 2-D position encodings");
  if (encoder_layers == 0 || decoder_layers == 0) throw ConfigError("model: encoder and decoder need at least one layer");
  if (knn == 0) throw ConfigError("model.knn must be positive");
  if (modes == 0 || output_modes == 0) throw ConfigError("model: mode counts must be positive");
  if (history_steps == 0 || future_steps == 0) throw ConfigError("model: history and future lengths must be positive");
  if (max_agents == 0 || map_segment_points == 0) throw ConfigError("model: agent cap and segment length must be positive");
  if (!(unit_length > 0.0) || !(nms_radius >= 0.0)) throw ConfigError("model: unit length and NMS radius must be positive");
}

VectorizeConfig ModelConfig::vectorize_config() const
{
  return VectorizeConfig{history_steps, future_steps, map_segment_points, max_agents, max_map_polylines, unit_length};
}

std::vector<std::string> model_config_keys()
{
  return {"model.d_model", "model.heads", "model.encoder_layers", "model.decoder_layers", "model.knn",
          "model.modes", "model.output_modes", "model.nms_radius", "model.map_collect", "model.history",
          "model.future", "model.max_agents", "model.max_map_polylines", "model.segment_points", "model.unit_length"};
}

ModelConfig model_config_from(const KeyValueConfig & kv)
{
  ModelConfig c;
  auto get = [&](const char * key, std::size_t fallback) {
    return static_cast<std::size_t>(kv.get_uint(key, fallback));
  };
  c.d_model = get("model.d_model", c.d_model);
  c.heads = get("model.heads", c.heads);
  c.encoder_layers = get("model.encoder_layers", c.encoder_layers);
  c.decoder_layers = get("model.decoder_layers", c.decoder_layers);
  c.knn = get("model.knn", c.knn);
  c.modes = get("model.modes", c.modes);
  c.output_modes = get("model.output_modes", c.output_modes);
  c.nms_radius = kv.get_double("model.nms_radius", c.nms_radius);
  c.map_collect = get("model.map_collect", c.map_collect);
  c.history_steps = get("model.history", c.history_steps);
  c.future_steps = get("model.future", c.future_steps);
  c.max_agents = get("model.max_agents", c.max_agents);
  c.max_map_polylines = get("model.max_map_polylines", c.max_map_polylines);
  c.map_segment_points = get("model.segment_points", c.map_segment_points);
  c.unit_length = kv.get_double("model.unit_length", c.unit_length);
  c.validate();
  return c;
}

void write_model_config(const ModelConfig & c, KeyValueConfig & kv)
{
  kv.set("model.d_model", std::to_string(c.d_model));
  kv.set("model.heads", std::to_string(c.heads));
  kv.set("model.encoder_layers", std::to_string(c.encoder_layers));
  kv.set("model.decoder_layers", std::to_string(c.decoder_layers));
  kv.set("model.knn", std::to_string(c.knn));
  kv.set("model.modes", std::to_string(c.modes));
  kv.set("model.output_modes", std::to_string(c.output_modes));
  kv.set("model.nms_radius", format_double(c.nms_radius));
  kv.set("model.map_collect", std::to_string(c.map_collect));
  kv.set("model.history", std::to_string(c.history_steps));
  kv.set("model.future", std::to_string(c.future_steps));
  kv.set("model.max_agents", std::to_string(c.max_agents));
  kv.set("model.max_map_polylines", std::to_string(c.max_map_polylines));
  kv.set("model.segment_points", std::to_string(c.map_segment_points));
  kv.set("model.unit_length", format_double(c.unit_length));
}

MotionTransformer::MotionTransformer(ModelConfig config, std::uint64_t seed) : config_(std::move(config)), seed_(seed)
{
  config_.validate();
  std::mt19937_64 rng(mix_seed(seed, 0x6d6f64656cULL));
  const std::size_t d = config_.d_model;
  const AttentionSpec spec{d, config_.heads};
  const ParamScope enc{&store_, "encoder.", ParamGroup::Encoder, &rng};
  agent_encoder_ = PolylineEncoder::create(enc.sub("agent_polyline"), kAgentChannels, d);
  map_encoder_ = PolylineEncoder::create(enc.sub("map_polyline"), kMapChannels, d);
  for (std::size_t i = 0; i < config_.encoder_layers; ++i) {
    encoder_layers_.push_back(EncoderLayer::create(enc.sub("layer" + std::to_string(i)), spec));
  }
  dense_future_ = DenseFutureHead::create(enc.sub("dense_future"), d, config_.future_steps);

  const ParamScope dec{&store_, "decoder.", ParamGroup::Decoder, &rng};
  static_query_ = Mlp::create(dec.sub("static_query"), MlpSpec{{d, d, d}});
  dynamic_query_ = Mlp::create(dec.sub("dynamic_query"), MlpSpec{{d, d, d}});
  for (std::size_t i = 0; i < config_.decoder_layers; ++i) {
    decoder_layers_.push_back(DecoderLayer::create(dec.sub("layer" + std::to_string(i)), spec, config_.future_steps));
  }

  // Until fitted, intentions sit on a ring in front of the agent.
  Tensor ring({config_.modes, 2});
  for (std::size_t k = 0; k < config_.modes; ++k) {
    const double a = -1.0 + 2.0 * static_cast<double>(k) / static_cast<double>(std::max<std::size_t>(1, config_.modes - 1));
    ring.at(k, 0) = 20.0 * std::cos(a);
    ring.at(k, 1) = 20.0 * std::sin(a);
  }
  intentions_ = IntentionSet{ring};
}

void MotionTransformer::set_intentions(IntentionSet intentions)
{
  if (intentions.points.rank() != 2 || intentions.count() != config_.modes || intentions.points.cols() != 2) {
    throw DimensionError(
      "intentions must be [" + std::to_string(config_.modes) + " x 2], got " +
      shape_to_string(intentions.points.shape()));
  }
  require_finite(intentions.points, "intentions");
  intentions_ = std::move(intentions);
}

void MotionTransformer::add_feature_reuse_blocks()
{
  if (has_feature_reuse()) throw StateError("feature-reuse blocks were already added");
  std::mt19937_64 rng(mix_seed(seed_, 0x66725f6e6577ULL));
  const AttentionSpec spec{config_.d_model, config_.heads};
  const ParamScope aux{&store_, "aux.", ParamGroup::AuxiliaryNew, &rng};
  fr_encoder_ = EncoderLayer::create(aux.sub("encoder_layer"), spec);
  fr_decoder_ = DecoderLayer::create(aux.sub("decoder_layer"), spec, config_.future_steps);
}

ModelOutput MotionTransformer::forward(Graph & g, const VectorizedScene & scene) const
{
  const double unit = config_.unit_length;
  ModelOutput out;
  SceneTokens tokens = encode_polylines(g, store_, agent_encoder_, map_encoder_, scene);
  tokens = local_self_attention(g, store_, encoder_layers_, tokens, config_.knn, unit);
  auto dense = dense_future_predict(g, store_, dense_future_, tokens);
  out.dense_future = dense.futures;
  tokens = std::move(dense.tokens);
  if (fr_encoder_) tokens = local_self_attention(g, store_, std::span(&*fr_encoder_, 1), tokens, config_.knn, unit);
  out.tokens = tokens;

  DecoderContext ctx;
  ctx.intention_query = static_intention_query(g, store_, static_query_, intentions_, unit);
  ctx.dynamic_mlp = &dynamic_query_;
  ctx.map_collect = config_.map_collect;
  ctx.max_layers = config_.decoder_layers + (fr_decoder_ ? 1 : 0);
  ctx.links = config_.links();
  ctx.future_steps = config_.future_steps;
  DecoderState state = initial_decoder_state(g, intentions_, config_.d_model);
  for (const auto & layer : decoder_layers_) state = decoder_layer(g, store_, layer, state, tokens, ctx);
  if (fr_decoder_) state = decoder_layer(g, store_, *fr_decoder_, state, tokens, ctx);
  out.layers = std::move(state.outputs);
  out.output_layer = out.layers.size() - 1;
  return out;
}

PredictionSet MotionTransformer::predict(const VectorizedScene & scene) const
{
  Graph g;
  g.set_grad_enabled(false);
  const auto out = forward(g, scene);
  auto pred = gmm_head(out.layers[out.output_layer].raw.value(), config_.future_steps, config_.links());
  pred.validate();
  return pred;
}

VectorizedScene prepare_scene(const Scenario & scenario, const ModelConfig & config)
{
  return vectorize(to_ego_frame(scenario), config.vectorize_config());
}

}  // namespace mtlb
