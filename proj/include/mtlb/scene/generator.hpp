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

#ifndef MTLB__SCENE__GENERATOR_HPP_
#define MTLB__SCENE__GENERATOR_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mtlb/scene/scenario.hpp"

namespace mtlb
{

enum class Preset { SourceLike, TargetLike };

std::string_view to_string(Preset preset);
/// Throws ConfigError listing the valid names.
Preset preset_from_string(std::string_view name);

/**
 * @brief Distribution knobs of one synthetic domain.
 *
 * The source/target shift is injected only through these values: agent-type
 * mix, speed level, post-current acceleration tendency, turn preference, map
 * style and curvature, scene density, observation noise.
 */
struct DomainParams
{
  std::array<double, 3> type_mix;         // vehicle, cyclist, pedestrian
  double vehicle_speed_mean;              // m/s
  double vehicle_speed_sd;
  double vehicle_speed_max;
  double future_accel_mean;               // m/s^2 applied after the current step
  double future_accel_sd;
  std::array<double, 3> map_style_mix;    // straight, curve, intersection
  std::array<double, 3> turn_mix;         // straight, left, right at intersections
  double stop_and_turn_prob;              // share of intersection turns that stop first
  double curve_radius_min;
  double curve_radius_max;
  double lane_width;
  double road_extent;                     // half length of generated roads, meters
  std::size_t neighbors_min;
  std::size_t neighbors_max;
  double late_appearance_prob;            // neighbor first observed mid-history
  bool crosswalks;
  double history_noise;                   // tracking jitter on observed states, meters
};

DomainParams domain_params(Preset preset);

struct GeneratorConfig
{
  std::uint64_t seed{0};
  Preset preset{Preset::SourceLike};
  std::size_t count{1};
  double sample_rate{10.0};
  double duration{4.0};  // 41 states: 11 history incl. current + 30 future
  std::size_t history_steps{11};

  void validate() const;
};

/// Parses `key=value` lines (seed, preset, count, rate, duration, history).
GeneratorConfig parse_generator_config(std::string_view text);

/// Deterministic per (seed, preset, index).
Scenario generate_scenario(const GeneratorConfig & config, std::size_t index);
std::vector<Scenario> generate_synthetic(const GeneratorConfig & config);

}  // namespace mtlb

#endif  // MTLB__SCENE__GENERATOR_HPP_
