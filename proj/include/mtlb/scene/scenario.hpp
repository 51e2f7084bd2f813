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

#ifndef MTLB__SCENE__SCENARIO_HPP_
#define MTLB__SCENE__SCENARIO_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mtlb
{

// Numeric values follow the Waymo object-type codes and are used on the wire.
enum class AgentType : std::uint8_t { Vehicle = 1, Pedestrian = 2, Cyclist = 3 };

enum class PolylineType : std::uint8_t { Lane = 0, RoadEdge = 1, Crosswalk = 2 };

std::string_view to_string(AgentType type);
std::string_view to_string(PolylineType type);
AgentType agent_type_from_code(int code);

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

struct AgentState
{
  double t{0.0};
  Vec3 center{};
  Vec2 velocity{};
  double heading{0.0};  // (-pi, pi]
  Vec3 dims{};          // length, width, height
  bool valid{false};

  bool operator==(const AgentState &) const = default;
};

struct AgentTrack
{
  std::int64_t id{0};
  AgentType type{AgentType::Vehicle};
  std::vector<AgentState> states;

  bool operator==(const AgentTrack &) const = default;
};

struct MapPolyline
{
  PolylineType type{PolylineType::Lane};
  std::vector<Vec3> points;

  bool operator==(const MapPolyline &) const = default;
};

/**
 * @brief One driving scene: map, synchronized agent tracks and the focal agent.
 *
 * Every track holds state_count() states on the common grid
 * t_k = start_time + k / sample_rate. States [0, current_index] are history,
 * the rest is the future to be predicted.
 */
struct Scenario
{
  std::string id;
  double duration{0.0};     // seconds
  double sample_rate{10.0}; // Hz
  std::vector<MapPolyline> map;
  std::vector<AgentTrack> agents;
  std::int64_t focal_id{0};
  std::size_t current_index{0};

  std::size_t state_count() const;
  const AgentTrack & focal() const;
  std::size_t focal_index() const;

  /// Throws InputError when any structural invariant is broken.
  void validate() const;

  bool operator==(const Scenario &) const = default;
};

/// Wraps an angle into (-pi, pi].
double normalize_angle(double angle);

}  // namespace mtlb

#endif  // MTLB__SCENE__SCENARIO_HPP_
