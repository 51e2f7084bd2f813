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

#ifndef MTLB__SCENE__VECTORIZE_HPP_
#define MTLB__SCENE__VECTORIZE_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mtlb/core/tensor.hpp"
#include "mtlb/scene/scenario.hpp"

namespace mtlb
{

enum class PolylineKind { Agents, Map };

// Agent channel layout: x y z | vx vy | sin cos | length width height |
// one-hot(vehicle, pedestrian, cyclist) | time offset (s).
inline constexpr std::size_t kAgentChannels = 14;
// Map channel layout: x y z | dir_x dir_y | one-hot(lane, road_edge, crosswalk).
inline constexpr std::size_t kMapChannels = 8;
// Dense future state per step: x y vx vy.
inline constexpr std::size_t kFutureChannels = 4;

struct PolylineBatch
{
  Tensor data;             // [N x P x C]
  std::vector<char> mask;  // [N x P]
  PolylineKind kind{PolylineKind::Agents};

  std::size_t count() const { return data.rank() == 3 ? data.dim(0) : 0; }
  std::size_t points() const { return data.rank() == 3 ? data.dim(1) : 0; }
  std::size_t channels() const { return data.rank() == 3 ? data.dim(2) : 0; }
};

struct VectorizeConfig
{
  std::size_t history_steps{11};  // including the current step
  std::size_t future_steps{30};
  std::size_t map_segment_points{20};
  std::size_t max_agents{16};
  std::size_t max_map_polylines{32};
  /// Meters per model unit; positions and velocities in polyline channels are divided by it.
  double unit_length{10.0};
};

/// Focal-agent ground truth over the prediction horizon, in meters (ego frame).
struct FocalFuture
{
  Tensor positions;        // [T x 2]
  std::vector<double> headings;
  std::vector<char> valid;
  Vec2 current_position{};
  double current_heading{0.0};
  double current_speed{0.0};
};

struct VectorizedScene
{
  PolylineBatch agents;
  PolylineBatch map;
  std::vector<Vec2> agent_positions;  // token positions, meters
  std::vector<Vec2> map_positions;    // segment centroids, meters
  std::vector<std::int64_t> agent_ids;  // row 0 is the focal agent
  FocalFuture focal_future;
  Tensor agent_futures;              // [N_a x T x 4], model units
  std::vector<char> agent_future_mask;  // [N_a x T]
};

/// Builds the agent/map polyline tensors and ground truth of a scenario that is
/// already expressed in the ego-reference frame.
VectorizedScene vectorize(const Scenario & s, const VectorizeConfig & config);

}  // namespace mtlb

#endif  // MTLB__SCENE__VECTORIZE_HPP_
