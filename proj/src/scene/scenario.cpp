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

#include "mtlb/scene/scenario.hpp"

#include <cmath>
#include <numbers>
#include <set>

#include "mtlb/core/errors.hpp"

namespace mtlb
{

std::string_view to_string(AgentType type)
{
  switch (type) {
    case AgentType::Vehicle:
      return "vehicle";
    case AgentType::Pedestrian:
      return "pedestrian";
    case AgentType::Cyclist:
      return "cyclist";
  }
  return "?";
}

std::string_view to_string(PolylineType type)
{
  switch (type) {
    case PolylineType::Lane:
      return "lane";
    case PolylineType::RoadEdge:
      return "road_edge";
    case PolylineType::Crosswalk:
      return "crosswalk";
  }
  return "?";
}

AgentType agent_type_from_code(int code)
{
  switch (code) {
    case 1:
      return AgentType::Vehicle;
    case 2:
      return AgentType::Pedestrian;
    case 3:
      return AgentType::Cyclist;
    default:
      throw InputError("unknown agent type code " + std::to_string(code));
  }
}

double normalize_angle(double angle)
{
  constexpr double pi = std::numbers::pi;
  if (angle > -pi && angle <= pi) return angle;
  double a = std::fmod(angle + pi, 2.0 * pi);
  if (a < 0.0) a += 2.0 * pi;
  a -= pi;
  // fmod maps +pi to -pi; keep the half-open interval (-pi, pi].
  if (a <= -pi) a += 2.0 * pi;
  return a;
}

std::size_t Scenario::state_count() const
{
  return static_cast<std::size_t>(std::llround(duration * sample_rate)) + 1;
}

std::size_t Scenario::focal_index() const
{
  for (std::size_t i = 0; i < agents.size(); ++i) {
    if (agents[i].id == focal_id) return i;
  }
  throw InputError("scenario '" + id + "' has no agent with focal id " + std::to_string(focal_id));
}

const AgentTrack & Scenario::focal() const { return agents[focal_index()]; }

void Scenario::validate() const
{
  constexpr double pi = std::numbers::pi;
  if (!(sample_rate > 0.0) || !(duration > 0.0)) throw InputError("scenario '" + id + "': non-positive rate/duration");
  const double steps = duration * sample_rate;
  if (std::abs(steps - std::round(steps)) > 1e-9) {
    throw InputError("scenario '" + id + "': duration x rate is not an integer step count");
  }
  const std::size_t n = state_count();
  if (current_index >= n) throw InputError("scenario '" + id + "': current index beyond the time base");
  if (agents.empty()) throw InputError("scenario '" + id + "' has no agents");

  std::set<std::int64_t> ids;
  std::size_t focal_hits = 0;
  const double t0 = agents.front().states.empty() ? 0.0 : agents.front().states.front().t;
  for (const auto & a : agents) {
    if (!ids.insert(a.id).second) throw InputError("scenario '" + id + "': duplicate agent id");
    if (a.id == focal_id) ++focal_hits;
    if (a.states.size() != n) {
      throw InputError(
        "scenario '" + id + "': agent " + std::to_string(a.id) + " has " + std::to_string(a.states.size()) +
        " states, expected " + std::to_string(n));
    }
    for (std::size_t k = 0; k < n; ++k) {
      const auto & s = a.states[k];
      if (std::abs(s.t - (t0 + static_cast<double>(k) / sample_rate)) > 1e-6) {
        throw InputError("scenario '" + id + "': agent tracks do not share the time base");
      }
      if (!s.valid) continue;
      if (!(s.heading > -pi && s.heading <= pi)) throw InputError("scenario '" + id + "': heading not normalized");
      if (!(s.dims[0] > 0.0 && s.dims[1] > 0.0 && s.dims[2] > 0.0)) {
        throw InputError("scenario '" + id + "': non-positive dimensions on a valid state");
      }
      for (double v : {s.center[0], s.center[1], s.center[2], s.velocity[0], s.velocity[1]}) {
        if (!std::isfinite(v)) throw InputError("scenario '" + id + "': non-finite state");
      }
    }
  }
  if (focal_hits != 1) throw InputError("scenario '" + id + "' needs exactly one focal agent");
  for (const auto & p : map) {
    if (p.points.empty()) throw InputError("scenario '" + id + "': empty map polyline");
  }
}

}  // namespace mtlb
