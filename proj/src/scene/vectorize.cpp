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

#include "mtlb/scene/vectorize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>

#include "mtlb/core/errors.hpp"

namespace mtlb
{

namespace
{

std::size_t type_slot(AgentType t)
{
  switch (t) {
    case AgentType::Vehicle:
      return 0;
    case AgentType::Pedestrian:
      return 1;
    case AgentType::Cyclist:
      return 2;
  }
  return 0;
}

struct Segment
{
  const MapPolyline * source;
  std::size_t begin;
  std::size_t count;
  Vec2 centroid;
};

}  // namespace

VectorizedScene vectorize(const Scenario & s, const VectorizeConfig & config)
{
  if (s.agents.empty()) throw InputError("vectorize: scenario '" + s.id + "' has no agents");
  if (config.history_steps == 0 || config.future_steps == 0 || config.map_segment_points == 0) {
    throw ConfigError("vectorize: history, future and segment lengths must be positive");
  }
  if (config.max_agents == 0) throw ConfigError("vectorize: max_agents must be positive");
  const double unit = config.unit_length;
  const std::size_t P = config.history_steps;
  const std::size_t T = config.future_steps;
  const std::size_t cur = s.current_index;
  const std::size_t n_states = s.state_count();
  const auto hist_step = [&](std::size_t p) -> std::ptrdiff_t {
    return static_cast<std::ptrdiff_t>(cur) - static_cast<std::ptrdiff_t>(P - 1) + static_cast<std::ptrdiff_t>(p);
  };

  // Candidate agents: valid somewhere in the history window.
  struct Candidate
  {
    std::size_t index;
    Vec2 position;
    double distance;
  };
  std::vector<Candidate> candidates;
  const std::size_t focal = s.focal_index();
  for (std::size_t a = 0; a < s.agents.size(); ++a) {
    const auto & track = s.agents[a];
    std::optional<Vec2> last;
    for (std::size_t p = 0; p < P; ++p) {
      const auto k = hist_step(p);
      if (k < 0 || static_cast<std::size_t>(k) >= track.states.size()) continue;
      const auto & st = track.states[static_cast<std::size_t>(k)];
      if (st.valid) last = Vec2{st.center[0], st.center[1]};
    }
    if (!last) {
      if (a == focal) throw DegenerateInputError("vectorize: focal agent has no valid history");
      continue;
    }
    candidates.push_back({a, *last, std::hypot((*last)[0], (*last)[1])});
  }
  std::stable_sort(candidates.begin(), candidates.end(), [&](const Candidate & x, const Candidate & y) {
    if ((x.index == focal) != (y.index == focal)) return x.index == focal;
    return x.distance < y.distance;
  });
  if (candidates.size() > config.max_agents) candidates.resize(config.max_agents);
  const std::size_t Na = candidates.size();

  VectorizedScene out;
  out.agents.kind = PolylineKind::Agents;
  out.agents.data = Tensor({Na, P, kAgentChannels});
  out.agents.mask.assign(Na * P, 0);
  out.agent_futures = Tensor({Na, T, kFutureChannels});
  out.agent_future_mask.assign(Na * T, 0);
  for (std::size_t i = 0; i < Na; ++i) {
    const auto & track = s.agents[candidates[i].index];
    out.agent_ids.push_back(track.id);
    out.agent_positions.push_back(candidates[i].position);
    for (std::size_t p = 0; p < P; ++p) {
      const auto k = hist_step(p);
      if (k < 0 || static_cast<std::size_t>(k) >= track.states.size()) continue;
      const auto & st = track.states[static_cast<std::size_t>(k)];
      if (!st.valid) continue;
      out.agents.mask[i * P + p] = 1;
      double * c = &out.agents.data.at(i, p, 0);
      c[0] = st.center[0] / unit;
      c[1] = st.center[1] / unit;
      c[2] = st.center[2] / unit;
      c[3] = st.velocity[0] / unit;
      c[4] = st.velocity[1] / unit;
      c[5] = std::sin(st.heading);
      c[6] = std::cos(st.heading);
      c[7] = st.dims[0];
      c[8] = st.dims[1];
      c[9] = st.dims[2];
      c[10 + type_slot(track.type)] = 1.0;
      c[13] = (static_cast<double>(k) - static_cast<double>(cur)) / s.sample_rate;
    }
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t k = cur + 1 + t;
      if (k >= n_states || k >= track.states.size()) break;
      const auto & st = track.states[k];
      if (!st.valid) continue;
      out.agent_future_mask[i * T + t] = 1;
      double * f = &out.agent_futures.at(i, t, 0);
      f[0] = st.center[0] / unit;
      f[1] = st.center[1] / unit;
      f[2] = st.velocity[0] / unit;
      f[3] = st.velocity[1] / unit;
    }
  }

  // Focal ground truth in meters.
  {
    const auto & track = s.agents[focal];
    auto & ff = out.focal_future;
    ff.positions = Tensor({T, 2});
    ff.headings.assign(T, 0.0);
    ff.valid.assign(T, 0);
    if (cur < track.states.size() && track.states[cur].valid) {
      const auto & st = track.states[cur];
      ff.current_position = {st.center[0], st.center[1]};
      ff.current_heading = st.heading;
      ff.current_speed = std::hypot(st.velocity[0], st.velocity[1]);
    }
    for (std::size_t t = 0; t < T; ++t) {
      const std::size_t k = cur + 1 + t;
      if (k >= n_states || k >= track.states.size()) break;
      const auto & st = track.states[k];
      if (!st.valid) continue;
      ff.positions.at(t, 0) = st.center[0];
      ff.positions.at(t, 1) = st.center[1];
      ff.headings[t] = st.heading;
      ff.valid[t] = 1;
    }
  }

  // Map: split every polyline into fixed-length segments, keep the nearest ones.
  const std::size_t Pm = config.map_segment_points;
  std::vector<Segment> segments;
  for (const auto & poly : s.map) {
    for (std::size_t b = 0; b < poly.points.size(); b += Pm) {
      const std::size_t cnt = std::min(Pm, poly.points.size() - b);
      Vec2 c{0.0, 0.0};
      for (std::size_t j = 0; j < cnt; ++j) {
        c[0] += poly.points[b + j][0];
        c[1] += poly.points[b + j][1];
      }
      c[0] /= static_cast<double>(cnt);
      c[1] /= static_cast<double>(cnt);
      segments.push_back({&poly, b, cnt, c});
    }
  }
  std::vector<std::size_t> order(segments.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
    return std::hypot(segments[x].centroid[0], segments[x].centroid[1]) <
           std::hypot(segments[y].centroid[0], segments[y].centroid[1]);
  });
  if (order.size() > config.max_map_polylines) order.resize(config.max_map_polylines);
  std::sort(order.begin(), order.end());

  const std::size_t Nm = order.size();
  out.map.kind = PolylineKind::Map;
  out.map.data = Tensor({Nm, Pm, kMapChannels});
  out.map.mask.assign(Nm * Pm, 0);
  for (std::size_t i = 0; i < Nm; ++i) {
    const auto & seg = segments[order[i]];
    const auto & pts = seg.source->points;
    out.map_positions.push_back(seg.centroid);
    for (std::size_t j = 0; j < seg.count; ++j) {
      const std::size_t idx = seg.begin + j;
      Vec2 dir{0.0, 0.0};
      if (pts.size() > 1) {
        const std::size_t a = idx + 1 < pts.size() ? idx : idx - 1;
        const double dx = pts[a + 1][0] - pts[a][0];
        const double dy = pts[a + 1][1] - pts[a][1];
        const double len = std::hypot(dx, dy);
        if (len > 0.0) dir = {dx / len, dy / len};
      }
      out.map.mask[i * Pm + j] = 1;
      double * c = &out.map.data.at(i, j, 0);
      c[0] = pts[idx][0] / unit;
      c[1] = pts[idx][1] / unit;
      c[2] = pts[idx][2] / unit;
      c[3] = dir[0];
      c[4] = dir[1];
      c[5 + static_cast<std::size_t>(seg.source->type)] = 1.0;
    }
  }
  return out;
}

}  // namespace mtlb
