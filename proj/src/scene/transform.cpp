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

#include "mtlb/scene/transform.hpp"

#include <cmath>

#include "mtlb/core/errors.hpp"

namespace mtlb
{

namespace
{

struct Rigid
{
  double c, s;  // rotation applied after translation
  Vec3 shift;   // added before rotation
  double dheading;
  bool translate_first;

  Vec3 point(const Vec3 & p) const
  {
    if (translate_first) {
      const double x = p[0] + shift[0], y = p[1] + shift[1];
      return {c * x - s * y, s * x + c * y, p[2] + shift[2]};
    }
    const double x = c * p[0] - s * p[1], y = s * p[0] + c * p[1];
    return {x + shift[0], y + shift[1], p[2] + shift[2]};
  }
  Vec2 vector(const Vec2 & v) const { return {c * v[0] - s * v[1], s * v[0] + c * v[1]}; }
};

Scenario apply(const Scenario & in, const Rigid & r)
{
  Scenario out = in;
  for (auto & poly : out.map) {
    for (auto & p : poly.points) p = r.point(p);
  }
  for (auto & agent : out.agents) {
    for (auto & st : agent.states) {
      if (!st.valid) continue;
      st.center = r.point(st.center);
      st.velocity = r.vector(st.velocity);
      st.heading = normalize_angle(st.heading + r.dheading);
    }
  }
  return out;
}

}  // namespace

EgoPose focal_pose(const Scenario & s)
{
  const auto & focal = s.focal();
  if (s.current_index >= focal.states.size() || !focal.states[s.current_index].valid) {
    throw DegenerateInputError("scenario '" + s.id + "': focal agent is not valid at the current step");
  }
  const auto & st = focal.states[s.current_index];
  return EgoPose{st.center, st.heading};
}

Scenario to_frame(const Scenario & s, const EgoPose & pose)
{
  const Rigid r{
    std::cos(-pose.heading), std::sin(-pose.heading), {-pose.origin[0], -pose.origin[1], -pose.origin[2]},
    -pose.heading, true};
  return apply(s, r);
}

Scenario from_frame(const Scenario & s, const EgoPose & pose)
{
  const Rigid r{std::cos(pose.heading), std::sin(pose.heading), pose.origin, pose.heading, false};
  return apply(s, r);
}

Scenario to_ego_frame(const Scenario & s) { return to_frame(s, focal_pose(s)); }

}  // namespace mtlb
