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

#ifndef MTLB__SCENE__TRANSFORM_HPP_
#define MTLB__SCENE__TRANSFORM_HPP_

#include "mtlb/scene/scenario.hpp"

namespace mtlb
{

/// Rigid pose of the ego-reference frame expressed in world coordinates.
struct EgoPose
{
  Vec3 origin{};
  double heading{0.0};
};

/// Pose of the focal agent at the current index. Throws DegenerateInputError
/// when the focal agent is not valid there.
EgoPose focal_pose(const Scenario & s);

/// World -> frame of `pose` (translate to origin, rotate by -heading).
Scenario to_frame(const Scenario & s, const EgoPose & pose);
/// Frame of `pose` -> world.
Scenario from_frame(const Scenario & s, const EgoPose & pose);

/// Expresses the whole scenario relative to the focal agent's current pose.
Scenario to_ego_frame(const Scenario & s);

}  // namespace mtlb

#endif  // MTLB__SCENE__TRANSFORM_HPP_
