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

#ifndef MTLB__SCENE__PCHIP_HPP_
#define MTLB__SCENE__PCHIP_HPP_

#include <span>
#include <vector>

#include "mtlb/scene/scenario.hpp"

namespace mtlb
{

/**
 * @brief Monotone piecewise cubic Hermite interpolation of one channel.
 *
 * Knot slopes follow the Fritsch–Carlson construction (weighted harmonic mean
 * in the interior, shape-preserving three-point formula at the ends), so the
 * interpolant never leaves [min, max] of the two knots bracketing a query.
 * Times must be strictly increasing; queries outside the knot range throw.
 */
std::vector<double> pchip_resample(
  std::span<const double> times, std::span<const double> values, std::span<const double> queries);

/// Unwraps a sequence of angles so consecutive differences lie in (-pi, pi].
std::vector<double> unwrap_angles(std::span<const double> angles);

/**
 * Resamples a timestamped state sequence onto `query_times`, per channel
 * (x, y, z, vx, vy, dims); heading is interpolated on the unwrapped angle and
 * renormalized. Input states must all be valid.
 */
std::vector<AgentState> pchip_resample_states(std::span<const AgentState> states, std::span<const double> query_times);

}  // namespace mtlb

#endif  // MTLB__SCENE__PCHIP_HPP_
