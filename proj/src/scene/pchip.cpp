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

#include "mtlb/scene/pchip.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mtlb/core/errors.hpp"

namespace mtlb
{

namespace
{

int sign(double v) { return (v > 0.0) - (v < 0.0); }

// Endpoint slope: non-centered three-point formula, clipped to keep shape.
double edge_slope(double h0, double h1, double m0, double m1)
{
  double d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
  if (sign(d) != sign(m0)) {
    d = 0.0;
  } else if (sign(m0) != sign(m1) && std::abs(d) > std::abs(3.0 * m0)) {
    d = 3.0 * m0;
  }
  return d;
}

std::vector<double> knot_slopes(std::span<const double> t, std::span<const double> y)
{
  const std::size_t n = t.size();
  std::vector<double> h(n - 1), m(n - 1), d(n, 0.0);
  for (std::size_t k = 0; k + 1 < n; ++k) {
    h[k] = t[k + 1] - t[k];
    m[k] = (y[k + 1] - y[k]) / h[k];
  }
  if (n == 2) {
    d[0] = d[1] = m[0];
    return d;
  }
  for (std::size_t k = 1; k + 1 < n; ++k) {
    if (sign(m[k - 1]) * sign(m[k]) <= 0) {
      d[k] = 0.0;
      continue;
    }
    const double w1 = 2.0 * h[k] + h[k - 1];
    const double w2 = h[k] + 2.0 * h[k - 1];
    d[k] = (w1 + w2) / (w1 / m[k - 1] + w2 / m[k]);
  }
  d[0] = edge_slope(h[0], h[1], m[0], m[1]);
  d[n - 1] = edge_slope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
  return d;
}

}  // namespace

std::vector<double> pchip_resample(
  std::span<const double> times, std::span<const double> values, std::span<const double> queries)
{
  const std::size_t n = times.size();
  if (n != values.size()) throw InputError("pchip: times and values differ in length");
  if (n < 2) throw InputError("pchip: need at least two samples");
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (!(times[k + 1] > times[k])) throw InputError("pchip: sample times must be strictly increasing");
  }
  const auto d = knot_slopes(times, values);
  std::vector<double> out;
  out.reserve(queries.size());
  for (double q : queries) {
    if (q < times.front() || q > times.back()) {
      throw InputError("pchip: query time " + std::to_string(q) + " requires extrapolation");
    }
    // Interval k with times[k] <= q <= times[k+1].
    auto it = std::upper_bound(times.begin(), times.end(), q);
    std::size_t k = it == times.begin() ? 0 : static_cast<std::size_t>(it - times.begin()) - 1;
    if (k >= n - 1) k = n - 2;
    if (q == times[k]) {
      out.push_back(values[k]);
      continue;
    }
    if (q == times[k + 1]) {
      out.push_back(values[k + 1]);
      continue;
    }
    const double h = times[k + 1] - times[k];
    const double s = (q - times[k]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    out.push_back(h00 * values[k] + h10 * h * d[k] + h01 * values[k + 1] + h11 * h * d[k + 1]);
  }
  return out;
}

std::vector<double> unwrap_angles(std::span<const double> angles)
{
  std::vector<double> out(angles.begin(), angles.end());
  for (std::size_t k = 1; k < out.size(); ++k) {
    out[k] = out[k - 1] + normalize_angle(angles[k] - angles[k - 1]);
  }
  return out;
}

std::vector<AgentState> pchip_resample_states(std::span<const AgentState> states, std::span<const double> query_times)
{
  const std::size_t n = states.size();
  std::vector<double> t(n);
  std::vector<std::vector<double>> channels(9, std::vector<double>(n));
  std::vector<double> heading(n);
  for (std::size_t k = 0; k < n; ++k) {
    const auto & s = states[k];
    if (!s.valid) throw InputError("pchip: cannot resample invalid states");
    t[k] = s.t;
    channels[0][k] = s.center[0];
    channels[1][k] = s.center[1];
    channels[2][k] = s.center[2];
    channels[3][k] = s.velocity[0];
    channels[4][k] = s.velocity[1];
    channels[5][k] = s.dims[0];
    channels[6][k] = s.dims[1];
    channels[7][k] = s.dims[2];
    heading[k] = s.heading;
  }
  channels[8] = unwrap_angles(heading);
  std::vector<std::vector<double>> resampled;
  resampled.reserve(channels.size());
  for (const auto & c : channels) resampled.push_back(pchip_resample(t, c, query_times));

  std::vector<AgentState> out(query_times.size());
  for (std::size_t q = 0; q < query_times.size(); ++q) {
    auto & s = out[q];
    s.t = query_times[q];
    s.center = {resampled[0][q], resampled[1][q], resampled[2][q]};
    s.velocity = {resampled[3][q], resampled[4][q]};
    s.dims = {resampled[5][q], resampled[6][q], resampled[7][q]};
    s.heading = normalize_angle(resampled[8][q]);
    s.valid = true;
  }
  return out;
}

}  // namespace mtlb
