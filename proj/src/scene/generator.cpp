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

#include "mtlb/scene/generator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "mtlb/core/errors.hpp"
#include "mtlb/core/kv_config.hpp"
#include "mtlb/scene/transform.hpp"

namespace mtlb
{

std::string_view to_string(Preset preset)
{
  return preset == Preset::SourceLike ? "source_like" : "target_like";
}

Preset preset_from_string(std::string_view name)
{
  if (name == "source_like") return Preset::SourceLike;
  if (name == "target_like") return Preset::TargetLike;
  throw ConfigError("unknown preset '" + std::string(name) + "' (valid: source_like, target_like)");
}

DomainParams domain_params(Preset preset)
{
  if (preset == Preset::SourceLike) {
    return DomainParams{
      {0.70, 0.07, 0.23},
      8.0, 3.0, 16.0,
      -1.0, 0.5,
      {0.25, 0.25, 0.50},
      {0.45, 0.35, 0.20},
      0.5,
      25.0, 60.0,
      3.6,
      120.0,
      5, 12,
      0.2,
      true};
  }
  return DomainParams{
    {1.0, 0.0, 0.0},
    12.0, 2.5, 20.0,
    1.5, 0.15,
    {0.50, 0.30, 0.20},
    {0.30, 0.15, 0.55},
    0.2,
    80.0, 200.0,
    3.75,
    70.0,
    1, 3,
    0.05,
    false,
    0.15};
}

void GeneratorConfig::validate() const
{
  if (count == 0) throw ConfigError("generator: count must be at least 1");
  if (!(sample_rate > 0.0) || !(duration > 0.0)) throw ConfigError("generator: rate and duration must be positive");
  const double steps = duration * sample_rate;
  if (std::abs(steps - std::round(steps)) > 1e-9) {
    throw ConfigError("generator: duration x rate must be an integer number of steps");
  }
  if (history_steps == 0 || history_steps > static_cast<std::size_t>(std::llround(steps))) {
    throw ConfigError("generator: history must leave at least one future step");
  }
}

GeneratorConfig parse_generator_config(std::string_view text)
{
  const auto kv = KeyValueConfig::parse(text);
  kv.reject_unknown({"seed", "preset", "count", "rate", "duration", "history"});
  GeneratorConfig cfg;
  cfg.seed = kv.get_uint("seed", cfg.seed);
  if (const auto p = kv.get("preset")) cfg.preset = preset_from_string(*p);
  cfg.count = static_cast<std::size_t>(kv.get_uint("count", cfg.count));
  cfg.sample_rate = kv.get_double("rate", cfg.sample_rate);
  cfg.duration = kv.get_double("duration", cfg.duration);
  cfg.history_steps = static_cast<std::size_t>(kv.get_uint("history", cfg.history_steps));
  cfg.validate();
  return cfg;
}

namespace
{

constexpr double kPi = std::numbers::pi;

/// Arc-length parameterized polyline; linear extrapolation past both ends.
class Path
{
public:
  explicit Path(std::vector<Vec2> pts) : pts_(std::move(pts))
  {
    cum_.assign(pts_.size(), 0.0);
    for (std::size_t i = 1; i < pts_.size(); ++i) {
      cum_[i] = cum_[i - 1] + std::hypot(pts_[i][0] - pts_[i - 1][0], pts_[i][1] - pts_[i - 1][1]);
    }
  }

  double length() const { return cum_.back(); }

  void at(double s, Vec2 & pos, Vec2 & tangent) const
  {
    std::size_t i = 0;
    if (s <= 0.0) {
      i = 0;
    } else if (s >= cum_.back()) {
      i = pts_.size() - 2;
    } else {
      i = static_cast<std::size_t>(std::upper_bound(cum_.begin(), cum_.end(), s) - cum_.begin()) - 1;
      if (i >= pts_.size() - 1) i = pts_.size() - 2;
    }
    const double seg = cum_[i + 1] - cum_[i];
    const Vec2 d{(pts_[i + 1][0] - pts_[i][0]) / seg, (pts_[i + 1][1] - pts_[i][1]) / seg};
    const double u = s - cum_[i];
    pos = {pts_[i][0] + d[0] * u, pts_[i][1] + d[1] * u};
    tangent = d;
  }

private:
  std::vector<Vec2> pts_;
  std::vector<double> cum_;
};

std::vector<Vec2> line_points(Vec2 a, Vec2 b, double spacing)
{
  const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
  const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(len / spacing)));
  std::vector<Vec2> out;
  for (std::size_t i = 0; i <= n; ++i) {
    const double u = static_cast<double>(i) / static_cast<double>(n);
    out.push_back({a[0] + (b[0] - a[0]) * u, a[1] + (b[1] - a[1]) * u});
  }
  return out;
}

std::vector<Vec2> arc_points(Vec2 center, double radius, double a0, double a1, double spacing)
{
  const double len = std::abs(a1 - a0) * radius;
  const auto n = std::max<std::size_t>(2, static_cast<std::size_t>(std::ceil(len / spacing)));
  std::vector<Vec2> out;
  for (std::size_t i = 0; i <= n; ++i) {
    const double a = a0 + (a1 - a0) * static_cast<double>(i) / static_cast<double>(n);
    out.push_back({center[0] + radius * std::cos(a), center[1] + radius * std::sin(a)});
  }
  return out;
}

std::vector<Vec2> join(std::vector<Vec2> a, const std::vector<Vec2> & b)
{
  for (const auto & p : b) {
    if (!a.empty() && std::hypot(p[0] - a.back()[0], p[1] - a.back()[1]) < 1e-6) continue;
    a.push_back(p);
  }
  return a;
}

std::vector<Vec2> reversed(std::vector<Vec2> pts)
{
  std::reverse(pts.begin(), pts.end());
  return pts;
}

/// Offsets a polyline to its left by `d` (negative = right).
std::vector<Vec2> offset(const std::vector<Vec2> & pts, double d)
{
  std::vector<Vec2> out(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const std::size_t a = i + 1 < pts.size() ? i : i - 1;
    const double dx = pts[a + 1][0] - pts[a][0];
    const double dy = pts[a + 1][1] - pts[a][1];
    const double len = std::hypot(dx, dy);
    out[i] = {pts[i][0] - dy / len * d, pts[i][1] + dx / len * d};
  }
  return out;
}

MapPolyline to_polyline(PolylineType type, const std::vector<Vec2> & pts)
{
  MapPolyline p;
  p.type = type;
  for (const auto & v : pts) p.points.push_back({v[0], v[1], 0.0});
  return p;
}

/// Everything the agent builders need to know about the synthesized road layout.
struct Layout
{
  std::vector<MapPolyline> map;
  std::vector<Path> drivable;  // candidate neighbor lanes, direction of travel
  Path focal_path{{{0.0, 0.0}, {1.0, 0.0}}};
  double focal_s{0.0};            // arc length of the focal at the current step
  bool focal_turn{false};
  double stop_s{0.0};             // stop line arc length (turn maneuvers)
  double lane_width{3.6};
};

int pick(std::mt19937_64 & rng, const std::array<double, 3> & mix)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double r = u(rng);
  for (int i = 0; i < 3; ++i) {
    if (r < mix[static_cast<std::size_t>(i)]) return i;
    r -= mix[static_cast<std::size_t>(i)];
  }
  return 2;
}

double uniform(std::mt19937_64 & rng, double lo, double hi)
{
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

double normal(std::mt19937_64 & rng, double mean, double sd)
{
  return std::normal_distribution<double>(mean, sd)(rng);
}

Layout straight_layout(const DomainParams & dp, std::mt19937_64 & rng)
{
  const double w = dp.lane_width;
  Layout l;
  l.lane_width = w;
  const double L = dp.road_extent;
  const auto east = line_points({-L, -w / 2}, {L, -w / 2}, 2.0);
  const auto west = line_points({L, w / 2}, {-L, w / 2}, 2.0);
  l.map.push_back(to_polyline(PolylineType::Lane, east));
  l.map.push_back(to_polyline(PolylineType::Lane, west));
  l.map.push_back(to_polyline(PolylineType::RoadEdge, line_points({-L, -w}, {L, -w}, 2.0)));
  l.map.push_back(to_polyline(PolylineType::RoadEdge, line_points({-L, w}, {L, w}, 2.0)));
  l.drivable = {Path(east), Path(west)};
  l.focal_path = Path(east);
  l.focal_s = L + uniform(rng, -20.0, 0.0);
  return l;
}

Layout curve_layout(const DomainParams & dp, std::mt19937_64 & rng)
{
  const double w = dp.lane_width;
  const double radius = uniform(rng, dp.curve_radius_min, dp.curve_radius_max);
  const double dir = uniform(rng, 0.0, 1.0) < 0.5 ? 1.0 : -1.0;  // +1 left, -1 right
  const double L = dp.road_extent;
  const double sweep = std::min(kPi / 2.0 * 1.5, L / radius);
  std::vector<Vec2> center = line_points({-L, 0.0}, {0.0, 0.0}, 2.0);
  const Vec2 c{0.0, dir * radius};
  const double a0 = -dir * kPi / 2.0;
  center = join(center, arc_points(c, radius, a0, a0 + dir * sweep, 2.0));
  const auto east = offset(center, -w / 2);
  const auto west = reversed(offset(center, w / 2));
  Layout l;
  l.lane_width = w;
  l.map.push_back(to_polyline(PolylineType::Lane, east));
  l.map.push_back(to_polyline(PolylineType::Lane, west));
  l.map.push_back(to_polyline(PolylineType::RoadEdge, offset(center, -w)));
  l.map.push_back(to_polyline(PolylineType::RoadEdge, offset(center, w)));
  l.drivable = {Path(east), Path(west)};
  l.focal_path = Path(east);
  l.focal_s = L + uniform(rng, -25.0, 5.0);
  return l;
}

Layout intersection_layout(const DomainParams & dp, std::mt19937_64 & rng, int maneuver)
{
  const double w = dp.lane_width;
  const double in = 8.0, out = std::min(80.0, dp.road_extent);
  Layout l;
  l.lane_width = w;
  // Inbound / outbound lanes per arm (right-hand traffic).
  const auto west_in = line_points({-out, -w / 2}, {-in, -w / 2}, 2.0);
  const auto west_out = line_points({-in, w / 2}, {-out, w / 2}, 2.0);
  const auto east_in = line_points({out, w / 2}, {in, w / 2}, 2.0);
  const auto east_out = line_points({in, -w / 2}, {out, -w / 2}, 2.0);
  const auto south_in = line_points({w / 2, -out}, {w / 2, -in}, 2.0);
  const auto south_out = line_points({-w / 2, -in}, {-w / 2, -out}, 2.0);
  const auto north_in = line_points({-w / 2, out}, {-w / 2, in}, 2.0);
  const auto north_out = line_points({w / 2, in}, {w / 2, out}, 2.0);
  for (const auto * lane : {&west_in, &west_out, &east_in, &east_out, &south_in, &south_out, &north_in, &north_out}) {
    l.map.push_back(to_polyline(PolylineType::Lane, *lane));
  }
  const auto straight_we = line_points({-in, -w / 2}, {in, -w / 2}, 2.0);
  const auto right_turn = arc_points({-in, -in}, in - w / 2, kPi / 2.0, 0.0, 1.0);
  const auto left_turn = arc_points({-in, in}, in + w / 2, -kPi / 2.0, 0.0, 1.0);
  const auto straight_ew = line_points({in, w / 2}, {-in, w / 2}, 2.0);
  const auto straight_sn = line_points({w / 2, -in}, {w / 2, in}, 2.0);
  const auto straight_ns = line_points({-w / 2, in}, {-w / 2, -in}, 2.0);
  for (const auto * c : {&straight_we, &right_turn, &left_turn, &straight_ew, &straight_sn, &straight_ns}) {
    l.map.push_back(to_polyline(PolylineType::Lane, *c));
  }
  // Road edges of the four arms.
  l.map.push_back(to_polyline(PolylineType::RoadEdge, line_points({-out, -w}, {-in, -w}, 2.0)));
  l.map.push_back(to_polyline(PolylineType::RoadEdge, line_points({-out, w}, {-in, w}, 2.0)));
  l.map.push_back(to_polyline(PolylineType::RoadEdge, line_points({in, -w}, {out, -w}, 2.0)));
  l.map.push_back(to_polyline(PolylineType::RoadEdge, line_points({in, w}, {out, w}, 2.0)));
  l.map.push_back(to_polyline(PolylineType::RoadEdge, line_points({-w, -out}, {-w, -in}, 2.0)));
  l.map.push_back(to_polyline(PolylineType::RoadEdge, line_points({w, -out}, {w, -in}, 2.0)));
  l.map.push_back(to_polyline(PolylineType::RoadEdge, line_points({-w, in}, {-w, out}, 2.0)));
  l.map.push_back(to_polyline(PolylineType::RoadEdge, line_points({w, in}, {w, out}, 2.0)));
  if (dp.crosswalks) {
    const double a = in + 1.0, b = in + 4.0;
    auto rect = [&](Vec2 p0, Vec2 p1, Vec2 p2, Vec2 p3) {
      return to_polyline(PolylineType::Crosswalk, join(join(join(join({}, {p0}), {p1}), {p2}), {p3, p0}));
    };
    l.map.push_back(rect({-b, -w}, {-a, -w}, {-a, w}, {-b, w}));
    l.map.push_back(rect({a, -w}, {b, -w}, {b, w}, {a, w}));
    l.map.push_back(rect({-w, -b}, {w, -b}, {w, -a}, {-w, -a}));
    l.map.push_back(rect({-w, a}, {w, a}, {w, b}, {-w, b}));
  }

  l.drivable = {
    Path(join(join(west_in, straight_we), east_out)), Path(join(join(east_in, straight_ew), west_out)),
    Path(join(join(south_in, straight_sn), north_out)), Path(join(join(north_in, straight_ns), south_out))};

  std::vector<Vec2> focal;
  if (maneuver == 0) {
    focal = join(join(west_in, straight_we), east_out);
  } else if (maneuver == 1) {
    focal = join(join(west_in, left_turn), north_out);
  } else {
    focal = join(join(west_in, right_turn), south_out);
  }
  l.focal_path = Path(focal);
  l.focal_turn = maneuver != 0;
  l.stop_s = out - in - 2.0;
  l.focal_s = out + uniform(rng, -40.0, -14.0);
  return l;
}

using SpeedFn = std::function<double(double)>;

/// Arc length travelled between tau0 and tau1 (trapezoid rule, fine step).
double integrate(const SpeedFn & v, double tau0, double tau1)
{
  const double span = tau1 - tau0;
  if (span == 0.0) return 0.0;
  const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(std::abs(span) / 0.005)));
  const double h = span / static_cast<double>(n);
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double a = tau0 + h * static_cast<double>(i);
    acc += 0.5 * (v(a) + v(a + h)) * h;
  }
  return acc;
}

Vec3 draw_dims(AgentType type, std::mt19937_64 & rng)
{
  switch (type) {
    case AgentType::Vehicle:
      return {normal(rng, 4.6, 0.3), normal(rng, 1.9, 0.08), normal(rng, 1.6, 0.1)};
    case AgentType::Cyclist:
      return {normal(rng, 1.8, 0.1), normal(rng, 0.7, 0.05), normal(rng, 1.7, 0.05)};
    case AgentType::Pedestrian:
      return {normal(rng, 0.6, 0.05), normal(rng, 0.6, 0.05), normal(rng, 1.75, 0.08)};
  }
  return {1.0, 1.0, 1.0};
}

struct TimeBase
{
  std::size_t states;
  std::size_t current;
  double rate;
  double tau(std::size_t k) const { return (static_cast<double>(k) - static_cast<double>(current)) / rate; }
};

/// Track following `path`; `v` is speed over relative time, `s_ref` the arc length at `tau_ref`.
AgentTrack follow_path(
  std::int64_t id, AgentType type, const Path & path, const SpeedFn & v, double tau_ref, double s_ref,
  const TimeBase & tb, const Vec3 & dims)
{
  AgentTrack track;
  track.id = id;
  track.type = type;
  for (std::size_t k = 0; k < tb.states; ++k) {
    const double tau = tb.tau(k);
    const double s = s_ref + integrate(v, tau_ref, tau);
    Vec2 pos, tan;
    path.at(s, pos, tan);
    const double speed = v(tau);
    AgentState st;
    st.t = static_cast<double>(k) / tb.rate;
    st.center = {pos[0], pos[1], 0.0};
    st.velocity = {speed * tan[0], speed * tan[1]};
    st.heading = normalize_angle(std::atan2(tan[1], tan[0]));
    st.dims = dims;
    st.valid = true;
    track.states.push_back(st);
  }
  return track;
}

/// Constant speed, constant turn rate motion through `p0` at the current step.
AgentTrack constant_turn(
  std::int64_t id, AgentType type, Vec2 p0, double heading0, double speed, double yaw_rate, const TimeBase & tb,
  const Vec3 & dims)
{
  AgentTrack track;
  track.id = id;
  track.type = type;
  for (std::size_t k = 0; k < tb.states; ++k) {
    const double tau = tb.tau(k);
    const double psi = heading0 + yaw_rate * tau;
    Vec2 pos;
    if (std::abs(yaw_rate) < 1e-9) {
      pos = {p0[0] + speed * tau * std::cos(heading0), p0[1] + speed * tau * std::sin(heading0)};
    } else {
      const double r = speed / yaw_rate;
      pos = {p0[0] + r * (std::sin(psi) - std::sin(heading0)), p0[1] - r * (std::cos(psi) - std::cos(heading0))};
    }
    AgentState st;
    st.t = static_cast<double>(k) / tb.rate;
    st.center = {pos[0], pos[1], 0.0};
    st.velocity = {speed * std::cos(psi), speed * std::sin(psi)};
    st.heading = normalize_angle(psi);
    st.dims = dims;
    st.valid = true;
    track.states.push_back(st);
  }
  return track;
}

SpeedFn cruise(double v_cur, double accel_hist, double accel_future, double v_max)
{
  return [=](double tau) {
    const double v = tau < 0.0 ? v_cur + accel_hist * tau : v_cur + accel_future * tau;
    return std::clamp(v, 0.0, v_max);
  };
}

AgentType draw_type(const DomainParams & dp, std::mt19937_64 & rng)
{
  switch (pick(rng, dp.type_mix)) {
    case 0:
      return AgentType::Vehicle;
    case 1:
      return AgentType::Cyclist;
    default:
      return AgentType::Pedestrian;
  }
}

AgentTrack pedestrian_track(
  std::int64_t id, const Layout & layout, Vec2 anchor, const TimeBase & tb, std::mt19937_64 & rng,
  const Vec3 & dims)
{
  const double side = uniform(rng, 0.0, 1.0) < 0.5 ? -1.0 : 1.0;
  const Vec2 p0{anchor[0] + uniform(rng, -25.0, 25.0), side * (layout.lane_width + uniform(rng, 1.0, 4.0))};
  const double heading = uniform(rng, 0.0, 1.0) < 0.7 ? (uniform(rng, 0.0, 1.0) < 0.5 ? 0.0 : kPi)
                                                        : -side * kPi / 2.0;
  const double speed = std::max(0.2, normal(rng, 1.4, 0.3));
  return constant_turn(id, AgentType::Pedestrian, p0, heading, speed, normal(rng, 0.0, 0.05), tb, dims);
}

}  // namespace

Scenario generate_scenario(const GeneratorConfig & config, std::size_t index)
{
  config.validate();
  const DomainParams dp = domain_params(config.preset);
  std::mt19937_64 rng(mix_seed(config.seed, (static_cast<std::uint64_t>(index) << 1) | (config.preset == Preset::TargetLike)));

  Scenario s;
  s.id = std::string(to_string(config.preset)) + "-" + std::to_string(config.seed) + "-" + std::to_string(index);
  s.duration = config.duration;
  s.sample_rate = config.sample_rate;
  s.current_index = config.history_steps - 1;
  const TimeBase tb{s.state_count(), s.current_index, s.sample_rate};

  const int style = pick(rng, dp.map_style_mix);
  const int maneuver = style == 2 ? pick(rng, dp.turn_mix) : 0;
  Layout layout = style == 0   ? straight_layout(dp, rng)
                  : style == 1 ? curve_layout(dp, rng)
                               : intersection_layout(dp, rng, maneuver);
  s.map = layout.map;

  // Focal agent.
  const AgentType focal_type = draw_type(dp, rng);
  const Vec3 focal_dims = draw_dims(focal_type, rng);
  s.focal_id = 0;
  Vec2 focal_pos, focal_tan;
  layout.focal_path.at(layout.focal_s, focal_pos, focal_tan);
  if (focal_type == AgentType::Vehicle) {
    const double v_cur = std::clamp(normal(rng, dp.vehicle_speed_mean, dp.vehicle_speed_sd), 2.0, dp.vehicle_speed_max);
    const double a_hist = normal(rng, 0.0, 0.3);
    const double a_fut = normal(rng, dp.future_accel_mean, dp.future_accel_sd);
    if (layout.focal_turn && uniform(rng, 0.0, 1.0) < dp.stop_and_turn_prob) {
      // Stop at the stop line, wait, then accelerate through the turn.
      const double tau_stop = uniform(rng, -0.8, 1.5);
      const double wait = uniform(rng, 0.3, 1.0);
      const double decel = uniform(rng, 1.5, 3.0);
      const double go = uniform(rng, 1.5, 2.5);
      const double v_app = v_cur;
      const double v_turn = 7.0;
      const SpeedFn v = [=](double tau) {
        if (tau < tau_stop) return std::min(v_app, decel * (tau_stop - tau));
        if (tau < tau_stop + wait) return 0.0;
        return std::min(v_turn, go * (tau - tau_stop - wait));
      };
      s.agents.push_back(follow_path(0, focal_type, layout.focal_path, v, tau_stop, layout.stop_s, tb, focal_dims));
    } else {
      const double v_max = layout.focal_turn ? std::min(dp.vehicle_speed_max, 9.0) : dp.vehicle_speed_max;
      const SpeedFn v = cruise(std::min(v_cur, v_max), a_hist, a_fut, v_max);
      s.agents.push_back(follow_path(0, focal_type, layout.focal_path, v, 0.0, layout.focal_s, tb, focal_dims));
    }
  } else if (focal_type == AgentType::Cyclist) {
    const double v_cur = std::clamp(normal(rng, 4.5, 1.0), 1.5, 8.0);
    const SpeedFn v = cruise(v_cur, normal(rng, 0.0, 0.2), normal(rng, 0.0, 0.3), 8.0);
    s.agents.push_back(follow_path(0, focal_type, layout.focal_path, v, 0.0, layout.focal_s, tb, focal_dims));
  } else {
    s.agents.push_back(pedestrian_track(0, layout, focal_pos, tb, rng, focal_dims));
  }
  const Vec2 anchor{s.agents[0].states[s.current_index].center[0], s.agents[0].states[s.current_index].center[1]};

  // Neighbors.
  const auto n_neighbors = std::uniform_int_distribution<std::size_t>(dp.neighbors_min, dp.neighbors_max)(rng);
  for (std::size_t n = 0; n < n_neighbors; ++n) {
    const auto id = static_cast<std::int64_t>(n + 1);
    const AgentType type = draw_type(dp, rng);
    const Vec3 dims = draw_dims(type, rng);
    AgentTrack track;
    if (type == AgentType::Pedestrian) {
      track = pedestrian_track(id, layout, anchor, tb, rng, dims);
    } else {
      const std::size_t lane = std::uniform_int_distribution<std::size_t>(0, layout.drivable.size() - 1)(rng);
      const Path & path = layout.drivable[lane];
      // Place the neighbor near the focal along its own lane.
      double best_s = 0.0, best_d = 1e300;
      for (double sv = 0.0; sv <= path.length(); sv += 1.0) {
        Vec2 p, t;
        path.at(sv, p, t);
        const double d = std::hypot(p[0] - anchor[0], p[1] - anchor[1]);
        if (d < best_d) {
          best_d = d;
          best_s = sv;
        }
      }
      const double s_ref = best_s + uniform(rng, -35.0, 35.0);
      const double v_cur = type == AgentType::Vehicle
                             ? std::clamp(normal(rng, dp.vehicle_speed_mean, dp.vehicle_speed_sd), 0.5, dp.vehicle_speed_max)
                             : std::clamp(normal(rng, 4.5, 1.0), 1.5, 8.0);
      const double a_fut = type == AgentType::Vehicle ? normal(rng, dp.future_accel_mean, dp.future_accel_sd)
                                                      : normal(rng, 0.0, 0.3);
      const SpeedFn v = cruise(v_cur, normal(rng, 0.0, 0.3), a_fut, type == AgentType::Vehicle ? dp.vehicle_speed_max : 8.0);
      track = follow_path(id, type, path, v, 0.0, s_ref, tb, dims);
    }
    if (uniform(rng, 0.0, 1.0) < dp.late_appearance_prob) {
      const auto first = std::uniform_int_distribution<std::size_t>(1, s.current_index)(rng);
      for (std::size_t k = 0; k < first; ++k) track.states[k] = AgentState{track.states[k].t};
    }
    s.agents.push_back(std::move(track));
  }

  if (dp.history_noise > 0.0) {
    for (auto & track : s.agents) {
      for (std::size_t k = 0; k <= s.current_index; ++k) {
        auto & st = track.states[k];
        if (!st.valid) continue;
        st.center[0] += normal(rng, 0.0, dp.history_noise);
        st.center[1] += normal(rng, 0.0, dp.history_noise);
        st.velocity[0] += normal(rng, 0.0, 2.0 * dp.history_noise);
        st.velocity[1] += normal(rng, 0.0, 2.0 * dp.history_noise);
      }
    }
  }

  // Random placement in the world.
  const EgoPose world{{uniform(rng, -500.0, 500.0), uniform(rng, -500.0, 500.0), 0.0}, uniform(rng, -kPi, kPi)};
  s = from_frame(s, world);
  s.validate();
  return s;
}

std::vector<Scenario> generate_synthetic(const GeneratorConfig & config)
{
  config.validate();
  std::vector<Scenario> out;
  out.reserve(config.count);
  for (std::size_t i = 0; i < config.count; ++i) out.push_back(generate_scenario(config, i));
  return out;
}

}  // namespace mtlb
