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

#include <algorithm>
#include <chrono>
#include <cmath>
#include <future>
#include <numbers>
#include <random>
#include <thread>

#include "doctest.h"
#include "mtlb/core/errors.hpp"
#include "mtlb/scene/dataset.hpp"
#include "mtlb/scene/generator.hpp"
#include "mtlb/scene/ingest.hpp"
#include "mtlb/scene/pchip.hpp"
#include "mtlb/scene/transform.hpp"
#include "mtlb/scene/vectorize.hpp"

using namespace mtlb;

namespace
{

AgentTrack straight_track(std::int64_t id, Vec2 start, Vec2 vel, std::size_t n, double rate)
{
  AgentTrack tr;
  tr.id = id;
  for (std::size_t k = 0; k < n; ++k) {
    const double t = static_cast<double>(k) / rate;
    AgentState st;
    st.t = t;
    st.center = {start[0] + vel[0] * t, start[1] + vel[1] * t, 0.0};
    st.velocity = vel;
    st.heading = std::atan2(vel[1], vel[0]);
    st.dims = {4.5, 1.8, 1.5};
    st.valid = true;
    tr.states.push_back(st);
  }
  return tr;
}

// Three agents on 41 states with a 45-point lane.
Scenario small_scene()
{
  Scenario s;
  s.id = "unit";
  s.duration = 4.0;
  s.sample_rate = 10.0;
  s.current_index = 10;
  s.focal_id = 0;
  s.agents.push_back(straight_track(0, {-10.0, 0.0}, {10.0, 0.0}, 41, 10.0));
  s.agents.push_back(straight_track(1, {-5.0, 3.5}, {8.0, 0.0}, 41, 10.0));
  s.agents.push_back(straight_track(2, {20.0, -3.5}, {-9.0, 0.0}, 41, 10.0));
  MapPolyline lane;
  for (int i = 0; i < 45; ++i) lane.points.push_back({-20.0 + i, 0.0, 0.0});
  s.map.push_back(lane);
  return s;
}

double pairwise_dist(const Scenario & s, std::size_t a, std::size_t b, std::size_t k)
{
  const auto & p = s.agents[a].states[k].center;
  const auto & q = s.agents[b].states[k].center;
  return std::hypot(p[0] - q[0], p[1] - q[1]);
}

}  // namespace

TEST_CASE("generator is deterministic per seed, preset and index")
{
  GeneratorConfig cfg;
  cfg.seed = 42;
  cfg.count = 5;
  cfg.preset = Preset::SourceLike;
  const auto a = make_dataset(DatasetRole::Source, generate_synthetic(cfg), 1);
  const auto b = make_dataset(DatasetRole::Source, generate_synthetic(cfg), 1);
  CHECK(encode_dataset(a) == encode_dataset(b));
  CHECK(generate_scenario(cfg, 3) == a.scenarios[3]);
  cfg.seed = 43;
  CHECK_FALSE(generate_scenario(cfg, 3) == a.scenarios[3]);
}

TEST_CASE("target-like scenes contain vehicles only")
{
  GeneratorConfig cfg;
  cfg.seed = 7;
  cfg.count = 60;
  cfg.preset = Preset::TargetLike;
  for (const auto & s : generate_synthetic(cfg)) {
    s.validate();
    for (const auto & a : s.agents) CHECK(a.type == AgentType::Vehicle);
  }
}

TEST_CASE("source-like type mix is within 3 points of 70/7/23")
{
  GeneratorConfig cfg;
  cfg.seed = 11;
  cfg.count = 200;
  std::array<double, 3> counts{};
  double total = 0.0;
  for (const auto & s : generate_synthetic(cfg)) {
    for (const auto & a : s.agents) {
      counts[a.type == AgentType::Vehicle ? 0 : a.type == AgentType::Cyclist ? 1 : 2] += 1.0;
      total += 1.0;
    }
  }
  REQUIRE(total >= 1000.0);
  CHECK(std::abs(counts[0] / total - 0.70) < 0.03);
  CHECK(std::abs(counts[1] / total - 0.07) < 0.03);
  CHECK(std::abs(counts[2] / total - 0.23) < 0.03);
}

TEST_CASE("generator config parsing")
{
  const auto cfg = parse_generator_config("seed=9\npreset=target_like\ncount=12\n");
  CHECK(cfg.seed == 9);
  CHECK(cfg.preset == Preset::TargetLike);
  CHECK(cfg.count == 12);
  CHECK_THROWS_AS(parse_generator_config("count=0\n"), ConfigError);
  CHECK_THROWS_AS(parse_generator_config("preset=highway\n"), ConfigError);
  CHECK_THROWS_AS(parse_generator_config("speed=3\n"), ConfigError);
}

TEST_CASE("pchip reproduces knots and lines")
{
  const std::vector<double> t{0.0, 0.4, 1.0, 1.7, 2.0};
  std::vector<double> y;
  for (double x : t) y.push_back(2.0 * x);
  const auto at_knots = pchip_resample(t, y, t);
  for (std::size_t i = 0; i < t.size(); ++i) CHECK(at_knots[i] == y[i]);
  const std::vector<double> q{0.5};
  CHECK(pchip_resample(t, y, q)[0] == doctest::Approx(1.0).epsilon(1e-14));
  const std::vector<double> bad{2.5};
  CHECK_THROWS_AS(pchip_resample(t, y, bad), InputError);
  const std::vector<double> dup{0.0, 0.0, 1.0};
  CHECK_THROWS_AS(pchip_resample(dup, std::vector<double>{0.0, 1.0, 2.0}, q), InputError);
}

TEST_CASE("pchip is monotone and never overshoots neighbouring knots")
{
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> step(0.05, 1.0);
  std::uniform_real_distribution<double> rise(0.0, 3.0);
  for (int channel = 0; channel < 1000; ++channel) {
    std::vector<double> t{0.0}, y{0.0};
    for (int i = 0; i < 7; ++i) {
      t.push_back(t.back() + step(rng));
      // Include flat stretches, which are where naive cubics overshoot.
      y.push_back(y.back() + (i % 3 == 1 ? 0.0 : rise(rng)));
    }
    std::vector<double> q;
    for (int i = 0; i <= 50; ++i) q.push_back(std::min(t.back(), t.back() * i / 50.0));
    const auto v = pchip_resample(t, y, q);
    for (std::size_t i = 1; i < v.size(); ++i) REQUIRE(v[i] >= v[i - 1] - 1e-12);
    for (std::size_t i = 0; i < q.size(); ++i) {
      const auto hi = std::upper_bound(t.begin(), t.end(), q[i]);
      const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(hi - t.begin()), t.size() - 1);
      const std::size_t lo = j == 0 ? 0 : j - 1;
      REQUIRE(v[i] >= std::min(y[lo], y[j]) - 1e-12);
      REQUIRE(v[i] <= std::max(y[lo], y[j]) + 1e-12);
    }
  }
}

TEST_CASE("heading resampling crosses the branch cut without a jump")
{
  std::vector<AgentState> states;
  for (int k = 0; k < 4; ++k) {
    AgentState st;
    st.t = k * 0.1;
    st.heading = normalize_angle(std::numbers::pi - 0.1 + 0.07 * k);
    st.valid = true;
    states.push_back(st);
  }
  const std::vector<double> q{0.05, 0.15, 0.25};
  const auto out = pchip_resample_states(states, q);
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double expected = normalize_angle(std::numbers::pi - 0.1 + 0.7 * q[i]);
    CHECK(std::abs(normalize_angle(out[i].heading - expected)) < 1e-9);
  }
}

TEST_CASE("ego frame: identity, hand example, isometry and round trip")
{
  Scenario s = small_scene();
  // Shift so the focal agent is at the origin with heading 0 at the current step.
  const EgoPose at_focal = focal_pose(s);
  const Scenario ego = to_ego_frame(s);
  const Scenario again = to_ego_frame(ego);
  for (std::size_t a = 0; a < ego.agents.size(); ++a) {
    for (std::size_t k = 0; k < ego.state_count(); ++k) {
      for (int c = 0; c < 2; ++c) {
        CHECK(std::abs(again.agents[a].states[k].center[c] - ego.agents[a].states[k].center[c]) < 1e-12);
      }
    }
  }

  Scenario hand;
  hand.id = "hand";
  hand.duration = 0.1;
  hand.sample_rate = 10.0;
  hand.current_index = 0;
  hand.focal_id = 0;
  AgentTrack focal, other;
  focal.id = 0;
  other.id = 1;
  AgentState f{0.0, {10.0, 0.0, 0.0}, {0.0, 1.0}, std::numbers::pi / 2, {4.5, 1.8, 1.5}, true};
  AgentState o{0.0, {10.0, 5.0, 0.0}, {0.0, 2.0}, std::numbers::pi / 2, {4.5, 1.8, 1.5}, true};
  focal.states = {f, f};
  other.states = {o, o};
  focal.states[1].t = other.states[1].t = 0.1;
  hand.agents = {focal, other};
  const Scenario he = to_ego_frame(hand);
  CHECK(std::abs(he.agents[1].states[0].center[0] - 5.0) < 1e-12);
  CHECK(std::abs(he.agents[1].states[0].center[1]) < 1e-12);
  CHECK(std::abs(he.agents[1].states[0].velocity[0] - 2.0) < 1e-12);
  CHECK(std::abs(he.agents[1].states[0].heading) < 1e-12);

  for (std::size_t k = 0; k < s.state_count(); k += 5) {
    for (std::size_t a = 0; a < 3; ++a) {
      for (std::size_t b = a + 1; b < 3; ++b) {
        CHECK(std::abs(pairwise_dist(s, a, b, k) - pairwise_dist(ego, a, b, k)) < 1e-9);
      }
    }
  }
  const Scenario back = from_frame(ego, at_focal);
  double worst = 0.0;
  for (std::size_t a = 0; a < 3; ++a) {
    for (std::size_t k = 0; k < s.state_count(); ++k) {
      for (int c = 0; c < 3; ++c) {
        worst = std::max(worst, std::abs(back.agents[a].states[k].center[c] - s.agents[a].states[k].center[c]));
      }
    }
  }
  for (std::size_t i = 0; i < s.map[0].points.size(); ++i) {
    worst = std::max(worst, std::abs(back.map[0].points[i][1] - s.map[0].points[i][1]));
  }
  CHECK(worst < 1e-9);

  Scenario broken = s;
  broken.agents[0].states[s.current_index].valid = false;
  CHECK_THROWS_AS(to_ego_frame(broken), DegenerateInputError);
}

TEST_CASE("vectorize shapes, channels and masks")
{
  Scenario s = small_scene();
  // Agent 2 first observed at history step 5 of 11.
  for (std::size_t k = 0; k < 5; ++k) s.agents[2].states[k] = AgentState{s.agents[2].states[k].t};
  const auto v = vectorize(to_ego_frame(s), VectorizeConfig{});
  CHECK(v.agents.count() == 3);
  CHECK(v.agents.points() == 11);
  CHECK(v.agents.channels() == 14);
  CHECK(v.map.points() == 20);
  CHECK(v.map.channels() == 8);
  CHECK(v.map.count() == 3);
  CHECK(v.agent_ids[0] == 0);
  const std::size_t row2 = static_cast<std::size_t>(std::find(v.agent_ids.begin(), v.agent_ids.end(), 2) - v.agent_ids.begin());
  for (std::size_t p = 0; p < 11; ++p) {
    CHECK(v.agents.mask[p] == 1);
    CHECK(v.agents.mask[row2 * 11 + p] == (p >= 5 ? 1 : 0));
  }
  // Last map segment holds 5 of 20 points.
  std::size_t valid_last = 0;
  for (std::size_t p = 0; p < 20; ++p) valid_last += v.map.mask[2 * 20 + p];
  CHECK(valid_last == 5);
  // Focal current state: origin, heading 0, time offset 0, vehicle one-hot.
  const auto cur = [&](std::size_t c) { return v.agents.data.at(0, 10, c); };
  CHECK(std::abs(cur(0)) < 1e-12);
  CHECK(std::abs(cur(5)) < 1e-12);
  CHECK(cur(6) == doctest::Approx(1.0));
  CHECK(cur(10) == 1.0);
  CHECK(cur(13) == 0.0);
  CHECK(v.agents.data.at(0, 0, 13) == doctest::Approx(-1.0));
  CHECK(v.focal_future.positions.dim(0) == 30);
  CHECK(v.agent_futures.dim(0) == 3);
  CHECK(v.agent_futures.dim(1) == 30);
  CHECK(v.agent_futures.dim(2) == 4);
  // Ground truth in meters: 10 m/s for 0.1 s per step.
  CHECK(v.focal_future.positions.at(0, 0) == doctest::Approx(1.0));
  CHECK(v.focal_future.positions.at(29, 0) == doctest::Approx(30.0));

  Scenario empty = s;
  empty.agents.clear();
  CHECK_THROWS_AS(vectorize(empty, VectorizeConfig{}), InputError);
}

TEST_CASE("datagram parsing follows the wire format")
{
  const auto d = parse_datagram("1|0.200|12.5|-3.0|0.0|8.2|0.1|0.05|4.5|1.8|1.5|1");
  const auto & r = std::get<StateRecord>(d);
  CHECK(r.id == 1);
  CHECK(r.type == AgentType::Vehicle);
  CHECK(r.state.t == 0.2);
  CHECK(r.state.center == Vec3{12.5, -3.0, 0.0});
  CHECK(r.state.velocity == Vec2{8.2, 0.1});
  CHECK(r.state.heading == 0.05);
  CHECK(r.state.dims == Vec3{4.5, 1.8, 1.5});
  CHECK(std::get<StateRecord>(parse_datagram(format_datagram(r))).state == r.state);
  CHECK(std::get<EndMarker>(parse_datagram("END|scene-7")).scenario_id == "scene-7");
  CHECK_THROWS_AS(parse_datagram("1|0.2|x|0|0|0|0|0|1|1|1|1"), InputError);
  CHECK_THROWS_AS(parse_datagram("1|0.2|0|0"), InputError);
  CHECK_THROWS_AS(parse_datagram("1|0.2|0|0|0|0|0|0|1|1|1|9"), InputError);
}

namespace
{

std::vector<std::string> track_lines(std::int64_t id, double rate, double t_end, double speed)
{
  std::vector<std::string> out;
  for (int k = 0; k / rate <= t_end + 1e-12; ++k) {
    StateRecord r;
    r.id = id;
    r.state.t = k / rate;
    r.state.center = {speed * r.state.t, 3.0 * static_cast<double>(id), 0.0};
    r.state.velocity = {speed, 0.0};
    r.state.dims = {4.5, 1.8, 1.5};
    r.state.valid = true;
    out.push_back(format_datagram(r));
  }
  return out;
}

}  // namespace

TEST_CASE("assembler reorders, counts bad records and resamples 7 Hz to 10 Hz")
{
  ScenarioAssembler asm_(IngestConfig{});
  auto lines = track_lines(1, 7.0, 4.0, 8.0);
  std::swap(lines[3], lines[4]);
  for (const auto & l : lines) asm_.feed(l);
  asm_.feed("garbage");
  asm_.feed("1|0.1|0|0|0|0|0|0|1|1|1");
  CHECK(asm_.stats().malformed == 2);
  const auto s = asm_.feed("END|seven");
  REQUIRE(s.has_value());
  CHECK(s->id == "seven");
  CHECK(s->state_count() == 41);
  for (std::size_t k = 0; k < s->state_count(); ++k) {
    CHECK(s->agents[0].states[k].t == static_cast<double>(k) / 10.0);
    CHECK(s->agents[0].states[k].center[0] == doctest::Approx(0.8 * k).epsilon(1e-9));
  }
}

TEST_CASE("out-of-order pair is stored sorted; late samples are dropped")
{
  ScenarioAssembler asm_(IngestConfig{});
  auto lines = track_lines(1, 10.0, 2.0, 5.0);
  std::swap(lines[2], lines[3]);  // t=0.3 arrives before t=0.2
  for (const auto & l : lines) asm_.feed(l);
  asm_.feed(lines[0]);  // two seconds old, beyond the reorder window
  CHECK(asm_.stats().late == 1);
  const auto s = asm_.build("sorted");
  for (std::size_t k = 1; k < s.state_count(); ++k) {
    CHECK(s.agents[0].states[k].center[0] > s.agents[0].states[k - 1].center[0]);
  }
}

TEST_CASE("three end markers yield three scenarios in a replay")
{
  ScenarioAssembler asm_(IngestConfig{});
  for (int n = 0; n < 3; ++n) {
    for (const auto & l : track_lines(1, 10.0, 2.0, 6.0)) asm_.feed(l);
    for (const auto & l : track_lines(2, 10.0, 2.0, 7.0)) asm_.feed(l);
    asm_.feed("END|s" + std::to_string(n));
  }
  const auto done = asm_.take_finished();
  CHECK(done.size() == 3);
  CHECK(asm_.stats().scenarios == 3);
  for (const auto & s : done) CHECK(s.agents.size() == 2);
}

TEST_CASE("udp listener assembles datagrams sent to localhost")
{
  const std::uint16_t port = 47613;
  IngestStats stats;
  auto rx = std::async(std::launch::async, [&] { return ingest_udp(port, IngestConfig{}, 1, 3.0, nullptr, &stats); });
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  auto lines = track_lines(4, 10.0, 2.0, 9.0);
  lines.push_back("END|udp");
  send_datagrams(port, lines);
  const auto got = rx.get();
  REQUIRE(got.size() == 1);
  CHECK(got[0].id == "udp");
  CHECK(got[0].focal_id == 4);
  CHECK(stats.received >= lines.size() - 1);
}

TEST_CASE("dataset splits partition the indices with the stated sizes")
{
  GeneratorConfig cfg;
  cfg.seed = 3;
  cfg.count = 100;
  cfg.preset = Preset::TargetLike;
  const auto t = make_dataset(DatasetRole::Target, generate_synthetic(cfg), 9);
  CHECK(t.indices(Split::Train).size() == 70);
  CHECK(t.indices(Split::Val).size() == 15);
  CHECK(t.indices(Split::Test).size() == 15);

  const auto s = assign_splits(300, default_split_ratios(DatasetRole::Source), 4);
  CHECK(std::count(s.begin(), s.end(), Split::Train) == 254);
  CHECK(std::count(s.begin(), s.end(), Split::Val) == 23);
  CHECK(std::count(s.begin(), s.end(), Split::Test) == 23);

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto parts = assign_splits(57, SplitRatios{0.6, 0.2, 0.2}, seed);
    std::vector<int> seen(57, 0);
    DatasetHandle h;
    h.split_of = parts;
    h.scenarios.resize(57);
    for (Split sp : {Split::Train, Split::Val, Split::Test}) {
      const auto idx = h.indices(sp);
      CHECK(std::is_sorted(idx.begin(), idx.end()));
      for (auto i : idx) ++seen[i];
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
  }
}

TEST_CASE("dataset save and load is byte exact; corruption is rejected")
{
  GeneratorConfig cfg;
  cfg.seed = 21;
  cfg.count = 6;
  const auto d = make_dataset(DatasetRole::Source, generate_synthetic(cfg), 2);
  const std::string bytes = encode_dataset(d);
  const auto back = decode_dataset(bytes);
  CHECK(back.scenarios == d.scenarios);
  CHECK(back.split_of == d.split_of);
  CHECK(back.role == d.role);
  CHECK(encode_dataset(back) == bytes);

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_AS(decode_dataset(bad_magic), FormatError);
  std::string bad_version = bytes;
  bad_version[4] = static_cast<char>(kDatasetVersion + 1);
  CHECK_THROWS_AS(decode_dataset(bad_version), FormatError);
  CHECK_THROWS_AS(decode_dataset(bytes.substr(0, bytes.size() - 3)), FormatError);
  CHECK_THROWS_AS(decode_dataset(bytes + "x"), FormatError);
}
