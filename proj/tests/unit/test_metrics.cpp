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

#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "mtlb/core/errors.hpp"
#include "mtlb/metrics/evaluate.hpp"
#include "mtlb/metrics/metrics.hpp"
#include "mtlb/scene/generator.hpp"
#include "metric_oracles.hpp"
#include "test_util.hpp"

using namespace mtlb;
using namespace mtlb::testing;

namespace
{

Tensor line(std::size_t T, double dx, double dy, double ox = 0.0, double oy = 0.0)
{
  Tensor t({T, 2});
  for (std::size_t i = 0; i < T; ++i) {
    t.at(i, 0) = ox + dx * static_cast<double>(i + 1);
    t.at(i, 1) = oy + dy * static_cast<double>(i + 1);
  }
  return t;
}

EvalRecord record_with(const Tensor & gt, std::vector<Tensor> modes, std::vector<double> conf)
{
  EvalRecord r;
  r.gt = gt;
  r.gt_heading.assign(gt.rows(), 0.0);
  r.initial_speed = 10.0;
  r.modes = std::move(modes);
  r.confidence = std::move(conf);
  return r;
}

}  // namespace

TEST_CASE("minADE and minFDE examples")
{
  const Tensor gt = line(5, 1.0, 0.5);
  const std::vector<Tensor> exact{line(5, 1.0, 0.0), gt};
  CHECK(min_ade(gt, exact) == 0.0);
  CHECK(min_fde(gt, exact) == 0.0);
  const std::vector<Tensor> shifted{line(5, 1.0, 0.5, 3.0, 4.0)};
  CHECK(min_ade(gt, shifted) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(min_fde(gt, shifted) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK_THROWS_AS(min_ade(Tensor({0, 2}), shifted), InputError);

  std::mt19937_64 rng(1);
  for (int i = 0; i < 50; ++i) {
    const auto r = random_record(rng, 8, 3);
    CHECK(std::abs(min_ade(r.gt, r.modes) - oracle_min_ade(r.gt, r.modes)) < 1e-12);
    CHECK(std::abs(min_fde(r.gt, r.modes) - oracle_min_fde(r.gt, r.modes)) < 1e-12);
  }
}

TEST_CASE("masked minADE ignores invalid steps; minFDE uses the last valid step")
{
  const Tensor gt = line(4, 1.0, 0.0);
  Tensor pred = gt;
  pred.at(3, 1) = 100.0;
  const std::vector<Tensor> preds{pred};
  const std::vector<char> valid{1, 1, 1, 0};
  CHECK(min_ade(gt, preds, valid) == 0.0);
  CHECK(min_fde(gt, preds, valid) == 0.0);
}

TEST_CASE("is_match examples")
{
  CHECK(is_match({0.0, 0.0}, 0.0, {0.5, 0.3}, 1.0, 2.0));
  CHECK_FALSE(is_match({0.0, 0.0}, std::numbers::pi / 2, {1.5, 0.0}, 1.0, 2.0));
  CHECK_FALSE(is_match({0.0, 0.0}, 0.0, {2.0, 0.0}, 1.0, 2.0));
  CHECK_FALSE(is_match({0.0, 0.0}, 0.0, {0.0, 1.0}, 1.0, 2.0));
  CHECK_FALSE(is_match({0.0, 0.0}, 0.0, {-2.5, 0.0}, 1.0, 2.0));
}

TEST_CASE("match thresholds follow the checkpoints and speed ramp")
{
  MatchThresholds th;
  CHECK(th.lateral_at(3.0, 20.0) == 1.0);
  CHECK(th.longitudinal_at(8.0, 11.0) == 6.0);
  CHECK(th.lateral_at(4.0, 11.0) == doctest::Approx(1.4));
  CHECK(th.lateral_at(1.0, 11.0) == 1.0);
  CHECK(th.speed_scale(0.0) == 0.5);
  CHECK(th.speed_scale(6.2) == doctest::Approx(0.75));
  CHECK(th.lateral_at(3.0, 1.0) == 0.5);
  for (double h = 0.5; h < 9.0; h += 0.5) {
    CHECK(th.longitudinal_at(h, 5.0) >= th.lateral_at(h, 5.0));
    CHECK(th.lateral_at(h + 0.5, 5.0) >= th.lateral_at(h, 5.0));
  }
}

TEST_CASE("is_match is invariant to rotating the whole frame")
{
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3.0, 3.0), a(-std::numbers::pi, std::numbers::pi);
  for (int i = 0; i < 500; ++i) {
    const Vec2 g{u(rng), u(rng)}, p{u(rng), u(rng)};
    const double h = a(rng), rot = a(rng);
    const double c = std::cos(rot), s = std::sin(rot);
    const Vec2 g2{c * g[0] - s * g[1], s * g[0] + c * g[1]};
    const Vec2 p2{c * p[0] - s * p[1], s * p[0] + c * p[1]};
    // Skip draws sitting on a threshold, where rounding decides.
    const double lon = std::cos(h) * (p[0] - g[0]) + std::sin(h) * (p[1] - g[1]);
    const double lat = -std::sin(h) * (p[0] - g[0]) + std::cos(h) * (p[1] - g[1]);
    if (std::abs(std::abs(lon) - 2.0) < 1e-9 || std::abs(std::abs(lat) - 1.0) < 1e-9) continue;
    CHECK(is_match(g, h, p, 1.0, 2.0) == is_match(g2, h + rot, p2, 1.0, 2.0));
  }
}

TEST_CASE("miss rate examples, oracle and mode-order invariance")
{
  MetricsConfig cfg;
  const Tensor gt = line(30, 1.0, 0.0);
  auto hit = record_with(gt, {gt, line(30, 0.0, 1.0)}, {0.5, 0.5});
  auto miss = record_with(gt, {line(30, 0.0, 1.0)}, {1.0});
  CHECK(miss_rate(std::vector<EvalRecord>{hit, hit}, cfg) == 0.0);
  CHECK(miss_rate(std::vector<EvalRecord>{hit, miss}, cfg) == 0.5);
  CHECK_THROWS_AS(miss_rate(std::vector<EvalRecord>{}, cfg), InputError);

  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<EvalRecord> rs;
    for (int i = 0; i < 20; ++i) rs.push_back(random_record(rng, 30, 6));
    const double mr = miss_rate(rs, cfg);
    CHECK(mr == oracle_miss_rate(rs, cfg.thresholds, cfg.sample_rate));
    for (auto & r : rs) {
      std::reverse(r.modes.begin(), r.modes.end());
      std::reverse(r.confidence.begin(), r.confidence.end());
    }
    CHECK(miss_rate(rs, cfg) == mr);
  }
}

TEST_CASE("shape buckets")
{
  std::vector<double> zero(5, 0.0);
  CHECK(classify_shape(Tensor({5, 2}), zero) == ShapeCategory::Stationary);
  CHECK(classify_shape(line(5, 4.0, 0.0), zero) == ShapeCategory::Straight);
  CHECK(classify_shape(line(5, 4.0, 1.5), zero) == ShapeCategory::StraightLeft);
  CHECK(classify_shape(line(5, 4.0, -1.5), zero) == ShapeCategory::StraightRight);
  std::vector<double> left(5, std::numbers::pi / 2), right(5, -std::numbers::pi / 2), back(5, std::numbers::pi * 0.9);
  CHECK(classify_shape(line(5, 3.0, 3.0), left) == ShapeCategory::LeftTurn);
  CHECK(classify_shape(line(5, 3.0, -3.0), right) == ShapeCategory::RightTurn);
  CHECK(classify_shape(line(5, 0.5, 3.0), back) == ShapeCategory::LeftUTurn);
  std::vector<double> back_r(5, -std::numbers::pi * 0.9);
  CHECK(classify_shape(line(5, 0.5, -3.0), back_r) == ShapeCategory::RightUTurn);
}

TEST_CASE("average precision examples and brute-force enumeration")
{
  std::vector<ScoredSet> all_top{{{0.9, 0.1}, {1, 0}}, {{0.7, 0.3}, {1, 1}}};
  CHECK(*average_precision(all_top) == 1.0);
  std::vector<ScoredSet> none{{{0.9, 0.1}, {0, 0}}, {{0.7, 0.3}, {0, 0}}};
  CHECK(*average_precision(none) == 0.0);
  CHECK_FALSE(average_precision(std::span<const ScoredSet>{}).has_value());

  // Ranked: 0.9 (s0 miss), 0.8 (s1 hit), 0.6 (s2 miss), 0.5 (s0 hit), 0.2 (s2 hit), 0.1 (s1 hit, duplicate)
  std::vector<ScoredSet> three{{{0.9, 0.5}, {0, 1}}, {{0.8, 0.1}, {1, 1}}, {{0.6, 0.2}, {0, 1}}};
  // Precisions at the true positives: 1/2, 2/4, 3/5; envelope 0.6 for all three recalls.
  CHECK(*average_precision(three) == doctest::Approx(0.6).epsilon(1e-15));
  CHECK(std::abs(*average_precision(three) - oracle_ap(three)) < 1e-12);

  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<ScoredSet> sets(1 + trial % 9);
    for (auto & s : sets) {
      for (int k = 0; k < 6; ++k) {
        s.confidence.push_back(std::round(u(rng) * 20.0) / 20.0);  // coarse grid to exercise ties
        s.match.push_back(u(rng) < 0.3 ? 1 : 0);
      }
    }
    const double ap = *average_precision(sets);
    CHECK(std::abs(ap - oracle_ap(sets)) < 1e-9);
    CHECK(ap >= 0.0);
    CHECK(ap <= 1.0);
    // Rank-based: any strictly increasing rescaling leaves AP unchanged.
    auto warped = sets;
    for (auto & s : warped) {
      for (double & c : s.confidence) c = std::exp(3.0 * c) - 0.5;
    }
    CHECK(*average_precision(warped) == ap);
  }
}

TEST_CASE("mAP averages non-empty categories")
{
  MetricsConfig cfg;
  const Tensor gt = line(30, 1.0, 0.0);
  auto good = record_with(gt, {gt}, {1.0});
  auto bad = record_with(gt, {line(30, 0.0, 1.0)}, {1.0});
  good.category = ShapeCategory::Straight;
  bad.category = ShapeCategory::LeftTurn;
  CHECK(mean_ap(std::vector<EvalRecord>{good}, cfg) == 1.0);
  CHECK(mean_ap(std::vector<EvalRecord>{good, bad}, cfg) == 0.5);
  CHECK_THROWS_AS(mean_ap(std::vector<EvalRecord>{}, cfg), InputError);

  std::mt19937_64 rng(5);
  std::vector<EvalRecord> rs;
  for (int i = 0; i < 40; ++i) {
    auto r = random_record(rng, 30, 6);
    r.category = static_cast<ShapeCategory>(i % 3);
    rs.push_back(r);
  }
  double total = 0.0;
  for (int c = 0; c < 3; ++c) {
    std::vector<ScoredSet> sets;
    for (const auto & r : rs) {
      if (static_cast<int>(r.category) != c) continue;
      std::vector<char> m;
      for (std::size_t k = 0; k < r.modes.size(); ++k) m.push_back(oracle_match(r, k, cfg.thresholds, 10.0));
      sets.push_back({r.confidence, m});
    }
    total += oracle_ap(sets);
  }
  CHECK(std::abs(mean_ap(rs, cfg) - total / 3.0) < 1e-9);
}

TEST_CASE("adding a mode never worsens the min metrics")
{
  std::mt19937_64 rng(6);
  for (int i = 0; i < 100; ++i) {
    auto r = random_record(rng, 12, 4);
    const double ade = min_ade(r.gt, r.modes), fde = min_fde(r.gt, r.modes);
    r.modes.push_back(random_record(rng, 12, 1).modes[0]);
    CHECK(min_ade(r.gt, r.modes) <= ade);
    CHECK(min_fde(r.gt, r.modes) <= fde);
  }
}

TEST_CASE("a perfect predictor scores a perfect report, twice over")
{
  GeneratorConfig gen;
  gen.seed = 31;
  gen.count = 12;
  const ModelConfig mc;
  std::vector<VectorizedScene> scenes;
  for (const auto & s : generate_synthetic(gen)) scenes.push_back(prepare_scene(s, mc));
  EvalOptions opt;
  const auto rep = evaluate(oracle_predictor(mc.modes), scenes, opt);
  CHECK(rep.map == 1.0);
  CHECK(rep.min_ade == 0.0);
  CHECK(rep.min_fde == 0.0);
  CHECK(rep.miss_rate == 0.0);
  CHECK(rep.samples == 12);
  opt.threads = 3;
  CHECK(evaluate(oracle_predictor(mc.modes), scenes, opt).to_json() == rep.to_json());
  CHECK(MetricsReport::from_json(rep.to_json()).to_json() == rep.to_json());
  CHECK_THROWS_AS(evaluate(oracle_predictor(mc.modes), std::span<const VectorizedScene>{}, opt), InputError);
}
