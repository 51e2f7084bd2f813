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

#include "mtlb/metrics/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "json.hpp"
#include "mtlb/core/errors.hpp"
#include "mtlb/core/kv_config.hpp"

namespace mtlb
{

namespace
{

constexpr std::array<std::string_view, kShapeCategoryCount> kCategoryNames{
  "stationary", "straight", "straight_left", "straight_right", "left_turn", "right_turn", "left_u_turn", "right_u_turn"};

double interpolate(const std::vector<double> & xs, const std::vector<double> & ys, double x)
{
  if (x <= xs.front()) return ys.front();
  if (x >= xs.back()) return ys.back();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
  const double u = (x - xs[i]) / (xs[i + 1] - xs[i]);
  return ys[i] + u * (ys[i + 1] - ys[i]);
}

std::size_t last_valid(std::size_t T, std::span<const char> valid)
{
  if (valid.empty()) return T - 1;
  for (std::size_t t = T; t-- > 0;) {
    if (valid[t]) return t;
  }
  throw InputError("trajectory has no valid step");
}

void check_preds(const Tensor & gt, std::span<const Tensor> preds, std::span<const char> valid)
{
  if (gt.rank() != 2 || gt.cols() != 2 || gt.rows() == 0) throw InputError("ground truth must be a non-empty [T x 2]");
  if (preds.empty()) throw InputError("no predicted modes");
  for (const auto & p : preds) {
    if (p.shape() != gt.shape()) throw InputError("prediction length differs from ground truth");
  }
  if (!valid.empty() && valid.size() != gt.rows()) throw InputError("validity mask length differs from ground truth");
}

}  // namespace

std::string_view to_string(ShapeCategory c) { return kCategoryNames[static_cast<std::size_t>(c)]; }

void MatchThresholds::validate() const
{
  if (horizons.empty() || horizons.size() != lateral.size() || horizons.size() != longitudinal.size()) {
    throw ConfigError("match thresholds: checkpoint lists must be non-empty and equally long");
  }
  for (std::size_t i = 0; i < horizons.size(); ++i) {
    if (!(lateral[i] > 0.0) || longitudinal[i] < lateral[i]) {
      throw ConfigError("match thresholds: need longitudinal >= lateral > 0");
    }
    if (i > 0 && (horizons[i] <= horizons[i - 1] || lateral[i] < lateral[i - 1] || longitudinal[i] < longitudinal[i - 1])) {
      throw ConfigError("match thresholds: horizons must increase and bounds must not decrease");
    }
  }
  if (!(scale_low > 0.0 && scale_low <= 1.0) || !(speed_high > speed_low)) {
    throw ConfigError("match thresholds: speed scale must lie in (0, 1] over an increasing speed range");
  }
}

double MatchThresholds::speed_scale(double speed) const
{
  if (speed <= speed_low) return scale_low;
  if (speed >= speed_high) return 1.0;
  return scale_low + (1.0 - scale_low) * (speed - speed_low) / (speed_high - speed_low);
}

double MatchThresholds::lateral_at(double horizon_s, double speed) const
{
  return interpolate(horizons, lateral, horizon_s) * speed_scale(speed);
}

double MatchThresholds::longitudinal_at(double horizon_s, double speed) const
{
  return interpolate(horizons, longitudinal, horizon_s) * speed_scale(speed);
}

bool is_match(const Vec2 & gt, double gt_heading, const Vec2 & pred, double lateral, double longitudinal)
{
  const double ex = gt[0] - pred[0], ey = gt[1] - pred[1];
  const double c = std::cos(gt_heading), s = std::sin(gt_heading);
  const double x = c * ex + s * ey;   // along heading
  const double y = -s * ex + c * ey;  // across heading
  return std::abs(x) < longitudinal && std::abs(y) < lateral;
}

double min_ade(const Tensor & gt, std::span<const Tensor> preds, std::span<const char> valid)
{
  check_preds(gt, preds, valid);
  const std::size_t T = gt.rows();
  double best = std::numeric_limits<double>::infinity();
  for (const auto & p : preds) {
    double acc = 0.0;
    std::size_t n = 0;
    for (std::size_t t = 0; t < T; ++t) {
      if (!valid.empty() && !valid[t]) continue;
      acc += std::hypot(gt.at(t, 0) - p.at(t, 0), gt.at(t, 1) - p.at(t, 1));
      ++n;
    }
    if (n == 0) throw InputError("trajectory has no valid step");
    best = std::min(best, acc / static_cast<double>(n));
  }
  return best;
}

double min_fde(const Tensor & gt, std::span<const Tensor> preds, std::span<const char> valid)
{
  check_preds(gt, preds, valid);
  const std::size_t t = last_valid(gt.rows(), valid);
  double best = std::numeric_limits<double>::infinity();
  for (const auto & p : preds) best = std::min(best, std::hypot(gt.at(t, 0) - p.at(t, 0), gt.at(t, 1) - p.at(t, 1)));
  return best;
}

std::size_t MetricsConfig::step_for(const EvalRecord & r) const
{
  const std::size_t T = r.gt.rows();
  if (T == 0) throw InputError("evaluation record without ground truth");
  if (eval_step) {
    if (*eval_step >= T) throw InputError("evaluation step beyond the trajectory horizon");
    return *eval_step;
  }
  return T - 1;
}

std::vector<char> mode_matches(const EvalRecord & r, const MetricsConfig & config)
{
  const std::size_t t = config.step_for(r);
  if (r.gt_heading.size() != r.gt.rows()) throw InputError("evaluation record: heading count differs from T");
  const double horizon = static_cast<double>(t + 1) / config.sample_rate;
  const double lat = config.thresholds.lateral_at(horizon, r.initial_speed);
  const double lon = config.thresholds.longitudinal_at(horizon, r.initial_speed);
  std::vector<char> out(r.modes.size(), 0);
  if (!r.gt_valid.empty() && !r.gt_valid[t]) return out;
  const Vec2 g{r.gt.at(t, 0), r.gt.at(t, 1)};
  for (std::size_t k = 0; k < r.modes.size(); ++k) {
    out[k] = is_match(g, r.gt_heading[t], {r.modes[k].at(t, 0), r.modes[k].at(t, 1)}, lat, lon) ? 1 : 0;
  }
  return out;
}

double miss_rate(std::span<const EvalRecord> records, const MetricsConfig & config)
{
  if (records.empty()) throw InputError("miss_rate: no records");
  std::size_t misses = 0;
  for (const auto & r : records) {
    const auto m = mode_matches(r, config);
    if (std::none_of(m.begin(), m.end(), [](char c) { return c != 0; })) ++misses;
  }
  return static_cast<double>(misses) / static_cast<double>(records.size());
}

ShapeCategory classify_shape(
  const Tensor & positions, std::span<const double> headings, const Vec2 & start, double start_heading)
{
  if (positions.rank() != 2 || positions.rows() < 2 || headings.size() != positions.rows()) {
    throw InputError("classify_shape needs at least two positions with headings");
  }
  const std::size_t t = positions.rows() - 1;
  const double dx = positions.at(t, 0) - start[0], dy = positions.at(t, 1) - start[1];
  if (std::hypot(dx, dy) < 2.0) return ShapeCategory::Stationary;
  const double turn = normalize_angle(headings[t] - start_heading) * 180.0 / std::numbers::pi;
  if (std::abs(turn) > 135.0) return turn > 0.0 ? ShapeCategory::LeftUTurn : ShapeCategory::RightUTurn;
  if (std::abs(turn) > 30.0) return turn > 0.0 ? ShapeCategory::LeftTurn : ShapeCategory::RightTurn;
  const double lateral = -std::sin(start_heading) * dx + std::cos(start_heading) * dy;
  if (lateral > 5.0) return ShapeCategory::StraightLeft;
  if (lateral < -5.0) return ShapeCategory::StraightRight;
  return ShapeCategory::Straight;
}

std::optional<double> average_precision(std::span<const ScoredSet> sets)
{
  if (sets.empty()) return std::nullopt;
  struct Entry
  {
    double confidence;
    std::size_t set;
    std::size_t mode;
  };
  std::vector<Entry> pool;
  for (std::size_t i = 0; i < sets.size(); ++i) {
    if (sets[i].confidence.size() != sets[i].match.size()) throw InputError("average_precision: flag count mismatch");
    for (std::size_t k = 0; k < sets[i].confidence.size(); ++k) pool.push_back({sets[i].confidence[k], i, k});
  }
  std::sort(pool.begin(), pool.end(), [](const Entry & a, const Entry & b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    if (a.set != b.set) return a.set < b.set;
    return a.mode < b.mode;
  });
  std::vector<char> claimed(sets.size(), 0);
  std::vector<double> precision, recall;
  std::size_t tp = 0;
  const double n = static_cast<double>(sets.size());
  for (std::size_t r = 0; r < pool.size(); ++r) {
    const auto & e = pool[r];
    if (sets[e.set].match[e.mode] && !claimed[e.set]) {
      claimed[e.set] = 1;
      ++tp;
    }
    precision.push_back(static_cast<double>(tp) / static_cast<double>(r + 1));
    recall.push_back(static_cast<double>(tp) / n);
  }
  // Precision envelope, then area over recall increments.
  std::vector<double> mrec{0.0}, mpre{0.0};
  mrec.insert(mrec.end(), recall.begin(), recall.end());
  mpre.insert(mpre.end(), precision.begin(), precision.end());
  mrec.push_back(1.0);
  mpre.push_back(0.0);
  for (std::size_t i = mpre.size() - 1; i-- > 0;) mpre[i] = std::max(mpre[i], mpre[i + 1]);
  double ap = 0.0;
  for (std::size_t i = 1; i < mrec.size(); ++i) {
    if (mrec[i] != mrec[i - 1]) ap += (mrec[i] - mrec[i - 1]) * mpre[i];
  }
  return ap;
}

std::optional<double> average_precision(std::span<const EvalRecord> records, const MetricsConfig & config)
{
  std::vector<ScoredSet> sets;
  for (const auto & r : records) {
    if (r.confidence.size() != r.modes.size()) throw InputError("evaluation record: confidence count differs from modes");
    sets.push_back({r.confidence, mode_matches(r, config)});
  }
  return average_precision(sets);
}

CategoryAp category_average_precision(std::span<const EvalRecord> records, const MetricsConfig & config)
{
  CategoryAp out;
  std::array<std::vector<EvalRecord>, kShapeCategoryCount> buckets;
  for (const auto & r : records) buckets[static_cast<std::size_t>(r.category)].push_back(r);
  for (std::size_t c = 0; c < kShapeCategoryCount; ++c) {
    out.count[c] = buckets[c].size();
    out.ap[c] = average_precision(buckets[c], config);
  }
  return out;
}

double mean_ap(std::span<const EvalRecord> records, const MetricsConfig & config)
{
  const auto cats = category_average_precision(records, config);
  double total = 0.0;
  std::size_t n = 0;
  for (const auto & ap : cats.ap) {
    if (ap) {
      total += *ap;
      ++n;
    }
  }
  if (n == 0) throw InputError("mean_ap: every category is empty");
  return total / static_cast<double>(n);
}

void MetricsReport::validate() const
{
  for (double v : {map, min_ade, min_fde, miss_rate}) {
    if (!std::isfinite(v)) throw NumericError("metrics report holds a non-finite value");
  }
  if (map < 0.0 || map > 1.0 || miss_rate < 0.0 || miss_rate > 1.0) {
    throw NumericError("metrics report: mAP and miss rate must lie in [0, 1]");
  }
}

std::string MetricsReport::to_key_value() const
{
  std::string out;
  out += "mAP=" + format_double(map) + "\n";
  out += "minADE=" + format_double(min_ade) + "\n";
  out += "minFDE=" + format_double(min_fde) + "\n";
  out += "missRate=" + format_double(miss_rate) + "\n";
  out += "samples=" + std::to_string(samples) + "\n";
  for (std::size_t c = 0; c < kShapeCategoryCount; ++c) {
    const std::string name(kCategoryNames[c]);
    out += "ap." + name + "=" + (categories.ap[c] ? format_double(*categories.ap[c]) : std::string("none")) + "\n";
    out += "count." + name + "=" + std::to_string(categories.count[c]) + "\n";
  }
  return out;
}

std::string MetricsReport::to_json() const
{
  nlohmann::ordered_json j;
  j["mAP"] = map;
  j["minADE"] = min_ade;
  j["minFDE"] = min_fde;
  j["missRate"] = miss_rate;
  j["samples"] = samples;
  nlohmann::ordered_json cats = nlohmann::ordered_json::object();
  for (std::size_t c = 0; c < kShapeCategoryCount; ++c) {
    nlohmann::ordered_json e;
    e["count"] = categories.count[c];
    if (categories.ap[c]) {
      e["ap"] = *categories.ap[c];
    } else {
      e["ap"] = nullptr;
    }
    cats[std::string(kCategoryNames[c])] = e;
  }
  j["categories"] = cats;
  return j.dump(2) + "\n";
}

MetricsReport MetricsReport::from_json(std::string_view text)
{
  try {
    const auto j = nlohmann::json::parse(text);
    MetricsReport r;
    r.map = j.at("mAP").get<double>();
    r.min_ade = j.at("minADE").get<double>();
    r.min_fde = j.at("minFDE").get<double>();
    r.miss_rate = j.at("missRate").get<double>();
    r.samples = j.at("samples").get<std::size_t>();
    for (std::size_t c = 0; c < kShapeCategoryCount; ++c) {
      const auto & e = j.at("categories").at(std::string(kCategoryNames[c]));
      r.categories.count[c] = e.at("count").get<std::size_t>();
      if (!e.at("ap").is_null()) r.categories.ap[c] = e.at("ap").get<double>();
    }
    return r;
  } catch (const nlohmann::json::exception & e) {
    throw FormatError(std::string("metrics report: ") + e.what());
  }
}

MetricsReport compute_metrics(std::span<const EvalRecord> records, const MetricsConfig & config)
{
  if (records.empty()) throw InputError("compute_metrics: no records");
  config.thresholds.validate();
  MetricsReport r;
  r.samples = records.size();
  double ade = 0.0, fde = 0.0;
  for (const auto & rec : records) {
    ade += min_ade(rec.gt, rec.modes, rec.gt_valid);
    fde += min_fde(rec.gt, rec.modes, rec.gt_valid);
  }
  r.min_ade = ade / static_cast<double>(records.size());
  r.min_fde = fde / static_cast<double>(records.size());
  r.miss_rate = miss_rate(records, config);
  r.categories = category_average_precision(records, config);
  r.map = mean_ap(records, config);
  r.validate();
  return r;
}

}  // namespace mtlb
