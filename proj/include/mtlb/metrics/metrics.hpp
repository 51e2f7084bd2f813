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

#ifndef MTLB__METRICS__METRICS_HPP_
#define MTLB__METRICS__METRICS_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mtlb/core/tensor.hpp"
#include "mtlb/scene/scenario.hpp"

namespace mtlb
{

enum class ShapeCategory : std::uint8_t {
  Stationary,
  Straight,
  StraightLeft,
  StraightRight,
  LeftTurn,
  RightTurn,
  LeftUTurn,
  RightUTurn,
};
inline constexpr std::size_t kShapeCategoryCount = 8;

std::string_view to_string(ShapeCategory c);

/**
 * @brief Heading-frame match thresholds.
 *
 * Lateral and longitudinal bounds are given at horizon checkpoints (seconds),
 * linearly interpolated between them and held constant outside. Both are
 * scaled by a speed multiplier that ramps linearly from `scale_low` at
 * `speed_low` to 1 at `speed_high`.
 */
struct MatchThresholds
{
  std::vector<double> horizons{3.0, 5.0, 8.0};
  std::vector<double> lateral{1.0, 1.8, 3.0};
  std::vector<double> longitudinal{2.0, 3.6, 6.0};
  double speed_low{1.4};
  double speed_high{11.0};
  double scale_low{0.5};

  void validate() const;
  double speed_scale(double speed) const;
  double lateral_at(double horizon_s, double speed) const;
  double longitudinal_at(double horizon_s, double speed) const;
};

/// Strict test |x| < long and |y| < lat after rotating the error into the ground-truth heading frame.
bool is_match(const Vec2 & gt, double gt_heading, const Vec2 & pred, double lateral, double longitudinal);

/// Mean L2 over steps (valid ones only when `valid` is given), minimized over modes.
double min_ade(const Tensor & gt, std::span<const Tensor> preds, std::span<const char> valid = {});
/// L2 at the last step (the last valid one when `valid` is given), minimized over modes.
double min_fde(const Tensor & gt, std::span<const Tensor> preds, std::span<const char> valid = {});

struct EvalRecord
{
  Tensor gt;                     // [T x 2], meters
  std::vector<double> gt_heading;
  std::vector<char> gt_valid;    // empty = all valid
  double initial_speed{0.0};
  std::vector<Tensor> modes;     // K x [T x 2]
  std::vector<double> confidence;
  ShapeCategory category{ShapeCategory::Straight};
};

struct MetricsConfig
{
  MatchThresholds thresholds;
  double sample_rate{10.0};
  std::optional<std::size_t> eval_step;  // default: final step

  std::size_t step_for(const EvalRecord & r) const;
};

/// Per-mode is_match decisions at the evaluation step.
std::vector<char> mode_matches(const EvalRecord & record, const MetricsConfig & config);

/// Fraction of records with no matching mode. Throws InputError on an empty list.
double miss_rate(std::span<const EvalRecord> records, const MetricsConfig & config);

/// Bucket from net displacement and heading change relative to the start pose.
ShapeCategory classify_shape(
  const Tensor & positions, std::span<const double> headings, const Vec2 & start = {0.0, 0.0},
  double start_heading = 0.0);

/// One record for AP: a confidence and a match flag per mode.
struct ScoredSet
{
  std::vector<double> confidence;
  std::vector<char> match;
};

/// VOC all-point AP over pooled predictions, one true positive per set. Empty input yields nullopt.
std::optional<double> average_precision(std::span<const ScoredSet> sets);
std::optional<double> average_precision(std::span<const EvalRecord> records, const MetricsConfig & config);

struct CategoryAp
{
  std::array<std::optional<double>, kShapeCategoryCount> ap{};
  std::array<std::size_t, kShapeCategoryCount> count{};
};

CategoryAp category_average_precision(std::span<const EvalRecord> records, const MetricsConfig & config);
/// Unweighted mean over non-empty categories. Throws InputError when all are empty.
double mean_ap(std::span<const EvalRecord> records, const MetricsConfig & config);

struct MetricsReport
{
  double map{0.0};
  double min_ade{0.0};
  double min_fde{0.0};
  double miss_rate{0.0};
  CategoryAp categories;
  std::size_t samples{0};

  void validate() const;
  std::string to_key_value() const;
  std::string to_json() const;
  static MetricsReport from_json(std::string_view text);
};

MetricsReport compute_metrics(std::span<const EvalRecord> records, const MetricsConfig & config);

}  // namespace mtlb

#endif  // MTLB__METRICS__METRICS_HPP_
