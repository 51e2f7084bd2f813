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

#ifndef MTLB__REPORT__STUDY_HPP_
#define MTLB__REPORT__STUDY_HPP_

#include <array>
#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mtlb/report/run_config.hpp"
#include "mtlb/train/experiment.hpp"

namespace mtlb
{

inline constexpr std::size_t kStudyColumns = 8;

/// Source mAP, minADE, minFDE, missRate, then the same four on the target.
const std::array<std::string_view, kStudyColumns> & study_column_names();
/// True when larger is better (mAP columns).
bool column_higher_is_better(std::size_t column);

struct StudyRow
{
  Method method{Method::SB};
  MetricsReport source;
  MetricsReport target;

  std::array<double, kStudyColumns> values() const;
};

struct StudyTiming
{
  Method method{Method::SB};
  double total_seconds{0.0};
  std::optional<double> target_seconds;  // two-stage methods only
};

/**
 * @brief Transfer-study results table.
 *
 * Holds only metrics, so two runs with one seed serialize identically; wall
 * times live in StudyTiming and go to separate files.
 */
class StudyReport
{
public:
  /// Throws InputError unless `rows` has the seven methods in table order.
  explicit StudyReport(std::vector<StudyRow> rows);

  const std::vector<StudyRow> & rows() const { return rows_; }
  const StudyRow & row(Method method) const;

  /// best[r][c]: row r attains the best value of column c (ties all flagged).
  std::vector<std::array<bool, kStudyColumns>> best_flags() const;

  std::string to_text() const;
  std::string to_json() const;

private:
  std::vector<StudyRow> rows_;
};

/// `method,seconds` rows in table order.
std::string total_time_csv(const std::vector<StudyTiming> & timings);
/// `method,seconds` rows for FT, FTD, FTE and FR.
std::string target_time_csv(const std::vector<StudyTiming> & timings);

struct StudyOutcome
{
  StudyReport report;
  std::vector<StudyTiming> timings;  // table order
  std::vector<ExperimentResult> results;  // table order
};

using MethodCallback = std::function<void(const ExperimentResult &, const StudyTiming &)>;

/// SB first, then the others; the two-stage methods share the SB checkpoint.
StudyOutcome run_study(
  const RunConfig & config, const DatasetHandle & source, const DatasetHandle & target,
  const MethodCallback & on_method = {});

}  // namespace mtlb

#endif  // MTLB__REPORT__STUDY_HPP_
