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

#include "mtlb/report/study.hpp"

#include <cstdio>
#include <future>
#include <map>
#include <sstream>

#include "json.hpp"

#include "mtlb/core/errors.hpp"

namespace mtlb
{

namespace
{

std::string fixed4(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

const std::array<std::string_view, kStudyColumns> & study_column_names()
{
  static const std::array<std::string_view, kStudyColumns> names{
    "source_mAP", "source_minADE", "source_minFDE", "source_missRate",
    "target_mAP", "target_minADE", "target_minFDE", "target_missRate"};
  return names;
}

bool column_higher_is_better(std::size_t column) { return column % 4 == 0; }

std::array<double, kStudyColumns> StudyRow::values() const
{
  return {source.map, source.min_ade, source.min_fde, source.miss_rate,
          target.map, target.min_ade, target.min_fde, target.miss_rate};
}

StudyReport::StudyReport(std::vector<StudyRow> rows) : rows_(std::move(rows))
{
  if (rows_.size() != kStudyMethods.size()) {
    throw InputError("study report needs " + std::to_string(kStudyMethods.size()) + " rows, got " +
                     std::to_string(rows_.size()));
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    if (rows_[i].method != kStudyMethods[i]) {
      throw InputError("study report row " + std::to_string(i) + " must be " + std::string(to_string(kStudyMethods[i])));
    }
  }
}

const StudyRow & StudyReport::row(Method method) const
{
  for (const auto & r : rows_) {
    if (r.method == method) return r;
  }
  throw InputError("study report has no row for " + std::string(to_string(method)));
}

std::vector<std::array<bool, kStudyColumns>> StudyReport::best_flags() const
{
  std::vector<std::array<bool, kStudyColumns>> flags(rows_.size());
  for (std::size_t c = 0; c < kStudyColumns; ++c) {
    double best = rows_.front().values()[c];
    for (const auto & r : rows_) {
      const double v = r.values()[c];
      best = column_higher_is_better(c) ? std::max(best, v) : std::min(best, v);
    }
    for (std::size_t i = 0; i < rows_.size(); ++i) flags[i][c] = rows_[i].values()[c] == best;
  }
  return flags;
}

std::string StudyReport::to_text() const
{
  const auto flags = best_flags();
  std::ostringstream out;
  out << "                 |            source dataset             |            target dataset\n";
  out << "Method           |   mAP     minADE   minFDE   MissRate  |   mAP     minADE   minFDE   MissRate\n";
  out << "-----------------+---------------------------------------+--------------------------------------\n";
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    char label[32];
    std::snprintf(label, sizeof(label), "%-17s", std::string(to_string(rows_[i].method)).c_str());
    out << label << "|";
    const auto v = rows_[i].values();
    for (std::size_t c = 0; c < kStudyColumns; ++c) {
      if (c == 4) out << " |";
      char cell[32];
      std::snprintf(cell, sizeof(cell), " %8s%c", fixed4(v[c]).c_str(), flags[i][c] ? '*' : ' ');
      out << cell;
    }
    out << "\n";
  }
  out << "(* best in column; mAP higher is better, the others lower)\n";
  return out.str();
}

std::string StudyReport::to_json() const
{
  const auto flags = best_flags();
  nlohmann::ordered_json j;
  j["columns"] = nlohmann::ordered_json::array();
  for (auto name : study_column_names()) j["columns"].push_back(std::string(name));
  j["rows"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    nlohmann::ordered_json r;
    r["method"] = std::string(to_string(rows_[i].method));
    const auto v = rows_[i].values();
    nlohmann::ordered_json values = nlohmann::ordered_json::object();
    nlohmann::ordered_json best = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < kStudyColumns; ++c) {
      values[std::string(study_column_names()[c])] = v[c];
      if (flags[i][c]) best.push_back(std::string(study_column_names()[c]));
    }
    r["values"] = values;
    r["best"] = best;
    r["source_samples"] = rows_[i].source.samples;
    r["target_samples"] = rows_[i].target.samples;
    j["rows"].push_back(r);
  }
  return j.dump(2) + "\n";
}

std::string total_time_csv(const std::vector<StudyTiming> & timings)
{
  std::string out = "method,seconds\n";
  for (const auto & t : timings) out += std::string(to_string(t.method)) + "," + format_double(t.total_seconds) + "\n";
  return out;
}

std::string target_time_csv(const std::vector<StudyTiming> & timings)
{
  std::string out = "method,seconds\n";
  for (const auto & t : timings) {
    if (t.target_seconds) out += std::string(to_string(t.method)) + "," + format_double(*t.target_seconds) + "\n";
  }
  return out;
}

StudyOutcome run_study(
  const RunConfig & config, const DatasetHandle & source, const DatasetHandle & target, const MethodCallback & on_method)
{
  config.validate();
  std::map<Method, ExperimentResult> results;
  std::map<Method, StudyTiming> timings;

  auto finish = [&](ExperimentResult r, double total, std::optional<double> target_s) {
    StudyTiming t{r.method, total, target_s};
    if (on_method) on_method(r, t);
    timings[r.method] = t;
    results.emplace(r.method, std::move(r));
  };

  auto run_one = [&](Method m, const std::optional<Checkpoint> & sb) {
    auto spec = config.experiment(m);
    if (is_two_stage(m)) spec.source_checkpoint = sb;
    return run_experiment(spec, source, target);
  };

  const std::vector<Method> single{Method::SB, Method::TB, Method::MTL};
  const std::vector<Method> two{Method::FT, Method::FTD, Method::FTE, Method::FR};
  std::vector<ExperimentResult> first;
  if (config.study_parallel) {
    std::vector<std::future<ExperimentResult>> jobs;
    for (Method m : single) jobs.push_back(std::async(std::launch::async, run_one, m, std::nullopt));
    for (auto & j : jobs) first.push_back(j.get());
  } else {
    for (Method m : single) first.push_back(run_one(m, std::nullopt));
  }
  const Checkpoint sb_checkpoint = first.front().checkpoint;
  const double sb_seconds = first.front().stage_seconds();
  for (auto & r : first) {
    const double s = r.stage_seconds();
    finish(std::move(r), s, std::nullopt);
  }

  std::vector<ExperimentResult> second;
  if (config.study_parallel) {
    std::vector<std::future<ExperimentResult>> jobs;
    for (Method m : two) jobs.push_back(std::async(std::launch::async, run_one, m, sb_checkpoint));
    for (auto & j : jobs) second.push_back(j.get());
  } else {
    for (Method m : two) second.push_back(run_one(m, sb_checkpoint));
  }
  for (auto & r : second) {
    const double s = r.stage_seconds();
    finish(std::move(r), sb_seconds + s, s);
  }

  std::vector<StudyRow> rows;
  StudyOutcome outcome{StudyReport([&] {
    for (Method m : kStudyMethods) rows.push_back({m, results.at(m).source_test, results.at(m).target_test});
    return rows;
  }()), {}, {}};
  for (Method m : kStudyMethods) {
    outcome.timings.push_back(timings.at(m));
    outcome.results.push_back(std::move(results.at(m)));
  }
  return outcome;
}

}  // namespace mtlb
