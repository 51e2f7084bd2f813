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

#ifndef MTLB__REPORT__RUN_CONFIG_HPP_
#define MTLB__REPORT__RUN_CONFIG_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mtlb/core/kv_config.hpp"
#include "mtlb/scene/generator.hpp"
#include "mtlb/scene/ingest.hpp"
#include "mtlb/train/experiment.hpp"

namespace mtlb
{

/**
 * @brief Every setting a CLI command can read, with section-prefixed keys.
 *
 * Sections: data, generate, model, train, run, eval, study, ingest. Unknown
 * keys are rejected when the file is read.
 */
struct RunConfig
{
  std::string source_path;  // data.source
  std::string target_path;  // data.target

  GeneratorConfig generate;
  ModelConfig model;
  TrainConfig train;
  std::string lr_policy{"fixed"};  // fixed | sqrt_batch
  double lr_reference{1e-4};
  std::size_t batch_reference{80};

  Method method{Method::SB};
  std::uint64_t seed{1};

  Split eval_split{Split::Test};
  std::optional<std::size_t> eval_step;
  std::size_t threads{0};  // 0: take MTLB_THREADS (default 1)

  bool study_parallel{false};

  IngestConfig ingest;
  std::uint16_t ingest_port{47000};
  double ingest_idle_timeout{5.0};
  std::size_t ingest_max_scenarios{0};

  static std::vector<std::string> keys();
  static RunConfig from_kv(const KeyValueConfig & kv);
  static RunConfig load(const std::string & path);
  KeyValueConfig to_kv() const;

  void validate() const;
  /// Initial learning rate after applying the rate policy.
  double effective_lr() const;
  /// Evaluation workers: `threads` capped by MTLB_THREADS when that is set.
  std::size_t worker_threads() const;
  /// Spec for one method; the caller attaches the stage-1 checkpoint where needed.
  ExperimentSpec experiment(Method method) const;
};

}  // namespace mtlb

#endif  // MTLB__REPORT__RUN_CONFIG_HPP_
