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

#ifndef MTLB__SCENE__DATASET_HPP_
#define MTLB__SCENE__DATASET_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mtlb/scene/scenario.hpp"

namespace mtlb
{

class ByteWriter;
class ByteReader;

enum class DatasetRole : std::uint8_t { Source = 0, Target = 1 };
enum class Split : std::uint8_t { Train = 0, Val = 1, Test = 2 };

std::string_view to_string(DatasetRole role);
std::string_view to_string(Split split);
DatasetRole dataset_role_from_string(std::string_view name);
Split split_from_string(std::string_view name);

struct SplitRatios
{
  double train;
  double val;
  double test;
};

/// Target 70/15/15; source 254/23/23 out of 300 (84.67/7.67/7.67).
SplitRatios default_split_ratios(DatasetRole role);

/// Seeded partition of `n` indices. Train and val sizes are rounded, test takes the rest.
std::vector<Split> assign_splits(std::size_t n, const SplitRatios & ratios, std::uint64_t seed);

/**
 * @brief Scenario list with a role and a persisted train/val/test partition.
 *
 * Index lists are ascending, disjoint and cover every scenario.
 */
struct DatasetHandle
{
  DatasetRole role{DatasetRole::Source};
  std::vector<Scenario> scenarios;
  std::vector<Split> split_of;  // one entry per scenario

  std::size_t count() const { return scenarios.size(); }
  std::vector<std::size_t> indices(Split split) const;
  std::vector<const Scenario *> subset(Split split) const;
  void validate() const;
};

DatasetHandle make_dataset(
  DatasetRole role, std::vector<Scenario> scenarios, std::uint64_t split_seed);
DatasetHandle make_dataset(
  DatasetRole role, std::vector<Scenario> scenarios, const SplitRatios & ratios, std::uint64_t split_seed);

inline constexpr std::uint32_t kDatasetVersion = 1;

void serialize_scenario(ByteWriter & w, const Scenario & s);
Scenario deserialize_scenario(ByteReader & r);

/// "MTLB", u32 version, u64 count, then (u64 length, payload) per scenario.
std::string encode_dataset(const DatasetHandle & dataset);
/// Throws FormatError on any header, version or record problem; nothing is returned partially.
DatasetHandle decode_dataset(std::string_view bytes);

void save_dataset(const std::string & path, const DatasetHandle & dataset);
DatasetHandle load_dataset(const std::string & path);

}  // namespace mtlb

#endif  // MTLB__SCENE__DATASET_HPP_
