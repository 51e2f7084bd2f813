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

#ifndef MTLB__TRAIN__TRANSFER_HPP_
#define MTLB__TRAIN__TRANSFER_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "mtlb/core/parameter_store.hpp"
#include "mtlb/scene/dataset.hpp"

namespace mtlb
{

enum class Method { SB, TB, MTL, FT, FTD, FTE, FR };

/// Table order: TB, SB, MTL, FT, FTD, FTE, FR.
inline constexpr std::array<Method, 7> kStudyMethods{
  Method::TB, Method::SB, Method::MTL, Method::FT, Method::FTD, Method::FTE, Method::FR};

std::string_view to_string(Method method);
/// Throws ConfigError listing the valid names.
Method method_from_string(std::string_view name);

/// FT, FTD, FTE and FR continue from a source-trained checkpoint.
bool is_two_stage(Method method);

/// Trainable flag per store entry for `method`.
std::vector<char> build_freeze_mask(const ParameterStore & store, Method method);
void apply_freeze_mask(ParameterStore & store, Method method);

/// Scenario drawn by the multi-task sampler.
struct SampleDraw
{
  DatasetRole origin{DatasetRole::Source};
  std::size_t index{0};  // position within that role's split
};

/**
 * @brief Interleaved sampling over two splits for hard parameter sharing.
 *
 * Each draw picks the source split with probability n_S / (n_S + n_T), then a
 * uniform scenario within the chosen split.
 */
class MtlBatchSampler
{
public:
  MtlBatchSampler(std::size_t source_count, std::size_t target_count, std::uint64_t seed);

  SampleDraw next();
  double source_probability() const { return p_source_; }

private:
  std::size_t source_count_;
  std::size_t target_count_;
  double p_source_;
  std::mt19937_64 rng_;
};

/// Uniform double in [0, 1) and index in [0, n), independent of the standard library's distributions.
double uniform01(std::mt19937_64 & rng);
std::size_t uniform_index(std::mt19937_64 & rng, std::size_t n);
/// Deterministic Fisher-Yates permutation of 0..n-1.
std::vector<std::size_t> shuffled_order(std::size_t n, std::mt19937_64 & rng);

}  // namespace mtlb

#endif  // MTLB__TRAIN__TRANSFER_HPP_
