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

#include "mtlb/train/transfer.hpp"

#include <limits>
#include <string>
#include <utility>

#include "mtlb/core/errors.hpp"

namespace mtlb
{

std::string_view to_string(Method method)
{
  switch (method) {
    case Method::SB: return "SB";
    case Method::TB: return "TB";
    case Method::MTL: return "MTL";
    case Method::FT: return "FT";
    case Method::FTD: return "FTD";
    case Method::FTE: return "FTE";
    case Method::FR: return "FR";
  }
  return "?";
}

Method method_from_string(std::string_view name)
{
  for (Method m : kStudyMethods) {
    if (to_string(m) == name) return m;
  }
  throw ConfigError("unknown method '" + std::string(name) + "' (valid: TB, SB, MTL, FT, FTD, FTE, FR)");
}

bool is_two_stage(Method method)
{
  return method == Method::FT || method == Method::FTD || method == Method::FTE || method == Method::FR;
}

std::vector<char> build_freeze_mask(const ParameterStore & store, Method method)
{
  std::vector<char> mask;
  mask.reserve(store.size());
  for (const auto & e : store.entries()) {
    bool on = true;
    switch (method) {
      case Method::SB:
      case Method::TB:
      case Method::MTL:
      case Method::FT: on = true; break;
      case Method::FTE: on = e.group == ParamGroup::Encoder; break;
      case Method::FTD: on = e.group == ParamGroup::Decoder; break;
      case Method::FR: on = e.group == ParamGroup::AuxiliaryNew; break;
    }
    mask.push_back(on ? 1 : 0);
  }
  if (method == Method::FR) {
    bool any = false;
    for (char c : mask) any = any || c != 0;
    if (!any) throw StateError("FR freeze mask: the model has no auxiliary_new tensors");
  }
  return mask;
}

void apply_freeze_mask(ParameterStore & store, Method method)
{
  const auto mask = build_freeze_mask(store, method);
  for (std::size_t i = 0; i < mask.size(); ++i) store.set_trainable(ParamId{i}, mask[i] != 0);
}

double uniform01(std::mt19937_64 & rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t uniform_index(std::mt19937_64 & rng, std::size_t n)
{
  if (n == 0) throw InputError("uniform_index: empty range");
  // Rejection keeps the draw unbiased.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
  std::uint64_t x = rng();
  while (x >= limit) x = rng();
  return static_cast<std::size_t>(x % n);
}

std::vector<std::size_t> shuffled_order(std::size_t n, std::mt19937_64 & rng)
{
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
  return order;
}

MtlBatchSampler::MtlBatchSampler(std::size_t source_count, std::size_t target_count, std::uint64_t seed)
: source_count_(source_count), target_count_(target_count), rng_(seed)
{
  if (source_count == 0 || target_count == 0) throw ConfigError("mtl sampler: both splits must be non-empty");
  p_source_ = static_cast<double>(source_count) / static_cast<double>(source_count + target_count);
}

SampleDraw MtlBatchSampler::next()
{
  SampleDraw d;
  if (uniform01(rng_) < p_source_) {
    d.origin = DatasetRole::Source;
    d.index = uniform_index(rng_, source_count_);
  } else {
    d.origin = DatasetRole::Target;
    d.index = uniform_index(rng_, target_count_);
  }
  return d;
}

}  // namespace mtlb
