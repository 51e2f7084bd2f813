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

#include "mtlb/core/parameter_store.hpp"

#include <cmath>

#include "mtlb/core/errors.hpp"

namespace mtlb
{

std::string_view to_string(ParamGroup group)
{
  switch (group) {
    case ParamGroup::Encoder:
      return "encoder";
    case ParamGroup::Decoder:
      return "decoder";
    case ParamGroup::AuxiliaryNew:
      return "auxiliary_new";
  }
  return "?";
}

ParamGroup param_group_from_string(std::string_view name)
{
  if (name == "encoder") return ParamGroup::Encoder;
  if (name == "decoder") return ParamGroup::Decoder;
  if (name == "auxiliary_new") return ParamGroup::AuxiliaryNew;
  throw FormatError("unknown parameter group '" + std::string(name) + "'");
}

ParamId ParameterStore::add(std::string name, Tensor init, ParamGroup group)
{
  if (by_name_.count(name) != 0) {
    throw ConfigError("parameter '" + name + "' registered twice");
  }
  const std::size_t index = entries_.size();
  by_name_.emplace(name, index);
  entries_.push_back(Entry{std::move(name), std::move(init), std::nullopt, group, true});
  return ParamId{index};
}

std::size_t ParameterStore::scalar_count() const
{
  std::size_t n = 0;
  for (const auto & e : entries_) n += e.value.size();
  return n;
}

std::size_t ParameterStore::scalar_count(ParamGroup group) const
{
  std::size_t n = 0;
  for (const auto & e : entries_) {
    if (e.group == group) n += e.value.size();
  }
  return n;
}

std::optional<ParamId> ParameterStore::find(std::string_view name) const
{
  const auto it = by_name_.find(name);
  if (it == by_name_.end()) return std::nullopt;
  return ParamId{it->second};
}

void ParameterStore::set_trainable(ParamId id, bool trainable)
{
  auto & e = entries_.at(id.index);
  e.trainable = trainable;
  if (!trainable) e.grad.reset();
}

void ParameterStore::set_all_trainable(bool trainable)
{
  for (std::size_t i = 0; i < entries_.size(); ++i) set_trainable(ParamId{i}, trainable);
}

void ParameterStore::set_group_trainable(ParamGroup group, bool trainable)
{
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].group == group) set_trainable(ParamId{i}, trainable);
  }
}

void ParameterStore::accumulate_grad(ParamId id, const Tensor & grad)
{
  auto & e = entries_.at(id.index);
  if (!e.trainable) {
    throw StateError("gradient written to frozen parameter '" + e.name + "'");
  }
  if (grad.shape() != e.value.shape()) {
    throw DimensionError("gradient shape mismatch for '" + e.name + "'");
  }
  if (!e.grad) {
    e.grad = grad;
    return;
  }
  auto dst = e.grad->data();
  auto src = grad.data();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

void ParameterStore::zero_grad()
{
  for (auto & e : entries_) e.grad.reset();
}

Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64 & rng)
{
  const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::uniform_real_distribution<double> dist(-bound, bound);
  Tensor t({fan_in, fan_out});
  for (auto & v : t.data()) v = dist(rng);
  return t;
}

Tensor zeros(Shape shape) { return Tensor(std::move(shape), 0.0); }

Tensor ones(Shape shape) { return Tensor(std::move(shape), 1.0); }

}  // namespace mtlb
