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

#ifndef MTLB__CORE__PARAMETER_STORE_HPP_
#define MTLB__CORE__PARAMETER_STORE_HPP_

#include <cstddef>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "mtlb/core/tensor.hpp"

namespace mtlb
{

enum class ParamGroup { Encoder, Decoder, AuxiliaryNew };

std::string_view to_string(ParamGroup group);
ParamGroup param_group_from_string(std::string_view name);

struct ParamId
{
  std::size_t index{0};
  bool operator==(const ParamId &) const = default;
};

/**
 * @brief Flat registry of named model tensors.
 *
 * Every tensor carries a group tag and a trainable flag. Gradients are
 * accumulated here by Graph::backward for trainable entries only; a frozen
 * entry never has a gradient buffer.
 */
class ParameterStore
{
public:
  struct Entry
  {
    std::string name;
    Tensor value;
    std::optional<Tensor> grad;
    ParamGroup group{ParamGroup::Encoder};
    bool trainable{true};
  };

  ParamId add(std::string name, Tensor init, ParamGroup group);

  std::size_t size() const { return entries_.size(); }
  std::size_t scalar_count() const;
  std::size_t scalar_count(ParamGroup group) const;

  const Entry & entry(ParamId id) const { return entries_.at(id.index); }
  Entry & entry(ParamId id) { return entries_.at(id.index); }
  const std::vector<Entry> & entries() const { return entries_; }
  std::vector<Entry> & entries() { return entries_; }

  const Tensor & value(ParamId id) const { return entries_.at(id.index).value; }
  Tensor & value(ParamId id) { return entries_.at(id.index).value; }
  bool trainable(ParamId id) const { return entries_.at(id.index).trainable; }

  std::optional<ParamId> find(std::string_view name) const;

  void set_trainable(ParamId id, bool trainable);
  void set_all_trainable(bool trainable);
  void set_group_trainable(ParamGroup group, bool trainable);

  void accumulate_grad(ParamId id, const Tensor & grad);
  void zero_grad();

private:
  std::vector<Entry> entries_;
  std::map<std::string, std::size_t, std::less<>> by_name_;
};

/// Deterministic initializers used when registering model tensors.
Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64 & rng);
Tensor zeros(Shape shape);
Tensor ones(Shape shape);

}  // namespace mtlb

#endif  // MTLB__CORE__PARAMETER_STORE_HPP_
