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

#include "mtlb/scene/dataset.hpp"

#include <cmath>

#include "mtlb/core/binary_io.hpp"
#include "mtlb/core/errors.hpp"

namespace mtlb
{

namespace
{

constexpr char kMagic[4] = {'M', 'T', 'L', 'B'};

}  // namespace

std::string_view to_string(DatasetRole role) { return role == DatasetRole::Source ? "source" : "target"; }

std::string_view to_string(Split split)
{
  switch (split) {
    case Split::Train:
      return "train";
    case Split::Val:
      return "val";
    case Split::Test:
      return "test";
  }
  return "?";
}

DatasetRole dataset_role_from_string(std::string_view name)
{
  if (name == "source") return DatasetRole::Source;
  if (name == "target") return DatasetRole::Target;
  throw ConfigError("unknown dataset role '" + std::string(name) + "' (valid: source, target)");
}

Split split_from_string(std::string_view name)
{
  if (name == "train") return Split::Train;
  if (name == "val") return Split::Val;
  if (name == "test") return Split::Test;
  throw ConfigError("unknown split '" + std::string(name) + "' (valid: train, val, test)");
}

SplitRatios default_split_ratios(DatasetRole role)
{
  if (role == DatasetRole::Target) return {0.70, 0.15, 0.15};
  return {254.0 / 300.0, 23.0 / 300.0, 23.0 / 300.0};
}

std::vector<Split> assign_splits(std::size_t n, const SplitRatios & ratios, std::uint64_t seed)
{
  if (ratios.train < 0.0 || ratios.val < 0.0 || ratios.test < 0.0 ||
      std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-6) {
    throw ConfigError("split ratios must be non-negative and sum to 1");
  }
  const auto n_train = std::min<std::size_t>(n, static_cast<std::size_t>(std::llround(ratios.train * static_cast<double>(n))));
  const auto n_val =
    std::min<std::size_t>(n - n_train, static_cast<std::size_t>(std::llround(ratios.val * static_cast<double>(n))));

  // Fisher-Yates on a splitmix-style stream so the partition is stable across standard libraries.
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::uint64_t state = seed;
  auto next = [&state]() {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  };
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(next() % i);
    std::swap(perm[i - 1], perm[j]);
  }
  std::vector<Split> out(n, Split::Test);
  for (std::size_t i = 0; i < n; ++i) {
    out[perm[i]] = i < n_train ? Split::Train : (i < n_train + n_val ? Split::Val : Split::Test);
  }
  return out;
}

std::vector<std::size_t> DatasetHandle::indices(Split split) const
{
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < split_of.size(); ++i) {
    if (split_of[i] == split) out.push_back(i);
  }
  return out;
}

std::vector<const Scenario *> DatasetHandle::subset(Split split) const
{
  std::vector<const Scenario *> out;
  for (std::size_t i : indices(split)) out.push_back(&scenarios[i]);
  return out;
}

void DatasetHandle::validate() const
{
  if (split_of.size() != scenarios.size()) throw InputError("dataset: split table does not cover every scenario");
  for (const auto & s : scenarios) s.validate();
}

DatasetHandle make_dataset(DatasetRole role, std::vector<Scenario> scenarios, std::uint64_t split_seed)
{
  return make_dataset(role, std::move(scenarios), default_split_ratios(role), split_seed);
}

DatasetHandle make_dataset(
  DatasetRole role, std::vector<Scenario> scenarios, const SplitRatios & ratios, std::uint64_t split_seed)
{
  DatasetHandle d;
  d.role = role;
  d.split_of = assign_splits(scenarios.size(), ratios, split_seed);
  d.scenarios = std::move(scenarios);
  d.validate();
  return d;
}

void serialize_scenario(ByteWriter & w, const Scenario & s)
{
  w.put_string(s.id);
  w.put<double>(s.duration);
  w.put<double>(s.sample_rate);
  w.put<std::int64_t>(s.focal_id);
  w.put<std::uint64_t>(s.current_index);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.map.size()));
  for (const auto & p : s.map) {
    w.put<std::uint8_t>(static_cast<std::uint8_t>(p.type));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(p.points.size()));
    for (const auto & pt : p.points) {
      for (double v : pt) w.put<double>(v);
    }
  }
  w.put<std::uint32_t>(static_cast<std::uint32_t>(s.agents.size()));
  for (const auto & a : s.agents) {
    w.put<std::int64_t>(a.id);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(a.type));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(a.states.size()));
    for (const auto & st : a.states) {
      w.put<double>(st.t);
      for (double v : st.center) w.put<double>(v);
      for (double v : st.velocity) w.put<double>(v);
      w.put<double>(st.heading);
      for (double v : st.dims) w.put<double>(v);
      w.put<std::uint8_t>(st.valid ? 1 : 0);
    }
  }
}

Scenario deserialize_scenario(ByteReader & r)
{
  Scenario s;
  s.id = r.get_string();
  s.duration = r.get<double>();
  s.sample_rate = r.get<double>();
  s.focal_id = r.get<std::int64_t>();
  s.current_index = static_cast<std::size_t>(r.get<std::uint64_t>());
  const auto n_map = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_map; ++i) {
    MapPolyline p;
    const auto type = r.get<std::uint8_t>();
    if (type > 2) throw FormatError("unknown polyline type code " + std::to_string(type));
    p.type = static_cast<PolylineType>(type);
    const auto n_pts = r.get<std::uint32_t>();
    if (static_cast<std::size_t>(n_pts) * 24 > r.remaining()) throw FormatError("polyline point count exceeds record");
    p.points.resize(n_pts);
    for (auto & pt : p.points) {
      for (double & v : pt) v = r.get<double>();
    }
    s.map.push_back(std::move(p));
  }
  const auto n_agents = r.get<std::uint32_t>();
  for (std::uint32_t i = 0; i < n_agents; ++i) {
    AgentTrack a;
    a.id = r.get<std::int64_t>();
    const auto type = r.get<std::uint8_t>();
    if (type < 1 || type > 3) throw FormatError("unknown agent type code " + std::to_string(type));
    a.type = static_cast<AgentType>(type);
    const auto n_states = r.get<std::uint32_t>();
    if (static_cast<std::size_t>(n_states) * 81 > r.remaining()) throw FormatError("state count exceeds record");
    a.states.resize(n_states);
    for (auto & st : a.states) {
      st.t = r.get<double>();
      for (double & v : st.center) v = r.get<double>();
      for (double & v : st.velocity) v = r.get<double>();
      st.heading = r.get<double>();
      for (double & v : st.dims) v = r.get<double>();
      const auto valid = r.get<std::uint8_t>();
      if (valid > 1) throw FormatError("bad validity flag");
      st.valid = valid == 1;
    }
    s.agents.push_back(std::move(a));
  }
  return s;
}

std::string encode_dataset(const DatasetHandle & dataset)
{
  if (dataset.split_of.size() != dataset.scenarios.size()) {
    throw InputError("dataset: split table does not cover every scenario");
  }
  ByteWriter w;
  w.put_raw(std::string_view(kMagic, 4));
  w.put<std::uint32_t>(kDatasetVersion);
  w.put<std::uint64_t>(dataset.scenarios.size());
  for (std::size_t i = 0; i < dataset.scenarios.size(); ++i) {
    ByteWriter rec;
    rec.put<std::uint8_t>(static_cast<std::uint8_t>(dataset.role));
    rec.put<std::uint8_t>(static_cast<std::uint8_t>(dataset.split_of[i]));
    serialize_scenario(rec, dataset.scenarios[i]);
    w.put<std::uint64_t>(rec.bytes().size());
    w.put_raw(rec.bytes());
  }
  return w.take();
}

DatasetHandle decode_dataset(std::string_view bytes)
{
  ByteReader r(bytes);
  if (bytes.size() < 16 || r.get_raw(4) != std::string_view(kMagic, 4)) {
    throw FormatError("not a dataset file (bad magic)");
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kDatasetVersion) {
    throw FormatError(
      "dataset version " + std::to_string(version) + " is not supported (expected " +
      std::to_string(kDatasetVersion) + ")");
  }
  const auto count = r.get<std::uint64_t>();
  if (count > r.remaining() / 8) throw FormatError("dataset record count exceeds file size");
  DatasetHandle d;
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto len = r.get<std::uint64_t>();
    if (len > r.remaining()) throw FormatError("dataset record " + std::to_string(i) + " is truncated");
    ByteReader rec(r.get_raw(static_cast<std::size_t>(len)));
    const auto role = rec.get<std::uint8_t>();
    const auto split = rec.get<std::uint8_t>();
    if (role > 1 || split > 2) throw FormatError("dataset record " + std::to_string(i) + ": bad role/split tag");
    if (i == 0) {
      d.role = static_cast<DatasetRole>(role);
    } else if (static_cast<std::uint8_t>(d.role) != role) {
      throw FormatError("dataset records disagree on the dataset role");
    }
    d.split_of.push_back(static_cast<Split>(split));
    d.scenarios.push_back(deserialize_scenario(rec));
    if (!rec.done()) throw FormatError("dataset record " + std::to_string(i) + " has trailing bytes");
  }
  if (!r.done()) throw FormatError("dataset file has trailing bytes");
  try {
    d.validate();
  } catch (const InputError & e) {
    throw FormatError(std::string("dataset content invalid: ") + e.what());
  }
  return d;
}

void save_dataset(const std::string & path, const DatasetHandle & dataset)
{
  write_file(path, encode_dataset(dataset));
}

DatasetHandle load_dataset(const std::string & path) { return decode_dataset(read_file(path)); }

}  // namespace mtlb
