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

#ifndef MTLB__CORE__KV_CONFIG_HPP_
#define MTLB__CORE__KV_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mtlb
{

/// Plain-text `key=value` settings, one per line. `#` starts a comment.
class KeyValueConfig
{
public:
  static KeyValueConfig parse(std::string_view text);
  static KeyValueConfig load(const std::string & path);

  void set(const std::string & key, const std::string & value) { values_[key] = value; }
  bool has(std::string_view key) const { return values_.find(key) != values_.end(); }
  std::optional<std::string> get(std::string_view key) const;

  std::string get_string(std::string_view key, const std::string & fallback) const;
  double get_double(std::string_view key, double fallback) const;
  std::int64_t get_int(std::string_view key, std::int64_t fallback) const;
  std::uint64_t get_uint(std::string_view key, std::uint64_t fallback) const;
  bool get_bool(std::string_view key, bool fallback) const;

  /// Throws ConfigError naming the first key not in `allowed`.
  void reject_unknown(const std::vector<std::string> & allowed) const;

  const std::map<std::string, std::string, std::less<>> & values() const { return values_; }
  std::string serialize() const;

private:
  std::map<std::string, std::string, std::less<>> values_;
};

/// Shortest decimal text that round-trips the double.
std::string format_double(double value);

/// Seed mixer (splitmix64) used to derive independent per-item seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt);

}  // namespace mtlb

#endif  // MTLB__CORE__KV_CONFIG_HPP_
