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

#ifndef MTLB__SCENE__INGEST_HPP_
#define MTLB__SCENE__INGEST_HPP_

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mtlb/scene/scenario.hpp"

namespace mtlb
{

/// One agent sample: `id|t|x|y|z|vx|vy|heading|length|width|height|type`.
struct StateRecord
{
  std::int64_t id{0};
  AgentType type{AgentType::Vehicle};
  AgentState state;
};

/// `END|<scenario id>`.
struct EndMarker
{
  std::string scenario_id;
};

using Datagram = std::variant<StateRecord, EndMarker>;

/// Throws InputError on any malformed field.
Datagram parse_datagram(std::string_view text);
std::string format_datagram(const StateRecord & record);

struct IngestConfig
{
  double reorder_window{1.0};  // seconds
  double sample_rate{10.0};
  std::size_t current_index{10};
  std::optional<std::int64_t> focal_id;  // lowest agent id when unset
};

struct IngestStats
{
  std::size_t received{0};
  std::size_t malformed{0};
  std::size_t late{0};        // older than the reorder window
  std::size_t duplicates{0};  // repeated (agent, time)
  std::size_t scenarios{0};
  std::size_t rejected_scenarios{0};
};

/**
 * @brief Assembles datagrams into scenarios.
 *
 * Samples are buffered per agent in timestamp order. A sample older than the
 * newest seen time minus the reorder window is dropped as late. On an end
 * marker the buffered tracks are resampled with PCHIP onto the grid k / rate
 * and a Scenario is emitted with an empty map.
 */
class ScenarioAssembler
{
public:
  explicit ScenarioAssembler(IngestConfig config);

  /// Returns the finished scenario when `text` was an end marker that produced one.
  std::optional<Scenario> feed(std::string_view text);

  const IngestStats & stats() const { return stats_; }
  std::vector<Scenario> take_finished() { return std::exchange(finished_, {}); }
  const std::vector<Scenario> & finished() const { return finished_; }

  /// Builds a scenario from the current buffer without clearing it.
  Scenario build(const std::string & id) const;

private:
  struct Track
  {
    AgentType type;
    std::map<double, AgentState> samples;
  };

  IngestConfig config_;
  IngestStats stats_;
  std::map<std::int64_t, Track> tracks_;
  double newest_{-1e300};
  std::vector<Scenario> finished_;
};

/// Replays a capture file, one datagram per line.
std::vector<Scenario> ingest_replay(const std::string & path, const IngestConfig & config, IngestStats * stats);

/**
 * Receives datagrams on a bound UDP port until `max_scenarios` end markers
 * (0 = unlimited), `stop` becomes true, or the idle timeout passes.
 * Binding failure throws InputError.
 */
std::vector<Scenario> ingest_udp(
  std::uint16_t port, const IngestConfig & config, std::size_t max_scenarios, double idle_timeout_s,
  const std::atomic<bool> * stop, IngestStats * stats);

/// Sends each line as one datagram to 127.0.0.1:port.
void send_datagrams(std::uint16_t port, const std::vector<std::string> & lines);

}  // namespace mtlb

#endif  // MTLB__SCENE__INGEST_HPP_
