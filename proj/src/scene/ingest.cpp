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

#include "mtlb/scene/ingest.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <utility>

#include "mtlb/core/errors.hpp"
#include "mtlb/core/kv_config.hpp"
#include "mtlb/scene/pchip.hpp"

namespace mtlb
{

namespace
{

std::vector<std::string_view> split_fields(std::string_view text)
{
  std::vector<std::string_view> out;
  std::size_t begin = 0;
  while (true) {
    const auto bar = text.find('|', begin);
    out.push_back(text.substr(begin, bar == std::string_view::npos ? std::string_view::npos : bar - begin));
    if (bar == std::string_view::npos) break;
    begin = bar + 1;
  }
  return out;
}

double to_double(std::string_view field, const char * name)
{
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size() || !std::isfinite(v)) {
    throw InputError(std::string("datagram field '") + name + "' is not a finite number: '" + std::string(field) + "'");
  }
  return v;
}

std::int64_t to_int(std::string_view field, const char * name)
{
  std::int64_t v = 0;
  const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
    throw InputError(std::string("datagram field '") + name + "' is not an integer: '" + std::string(field) + "'");
  }
  return v;
}

class Socket
{
public:
  explicit Socket(int fd) : fd_(fd) {}
  ~Socket()
  {
    if (fd_ >= 0) ::close(fd_);
  }
  Socket(const Socket &) = delete;
  Socket & operator=(const Socket &) = delete;
  int fd() const { return fd_; }

private:
  int fd_;
};

}  // namespace

Datagram parse_datagram(std::string_view text)
{
  while (!text.empty() && (text.back() == '\n' || text.back() == '\r')) text.remove_suffix(1);
  if (text.find('\n') != std::string_view::npos) throw InputError("datagram contains a newline");
  const auto f = split_fields(text);
  if (f.size() == 2 && f[0] == "END") {
    if (f[1].empty()) throw InputError("end marker without scenario id");
    return EndMarker{std::string(f[1])};
  }
  if (f.size() != 12) {
    throw InputError("datagram has " + std::to_string(f.size()) + " fields, expected 12");
  }
  StateRecord r;
  r.id = to_int(f[0], "id");
  auto & st = r.state;
  st.t = to_double(f[1], "t");
  st.center = {to_double(f[2], "x"), to_double(f[3], "y"), to_double(f[4], "z")};
  st.velocity = {to_double(f[5], "vx"), to_double(f[6], "vy")};
  st.heading = to_double(f[7], "heading");
  st.dims = {to_double(f[8], "length"), to_double(f[9], "width"), to_double(f[10], "height")};
  if (!(st.dims[0] > 0.0 && st.dims[1] > 0.0 && st.dims[2] > 0.0)) throw InputError("datagram dimensions must be positive");
  if (st.t < 0.0) throw InputError("datagram time must be non-negative");
  r.type = agent_type_from_code(static_cast<int>(to_int(f[11], "type")));
  st.heading = normalize_angle(st.heading);
  st.valid = true;
  return r;
}

std::string format_datagram(const StateRecord & r)
{
  const auto & s = r.state;
  std::string out = std::to_string(r.id);
  for (double v : {s.t, s.center[0], s.center[1], s.center[2], s.velocity[0], s.velocity[1], s.heading, s.dims[0],
                   s.dims[1], s.dims[2]}) {
    out += "|" + format_double(v);
  }
  out += "|" + std::to_string(static_cast<int>(r.type));
  return out;
}

ScenarioAssembler::ScenarioAssembler(IngestConfig config) : config_(std::move(config))
{
  if (!(config_.sample_rate > 0.0)) throw ConfigError("ingest: sample rate must be positive");
  if (!(config_.reorder_window >= 0.0)) throw ConfigError("ingest: reorder window must be non-negative");
}

std::optional<Scenario> ScenarioAssembler::feed(std::string_view text)
{
  ++stats_.received;
  Datagram d;
  try {
    d = parse_datagram(text);
  } catch (const InputError &) {
    ++stats_.malformed;
    return std::nullopt;
  }
  if (auto * rec = std::get_if<StateRecord>(&d)) {
    if (rec->state.t < newest_ - config_.reorder_window) {
      ++stats_.late;
      return std::nullopt;
    }
    newest_ = std::max(newest_, rec->state.t);
    auto [it, fresh] = tracks_.try_emplace(rec->id, Track{rec->type, {}});
    if (!it->second.samples.emplace(rec->state.t, rec->state).second) ++stats_.duplicates;
    return std::nullopt;
  }
  const auto & end = std::get<EndMarker>(d);
  std::optional<Scenario> out;
  try {
    out = build(end.scenario_id);
    finished_.push_back(*out);
    ++stats_.scenarios;
  } catch (const Error &) {
    ++stats_.rejected_scenarios;
    out.reset();
  }
  tracks_.clear();
  newest_ = -1e300;
  return out;
}

Scenario ScenarioAssembler::build(const std::string & id) const
{
  if (tracks_.empty()) throw InputError("ingest: scenario '" + id + "' has no samples");
  const double rate = config_.sample_rate;
  double t_min = 1e300, t_max = -1e300;
  for (const auto & [aid, tr] : tracks_) {
    t_min = std::min(t_min, tr.samples.begin()->first);
    t_max = std::max(t_max, tr.samples.rbegin()->first);
  }
  const auto k0 = static_cast<std::int64_t>(std::ceil(t_min * rate - 1e-9));
  const auto k1 = static_cast<std::int64_t>(std::floor(t_max * rate + 1e-9));
  if (k1 <= k0) throw InputError("ingest: scenario '" + id + "' spans less than one sample interval");
  const auto n = static_cast<std::size_t>(k1 - k0 + 1);

  Scenario s;
  s.id = id;
  s.sample_rate = rate;
  s.duration = static_cast<double>(n - 1) / rate;
  s.current_index = std::min(config_.current_index, n - 1);
  s.focal_id = config_.focal_id.value_or(tracks_.begin()->first);

  for (const auto & [aid, tr] : tracks_) {
    AgentTrack track;
    track.id = aid;
    track.type = tr.type;
    std::vector<AgentState> samples;
    for (const auto & [t, st] : tr.samples) samples.push_back(st);
    const double first = samples.front().t, last = samples.back().t;
    std::vector<double> queries;
    std::vector<std::size_t> slots;
    for (std::size_t k = 0; k < n; ++k) {
      const double t = static_cast<double>(k0 + static_cast<std::int64_t>(k)) / rate;
      track.states.push_back(AgentState{t});
      if (t >= first - 1e-9 && t <= last + 1e-9) {
        queries.push_back(std::clamp(t, first, last));
        slots.push_back(k);
      }
    }
    if (!queries.empty()) {
      std::vector<AgentState> values;
      if (samples.size() == 1) {
        values.assign(queries.size(), samples.front());
      } else {
        values = pchip_resample_states(samples, queries);
      }
      for (std::size_t q = 0; q < slots.size(); ++q) {
        AgentState st = values[q];
        st.t = track.states[slots[q]].t;
        st.valid = true;
        track.states[slots[q]] = st;
      }
    }
    s.agents.push_back(std::move(track));
  }
  s.validate();
  if (!s.focal().states[s.current_index].valid) {
    throw DegenerateInputError("ingest: focal agent of '" + id + "' is not observed at the current step");
  }
  return s;
}

std::vector<Scenario> ingest_replay(const std::string & path, const IngestConfig & config, IngestStats * stats)
{
  std::ifstream in(path);
  if (!in) throw InputError("cannot open capture '" + path + "'");
  ScenarioAssembler assembler(config);
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    assembler.feed(line);
  }
  if (stats) *stats = assembler.stats();
  return assembler.take_finished();
}

std::vector<Scenario> ingest_udp(
  std::uint16_t port, const IngestConfig & config, std::size_t max_scenarios, double idle_timeout_s,
  const std::atomic<bool> * stop, IngestStats * stats)
{
  Socket sock(::socket(AF_INET, SOCK_DGRAM, 0));
  if (sock.fd() < 0) throw InputError(std::string("socket() failed: ") + std::strerror(errno));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(INADDR_ANY);
  if (::bind(sock.fd(), reinterpret_cast<sockaddr *>(&addr), sizeof(addr)) != 0) {
    throw InputError("cannot bind UDP port " + std::to_string(port) + ": " + std::strerror(errno));
  }

  ScenarioAssembler assembler(config);
  char buf[2048];
  auto last_activity = std::chrono::steady_clock::now();
  while (!(stop && stop->load())) {
    if (max_scenarios > 0 && assembler.stats().scenarios + assembler.stats().rejected_scenarios >= max_scenarios) break;
    pollfd pfd{sock.fd(), POLLIN, 0};
    const int ready = ::poll(&pfd, 1, 100);
    if (ready < 0) {
      if (errno == EINTR) continue;
      throw InputError(std::string("poll() failed: ") + std::strerror(errno));
    }
    if (ready == 0) {
      const std::chrono::duration<double> idle = std::chrono::steady_clock::now() - last_activity;
      if (idle_timeout_s > 0.0 && idle.count() > idle_timeout_s) break;
      continue;
    }
    const auto n = ::recv(sock.fd(), buf, sizeof(buf), 0);
    if (n < 0) continue;
    last_activity = std::chrono::steady_clock::now();
    assembler.feed(std::string_view(buf, static_cast<std::size_t>(n)));
  }
  if (stats) *stats = assembler.stats();
  return assembler.take_finished();
}

void send_datagrams(std::uint16_t port, const std::vector<std::string> & lines)
{
  Socket sock(::socket(AF_INET, SOCK_DGRAM, 0));
  if (sock.fd() < 0) throw InputError(std::string("socket() failed: ") + std::strerror(errno));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  for (const auto & line : lines) {
    ::sendto(sock.fd(), line.data(), line.size(), 0, reinterpret_cast<sockaddr *>(&addr), sizeof(addr));
  }
}

}  // namespace mtlb
