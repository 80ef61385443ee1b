// Copyright 2026 The reactrl Authors.
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


#ifndef REACTRL_TRIAL_SERVICE_HPP_
#define REACTRL_TRIAL_SERVICE_HPP_

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "reactrl/experiments.hpp"

// Live press-to-stop sessions. A session walks its episodes in order; during
// an episode the arm's angle is streamed as state_tick messages and the
// participant's press (stamped with the client's own monotone clock) becomes
// the Emergency onset. Conditions are never named to the client before the
// session summary.
//
// Every message is a JSON object carrying "v": 1 and "kind". Times are
// integer microseconds since the episode's start, angles integer
// millidegrees.
namespace reactrl::trial {

inline constexpr int kProtocolVersion = 1;

enum class PressOutcome { kAccepted, kDuplicate, kAfterTerminal, kNoActiveEpisode, kWrongEpisode };

std::string_view press_outcome_name(PressOutcome o);

// Round-trip clock offset estimate between a client and the session clock.
struct ClockSync {
  std::int64_t offset_us = 0;  // session_time = client_time + offset
  std::int64_t bound_us = 0;   // |error| <= bound (half the round trip)
};

struct EpisodeRecord {
  int episode = 0;
  experiments::Condition condition = experiments::Condition::kControl;
  std::optional<std::int64_t> press_us;
  std::optional<std::int64_t> press_bound_us;  // absent when no sync was done
  std::optional<std::int64_t> stop_effective_us;
  bool failed_stop = false;
  bool aborted = false;
  std::int64_t end_us = 0;
  std::int64_t theta_end_mdeg = 0;
  std::int64_t distance_to_contact_mdeg = 0;
};

class TrialSession {
 public:
  // Pre-trains the two agents in simulated time; throws Error(kInvalidConfig).
  TrialSession(std::string id, experiments::Exp2Config cfg, std::uint64_t seed);
  ~TrialSession();

  TrialSession(const TrialSession&) = delete;
  TrialSession& operator=(const TrialSession&) = delete;

  const std::string& id() const { return id_; }
  const experiments::Exp2Config& config() const { return cfg_; }
  int episode_count() const { return static_cast<int>(order_.size()); }
  // Server-side view; never sent to the client before the summary.
  const std::vector<experiments::Condition>& conditions() const { return order_; }

  // Microseconds since the session was created.
  std::int64_t now_us() const;

  nlohmann::json session_start_message() const;

  // Starts the next episode (the arm starts moving now) and queues its
  // episode_start message, which is also returned. Throws Error(kRuntime)
  // when an episode is still running or none are left.
  nlohmann::json begin_episode();

  // `client_us` is the client's monotone timestamp of the button going down.
  PressOutcome handle_press(int episode, std::int64_t client_us);

  // One round trip: the client sent at c0, the server stamped s, the client
  // received at c1 (client clock). The tightest round trip wins.
  void record_sync(std::int64_t client_send_us, std::int64_t server_us,
                   std::int64_t client_recv_us);
  std::optional<ClockSync> clock_sync() const;

  // state_tick for session time `session_us`, or nullopt when no episode is
  // running or the running one has already ended.
  std::optional<nlohmann::json> tick_at(std::int64_t session_us);

  // Queued messages in order, followed by a state_tick for the current time
  // if an episode is running.
  std::vector<nlohmann::json> poll();

  // Ends the running episode now; it is excluded from the counts.
  void abort_episode();

  bool episode_running() const;
  bool finished() const;
  // Blocks until the running episode (if any) has ended.
  void wait_episode();

  std::vector<EpisodeRecord> records() const;
  // Throws Error(kRuntime) until every episode has ended.
  nlohmann::json summary_message() const;

 private:
  struct Live;

  void run_worker(Live& live);
  void finish_episode(Live& live, const exec::EpisodeResult& res);
  nlohmann::json summary_locked() const;
  void join_worker();

  const std::string id_;
  const experiments::Exp2Config cfg_;
  const std::chrono::steady_clock::time_point zero_;
  std::vector<experiments::Condition> order_;

  agent::QTable q_standard_;
  agent::QTable q_reactive_;
  agent::Rng agent_rng_;

  mutable std::mutex mu_;
  std::condition_variable cv_;
  std::optional<ClockSync> sync_;
  std::deque<nlohmann::json> outbox_;
  std::vector<EpisodeRecord> records_;
  int next_episode_ = 0;
  std::unique_ptr<Live> live_;

  std::mutex worker_mu_;  // serializes starting and joining the worker
  std::thread worker_;
};

}  // namespace reactrl::trial

#endif  // REACTRL_TRIAL_SERVICE_HPP_
