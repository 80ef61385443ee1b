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

#ifndef REACTRL_ENV_HPP_
#define REACTRL_ENV_HPP_

#include <memory>
#include <optional>
#include <string_view>
#include <utility>
#include <vector>

#include "reactrl/timebase.hpp"

namespace reactrl::env {

struct Observation {
  int state_id = 0;
  bool terminal = false;

  friend bool operator==(const Observation&, const Observation&) = default;
};

struct ObserveResult {
  Observation obs;
  double reward = 0.0;  // owed since the previous observe()
};

struct ActionEvent {
  int action = 0;
  TimePoint effective_at;

  friend bool operator==(const ActionEvent&, const ActionEvent&) = default;
};

enum class TerminalReason { kNone, kGoal, kContact, kCapExpired };

std::string_view terminal_reason_name(TerminalReason r);

// Environments are functions of time: state, observation and reward are
// computed from the epoch, the recorded action events and the query time.
// Nothing moves in the background; the world "advances" simply because the
// next query carries a later timestamp.
//
// observe() is the only call with bookkeeping: it reports the reward owed
// since the previous observe(), and it may report the terminal transition
// exactly once. Everything else is a pure query.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual int num_states() const = 0;
  virtual int num_actions() const = 0;

  virtual ObserveResult observe(TimePoint t) = 0;
  virtual void apply_action(int action, TimePoint t) = 0;
  virtual bool is_terminal(TimePoint t) const = 0;
  virtual TerminalReason terminal_reason(TimePoint t) const = 0;

  // Sum of every reward that has become due at or before t.
  virtual double cumulative_reward(TimePoint t) const = 0;

  // The instant the episode ended, if that is at or before `now`.
  virtual std::optional<TimePoint> terminated_at(TimePoint now) const = 0;

  // World-side happenings (onset, contact, wall hits, goal) with time in
  // (after, upto]; `after` = nullopt includes everything up to `upto`.
  using Change = std::pair<TimePoint, nlohmann::json>;
  virtual std::vector<Change> state_changes(std::optional<TimePoint> after, TimePoint upto) const {
    (void)after;
    (void)upto;
    return {};
  }

  // True when the world only changes on apply_action (durations are ignored).
  virtual bool synchronous() const { return false; }
};

}  // namespace reactrl::env

#endif  // REACTRL_ENV_HPP_
