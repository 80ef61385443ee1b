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

#ifndef REACTRL_EXECUTOR_HPP_
#define REACTRL_EXECUTOR_HPP_

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reactrl/agent.hpp"
#include "reactrl/env.hpp"
#include "reactrl/timebase.hpp"

namespace reactrl::exec {

// The four phases every TD-control loop is built from.
enum class Component { kAct = 0, kObserve = 1, kChoose = 2, kLearn = 3 };

std::string_view component_name(Component c);
Component component_from_name(std::string_view name);

// A protocol ordering: `preamble` runs once after reset, `body` repeats.
//
//   standard: preamble [Choose],      body [Act, Observe, Choose, Learn]
//   reactive: preamble [Choose, Act], body [Observe, Choose, Act, Learn]
//
// The reactive ordering acts on a fresh observation before it spends time
// learning about the previous step.
struct ProtocolSchedule {
  std::string name;
  std::vector<Component> preamble;
  std::vector<Component> body;

  static ProtocolSchedule standard();
  static ProtocolSchedule reactive();
  // "standard" or "reactive".
  static ProtocolSchedule named(std::string_view name);

  friend bool operator==(const ProtocolSchedule&, const ProtocolSchedule&) = default;
};

// Throws Error(kInvalidSchedule) naming the violated binding. Accepts any
// body that is a permutation of the four components, provided A is chosen
// before the first Act and (S, A, R, S', A') are all bound before each Learn.
void validate_schedule(const ProtocolSchedule& sched);

// Time charged to each component. Learn additionally pays `learn_extra`,
// the injected learning delay.
struct DelayModel {
  std::array<TimeSpan, 4> base{};
  TimeSpan learn_extra;

  static DelayModel uniform(TimeSpan per_component, TimeSpan learn_extra = {});
  static DelayModel zero() { return {}; }

  TimeSpan charge(Component c) const;
  // One full loop body: sum of the four bases plus learn_extra.
  TimeSpan step() const;
};

// The (S, A, R, S', A') tuple handed to one learning update. Terminal S'
// has no state or action.
struct LearningTuple {
  int s = 0;
  int a = 0;
  double r = 0.0;
  std::optional<int> next_state;
  std::optional<int> next_action;

  friend bool operator==(const LearningTuple&, const LearningTuple&) = default;
};

struct EpisodeResult {
  EventLog log;
  double ret = 0.0;
  TimeSpan duration;
  // Stop tasks: first Stop taking effect at/after the Emergency onset,
  // measured from the onset. Absent when either never happened.
  std::optional<TimeSpan> reaction;
  std::optional<TimePoint> onset;
  std::optional<TimePoint> stop_effective;
  bool failed_stop = false;
  int steps = 0;
  env::TerminalReason end_reason = env::TerminalReason::kNone;
  std::vector<int> actions;              // in the order they took effect
  std::vector<LearningTuple> updates;    // in the order they were applied
};

struct RunOptions {
  // When false the episode keeps no event log (reaction stays absent).
  bool record_log = true;
  // ComponentStart/ComponentEnd entries.
  bool log_components = true;
};

// Runs one episode. Preconditions: `env` was just reset and `clock` reads
// the env's epoch. Each component starts at clock.now(); Observe samples
// the world and Act takes effect at that start instant, then the clock is
// charged the component's duration. The loop ends once a terminal
// observation has been learned from, or at the first Observe that finds the
// episode cap expired (no learning happens for that final interval).
EpisodeResult run_episode(env::Environment& env, agent::QTable& q, const agent::AgentConfig& cfg,
                          const ProtocolSchedule& sched, const DelayModel& delays, Clock& clock,
                          agent::Rng& rng, const RunOptions& opts = {});

// Same contract on an environment that only moves when acted upon; no time
// is charged.
EpisodeResult run_episode_synchronous(env::Environment& env, agent::QTable& q,
                                      const agent::AgentConfig& cfg,
                                      const ProtocolSchedule& sched, agent::Rng& rng,
                                      const RunOptions& opts = {});

// Stop-task reaction derived purely from the event log: the first
// ActionEffective(Stop) at or after the logged Emergency onset.
std::optional<TimeSpan> reaction_from_log(const EventLog& log, int stop_action);

}  // namespace reactrl::exec

#endif  // REACTRL_EXECUTOR_HPP_
