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

#ifndef REACTRL_STOP_ENV_HPP_
#define REACTRL_STOP_ENV_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "reactrl/env.hpp"

namespace reactrl::env {

// The emergency-stop task: an arm rotates at constant angular velocity; at
// the onset time the state flips from Normal to Emergency and the agent must
// issue Stop. With an egg configured, reaching the contact angle first ends
// the episode as a failed stop.
struct StopEnvConfig {
  std::int64_t omega_mdeg_per_s = 45'000;
  std::optional<std::int64_t> theta_egg_mdeg;
  // Onset is drawn uniformly from [onset_min, onset_max] unless triggered
  // externally.
  TimeSpan onset_min = TimeSpan::micros(500'000);
  TimeSpan onset_max = TimeSpan::micros(2'000'000);
  double beta = 1.0;  // penalty per microsecond spent in Emergency
  double normal_stop_penalty = -1.0;
  TimeSpan episode_cap = TimeSpan::micros(10'000'000);

  void validate() const;
};

enum class StopPhase { kNormal, kEmergency, kTerminal };

class StopEnv final : public Environment {
 public:
  static constexpr int kMove = 0;
  static constexpr int kStop = 1;
  static constexpr int kNormalState = 0;
  static constexpr int kEmergencyState = 1;

  // Draws the onset from the configured range using `seed`.
  static StopEnv reset(const StopEnvConfig& config, std::uint64_t seed, TimePoint epoch = {});
  // Onset stays unknown until trigger_onset() (a button press).
  static StopEnv reset_triggered(const StopEnvConfig& config, TimePoint epoch = {});

  int num_states() const override { return 2; }
  int num_actions() const override { return 2; }
  ObserveResult observe(TimePoint t) override;
  void apply_action(int action, TimePoint t) override;
  bool is_terminal(TimePoint t) const override;
  TerminalReason terminal_reason(TimePoint t) const override;
  double cumulative_reward(TimePoint t) const override;
  std::optional<TimePoint> terminated_at(TimePoint now) const override;
  std::vector<Change> state_changes(std::optional<TimePoint> after, TimePoint upto) const override;

  // Emergency begins at `onset`. A live press may arrive after the instant it
  // maps to; `announced` is when the trigger was processed and is where the
  // onset shows up in event logs.
  void trigger_onset(TimePoint onset, std::optional<TimePoint> announced = std::nullopt);

  StopPhase phase(TimePoint t) const;
  // Arm angle in millidegrees; frozen once the episode is over.
  std::int64_t theta_mdeg(TimePoint t) const;

  const StopEnvConfig& config() const { return config_; }
  TimePoint epoch() const { return epoch_; }
  std::optional<TimePoint> onset() const { return onset_; }
  std::optional<TimePoint> contact_time() const;
  // Earliest of: Stop in Emergency, egg contact, episode cap.
  TimePoint terminal_time() const;
  // When the terminating Stop took effect, if the episode ended that way.
  std::optional<TimePoint> stop_time() const;
  const std::vector<ActionEvent>& actions() const { return actions_; }

 private:
  StopEnv(const StopEnvConfig& config, TimePoint epoch, std::optional<TimePoint> onset);

  double action_reward(const ActionEvent& e) const;
  double emergency_penalty(TimePoint t) const;

  StopEnvConfig config_;
  TimePoint epoch_;
  std::optional<TimePoint> onset_;
  std::optional<TimePoint> announced_;
  std::vector<ActionEvent> actions_;
  TimePoint last_observe_;
  double observed_reward_ = 0.0;
  bool terminal_observed_ = false;
};

}  // namespace reactrl::env

#endif  // REACTRL_STOP_ENV_HPP_
