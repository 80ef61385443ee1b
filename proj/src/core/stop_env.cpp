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

#include "reactrl/stop_env.hpp"

#include <algorithm>
#include <random>
#include <string>

#include "reactrl/error.hpp"

namespace reactrl::env {

std::string_view terminal_reason_name(TerminalReason r) {
  switch (r) {
    case TerminalReason::kNone: return "none";
    case TerminalReason::kGoal: return "goal";
    case TerminalReason::kContact: return "contact";
    case TerminalReason::kCapExpired: return "cap_expired";
  }
  return "unknown";
}

void StopEnvConfig::validate() const {
  if (omega_mdeg_per_s <= 0) fail(ErrorCode::kInvalidConfig, "omega must be positive");
  if (theta_egg_mdeg && (*theta_egg_mdeg <= 0 || *theta_egg_mdeg > 180'000)) {
    fail(ErrorCode::kInvalidConfig, "theta_egg must lie in (0, 180] degrees");
  }
  if (!(beta > 0.0)) fail(ErrorCode::kInvalidConfig, "beta must be positive");
  if (onset_min > onset_max) fail(ErrorCode::kInvalidConfig, "onset range is empty");
  if (episode_cap.us() <= 0) fail(ErrorCode::kInvalidConfig, "episode cap must be positive");
}

StopEnv::StopEnv(const StopEnvConfig& config, TimePoint epoch, std::optional<TimePoint> onset)
    : config_(config), epoch_(epoch), onset_(onset), last_observe_(epoch) {}

StopEnv StopEnv::reset(const StopEnvConfig& config, std::uint64_t seed, TimePoint epoch) {
  config.validate();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> draw(config.onset_min.us(), config.onset_max.us());
  return StopEnv(config, epoch, epoch + TimeSpan::micros(draw(rng)));
}

StopEnv StopEnv::reset_triggered(const StopEnvConfig& config, TimePoint epoch) {
  config.validate();
  return StopEnv(config, epoch, std::nullopt);
}

void StopEnv::trigger_onset(TimePoint onset, std::optional<TimePoint> announced) {
  if (onset_) return;
  onset_ = std::max(onset, epoch_);
  if (announced && *announced > *onset_) announced_ = announced;
}

std::optional<TimePoint> StopEnv::contact_time() const {
  if (!config_.theta_egg_mdeg) return std::nullopt;
  // First whole microsecond at which omega * dt reaches the egg angle.
  const std::int64_t num = *config_.theta_egg_mdeg * 1'000'000;
  const std::int64_t dt = (num + config_.omega_mdeg_per_s - 1) / config_.omega_mdeg_per_s;
  return epoch_ + TimeSpan::micros(dt);
}

std::optional<TimePoint> StopEnv::stop_time() const {
  if (!onset_) return std::nullopt;
  for (const auto& e : actions_) {
    if (e.action == kStop && e.effective_at >= *onset_) return e.effective_at;
  }
  return std::nullopt;
}

TimePoint StopEnv::terminal_time() const {
  TimePoint end = epoch_ + config_.episode_cap;
  if (auto c = contact_time()) end = std::min(end, *c);
  if (auto s = stop_time()) end = std::min(end, *s);
  return end;
}

TerminalReason StopEnv::terminal_reason(TimePoint t) const {
  const TimePoint end = terminal_time();
  if (t < end) return TerminalReason::kNone;
  // A stop landing on the contact instant is too late.
  if (auto c = contact_time(); c && *c == end) return TerminalReason::kContact;
  if (auto s = stop_time(); s && *s == end) return TerminalReason::kGoal;
  return TerminalReason::kCapExpired;
}

bool StopEnv::is_terminal(TimePoint t) const { return t >= terminal_time(); }

StopPhase StopEnv::phase(TimePoint t) const {
  if (is_terminal(t)) return StopPhase::kTerminal;
  if (onset_ && t >= *onset_) return StopPhase::kEmergency;
  return StopPhase::kNormal;
}

std::int64_t StopEnv::theta_mdeg(TimePoint t) const {
  const TimePoint at = std::max(std::min(t, terminal_time()), epoch_);
  std::int64_t theta = config_.omega_mdeg_per_s * (at - epoch_).us() / 1'000'000;
  if (config_.theta_egg_mdeg) theta = std::min(theta, *config_.theta_egg_mdeg);
  return theta;
}

double StopEnv::emergency_penalty(TimePoint t) const {
  return -config_.beta * static_cast<double>((t - *onset_).us());
}

double StopEnv::action_reward(const ActionEvent& e) const {
  if (onset_ && e.effective_at >= *onset_) return emergency_penalty(e.effective_at);
  return e.action == kStop ? config_.normal_stop_penalty : 0.0;
}

double StopEnv::cumulative_reward(TimePoint t) const {
  const TimePoint end = terminal_time();
  const TimePoint upto = std::min(t, end);
  double total = 0.0;
  for (const auto& e : actions_) {
    if (e.effective_at > upto) break;
    total += action_reward(e);
  }
  if (t >= end && terminal_reason(t) == TerminalReason::kContact && onset_ && end >= *onset_) {
    total += emergency_penalty(end);
  }
  return total;
}

ObserveResult StopEnv::observe(TimePoint t) {
  if (t < last_observe_) fail(ErrorCode::kInvalidArgument, "observe() went back in time");
  if (terminal_observed_) fail(ErrorCode::kObservedAfterTerminal, "stop task already terminal");
  last_observe_ = t;
  const double cum = cumulative_reward(t);
  ObserveResult out;
  out.reward = cum - observed_reward_;
  observed_reward_ = cum;
  if (is_terminal(t)) {
    terminal_observed_ = true;
    out.obs = {onset_ && *onset_ <= terminal_time() ? kEmergencyState : kNormalState, true};
  } else {
    out.obs = {phase(t) == StopPhase::kEmergency ? kEmergencyState : kNormalState, false};
  }
  return out;
}

void StopEnv::apply_action(int action, TimePoint t) {
  if (action != kMove && action != kStop) {
    fail(ErrorCode::kInvalidArgument, "stop task action out of range: " + std::to_string(action));
  }
  if (t < epoch_ || (!actions_.empty() && t < actions_.back().effective_at)) {
    fail(ErrorCode::kInvalidArgument, "action time precedes the previous action");
  }
  if (is_terminal(t)) fail(ErrorCode::kActionAfterTerminal, "stop task already terminal");
  actions_.push_back({action, t});
}

std::optional<TimePoint> StopEnv::terminated_at(TimePoint now) const {
  const TimePoint end = terminal_time();
  if (end <= now) return end;
  return std::nullopt;
}

std::vector<Environment::Change> StopEnv::state_changes(std::optional<TimePoint> after,
                                                        TimePoint upto) const {
  std::vector<Change> out;
  auto within = [&](TimePoint t) { return t <= upto && (!after || t > *after); };
  if (onset_ && *onset_ <= terminal_time()) {
    const TimePoint logged_at = announced_.value_or(*onset_);
    if (within(logged_at)) {
      out.emplace_back(logged_at, nlohmann::json{{"phase", "Emergency"}, {"at_us", onset_->us()}});
    }
  }
  if (auto c = contact_time(); c && *c == terminal_time() && within(*c)) {
    out.emplace_back(*c, nlohmann::json{{"event", "contact"}, {"theta_mdeg", theta_mdeg(*c)}});
  }
  return out;
}

}  // namespace reactrl::env
