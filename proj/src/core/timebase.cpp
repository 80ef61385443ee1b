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

#include "reactrl/timebase.hpp"

#include <array>
#include <ostream>
#include <sstream>
#include <thread>
#include <utility>

#include "reactrl/error.hpp"

namespace reactrl {

const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument: return "InvalidArgument";
    case ErrorCode::kInvalidConfig: return "InvalidConfig";
    case ErrorCode::kInvalidSchedule: return "InvalidSchedule";
    case ErrorCode::kCalledOnWallClock: return "CalledOnWallClock";
    case ErrorCode::kNonMonotoneTimestamp: return "NonMonotoneTimestamp";
    case ErrorCode::kObservedAfterTerminal: return "ObservedAfterTerminal";
    case ErrorCode::kActionAfterTerminal: return "ActionAfterTerminal";
    case ErrorCode::kEmptySample: return "EmptySample";
    case ErrorCode::kIo: return "IoError";
    case ErrorCode::kLiveParticipantDisconnected: return "LiveParticipantDisconnected";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kRuntime: return "RuntimeError";
  }
  return "Unknown";
}

TimeSpan TimeSpan::micros(std::int64_t us) {
  if (us < 0) fail(ErrorCode::kInvalidArgument, "negative time span: " + std::to_string(us) + " us");
  return TimeSpan(us);
}

TimePoint TimePoint::micros(std::int64_t us) {
  if (us < 0) fail(ErrorCode::kInvalidArgument, "negative time point: " + std::to_string(us) + " us");
  return TimePoint(us);
}

std::ostream& operator<<(std::ostream& os, TimeSpan d) { return os << d.us() << "us"; }
std::ostream& operator<<(std::ostream& os, TimePoint t) { return os << "@" << t.us() << "us"; }

Clock::Clock(ClockMode mode) : mode_(mode), wall_epoch_(std::chrono::steady_clock::now()) {}

Clock Clock::wall_since(std::chrono::steady_clock::time_point epoch) {
  if (epoch > std::chrono::steady_clock::now()) {
    fail(ErrorCode::kInvalidArgument, "wall clock epoch lies in the future");
  }
  Clock c(ClockMode::kWall);
  c.wall_epoch_ = epoch;
  return c;
}

TimePoint Clock::now() const {
  if (mode_ == ClockMode::kSimulated) return current_;
  auto elapsed = std::chrono::steady_clock::now() - wall_epoch_;
  return TimePoint::micros(std::chrono::duration_cast<std::chrono::microseconds>(elapsed).count());
}

TimePoint Clock::advance(TimeSpan dt) {
  if (mode_ != ClockMode::kSimulated) fail(ErrorCode::kCalledOnWallClock, "advance() called on a wall clock");
  current_ = current_ + dt;
  return current_;
}

void Clock::rezero() {
  current_ = TimePoint{};
  wall_epoch_ = std::chrono::steady_clock::now();
}

void Clock::charge(TimePoint start, TimeSpan span) {
  if (mode_ == ClockMode::kSimulated) {
    if (current_ != start) {
      fail(ErrorCode::kInvalidArgument, "simulated charge must start at the current time");
    }
    advance(span);
    return;
  }
  const TimePoint until = start + span;
  // Sleep for the bulk of the wait, then spin the last stretch.
  constexpr std::int64_t kSpinUs = 300;
  for (TimePoint t = now(); t < until; t = now()) {
    const std::int64_t left = until.us() - t.us();
    if (left > kSpinUs) {
      std::this_thread::sleep_for(std::chrono::microseconds(left - kSpinUs));
    } else {
      std::this_thread::yield();
    }
  }
}

namespace {

constexpr std::array<std::pair<EventKind, std::string_view>, 7> kKindNames{{
    {EventKind::kComponentStart, "ComponentStart"},
    {EventKind::kComponentEnd, "ComponentEnd"},
    {EventKind::kActionEffective, "ActionEffective"},
    {EventKind::kStateChange, "StateChange"},
    {EventKind::kRewardEmitted, "RewardEmitted"},
    {EventKind::kEpisodeEnd, "EpisodeEnd"},
    {EventKind::kButtonPress, "ButtonPress"},
}};

}  // namespace

std::string_view event_kind_name(EventKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "Unknown";
}

EventKind event_kind_from_name(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  fail(ErrorCode::kInvalidArgument, "unknown event kind: " + std::string(name));
}

void EventLog::log_event(TimePoint time, EventKind kind, nlohmann::json payload) {
  if (!entries_.empty() && time < entries_.back().time) {
    std::ostringstream msg;
    msg << "event " << event_kind_name(kind) << " at " << time << " precedes last entry at "
        << entries_.back().time;
    fail(ErrorCode::kNonMonotoneTimestamp, msg.str());
  }
  entries_.push_back(Event{time, kind, std::move(payload)});
}

std::string EventLog::to_ndjson() const {
  std::string out;
  for (const auto& e : entries_) {
    nlohmann::json line{{"t_us", e.time.us()}, {"kind", event_kind_name(e.kind)}, {"payload", e.payload}};
    out += line.dump();
    out += '\n';
  }
  return out;
}

EventLog EventLog::from_ndjson(std::string_view text) {
  EventLog log;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto j = nlohmann::json::parse(line);
    log.log_event(TimePoint::micros(j.at("t_us").get<std::int64_t>()),
                  event_kind_from_name(j.at("kind").get<std::string>()), j.at("payload"));
  }
  return log;
}

}  // namespace reactrl
