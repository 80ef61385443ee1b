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

#ifndef REACTRL_TIMEBASE_HPP_
#define REACTRL_TIMEBASE_HPP_

#include <chrono>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace reactrl {

// A non-negative duration in integer microseconds.
class TimeSpan {
 public:
  constexpr TimeSpan() = default;
  static TimeSpan micros(std::int64_t us);
  static TimeSpan millis(std::int64_t ms) { return micros(ms * 1000); }

  constexpr std::int64_t us() const { return us_; }
  constexpr double ms() const { return static_cast<double>(us_) / 1000.0; }

  friend constexpr auto operator<=>(TimeSpan, TimeSpan) = default;
  friend TimeSpan operator+(TimeSpan a, TimeSpan b) { return TimeSpan(a.us_ + b.us_); }
  friend TimeSpan operator*(std::int64_t k, TimeSpan a) { return micros(k * a.us_); }

 private:
  constexpr explicit TimeSpan(std::int64_t us) : us_(us) {}
  std::int64_t us_ = 0;
};

// Microseconds since the episode epoch (the instant the arm starts moving).
class TimePoint {
 public:
  constexpr TimePoint() = default;
  static TimePoint micros(std::int64_t us);

  constexpr std::int64_t us() const { return us_; }

  friend constexpr auto operator<=>(TimePoint, TimePoint) = default;
  friend TimePoint operator+(TimePoint t, TimeSpan d) { return TimePoint(t.us_ + d.us()); }
  // Requires later >= earlier.
  friend TimeSpan operator-(TimePoint later, TimePoint earlier) {
    return TimeSpan::micros(later.us_ - earlier.us_);
  }

 private:
  constexpr explicit TimePoint(std::int64_t us) : us_(us) {}
  std::int64_t us_ = 0;
};

std::ostream& operator<<(std::ostream& os, TimeSpan d);
std::ostream& operator<<(std::ostream& os, TimePoint t);

enum class ClockMode { kSimulated, kWall };

// Simulated clocks move only when advanced; wall clocks read the monotone OS
// clock relative to the instant they were constructed (or re-zeroed).
class Clock {
 public:
  static Clock simulated() { return Clock(ClockMode::kSimulated); }
  static Clock wall() { return Clock(ClockMode::kWall); }
  // Wall clock whose zero is `epoch` (which must not lie in the future).
  static Clock wall_since(std::chrono::steady_clock::time_point epoch);

  ClockMode mode() const { return mode_; }
  TimePoint now() const;
  TimePoint advance(TimeSpan dt);

  // Restart the episode epoch: simulated time returns to zero, wall time is
  // re-zeroed at the current OS instant.
  void rezero();

  // Make the component that began at `start` occupy at least `span`.
  // Simulated: advances by exactly `span` (requires now() == start).
  // Wall: waits until now() >= start + span.
  void charge(TimePoint start, TimeSpan span);

 private:
  explicit Clock(ClockMode mode);

  ClockMode mode_;
  TimePoint current_{};
  std::chrono::steady_clock::time_point wall_epoch_{};
};

enum class EventKind {
  kComponentStart,
  kComponentEnd,
  kActionEffective,
  kStateChange,
  kRewardEmitted,
  kEpisodeEnd,
  kButtonPress,
};

std::string_view event_kind_name(EventKind kind);
EventKind event_kind_from_name(std::string_view name);

struct Event {
  TimePoint time;
  EventKind kind;
  nlohmann::json payload;

  friend bool operator==(const Event&, const Event&) = default;
};

// Append-only log; timestamps never decrease.
class EventLog {
 public:
  void log_event(TimePoint time, EventKind kind, nlohmann::json payload = nlohmann::json::object());

  const std::vector<Event>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  // One {"t_us","kind","payload"} JSON object per line.
  std::string to_ndjson() const;
  static EventLog from_ndjson(std::string_view text);

  friend bool operator==(const EventLog&, const EventLog&) = default;

 private:
  std::vector<Event> entries_;
};

}  // namespace reactrl

#endif  // REACTRL_TIMEBASE_HPP_
