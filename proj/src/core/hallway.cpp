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

#include "reactrl/hallway.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "reactrl/error.hpp"

namespace reactrl::env {

void HallwayConfig::validate() const {
  auto bad = [](const std::string& what) { fail(ErrorCode::kInvalidConfig, "hallway: " + what); };
  if (mode == Mode::kContinuous) {
    if (!(width > 0.0) || !(length > 0.0)) bad("width and length must be positive");
    if (opening_y < 0.0 || opening_y + width > length) bad("opening must lie on the left wall");
    if (!(side_length > width)) bad("side corridor must be longer than one cell");
    if (start_x < 0.0 || start_x > width || start_y < 0.0 || start_y > length) {
      bad("start must lie inside the main hallway");
    }
    if (!(start_y < opening_y + width)) bad("opening is not reachable from the start");
    if (!(speed > 0.0)) bad("speed must be positive");
    if (episode_cap.us() <= 0) bad("episode cap must be positive");
  } else {
    if (grid_length < 1) bad("grid length must be at least one cell");
    if (grid_opening_row < 0 || grid_opening_row >= grid_length) bad("opening row out of range");
    if (grid_side_length < 1) bad("side corridor needs at least one cell");
    if (grid_start_row < 0 || grid_start_row > grid_opening_row) {
      bad("opening is not reachable from the start row");
    }
    if (grid_max_steps < 1) bad("max steps must be positive");
  }
}

// ---------------------------------------------------------------------------
// Continuous

namespace {

TimePoint arrival(TimePoint start, double distance, double speed) {
  // Round up so the agent never sits past the wall at an integer instant.
  const double us = distance / speed * 1e6;
  return start + TimeSpan::micros(static_cast<std::int64_t>(std::ceil(us - 1e-7)));
}

}  // namespace

ContinuousHallway::ContinuousHallway(const HallwayConfig& config, TimePoint epoch)
    : config_(config),
      epoch_(epoch),
      cur_(make_segment(epoch, {config.start_x, config.start_y}, Heading::kNone)),
      last_observe_(epoch) {
  project();
}

ContinuousHallway ContinuousHallway::reset(const HallwayConfig& config, TimePoint epoch) {
  if (config.mode != HallwayConfig::Mode::kContinuous) {
    fail(ErrorCode::kInvalidConfig, "continuous hallway needs mode=continuous");
  }
  config.validate();
  return ContinuousHallway(config, epoch);
}

bool ContinuousHallway::in_opening(const Vec2& p) const {
  return p.y >= config_.opening_y && p.y < config_.opening_y + config_.width;
}

ContinuousHallway::Segment ContinuousHallway::make_segment(TimePoint start, Vec2 from,
                                                           Heading heading) const {
  Segment s{start, from, heading, std::nullopt, from, SegmentEnd::kOpen};
  if (heading == Heading::kUp) {
    const double ceiling = from.x < 0.0 ? config_.opening_y + config_.width : config_.length;
    const double dist = std::max(0.0, ceiling - from.y);
    s.end = arrival(start, dist, config_.speed);
    s.to = {from.x, ceiling};
    s.end_kind = SegmentEnd::kWall;
  } else if (heading == Heading::kLeft) {
    if (from.x < 0.0 || in_opening(from)) {
      const double goal_x = -config_.side_length + config_.width;
      s.end = arrival(start, std::max(0.0, from.x - goal_x), config_.speed);
      s.to = {goal_x, from.y};
      s.end_kind = SegmentEnd::kGoal;
    } else {
      s.end = arrival(start, std::max(0.0, from.x), config_.speed);
      s.to = {0.0, from.y};
      s.end_kind = SegmentEnd::kWall;
    }
  }
  return s;
}

namespace {

Vec2 point_on(const Vec2& from, const Vec2& to, bool up, double travelled) {
  Vec2 p = from;
  if (up) {
    p.y = std::min(from.y + travelled, to.y);
  } else {
    p.x = std::max(from.x - travelled, to.x);
  }
  return p;
}

}  // namespace

Vec2 ContinuousHallway::point_at(const Segment& s, TimePoint t) const {
  if (s.heading == Heading::kNone) return s.from;
  if (s.end && t >= *s.end) return s.to;
  const double travelled = config_.speed * static_cast<double>((t - s.start).us()) / 1e6;
  return point_on(s.from, s.to, s.heading == Heading::kUp, travelled);
}

void ContinuousHallway::settle(Segment& cur, bool& done, std::optional<TimePoint> limit) {
  while (!done && cur.end && (!limit || *cur.end <= *limit)) {
    segments_.push_back(cur);
    if (cur.end_kind == SegmentEnd::kGoal) {
      done = true;
      return;
    }
    hits_.push_back(*cur.end);
    cur = make_segment(*cur.end, cur.to, Heading::kNone);
  }
}

void ContinuousHallway::project() {
  segments_.resize(committed_segments_, cur_);
  hits_.resize(committed_hits_);
  Segment cur = cur_;
  bool done = done_;
  settle(cur, done, std::nullopt);
  if (!done) segments_.push_back(cur);
}

Vec2 ContinuousHallway::position(TimePoint t) const {
  const TimePoint q = std::min(std::max(t, epoch_), terminal_time());
  auto it = std::upper_bound(segments_.begin(), segments_.end(), q,
                             [](TimePoint v, const Segment& s) { return v < s.start; });
  return point_at(it == segments_.begin() ? segments_.front() : *std::prev(it), q);
}

std::optional<TimePoint> ContinuousHallway::goal_time() const {
  const Segment& last = segments_.back();
  if (last.end_kind == SegmentEnd::kGoal) return last.end;
  return std::nullopt;
}

TimePoint ContinuousHallway::terminal_time() const {
  const TimePoint cap = epoch_ + config_.episode_cap;
  if (auto g = goal_time()) return std::min(*g, cap);
  return cap;
}

bool ContinuousHallway::is_terminal(TimePoint t) const { return t >= terminal_time(); }

TerminalReason ContinuousHallway::terminal_reason(TimePoint t) const {
  if (!is_terminal(t)) return TerminalReason::kNone;
  if (auto g = goal_time(); g && *g == terminal_time()) return TerminalReason::kGoal;
  return TerminalReason::kCapExpired;
}

bool ContinuousHallway::wall_on_left(TimePoint t) const {
  const Vec2 p = position(t);
  if (p.x < 0.0) return false;
  return !in_opening(p);
}

int ContinuousHallway::wall_hits(TimePoint t) const {
  const TimePoint upto = std::min(t, terminal_time());
  return static_cast<int>(std::upper_bound(hits_.begin(), hits_.end(), upto) - hits_.begin());
}

double ContinuousHallway::cumulative_reward(TimePoint t) const {
  double total = config_.wall_penalty * wall_hits(t);
  if (auto g = goal_time(); g && *g <= t && *g == terminal_time()) {
    total -= config_.terminal_rate * (*g - epoch_).ms();
  }
  return total;
}

std::optional<TimePoint> ContinuousHallway::terminated_at(TimePoint now) const {
  const TimePoint end = terminal_time();
  if (end <= now) return end;
  return std::nullopt;
}

std::vector<Environment::Change> ContinuousHallway::state_changes(std::optional<TimePoint> after,
                                                                  TimePoint upto) const {
  std::vector<Change> out;
  auto within = [&](TimePoint t) { return t <= upto && (!after || t > *after); };
  const TimePoint end = terminal_time();
  auto first = after ? std::upper_bound(hits_.begin(), hits_.end(), *after) : hits_.begin();
  for (auto it = first; it != hits_.end() && *it <= upto; ++it) {
    if (*it <= end) out.emplace_back(*it, nlohmann::json{{"event", "wall_hit"}});
  }
  if (auto g = goal_time(); g && *g == end && within(*g)) {
    out.emplace_back(*g, nlohmann::json{{"event", "goal"}});
  }
  return out;
}

ObserveResult ContinuousHallway::observe(TimePoint t) {
  if (t < last_observe_) fail(ErrorCode::kInvalidArgument, "observe() went back in time");
  if (terminal_observed_) fail(ErrorCode::kObservedAfterTerminal, "hallway already terminal");
  last_observe_ = t;
  const double cum = cumulative_reward(t);
  ObserveResult out;
  out.reward = cum - observed_reward_;
  observed_reward_ = cum;
  out.obs.state_id = wall_on_left(t) ? kWallState : kNoWallState;
  out.obs.terminal = is_terminal(t);
  if (out.obs.terminal) terminal_observed_ = true;
  return out;
}

void ContinuousHallway::apply_action(int action, TimePoint t) {
  if (action != kUp && action != kLeft) {
    fail(ErrorCode::kInvalidArgument, "hallway action out of range: " + std::to_string(action));
  }
  if (t < epoch_ || (!actions_.empty() && t < actions_.back().effective_at)) {
    fail(ErrorCode::kInvalidArgument, "action time precedes the previous action");
  }
  if (is_terminal(t)) fail(ErrorCode::kActionAfterTerminal, "hallway already terminal");
  actions_.push_back({action, t});
  segments_.resize(committed_segments_, cur_);
  hits_.resize(committed_hits_);
  settle(cur_, done_, t);
  const Heading h = action == kUp ? Heading::kUp : Heading::kLeft;
  if (!done_ && h != cur_.heading) {
    const Vec2 p = point_at(cur_, t);
    segments_.push_back(cur_);
    cur_ = make_segment(t, p, h);
  }
  committed_segments_ = segments_.size();
  committed_hits_ = hits_.size();
  project();
}

// ---------------------------------------------------------------------------
// Grid

GridHallway::GridHallway(const HallwayConfig& config) : config_(config), row_(config.grid_start_row) {}

GridHallway GridHallway::reset(const HallwayConfig& config) {
  if (config.mode != HallwayConfig::Mode::kSynchronousGrid) {
    fail(ErrorCode::kInvalidConfig, "grid hallway needs mode=synchronous_grid");
  }
  config.validate();
  return GridHallway(config);
}

bool GridHallway::wall_on_left() const { return col_ == 0 && row_ != config_.grid_opening_row; }

bool GridHallway::is_terminal(TimePoint) const { return goal_ || steps_ >= config_.grid_max_steps; }

TerminalReason GridHallway::terminal_reason(TimePoint t) const {
  if (!is_terminal(t)) return TerminalReason::kNone;
  return goal_ ? TerminalReason::kGoal : TerminalReason::kCapExpired;
}

double GridHallway::cumulative_reward(TimePoint) const { return total_reward_; }

std::optional<TimePoint> GridHallway::terminated_at(TimePoint now) const {
  if (is_terminal(now)) return now;
  return std::nullopt;
}

ObserveResult GridHallway::observe(TimePoint t) {
  if (terminal_observed_) fail(ErrorCode::kObservedAfterTerminal, "grid hallway already terminal");
  ObserveResult out;
  out.reward = total_reward_ - observed_reward_;
  observed_reward_ = total_reward_;
  out.obs.state_id = wall_on_left() ? ContinuousHallway::kWallState : ContinuousHallway::kNoWallState;
  out.obs.terminal = is_terminal(t);
  if (out.obs.terminal) terminal_observed_ = true;
  return out;
}

void GridHallway::apply_action(int action, TimePoint t) {
  if (action != kUp && action != kLeft) {
    fail(ErrorCode::kInvalidArgument, "hallway action out of range: " + std::to_string(action));
  }
  if (is_terminal(t)) fail(ErrorCode::kActionAfterTerminal, "grid hallway already terminal");
  ++steps_;
  if (action == kUp) {
    if (col_ == 0 && row_ + 1 < config_.grid_length) {
      ++row_;
    } else {
      total_reward_ += config_.wall_penalty;
    }
    return;
  }
  if (col_ < 0 || row_ == config_.grid_opening_row) {
    --col_;
    if (col_ == -config_.grid_side_length) {
      goal_ = true;
      total_reward_ -= config_.terminal_rate * steps_;
    }
  } else {
    total_reward_ += config_.wall_penalty;
  }
}

}  // namespace reactrl::env
