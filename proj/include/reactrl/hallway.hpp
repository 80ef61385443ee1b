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

#ifndef REACTRL_HALLWAY_HPP_
#define REACTRL_HALLWAY_HPP_

#include <cstdint>
#include <optional>
#include <vector>

#include "reactrl/env.hpp"

namespace reactrl::env {

// Hallway World.
//
// Continuous layout (units): the main hallway is x in [0, width],
// y in [0, length]. The left wall has an opening for y in
// [opening_y, opening_y + width); behind it a side corridor runs to
// x = -side_length, and its last width-sized cell is the terminal region.
//
//        x=-side   x=0  x=width
//   y=len            +----+
//                    |    |
//         +----------+    |   <- opening_y + width
//         |T |            |
//         +----------+    |   <- opening_y
//                    |  o |   <- start
//   y=0              +----+
//
// The synchronous grid uses the same shape with unit cells: column 0 is the
// main hallway (rows 0..length-1), row opening_row opens into columns -1 ..
// -side_length, and column -side_length is terminal.
struct HallwayConfig {
  enum class Mode { kContinuous, kSynchronousGrid };

  Mode mode = Mode::kContinuous;
  double width = 1.0;
  double length = 10.0;
  double opening_y = 6.0;
  double side_length = 3.0;
  double start_x = 0.5;
  double start_y = 0.5;
  double speed = 2.0;  // units per second
  double wall_penalty = -1.0;
  double terminal_rate = 1.0;  // per millisecond of episode (per step on the grid)
  TimeSpan episode_cap = TimeSpan::micros(60'000'000);

  // Grid-only geometry, in cells.
  int grid_length = 10;
  int grid_opening_row = 6;
  int grid_side_length = 3;
  int grid_start_row = 0;
  int grid_max_steps = 1000;

  void validate() const;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

class ContinuousHallway final : public Environment {
 public:
  static constexpr int kUp = 0;
  static constexpr int kLeft = 1;
  static constexpr int kNoWallState = 0;
  static constexpr int kWallState = 1;

  static ContinuousHallway reset(const HallwayConfig& config, TimePoint epoch = {});

  int num_states() const override { return 2; }
  int num_actions() const override { return 2; }
  ObserveResult observe(TimePoint t) override;
  void apply_action(int action, TimePoint t) override;
  bool is_terminal(TimePoint t) const override;
  TerminalReason terminal_reason(TimePoint t) const override;
  double cumulative_reward(TimePoint t) const override;
  std::optional<TimePoint> terminated_at(TimePoint now) const override;
  std::vector<Change> state_changes(std::optional<TimePoint> after, TimePoint upto) const override;

  Vec2 position(TimePoint t) const;
  bool wall_on_left(TimePoint t) const;
  int wall_hits(TimePoint t) const;
  std::optional<TimePoint> goal_time() const;
  TimePoint terminal_time() const;
  const std::vector<ActionEvent>& actions() const { return actions_; }

 private:
  enum class Heading { kNone, kUp, kLeft };
  enum class SegmentEnd { kOpen, kWall, kGoal };

  // Constant-velocity stretch of the trajectory starting at `start`.
  struct Segment {
    TimePoint start;
    Vec2 from;
    Heading heading;
    std::optional<TimePoint> end;  // when it reaches `to`, if it does
    Vec2 to;
    SegmentEnd end_kind;
  };

  ContinuousHallway(const HallwayConfig& config, TimePoint epoch);

  Segment make_segment(TimePoint start, Vec2 from, Heading heading) const;
  Vec2 point_at(const Segment& s, TimePoint t) const;
  // Closes segments of `cur` ending at or before `limit` (all when nullopt).
  void settle(Segment& cur, bool& done, std::optional<TimePoint> limit);
  // Replaces the projected tail after the last action.
  void project();
  bool in_opening(const Vec2& p) const;

  HallwayConfig config_;
  TimePoint epoch_;
  std::vector<ActionEvent> actions_;
  std::vector<Segment> segments_;
  std::vector<TimePoint> hits_;
  // Trajectory up to the last action is fixed; what follows is projected.
  Segment cur_;
  bool done_ = false;
  std::size_t committed_segments_ = 0;
  std::size_t committed_hits_ = 0;
  TimePoint last_observe_;
  double observed_reward_ = 0.0;
  bool terminal_observed_ = false;
};

// Discrete re-definition of the hallway: each action moves one cell, and
// nothing happens between actions.
class GridHallway final : public Environment {
 public:
  static constexpr int kUp = 0;
  static constexpr int kLeft = 1;

  static GridHallway reset(const HallwayConfig& config);

  int num_states() const override { return 2; }
  int num_actions() const override { return 2; }
  ObserveResult observe(TimePoint t) override;
  void apply_action(int action, TimePoint t) override;
  bool is_terminal(TimePoint t) const override;
  TerminalReason terminal_reason(TimePoint t) const override;
  double cumulative_reward(TimePoint t) const override;
  std::optional<TimePoint> terminated_at(TimePoint now) const override;
  bool synchronous() const override { return true; }

  int column() const { return col_; }
  int row() const { return row_; }
  int steps() const { return steps_; }
  bool wall_on_left() const;

 private:
  explicit GridHallway(const HallwayConfig& config);

  HallwayConfig config_;
  int col_ = 0;
  int row_ = 0;
  int steps_ = 0;
  bool goal_ = false;
  double total_reward_ = 0.0;
  double observed_reward_ = 0.0;
  bool terminal_observed_ = false;
};

}  // namespace reactrl::env

#endif  // REACTRL_HALLWAY_HPP_
