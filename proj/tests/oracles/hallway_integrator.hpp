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


// Fixed-step (1 ms) re-simulation of the continuous hallway, written from
// the task description rather than from the event-driven implementation.

#ifndef REACTRL_TESTS_HALLWAY_INTEGRATOR_HPP_
#define REACTRL_TESTS_HALLWAY_INTEGRATOR_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "reactrl/hallway.hpp"

namespace oracle {

struct ScriptStep {
  int action = 0;  // 0 up, 1 left
  std::int64_t t_ms = 0;
};

struct Integrated {
  std::vector<reactrl::env::Vec2> at_ms;  // position at every whole millisecond
  int hits = 0;
  std::optional<std::int64_t> goal_ms;
  std::int64_t end_ms = 0;
  double total_reward = 0.0;
};

inline Integrated integrate(const reactrl::env::HallwayConfig& c, const std::vector<ScriptStep>& script) {
  constexpr double kEps = 1e-9;
  enum { kStill, kUp, kLeft } heading = kStill;
  double x = c.start_x;
  double y = c.start_y;
  const double step = c.speed / 1000.0;
  const std::int64_t cap_ms = c.episode_cap.us() / 1000;
  auto in_opening = [&] { return y >= c.opening_y - kEps && y < c.opening_y + c.width - kEps; };
  auto ceiling = [&] { return x < -kEps ? c.opening_y + c.width : c.length; };
  auto blocked_left = [&] { return x >= -kEps && !in_opening(); };

  Integrated out;
  std::size_t next = 0;
  for (std::int64_t t = 0;; ++t) {
    while (next < script.size() && script[next].t_ms == t) {
      const auto want = script[next++].action == 0 ? kUp : kLeft;
      if (want == heading) continue;
      heading = want;
      // Pushing against the wall it already touches is another hit.
      if ((want == kUp && y >= ceiling() - kEps) || (want == kLeft && blocked_left() && x <= kEps)) {
        ++out.hits;
        heading = kStill;
      }
    }
    out.at_ms.push_back({x, y});
    if (t == cap_ms) {
      out.end_ms = t;
      break;
    }
    if (heading == kUp) {
      y += step;
      if (y >= ceiling() - kEps) {
        y = ceiling();
        ++out.hits;
        heading = kStill;
      }
    } else if (heading == kLeft) {
      if (blocked_left()) {
        x -= step;
        if (x <= kEps) {
          x = 0.0;
          ++out.hits;
          heading = kStill;
        }
      } else {
        const double goal_x = -c.side_length + c.width;
        x -= step;
        if (x <= goal_x + kEps) {
          x = goal_x;
          out.goal_ms = t + 1;
          out.end_ms = t + 1;
          out.at_ms.push_back({x, y});
          break;
        }
      }
    }
  }
  out.total_reward = c.wall_penalty * out.hits;
  if (out.goal_ms) out.total_reward -= c.terminal_rate * static_cast<double>(*out.goal_ms);
  return out;
}

// Random action script: up to `max_steps` actions at whole milliseconds.
inline std::vector<ScriptStep> random_script(std::mt19937_64& rng, int max_steps, std::int64_t horizon_ms) {
  std::uniform_int_distribution<int> n_dist(1, max_steps);
  std::uniform_int_distribution<std::int64_t> t_dist(0, horizon_ms);
  std::bernoulli_distribution up(0.6);
  std::vector<ScriptStep> s(static_cast<std::size_t>(n_dist(rng)));
  for (auto& st : s) {
    st.action = up(rng) ? 0 : 1;
    st.t_ms = t_dist(rng);
  }
  std::stable_sort(s.begin(), s.end(), [](const ScriptStep& a, const ScriptStep& b) { return a.t_ms < b.t_ms; });
  return s;
}

}  // namespace oracle

#endif  // REACTRL_TESTS_HALLWAY_INTEGRATOR_HPP_
