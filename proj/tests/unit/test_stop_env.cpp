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


#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "reactrl/error.hpp"
#include "reactrl/stop_env.hpp"

using namespace reactrl;
using env::StopEnv;
using env::StopEnvConfig;

namespace {

TimePoint us(std::int64_t v) { return TimePoint::micros(v); }

StopEnv with_onset(std::int64_t onset_us, StopEnvConfig cfg = {}) {
  StopEnv e = StopEnv::reset_triggered(cfg);
  e.trigger_onset(us(onset_us));
  return e;
}

// Emergency penalty summed one millisecond slice at a time.
double sliced_penalty(std::int64_t onset_us, std::int64_t at_us, double beta) {
  double total = 0.0;
  for (std::int64_t t = onset_us; t < at_us; t += 1000) {
    total -= beta * static_cast<double>(std::min<std::int64_t>(1000, at_us - t));
  }
  return total;
}

}  // namespace

TEST_CASE("onset draws stay in range and look uniform") {
  StopEnvConfig cfg;
  const double lo = 500'000.0;
  const double hi = 2'000'000.0;
  std::vector<double> draws;
  for (std::uint64_t seed = 0; seed < 10'000; ++seed) {
    const double o = static_cast<double>(StopEnv::reset(cfg, seed).onset()->us());
    REQUIRE(o >= lo);
    REQUIRE(o <= hi);
    draws.push_back(o);
  }
  std::sort(draws.begin(), draws.end());
  // Kolmogorov-Smirnov distance to U[lo, hi]; 1.63/sqrt(n) is the 1% critical value.
  double d = 0.0;
  const double n = static_cast<double>(draws.size());
  for (std::size_t i = 0; i < draws.size(); ++i) {
    const double f = (draws[i] - lo) / (hi - lo);
    d = std::max({d, std::abs(f - static_cast<double>(i) / n), std::abs(static_cast<double>(i + 1) / n - f)});
  }
  CHECK(d < 1.63 / std::sqrt(n));
}

TEST_CASE("same config and seed give the same onset") {
  CHECK(StopEnv::reset({}, 42).onset() == StopEnv::reset({}, 42).onset());
}

TEST_CASE("observe before the onset after Move") {
  StopEnv e = with_onset(1'000'000);
  e.apply_action(StopEnv::kMove, us(0));
  const auto r = e.observe(us(900'000));
  CHECK(r.obs.state_id == StopEnv::kNormalState);
  CHECK_FALSE(r.obs.terminal);
  CHECK(r.reward == 0.0);
}

TEST_CASE("stop in emergency pays the linear penalty and ends the episode") {
  StopEnvConfig cfg;
  cfg.beta = 1e-6;
  StopEnv e = with_onset(1'000'000, cfg);
  e.apply_action(StopEnv::kMove, us(0));
  e.apply_action(StopEnv::kStop, us(1'500'000));
  const auto r = e.observe(us(1'500'000));
  CHECK(r.obs.terminal);
  CHECK(r.reward == doctest::Approx(-500'000 * 1e-6).epsilon(1e-12));
  CHECK(r.reward == doctest::Approx(sliced_penalty(1'000'000, 1'500'000, 1e-6)).epsilon(1e-12));
  CHECK(e.terminal_reason(us(1'500'000)) == env::TerminalReason::kGoal);
  CHECK(e.stop_time() == us(1'500'000));
}

TEST_CASE("penalty is linear in the delay since onset") {
  for (std::int64_t lag : {1, 1000, 33'333, 250'000}) {
    StopEnv a = with_onset(700'000);
    StopEnv b = with_onset(700'000);
    a.apply_action(StopEnv::kStop, us(700'000 + lag));
    b.apply_action(StopEnv::kStop, us(700'000 + 2 * lag));
    CHECK(b.cumulative_reward(us(5'000'000)) == 2.0 * a.cumulative_reward(us(5'000'000)));
    CHECK(a.cumulative_reward(us(5'000'000)) == sliced_penalty(700'000, 700'000 + lag, 1.0));
  }
}

TEST_CASE("stop in normal keeps the arm moving") {
  StopEnv e = with_onset(1'000'000);
  e.apply_action(StopEnv::kStop, us(200'000));
  CHECK(e.phase(us(300'000)) == env::StopPhase::kNormal);
  CHECK(e.theta_mdeg(us(400'000)) > e.theta_mdeg(us(200'000)));
  const auto r = e.observe(us(300'000));
  CHECK(r.reward == -1.0);
  CHECK_FALSE(r.obs.terminal);
}

TEST_CASE("moving in emergency is penalised by lag at application") {
  StopEnv e = with_onset(100);
  e.apply_action(StopEnv::kMove, us(1100));
  CHECK(e.observe(us(2000)).reward == -1000.0);
  CHECK(e.observe(us(3000)).reward == 0.0);
}

TEST_CASE("theta follows omega and freezes at the end") {
  StopEnv e = with_onset(1'500'000);
  CHECK(e.theta_mdeg(us(2'000'000)) == 90'000);
  CHECK(e.theta_mdeg(us(1'000'000)) == 45'000);
  e.apply_action(StopEnv::kStop, us(1'600'000));
  CHECK(e.theta_mdeg(us(9'000'000)) == e.theta_mdeg(us(1'600'000)));
}

TEST_CASE("egg contact ends the episode as a failed stop") {
  StopEnvConfig cfg;
  cfg.theta_egg_mdeg = 90'000;
  StopEnv e = with_onset(1'900'000, cfg);
  CHECK(e.contact_time() == us(2'000'000));
  CHECK_FALSE(e.is_terminal(us(1'999'999)));
  CHECK(e.is_terminal(us(2'000'000)));
  CHECK(e.terminal_reason(us(2'000'000)) == env::TerminalReason::kContact);
  CHECK(e.cumulative_reward(us(2'000'000)) == -100'000.0);
  // A stop at the contact instant is too late.
  StopEnv late = with_onset(1'900'000, cfg);
  late.apply_action(StopEnv::kStop, us(2'000'000 - 1));
  CHECK(late.terminal_reason(us(2'000'000)) == env::TerminalReason::kGoal);
}

TEST_CASE("episode cap ends a never-stopping run") {
  StopEnvConfig cfg;
  cfg.episode_cap = TimeSpan::millis(3000);
  StopEnv e = StopEnv::reset_triggered(cfg);
  for (std::int64_t t = 0; t < 3'000'000; t += 10'000) {
    e.apply_action(StopEnv::kMove, us(t));
    CHECK_FALSE(e.observe(us(t + 5000)).obs.terminal);
  }
  CHECK(e.is_terminal(us(3'000'000)));
  CHECK(e.terminal_reason(us(3'000'000)) == env::TerminalReason::kCapExpired);
}

TEST_CASE("terminal is observed once; later calls fail") {
  StopEnv e = with_onset(0);
  e.apply_action(StopEnv::kStop, us(10));
  CHECK(e.observe(us(20)).obs.terminal);
  CHECK_THROWS_AS(e.observe(us(30)), Error);
  CHECK_THROWS_AS(e.apply_action(StopEnv::kMove, us(30)), Error);
}

TEST_CASE("queries are pure and extra observes do not change rewards") {
  StopEnv a = with_onset(400'000);
  StopEnv b = with_onset(400'000);
  for (StopEnv* e : {&a, &b}) {
    e->apply_action(StopEnv::kMove, us(0));
    e->apply_action(StopEnv::kStop, us(100'000));
    e->apply_action(StopEnv::kMove, us(450'000));
    e->apply_action(StopEnv::kStop, us(600'000));
  }
  double sum_a = 0.0;
  for (std::int64_t t = 0; t <= 700'000; t += 7000) {
    const auto r = a.observe(us(t));
    sum_a += r.reward;
    if (r.obs.terminal) break;
  }
  const double sum_b = b.observe(us(700'000)).reward;
  CHECK(sum_a == doctest::Approx(sum_b).epsilon(1e-12));
  CHECK(a.phase(us(500'000)) == b.phase(us(500'000)));
  CHECK(a.phase(us(500'000)) == a.phase(us(500'000)));
}

TEST_CASE("onset logged at announcement when triggered late") {
  StopEnv e = StopEnv::reset_triggered({});
  e.trigger_onset(us(1000), us(5000));
  const auto early = e.state_changes(std::nullopt, us(4999));
  CHECK(early.empty());
  const auto changes = e.state_changes(std::nullopt, us(5000));
  REQUIRE(changes.size() == 1);
  CHECK(changes[0].first == us(5000));
  CHECK(changes[0].second.at("at_us") == 1000);
  // Only the first trigger counts.
  e.trigger_onset(us(2000));
  CHECK(e.onset() == us(1000));
}

TEST_CASE("invalid configs are rejected") {
  auto bad = [](auto mutate) {
    StopEnvConfig c;
    mutate(c);
    try {
      (void)StopEnv::reset(c, 0);
    } catch (const Error& e) {
      return e.code() == ErrorCode::kInvalidConfig;
    }
    return false;
  };
  CHECK(bad([](StopEnvConfig& c) { c.omega_mdeg_per_s = 0; }));
  CHECK(bad([](StopEnvConfig& c) { c.theta_egg_mdeg = 0; }));
  CHECK(bad([](StopEnvConfig& c) { c.theta_egg_mdeg = 180'001; }));
  CHECK(bad([](StopEnvConfig& c) { c.beta = 0.0; }));
  CHECK(bad([](StopEnvConfig& c) { c.onset_min = TimeSpan::millis(3000); }));
}
