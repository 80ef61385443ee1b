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
#include <random>
#include <string>

#include "../oracles/schedule_walk.hpp"
#include "doctest.h"
#include "reactrl/error.hpp"
#include "reactrl/executor.hpp"
#include "reactrl/hallway.hpp"
#include "reactrl/stats.hpp"
#include "reactrl/stop_env.hpp"

using namespace reactrl;
using exec::Component;
using exec::DelayModel;
using exec::ProtocolSchedule;

namespace {

constexpr std::int64_t kTc = 1000;

// Move while Normal, Stop in Emergency, with a margin no update can erase.
agent::QTable stopping_policy() {
  agent::QTable q(2, 2);
  q.set_q(env::StopEnv::kNormalState, env::StopEnv::kStop, -100.0);
  q.set_q(env::StopEnv::kEmergencyState, env::StopEnv::kMove, -100.0);
  return q;
}

env::StopEnvConfig small_beta() {
  env::StopEnvConfig c;
  c.beta = 1e-6;
  return c;
}

exec::EpisodeResult run_stop(const ProtocolSchedule& s, std::int64_t onset_us, std::int64_t d_us,
                             agent::QTable q = stopping_policy()) {
  env::StopEnv e = env::StopEnv::reset_triggered(small_beta());
  e.trigger_onset(TimePoint::micros(onset_us));
  Clock clock = Clock::simulated();
  agent::Rng rng(0);
  return exec::run_episode(e, q, agent::AgentConfig{}, s, DelayModel::uniform(TimeSpan::micros(kTc), TimeSpan::micros(d_us)),
                           clock, rng);
}

std::vector<std::int64_t> starts_of(const EventLog& log, std::string_view component) {
  std::vector<std::int64_t> out;
  for (const auto& e : log.entries()) {
    if (e.kind == EventKind::kComponentStart && e.payload.at("component").get<std::string>() == component) out.push_back(e.time.us());
  }
  return out;
}

std::string schedule_error(const ProtocolSchedule& s) {
  try {
    exec::validate_schedule(s);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kInvalidSchedule);
    return e.what();
  }
  return {};
}

std::vector<int> actions_in_log(const EventLog& log) {
  std::vector<int> out;
  for (const auto& e : log.entries()) {
    if (e.kind == EventKind::kActionEffective) out.push_back(e.payload.at("action").get<int>());
  }
  return out;
}

}  // namespace

TEST_CASE("schedule validation") {
  CHECK(schedule_error(ProtocolSchedule::standard()).empty());
  CHECK(schedule_error(ProtocolSchedule::reactive()).empty());
  const std::string learn_first =
      schedule_error({"x", {}, {Component::kLearn, Component::kObserve, Component::kChoose, Component::kAct}});
  CHECK(learn_first.find("Learn") != std::string::npos);
  CHECK_FALSE(schedule_error({"x", {}, {Component::kAct, Component::kObserve, Component::kChoose}}).empty());
  CHECK_FALSE(
      schedule_error({"x", {}, {Component::kAct, Component::kAct, Component::kChoose, Component::kLearn}}).empty());
  const std::string act_first =
      schedule_error({"x", {}, {Component::kAct, Component::kObserve, Component::kChoose, Component::kLearn}});
  CHECK(act_first.find("Act") != std::string::npos);
  // A different valid ordering: choose and act before observing, learn last.
  CHECK(schedule_error({"y", {Component::kChoose}, {Component::kAct, Component::kObserve, Component::kLearn, Component::kChoose}})
            .empty() == false);
}

TEST_CASE("component names round-trip") {
  for (Component c : {Component::kAct, Component::kObserve, Component::kChoose, Component::kLearn}) {
    CHECK(exec::component_from_name(exec::component_name(c)) == c);
  }
  CHECK_THROWS_AS(exec::component_from_name("Dance"), Error);
  CHECK(ProtocolSchedule::named("reactive") == ProtocolSchedule::reactive());
  CHECK_THROWS_AS(ProtocolSchedule::named("other"), Error);
}

TEST_CASE("standard step spans 4 t_c + d in the log") {
  const auto r = run_stop(ProtocolSchedule::standard(), 1'000'000, 50'000);
  const auto acts = starts_of(r.log, "act");
  REQUIRE(acts.size() > 10);
  for (std::size_t i = 1; i < acts.size(); ++i) CHECK(acts[i] - acts[i - 1] == 54'000);
}

TEST_CASE("component spans tile the episode") {
  const auto r = run_stop(ProtocolSchedule::reactive(), 700'000, 30'000);
  std::int64_t open = -1;
  std::int64_t first = -1;
  std::int64_t last = -1;
  std::int64_t total = 0;
  for (const auto& e : r.log.entries()) {
    if (e.kind == EventKind::kComponentStart) {
      if (first < 0) first = e.time.us();
      CHECK((last < 0 || e.time.us() == last));
      open = e.time.us();
    }
    if (e.kind == EventKind::kComponentEnd) {
      total += e.time.us() - open;
      last = e.time.us();
    }
  }
  CHECK(total == last - first);
  CHECK(total > 700'000);
}

TEST_CASE("reaction from the log matches the schedule walk") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::int64_t> onset(0, 2'000'000);
  for (std::int64_t d : {0, 50'000, 100'000, 250'000, 500'000}) {
    for (int i = 0; i < 40; ++i) {
      const std::int64_t o = onset(rng);
      for (const auto& s : {ProtocolSchedule::standard(), ProtocolSchedule::reactive()}) {
        const auto r = run_stop(s, o, d);
        const auto walk = oracle::walk_reaction(s, {kTc, kTc, kTc, kTc}, d, o, 10'000'000);
        REQUIRE(r.reaction);
        REQUIRE(walk);
        CHECK(r.reaction->us() == *walk);
        CHECK(r.stop_effective->us() == o + *walk);
      }
    }
  }
}

TEST_CASE("closed forms: reactive waits plus 2 t_c, standard plus 3 t_c + d") {
  const std::int64_t d = 50'000;
  const std::int64_t step = 4 * kTc + d;
  for (std::int64_t o = 1; o < 400'000; o += 7919) {
    // Both orderings observe at 2 t_c + k * step.
    const std::int64_t k = (o - 2 * kTc + step - 1) / step;
    const std::int64_t wait = std::max<std::int64_t>(0, 2 * kTc + k * step - o);
    CHECK(run_stop(ProtocolSchedule::reactive(), o, d).reaction->us() == wait + 2 * kTc);
    CHECK(run_stop(ProtocolSchedule::standard(), o, d).reaction->us() == wait + 3 * kTc + d);
  }
}

TEST_CASE("more learning delay never lowers the median reaction") {
  // Onsets on a fine grid make the wait close to uniform over a loop.
  std::vector<std::int64_t> onsets;
  for (std::int64_t o = 500'000; o < 2'500'000; o += 4999) onsets.push_back(o);
  for (const auto& sched : {ProtocolSchedule::standard(), ProtocolSchedule::reactive()}) {
    double prev = -1.0;
    for (std::int64_t d : {0, 50'000, 100'000, 250'000, 500'000}) {
      std::vector<double> rs;
      for (auto o : onsets) rs.push_back(static_cast<double>(run_stop(sched, o, d).reaction->us()));
      const double med = stats::summarize(rs).median;
      CHECK(med >= prev);
      prev = med;
    }
  }
}

TEST_CASE("identical seeds give identical logs") {
  env::StopEnvConfig cfg = small_beta();
  auto once = [&] {
    env::StopEnv e = env::StopEnv::reset(cfg, 5);
    agent::QTable q(2, 2);
    agent::AgentConfig a;
    a.epsilon = 0.2;
    Clock clock = Clock::simulated();
    agent::Rng rng(9);
    return exec::run_episode(e, q, a, ProtocolSchedule::reactive(), DelayModel::uniform(TimeSpan::micros(kTc)), clock, rng)
        .log.to_ndjson();
  };
  CHECK(once() == once());
}

TEST_CASE("a never-stopping policy is cut off by the cap") {
  env::StopEnvConfig cfg = small_beta();
  cfg.episode_cap = TimeSpan::millis(1000);
  env::StopEnv e = env::StopEnv::reset(cfg, 1);
  agent::QTable q(2, 2);
  q.set_q(1, env::StopEnv::kStop, -1e9);
  Clock clock = Clock::simulated();
  agent::Rng rng(0);
  const auto r = exec::run_episode(e, q, {}, ProtocolSchedule::standard(), DelayModel::uniform(TimeSpan::micros(kTc)), clock, rng);
  CHECK(r.end_reason == env::TerminalReason::kCapExpired);
  CHECK(r.duration.us() == 1'000'000);
  CHECK_FALSE(r.reaction);
  CHECK(clock.now().us() <= 1'000'000 + 4 * kTc);
}

TEST_CASE("terminal observation leads to a terminal update") {
  const auto r = run_stop(ProtocolSchedule::reactive(), 100'000, 0);
  REQUIRE_FALSE(r.updates.empty());
  CHECK_FALSE(r.updates.back().next_state);
  CHECK(r.end_reason == env::TerminalReason::kGoal);
  CHECK(r.actions.back() == env::StopEnv::kStop);
  CHECK(r.ret == doctest::Approx(-1e-6 * static_cast<double>(r.reaction->us())));
  const auto& last = r.log.entries().back();
  CHECK(last.kind == EventKind::kEpisodeEnd);
}

TEST_CASE("without a log the run still learns but reports no reaction") {
  env::StopEnv e = env::StopEnv::reset_triggered(small_beta());
  e.trigger_onset(TimePoint::micros(50'000));
  agent::QTable q = stopping_policy();
  Clock clock = Clock::simulated();
  agent::Rng rng(0);
  const auto r = exec::run_episode(e, q, {}, ProtocolSchedule::standard(), DelayModel::uniform(TimeSpan::micros(kTc)), clock,
                                   rng, {.record_log = false, .log_components = false});
  CHECK(r.log.empty());
  CHECK_FALSE(r.reaction);
  CHECK_FALSE(r.updates.empty());
}

TEST_CASE("synchronous grid: both orderings act and learn identically") {
  env::HallwayConfig grid;
  grid.mode = env::HallwayConfig::Mode::kSynchronousGrid;
  agent::AgentConfig cfg;
  cfg.epsilon = 0.1;
  cfg.tie_break = agent::TieBreak::kSeededRandom;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    agent::QTable qs(2, 2);
    agent::QTable qr(2, 2);
    agent::Rng rs(seed);
    agent::Rng rr(seed);
    for (int ep = 0; ep < 50; ++ep) {
      auto es = env::GridHallway::reset(grid);
      auto er = env::GridHallway::reset(grid);
      const auto a = exec::run_episode_synchronous(es, qs, cfg, ProtocolSchedule::standard(), rs);
      const auto b = exec::run_episode_synchronous(er, qr, cfg, ProtocolSchedule::reactive(), rr);
      REQUIRE(a.actions == b.actions);
      REQUIRE(actions_in_log(a.log) == actions_in_log(b.log));
      REQUIRE(a.updates == b.updates);
      REQUIRE(qs == qr);
      CHECK(a.ret == b.ret);
    }
  }
}

TEST_CASE("one-cell grid ends in one left under either ordering") {
  env::HallwayConfig grid;
  grid.mode = env::HallwayConfig::Mode::kSynchronousGrid;
  grid.grid_length = 1;
  grid.grid_opening_row = 0;
  grid.grid_side_length = 1;
  for (const auto& s : {ProtocolSchedule::standard(), ProtocolSchedule::reactive()}) {
    auto g = env::GridHallway::reset(grid);
    agent::QTable q(2, 2);
    q.set_q(1, env::GridHallway::kUp, -1.0);
    q.set_q(0, env::GridHallway::kUp, -1.0);
    agent::Rng rng(0);
    const auto r = exec::run_episode_synchronous(g, q, {}, s, rng);
    CHECK(r.actions == std::vector<int>{env::GridHallway::kLeft});
    CHECK(r.end_reason == env::TerminalReason::kGoal);
  }
}

TEST_CASE("wall-clock episode measures real time") {
  env::StopEnv e = env::StopEnv::reset_triggered(small_beta());
  e.trigger_onset(TimePoint::micros(20'000));
  agent::QTable q = stopping_policy();
  Clock clock = Clock::wall();
  agent::Rng rng(0);
  const auto r = exec::run_episode(e, q, {}, ProtocolSchedule::reactive(),
                                   DelayModel::uniform(TimeSpan::micros(kTc), TimeSpan::micros(5000)), clock, rng);
  REQUIRE(r.reaction);
  // One loop is 9 ms; reaction is at most a loop plus observe and choose,
  // with slack for the scheduler.
  CHECK(r.reaction->us() >= 2 * kTc);
  CHECK(r.reaction->us() <= 9'000 + 2 * kTc + 20'000);
  TimePoint prev;
  for (const auto& ev : r.log.entries()) {
    CHECK(ev.time >= prev);
    prev = ev.time;
  }
  const auto acts = starts_of(r.log, "act");
  // The preamble act is followed by a short first body.
  for (std::size_t i = 2; i < acts.size(); ++i) CHECK(acts[i] - acts[i - 1] >= 9'000);
}

TEST_CASE("q-table too small is rejected") {
  env::StopEnv e = env::StopEnv::reset({}, 0);
  agent::QTable q(1, 2);
  Clock clock = Clock::simulated();
  agent::Rng rng(0);
  CHECK_THROWS_AS(exec::run_episode(e, q, {}, ProtocolSchedule::standard(), DelayModel::zero(), clock, rng), Error);
}
