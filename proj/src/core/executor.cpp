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

#include "reactrl/executor.hpp"

#include <algorithm>
#include <string>

#include "reactrl/error.hpp"

namespace reactrl::exec {

namespace {

constexpr std::array<std::string_view, 4> kComponentNames{"act", "observe", "choose", "learn"};

// Which of (S, A, R, S', A') are bound. The executor and the static schedule
// check walk the same transitions, so a schedule that validates can never
// trip a binding error at run time.
struct Bindings {
  bool have_a = false;
  bool a_acted = false;
  bool pending = false;  // R and S' observed but not yet learned from
  bool have_a2 = false;
  bool a2_acted = false;

  // Returns an error description, or nullptr when the step is legal.
  const char* observe() {
    if (pending) return "Observe would overwrite (R, S') before Learn consumed them";
    pending = true;
    have_a2 = false;
    a2_acted = false;
    return nullptr;
  }
  const char* choose() {
    if (pending) {
      if (have_a2) return "Choose ran twice for the same S'";
      have_a2 = true;
      return nullptr;
    }
    if (have_a) return "Choose has no new state to choose for";
    have_a = true;
    return nullptr;
  }
  // Sets *next to true when A' (rather than A) is the action taken.
  const char* act(bool* next) {
    if (have_a2 && !a2_acted) {
      a2_acted = true;
      *next = true;
      return nullptr;
    }
    if (have_a && !a_acted) {
      a_acted = true;
      *next = false;
      return nullptr;
    }
    return "Act before an action was chosen";
  }
  const char* learn(bool terminal) {
    if (!pending) return "Learn before any experience: R and S' are unbound";
    if (!have_a) return "Learn before A is bound";
    if (!a_acted) return "Learn about an action A that never took effect";
    if (!terminal && !have_a2) return "Learn before A' is chosen";
    have_a = have_a2;
    a_acted = a2_acted;
    have_a2 = false;
    a2_acted = false;
    pending = false;
    return nullptr;
  }
};

}  // namespace

std::string_view component_name(Component c) { return kComponentNames[static_cast<int>(c)]; }

Component component_from_name(std::string_view name) {
  for (std::size_t i = 0; i < kComponentNames.size(); ++i) {
    if (kComponentNames[i] == name) return static_cast<Component>(i);
  }
  fail(ErrorCode::kInvalidSchedule, "unknown protocol component: " + std::string(name));
}

ProtocolSchedule ProtocolSchedule::standard() {
  return {"standard",
          {Component::kChoose},
          {Component::kAct, Component::kObserve, Component::kChoose, Component::kLearn}};
}

ProtocolSchedule ProtocolSchedule::reactive() {
  return {"reactive",
          {Component::kChoose, Component::kAct},
          {Component::kObserve, Component::kChoose, Component::kAct, Component::kLearn}};
}

ProtocolSchedule ProtocolSchedule::named(std::string_view name) {
  if (name == "standard") return standard();
  if (name == "reactive") return reactive();
  fail(ErrorCode::kInvalidSchedule, "unknown schedule name: " + std::string(name));
}

void validate_schedule(const ProtocolSchedule& sched) {
  auto bad = [&](const std::string& why) {
    fail(ErrorCode::kInvalidSchedule, "schedule '" + sched.name + "': " + why);
  };
  if (sched.body.size() != 4) bad("loop body must hold each component exactly once");
  for (int k = 0; k < 4; ++k) {
    if (std::count(sched.body.begin(), sched.body.end(), static_cast<Component>(k)) != 1) {
      bad("loop body must hold each component exactly once");
    }
  }
  Bindings b;
  bool unused = false;
  auto step = [&](Component c, std::string_view where) {
    const char* err = nullptr;
    switch (c) {
      case Component::kObserve: err = b.observe(); break;
      case Component::kChoose: err = b.choose(); break;
      case Component::kAct: err = b.act(&unused); break;
      case Component::kLearn: err = b.learn(false); break;
    }
    if (err) bad(std::string(err) + " (" + std::string(where) + ")");
  };
  for (Component c : sched.preamble) step(c, "preamble");
  // Three passes reach the steady state of any four-component body.
  for (int pass = 0; pass < 3; ++pass) {
    for (Component c : sched.body) step(c, "loop body");
  }
}

DelayModel DelayModel::uniform(TimeSpan per_component, TimeSpan learn_extra) {
  DelayModel d;
  d.base.fill(per_component);
  d.learn_extra = learn_extra;
  return d;
}

TimeSpan DelayModel::charge(Component c) const {
  TimeSpan t = base[static_cast<int>(c)];
  if (c == Component::kLearn) t = t + learn_extra;
  return t;
}

TimeSpan DelayModel::step() const {
  return base[0] + base[1] + base[2] + base[3] + learn_extra;
}

namespace {

using Json = nlohmann::json;

class EpisodeRunner {
 public:
  EpisodeRunner(env::Environment& env, agent::QTable& q, const agent::AgentConfig& cfg,
                const DelayModel& delays, Clock& clock, agent::Rng& rng, const RunOptions& opts)
      : env_(env), q_(q), cfg_(cfg), delays_(delays), clock_(clock), rng_(rng), opts_(opts) {}

  EpisodeResult run(const ProtocolSchedule& sched) {
    validate_schedule(sched);
    if (q_.num_states() < env_.num_states() || q_.num_actions() < env_.num_actions()) {
      fail(ErrorCode::kInvalidArgument, "q-table is smaller than the environment's spaces");
    }
    q_.reset_traces();
    start_ = clock_.now();

    const env::ObserveResult init = env_.observe(start_);
    s_ = init.obs.state_id;
    log(start_, EventKind::kStateChange, [&] { return Json{{"state", s_}, {"initial", true}}; });

    bool done = init.obs.terminal;
    for (Component c : sched.preamble) {
      if (done) break;
      done = component(c);
    }
    while (!done) {
      ++res_.steps;
      for (Component c : sched.body) {
        done = component(c);
        if (done) break;
      }
    }
    return finish();
  }

 private:
  // Runs one component; returns true when the episode is over.
  bool component(Component c) {
    const TimePoint start = clock_.now();
    // The cap is noticed where the agent looks at the world. Experience that
    // was already observed is still learned from, whichever order is used.
    if (c == Component::kObserve &&
        env_.terminal_reason(start) == env::TerminalReason::kCapExpired) {
      res_.end_reason = env::TerminalReason::kCapExpired;
      return true;
    }
    const char* err = nullptr;
    bool episode_over = false;
    switch (c) {
      case Component::kObserve: {
        err = b_.observe();
        if (err) break;
        begin(c, start);
        const env::ObserveResult o = env_.observe(start);
        r_ = o.reward;
        s2_ = o.obs.state_id;
        next_terminal_ = o.obs.terminal;
        log(start, EventKind::kRewardEmitted, [&] {
          return Json{{"reward", o.reward}, {"state", o.obs.state_id}, {"terminal", o.obs.terminal}};
        });
        break;
      }
      case Component::kChoose: {
        if (b_.pending && next_terminal_) return false;  // nothing to choose after the end
        const bool for_next = b_.pending;
        err = b_.choose();
        if (err) break;
        begin(c, start);
        if (for_next) {
          a2_ = agent::choose_action(q_, s2_, cfg_, rng_);
        } else {
          a_ = agent::choose_action(q_, s_, cfg_, rng_);
        }
        break;
      }
      case Component::kAct: {
        if (b_.pending && next_terminal_) return false;
        bool next = false;
        err = b_.act(&next);
        if (err) break;
        // The world already ended (goal reached mid-step): the command is moot.
        if (env_.is_terminal(start)) return false;
        begin(c, start);
        const int action = next ? a2_ : a_;
        env_.apply_action(action, start);
        res_.actions.push_back(action);
        log(start, EventKind::kActionEffective, [&] { return Json{{"action", action}}; });
        break;
      }
      case Component::kLearn: {
        err = b_.learn(next_terminal_);
        if (err) break;
        begin(c, start);
        LearningTuple tuple{s_, a_, r_, std::nullopt, std::nullopt};
        if (!next_terminal_) {
          tuple.next_state = s2_;
          tuple.next_action = a2_;
        }
        agent::td_update(q_, tuple.s, tuple.a, tuple.r, tuple.next_state, tuple.next_action, cfg_);
        res_.updates.push_back(tuple);
        if (next_terminal_) {
          episode_over = true;
        } else {
          s_ = s2_;
          a_ = a2_;
        }
        break;
      }
    }
    if (err) fail(ErrorCode::kInvalidSchedule, err);
    clock_.charge(start, delays_.charge(c));
    if (opts_.log_components) {
      log(clock_.now(), EventKind::kComponentEnd,
          [&] { return Json{{"component", component_name(c)}}; });
    }
    return episode_over;
  }

  void begin(Component c, TimePoint start) {
    if (!opts_.log_components) return;
    log(start, EventKind::kComponentStart, [&] { return Json{{"component", component_name(c)}}; });
  }

  // `make` builds the payload only when the log is being kept.
  template <typename MakePayload>
  void log(TimePoint t, EventKind kind, MakePayload&& make) {
    if (!opts_.record_log) return;
    for (auto& [ct, cj] : env_.state_changes(flushed_, t)) {
      res_.log.log_event(ct, EventKind::kStateChange, std::move(cj));
    }
    flushed_ = t;
    res_.log.log_event(t, kind, make());
  }

  EpisodeResult finish() {
    const TimePoint now = clock_.now();
    const TimePoint end = env_.terminated_at(now).value_or(now);
    if (res_.end_reason == env::TerminalReason::kNone) res_.end_reason = env_.terminal_reason(now);
    res_.ret = env_.cumulative_reward(now);
    res_.duration = end - start_;
    res_.failed_stop = res_.end_reason == env::TerminalReason::kContact;
    log(now, EventKind::kEpisodeEnd, [&] {
      return Json{{"reason", env::terminal_reason_name(res_.end_reason)}, {"return", res_.ret}};
    });

    for (const auto& e : res_.log.entries()) {
      if (e.kind == EventKind::kStateChange && e.payload.value("phase", "") == "Emergency") {
        res_.onset = TimePoint::micros(e.payload.at("at_us").get<std::int64_t>());
        break;
      }
    }
    res_.reaction = reaction_from_log(res_.log, /*stop_action=*/1);
    if (res_.reaction) res_.stop_effective = *res_.onset + *res_.reaction;
    return std::move(res_);
  }

  env::Environment& env_;
  agent::QTable& q_;
  const agent::AgentConfig& cfg_;
  const DelayModel& delays_;
  Clock& clock_;
  agent::Rng& rng_;
  const RunOptions& opts_;

  Bindings b_;
  int s_ = 0;
  int a_ = 0;
  double r_ = 0.0;
  int s2_ = 0;
  int a2_ = 0;
  bool next_terminal_ = false;

  TimePoint start_;
  std::optional<TimePoint> flushed_;
  EpisodeResult res_;
};

}  // namespace

EpisodeResult run_episode(env::Environment& env, agent::QTable& q, const agent::AgentConfig& cfg,
                          const ProtocolSchedule& sched, const DelayModel& delays, Clock& clock,
                          agent::Rng& rng, const RunOptions& opts) {
  return EpisodeRunner(env, q, cfg, delays, clock, rng, opts).run(sched);
}

EpisodeResult run_episode_synchronous(env::Environment& env, agent::QTable& q,
                                      const agent::AgentConfig& cfg,
                                      const ProtocolSchedule& sched, agent::Rng& rng,
                                      const RunOptions& opts) {
  if (!env.synchronous()) {
    fail(ErrorCode::kInvalidArgument, "synchronous run needs an environment that moves only on Act");
  }
  Clock clock = Clock::simulated();
  const DelayModel none = DelayModel::zero();
  return EpisodeRunner(env, q, cfg, none, clock, rng, opts).run(sched);
}

std::optional<TimeSpan> reaction_from_log(const EventLog& log, int stop_action) {
  std::optional<TimePoint> onset;
  for (const auto& e : log.entries()) {
    if (e.kind == EventKind::kStateChange && e.payload.value("phase", "") == "Emergency") {
      onset = TimePoint::micros(e.payload.at("at_us").get<std::int64_t>());
      break;
    }
  }
  if (!onset) return std::nullopt;
  // A late-announced onset (live press) can be logged after the Stop it caused.
  for (const auto& e : log.entries()) {
    if (e.kind == EventKind::kActionEffective && e.payload.at("action").get<int>() == stop_action &&
        e.time >= *onset) {
      return e.time - *onset;
    }
  }
  return std::nullopt;
}

}  // namespace reactrl::exec
