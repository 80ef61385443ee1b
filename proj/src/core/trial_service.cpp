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


#include "reactrl/trial_service.hpp"

#include <algorithm>

#include "reactrl/error.hpp"
#include "reactrl/stats.hpp"

namespace reactrl::trial {

using experiments::Condition;
using nlohmann::json;

namespace {

json message(std::string_view kind) { return {{"v", kProtocolVersion}, {"kind", kind}}; }

json opt(const std::optional<std::int64_t>& v) {
  if (!v) return nullptr;
  return *v;
}

}  // namespace

std::string_view press_outcome_name(PressOutcome o) {
  switch (o) {
    case PressOutcome::kAccepted: return "accepted";
    case PressOutcome::kDuplicate: return "duplicate";
    case PressOutcome::kAfterTerminal: return "after_terminal";
    case PressOutcome::kNoActiveEpisode: return "no_active_episode";
    case PressOutcome::kWrongEpisode: return "wrong_episode";
  }
  return "unknown";
}

// State of the running (or most recent) episode. `env`, `abort_at` and
// `max_logged` are guarded by env_mu; the rest by the session mutex.
struct TrialSession::Live {
  Live(int i, Condition c, std::int64_t epoch, std::chrono::steady_clock::time_point tp,
       const env::StopEnvConfig& ec)
      : index(i), condition(c), epoch_us(epoch), epoch_tp(tp), env(env::StopEnv::reset_triggered(ec)) {}

  const int index;
  const Condition condition;
  const std::int64_t epoch_us;  // session time at which the arm started
  const std::chrono::steady_clock::time_point epoch_tp;

  std::mutex env_mu;
  env::StopEnv env;
  std::optional<TimePoint> abort_at;
  TimePoint max_logged;  // latest instant the executor has flushed world changes up to

  std::optional<TimePoint> press;
  std::optional<std::int64_t> press_bound;
  bool done = false;

  bool aborted_by(TimePoint t) const { return abort_at && t >= *abort_at; }
};

namespace {

// The stop task as the live executor sees it: serialized, and cut short when
// the participant leaves (reported as an expired cap so nothing is learned
// from the truncated interval).
class SessionEnv final : public env::Environment {
 public:
  SessionEnv(env::StopEnv& inner, std::mutex& mu, const std::optional<TimePoint>& abort_at,
             TimePoint& max_logged)
      : inner_(inner), mu_(mu), abort_at_(abort_at), max_logged_(max_logged) {}

  int num_states() const override { return inner_.num_states(); }
  int num_actions() const override { return inner_.num_actions(); }

  env::ObserveResult observe(TimePoint t) override {
    std::lock_guard lock(mu_);
    if (aborted(t) && !inner_.is_terminal(t)) {
      const int s = inner_.phase(t) == env::StopPhase::kEmergency ? env::StopEnv::kEmergencyState
                                                                  : env::StopEnv::kNormalState;
      return {{s, true}, 0.0};
    }
    return inner_.observe(t);
  }
  void apply_action(int action, TimePoint t) override {
    std::lock_guard lock(mu_);
    if (aborted(t)) fail(ErrorCode::kActionAfterTerminal, "episode was aborted");
    inner_.apply_action(action, t);
  }
  bool is_terminal(TimePoint t) const override {
    std::lock_guard lock(mu_);
    return aborted(t) || inner_.is_terminal(t);
  }
  env::TerminalReason terminal_reason(TimePoint t) const override {
    std::lock_guard lock(mu_);
    if (inner_.is_terminal(t) && !(abort_at_ && *abort_at_ < inner_.terminal_time())) {
      return inner_.terminal_reason(t);
    }
    return aborted(t) ? env::TerminalReason::kCapExpired : env::TerminalReason::kNone;
  }
  double cumulative_reward(TimePoint t) const override {
    std::lock_guard lock(mu_);
    return inner_.cumulative_reward(abort_at_ ? std::min(t, *abort_at_) : t);
  }
  std::optional<TimePoint> terminated_at(TimePoint now) const override {
    std::lock_guard lock(mu_);
    std::optional<TimePoint> end = inner_.terminated_at(now);
    if (abort_at_ && *abort_at_ <= now && (!end || *abort_at_ < *end)) end = abort_at_;
    return end;
  }
  std::vector<Change> state_changes(std::optional<TimePoint> after, TimePoint upto) const override {
    std::lock_guard lock(mu_);
    max_logged_ = std::max(max_logged_, upto);
    return inner_.state_changes(after, upto);
  }

 private:
  bool aborted(TimePoint t) const { return abort_at_ && t >= *abort_at_; }

  env::StopEnv& inner_;
  std::mutex& mu_;
  const std::optional<TimePoint>& abort_at_;
  TimePoint& max_logged_;
};

}  // namespace

TrialSession::TrialSession(std::string id, experiments::Exp2Config cfg, std::uint64_t seed)
    : id_(std::move(id)),
      cfg_(std::move(cfg)),
      zero_(std::chrono::steady_clock::now()),
      q_standard_(2, 2, cfg_.agent.q_init),
      q_reactive_(2, 2, cfg_.agent.q_init),
      agent_rng_(experiments::agent_seed(seed, 0)) {
  cfg_.validate();
  order_ = experiments::condition_order(cfg_, experiments::participant_seed(seed, 0));
  experiments::pretrain_agents(cfg_, seed, 0, q_standard_, q_reactive_, agent_rng_);
}

TrialSession::~TrialSession() {
  abort_episode();
  join_worker();
}

std::int64_t TrialSession::now_us() const {
  return std::chrono::duration_cast<std::chrono::microseconds>(std::chrono::steady_clock::now() -
                                                               zero_)
      .count();
}

json TrialSession::session_start_message() const {
  json m = message("session_start");
  m["session"] = id_;
  m["episodes"] = episode_count();
  m["tick_hz"] = cfg_.tick_hz;
  m["omega_mdeg_per_s"] = cfg_.env.omega_mdeg_per_s;
  m["theta_egg_mdeg"] = *cfg_.env.theta_egg_mdeg;
  m["t_us"] = now_us();
  return m;
}

void TrialSession::join_worker() {
  std::lock_guard wl(worker_mu_);
  if (worker_.joinable()) worker_.join();
}

json TrialSession::begin_episode() {
  std::lock_guard wl(worker_mu_);
  {
    std::lock_guard lock(mu_);
    if (live_ && !live_->done) fail(ErrorCode::kRuntime, "an episode is still running");
    if (next_episode_ >= episode_count()) fail(ErrorCode::kRuntime, "no episodes left in session");
  }
  if (worker_.joinable()) worker_.join();

  std::lock_guard lock(mu_);
  const int index = next_episode_++;
  const auto tp = std::chrono::steady_clock::now();
  const std::int64_t epoch =
      std::chrono::duration_cast<std::chrono::microseconds>(tp - zero_).count();
  live_ = std::make_unique<Live>(index, order_[index], epoch, tp, cfg_.env);
  json m = message("episode_start");
  m["episode"] = index;
  m["episodes"] = episode_count();
  m["t_us"] = 0;
  m["session_us"] = epoch;
  m["omega_mdeg_per_s"] = cfg_.env.omega_mdeg_per_s;
  m["theta_egg_mdeg"] = *cfg_.env.theta_egg_mdeg;
  outbox_.push_back(m);
  Live& live = *live_;
  worker_ = std::thread([this, &live] { run_worker(live); });
  return m;
}

void TrialSession::run_worker(Live& live) {
  const Clock clock_at_start = Clock::wall_since(live.epoch_tp);
  exec::EpisodeResult res;
  try {
    if (live.condition == Condition::kControl) {
      TimePoint contact_or_cap;
      {
        std::lock_guard el(live.env_mu);
        contact_or_cap = live.env.terminal_time();
      }
      const auto deadline = live.epoch_tp + std::chrono::microseconds(contact_or_cap.us());
      {
        std::unique_lock lock(mu_);
        cv_.wait_until(lock, deadline, [&] {
          std::lock_guard el(live.env_mu);
          return live.press.has_value() || live.abort_at.has_value();
        });
      }
      std::optional<TimePoint> press;
      {
        std::lock_guard lock(mu_);
        press = live.press;
      }
      std::unique_lock el(live.env_mu);
      if (press && !live.aborted_by(*press) && !live.env.is_terminal(*press)) {
        live.env.apply_action(env::StopEnv::kStop, *press);
      }
      const TimePoint end = live.abort_at ? std::min(*live.abort_at, live.env.terminal_time())
                                          : live.env.terminal_time();
      el.unlock();
      // Hold the episode open until its end instant has actually passed.
      std::this_thread::sleep_until(live.epoch_tp + std::chrono::microseconds(end.us()));
      std::lock_guard el2(live.env_mu);
      res = experiments::control_result(live.env, press);
    } else {
      SessionEnv guarded(live.env, live.env_mu, live.abort_at, live.max_logged);
      Clock clock = clock_at_start;
      agent::QTable& q = live.condition == Condition::kStandard ? q_standard_ : q_reactive_;
      const exec::ProtocolSchedule sched = live.condition == Condition::kStandard
                                               ? exec::ProtocolSchedule::standard()
                                               : exec::ProtocolSchedule::reactive();
      res = exec::run_episode(guarded, q, cfg_.agent, sched, cfg_.delays(), clock, agent_rng_);
    }
  } catch (const std::exception&) {
    std::lock_guard el(live.env_mu);
    if (!live.abort_at) live.abort_at = clock_at_start.now();
  }
  finish_episode(live, res);
}

void TrialSession::finish_episode(Live& live, const exec::EpisodeResult& res) {
  std::lock_guard lock(mu_);
  EpisodeRecord rec;
  rec.episode = live.index;
  rec.condition = live.condition;
  {
    std::lock_guard el(live.env_mu);
    rec.aborted = live.abort_at && *live.abort_at <= live.env.terminal_time();
    const TimePoint end = rec.aborted ? *live.abort_at : live.env.terminal_time();
    rec.end_us = end.us();
    rec.theta_end_mdeg = live.env.theta_mdeg(end);
    rec.distance_to_contact_mdeg = *cfg_.env.theta_egg_mdeg - rec.theta_end_mdeg;
    if (!rec.aborted) {
      rec.failed_stop = live.env.terminal_reason(end) == env::TerminalReason::kContact;
      if (auto s = live.env.stop_time()) rec.stop_effective_us = s->us();
    }
  }
  (void)res;
  if (live.press) rec.press_us = live.press->us();
  rec.press_bound_us = live.press_bound;
  records_.push_back(rec);
  live.done = true;

  json m = message("stop_result");
  m["episode"] = rec.episode;
  m["t_us"] = rec.end_us;
  m["aborted"] = rec.aborted;
  m["stopped"] = rec.stop_effective_us.has_value();
  m["failed_stop"] = rec.failed_stop;
  m["theta_mdeg"] = rec.theta_end_mdeg;
  m["distance_to_contact_mdeg"] = rec.distance_to_contact_mdeg;
  m["press_us"] = opt(rec.press_us);
  m["stop_effective_us"] = opt(rec.stop_effective_us);
  outbox_.push_back(std::move(m));
  if (next_episode_ >= episode_count()) outbox_.push_back(summary_locked());
  cv_.notify_all();
}

PressOutcome TrialSession::handle_press(int episode, std::int64_t client_us) {
  const std::int64_t now = now_us();
  std::lock_guard lock(mu_);
  if (!live_ || live_->done) return PressOutcome::kNoActiveEpisode;
  Live& live = *live_;
  if (episode != live.index) return PressOutcome::kWrongEpisode;
  if (live.press) return PressOutcome::kDuplicate;

  std::int64_t session_t = now;
  if (sync_) {
    session_t = std::min(now, client_us + sync_->offset_us);
    live.press_bound = sync_->bound_us;
  }
  const TimePoint now_ep = TimePoint::micros(std::max<std::int64_t>(0, now - live.epoch_us));
  const TimePoint press = TimePoint::micros(std::max<std::int64_t>(0, session_t - live.epoch_us));
  live.press = press;

  std::lock_guard el(live.env_mu);
  if (live.aborted_by(now_ep) || live.env.is_terminal(std::min(press, now_ep))) {
    return PressOutcome::kAfterTerminal;
  }
  // The executor may already have flushed world changes past `now_ep`; the
  // onset is announced after that point so the log stays ordered.
  const TimePoint announced = std::max(now_ep, live.max_logged + TimeSpan::micros(1));
  live.env.trigger_onset(press, announced);
  cv_.notify_all();
  return PressOutcome::kAccepted;
}

void TrialSession::record_sync(std::int64_t client_send_us, std::int64_t server_us,
                               std::int64_t client_recv_us) {
  if (client_recv_us < client_send_us) {
    fail(ErrorCode::kInvalidArgument, "sync reply arrived before it was sent");
  }
  const std::int64_t rtt = client_recv_us - client_send_us;
  ClockSync s;
  // Midpoint of the round trip on the client's clock maps to the server stamp.
  s.offset_us = server_us - (client_send_us + rtt / 2);
  s.bound_us = (rtt + 1) / 2;
  std::lock_guard lock(mu_);
  if (!sync_ || s.bound_us <= sync_->bound_us) sync_ = s;
}

std::optional<ClockSync> TrialSession::clock_sync() const {
  std::lock_guard lock(mu_);
  return sync_;
}

std::optional<json> TrialSession::tick_at(std::int64_t session_us) {
  std::lock_guard lock(mu_);
  if (!live_ || live_->done) return std::nullopt;
  Live& live = *live_;
  if (session_us < live.epoch_us) return std::nullopt;
  const TimePoint t = TimePoint::micros(session_us - live.epoch_us);
  std::lock_guard el(live.env_mu);
  if (live.aborted_by(t) || live.env.is_terminal(t)) return std::nullopt;
  json m = message("state_tick");
  m["episode"] = live.index;
  m["t_us"] = t.us();
  m["theta_mdeg"] = live.env.theta_mdeg(t);
  return m;
}

std::vector<json> TrialSession::poll() {
  std::vector<json> out;
  {
    std::lock_guard lock(mu_);
    while (!outbox_.empty()) {
      out.push_back(std::move(outbox_.front()));
      outbox_.pop_front();
    }
  }
  if (auto tick = tick_at(now_us())) out.push_back(std::move(*tick));
  return out;
}

void TrialSession::abort_episode() {
  const std::int64_t now = now_us();
  std::lock_guard lock(mu_);
  if (!live_ || live_->done) return;
  std::lock_guard el(live_->env_mu);
  if (!live_->abort_at) {
    live_->abort_at = TimePoint::micros(std::max<std::int64_t>(0, now - live_->epoch_us));
  }
  cv_.notify_all();
}

bool TrialSession::episode_running() const {
  std::lock_guard lock(mu_);
  return live_ && !live_->done;
}

bool TrialSession::finished() const {
  std::lock_guard lock(mu_);
  return next_episode_ >= episode_count() && (!live_ || live_->done);
}

void TrialSession::wait_episode() { join_worker(); }

std::vector<EpisodeRecord> TrialSession::records() const {
  std::lock_guard lock(mu_);
  return records_;
}

json TrialSession::summary_message() const {
  std::lock_guard lock(mu_);
  if (next_episode_ < episode_count() || (live_ && !live_->done)) {
    fail(ErrorCode::kRuntime, "session is not finished");
  }
  return summary_locked();
}

json TrialSession::summary_locked() const {
  json m = message("session_summary");
  m["session"] = id_;
  json conditions = json::object();
  for (Condition c : {Condition::kControl, Condition::kStandard, Condition::kReactive}) {
    int episodes = 0;
    int failed = 0;
    int aborted = 0;
    std::vector<double> reactions;
    for (const auto& r : records_) {
      if (r.condition != c) continue;
      if (r.aborted) {
        ++aborted;
        continue;
      }
      ++episodes;
      if (r.failed_stop) ++failed;
      if (r.press_us && r.stop_effective_us) {
        reactions.push_back(static_cast<double>(*r.stop_effective_us - *r.press_us));
      }
    }
    json entry = {{"episodes", episodes}, {"failed_stops", failed}, {"aborted", aborted}};
    entry["reaction_us"] = reactions.empty() ? json(nullptr) : stats::to_json(stats::summarize(reactions));
    conditions[std::string(experiments::condition_name(c))] = std::move(entry);
  }
  m["conditions"] = std::move(conditions);
  json episodes = json::array();
  for (const auto& r : records_) {
    episodes.push_back({{"episode", r.episode},
                        {"condition", experiments::condition_name(r.condition)},
                        {"aborted", r.aborted},
                        {"failed_stop", r.failed_stop},
                        {"press_us", opt(r.press_us)},
                        {"press_error_bound_us", opt(r.press_bound_us)},
                        {"stop_effective_us", opt(r.stop_effective_us)},
                        {"end_us", r.end_us},
                        {"distance_to_contact_mdeg", r.distance_to_contact_mdeg}});
  }
  m["episodes"] = std::move(episodes);
  return m;
}

}  // namespace reactrl::trial
