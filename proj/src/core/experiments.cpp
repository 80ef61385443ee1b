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


#include "reactrl/experiments.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

#include "reactrl/error.hpp"

namespace reactrl::experiments {

namespace {

std::uint64_t derive(std::initializer_list<std::uint64_t> parts) {
  std::vector<std::uint32_t> words;
  for (std::uint64_t p : parts) {
    words.push_back(static_cast<std::uint32_t>(p));
    words.push_back(static_cast<std::uint32_t>(p >> 32));
  }
  std::seed_seq seq(words.begin(), words.end());
  std::array<std::uint32_t, 2> out{};
  seq.generate(out.begin(), out.end());
  return (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
}

// Stream tags keep the derived seeds of different consumers apart.
constexpr std::uint64_t kAgentStream = 0xA6E7;
constexpr std::uint64_t kPretrainStream = 0x9E7A;
constexpr std::uint64_t kPressStream = 0x9E55;
constexpr std::uint64_t kOrderStream = 0x0DE2;

void check_name(const std::string& name) {
  if (name.empty() || name.find_first_of(",\"\r\n") != std::string::npos) {
    fail(ErrorCode::kInvalidConfig, "schedule name must be non-empty and CSV-safe: '" + name + "'");
  }
}

exec::DelayModel make_delays(const std::array<TimeSpan, 4>& component, TimeSpan learn_extra) {
  exec::DelayModel d;
  d.base = component;
  d.learn_extra = learn_extra;
  return d;
}

std::optional<std::int64_t> opt_us(const std::optional<TimeSpan>& s) {
  if (!s) return std::nullopt;
  return s->us();
}

std::optional<std::int64_t> opt_us(const std::optional<TimePoint>& t) {
  if (!t) return std::nullopt;
  return t->us();
}

// Adds the participant's press to a finished episode log.
void insert_press(exec::EpisodeResult& res, TimePoint press) {
  EventLog merged;
  bool done = false;
  for (const auto& e : res.log.entries()) {
    if (!done && e.time >= press) {
      merged.log_event(press, EventKind::kButtonPress, {{"press_us", press.us()}});
      done = true;
    }
    merged.log_event(e.time, e.kind, e.payload);
  }
  if (!done) merged.log_event(press, EventKind::kButtonPress, {{"press_us", press.us()}});
  res.log = std::move(merged);
}

TimeSpan draw_phase(const Exp2Config& cfg, agent::Rng& rng) {
  const std::int64_t step = cfg.delays().step().us();
  if (step <= 0) return {};
  std::uniform_int_distribution<std::int64_t> u(0, step - 1);
  return TimeSpan::micros(u(rng));
}

}  // namespace

env::StopEnvConfig default_sweep_env() {
  env::StopEnvConfig c;
  c.beta = 1e-6;
  return c;
}

void Exp1Config::validate() const {
  if (trials < 1) fail(ErrorCode::kInvalidConfig, "trials must be at least 1");
  if (episodes_per_trial < 1) fail(ErrorCode::kInvalidConfig, "episodes_per_trial must be at least 1");
  if (tail < 1 || tail > episodes_per_trial) {
    fail(ErrorCode::kInvalidConfig, "tail must lie in [1, episodes_per_trial]");
  }
  if (delays.empty()) fail(ErrorCode::kInvalidConfig, "delays must not be empty");
  if (schedules.empty()) fail(ErrorCode::kInvalidConfig, "schedules must not be empty");
  std::set<std::string> names;
  for (const auto& s : schedules) {
    check_name(s.name);
    if (s.name == "control") fail(ErrorCode::kInvalidConfig, "'control' is not a schedule name");
    if (!names.insert(s.name).second) {
      fail(ErrorCode::kInvalidConfig, "duplicate schedule name: " + s.name);
    }
    exec::validate_schedule(s);
  }
  agent.validate();
  env.validate();
}

const Exp1Cell& Exp1Result::cell(std::string_view schedule, TimeSpan delay) const {
  for (const auto& c : cells) {
    if (c.schedule == schedule && c.delay == delay) return c;
  }
  fail(ErrorCode::kNotFound, "no cell for schedule " + std::string(schedule) + " at delay " +
                                 std::to_string(delay.us()) + " us");
}

std::uint64_t episode_seed(std::uint64_t seed, int trial, int episode) {
  return derive({seed, static_cast<std::uint64_t>(trial), static_cast<std::uint64_t>(episode)});
}

Exp1Result run_experiment1(const Exp1Config& cfg, std::uint64_t seed) {
  cfg.validate();
  Exp1Result out;
  for (const auto& sched : cfg.schedules) {
    for (TimeSpan delay : cfg.delays) {
      const exec::DelayModel delays = make_delays(cfg.component, delay);
      Exp1Cell cell;
      cell.schedule = sched.name;
      cell.delay = delay;
      std::vector<double> reactions;
      std::vector<double> tail_reactions;
      for (int trial = 0; trial < cfg.trials; ++trial) {
        agent::QTable q(2, 2, cfg.agent.q_init);
        agent::Rng rng(derive({seed, static_cast<std::uint64_t>(trial), kAgentStream}));
        double tail_sum = 0.0;
        for (int ep = 0; ep < cfg.episodes_per_trial; ++ep) {
          env::StopEnv env = env::StopEnv::reset(cfg.env, episode_seed(seed, trial, ep));
          Clock clock = Clock::simulated();
          const exec::EpisodeResult r = exec::run_episode(env, q, cfg.agent, sched, delays, clock, rng);
          const bool in_tail = ep >= cfg.episodes_per_trial - cfg.tail;
          if (in_tail) tail_sum += r.ret;
          if (r.reaction) {
            reactions.push_back(static_cast<double>(r.reaction->us()));
            if (in_tail) tail_reactions.push_back(static_cast<double>(r.reaction->us()));
          }
          out.rows.push_back({sched.name, delay.us(), trial, ep, r.ret, r.duration.us(),
                              opt_us(r.reaction), r.failed_stop, std::nullopt,
                              opt_us(r.stop_effective)});
        }
        cell.tail_returns.push_back(tail_sum);
      }
      cell.tail_return_mean = stats::mean(cell.tail_returns);
      cell.tail_return_var = stats::variance(cell.tail_returns);
      if (!reactions.empty()) cell.reactions = stats::summarize(reactions);
      if (!tail_reactions.empty()) cell.tail_reactions = stats::summarize(tail_reactions);
      out.cells.push_back(std::move(cell));
    }
  }
  return out;
}

TimePoint ScriptedParticipant::press_time(TimePoint contact, agent::Rng& rng) const {
  double jitter = 0.0;
  if (jitter_sigma.us() > 0) {
    std::normal_distribution<double> n(0.0, static_cast<double>(jitter_sigma.us()));
    jitter = n(rng);
  }
  const double t = static_cast<double>(contact.us() - margin.us()) + jitter;
  return TimePoint::micros(std::max<std::int64_t>(0, std::llround(t)));
}

env::StopEnvConfig Exp2Config::default_press_env() {
  env::StopEnvConfig c = default_sweep_env();
  c.theta_egg_mdeg = 90'000;
  return c;
}

exec::DelayModel Exp2Config::delays() const { return make_delays(component, learn_delay); }

void Exp2Config::validate() const {
  if (participants < 1) fail(ErrorCode::kInvalidConfig, "participants must be at least 1");
  if (control_episodes < 0 || learned_episodes < 0 || pretrain_episodes < 0) {
    fail(ErrorCode::kInvalidConfig, "episode counts must be non-negative");
  }
  if (learned_episodes % 2 != 0) {
    fail(ErrorCode::kInvalidConfig, "learned_episodes must split evenly between the schedules");
  }
  if (control_episodes + learned_episodes == 0) {
    fail(ErrorCode::kInvalidConfig, "a session needs at least one episode");
  }
  if (!env.theta_egg_mdeg) fail(ErrorCode::kInvalidConfig, "press-to-stop needs theta_egg");
  if (tick_hz <= 0) fail(ErrorCode::kInvalidConfig, "tick_hz must be positive");
  if (port < 0 || port > 65535) fail(ErrorCode::kInvalidConfig, "port out of range");
  agent.validate();
  env.validate();
}

std::string_view condition_name(Condition c) {
  switch (c) {
    case Condition::kControl: return "control";
    case Condition::kStandard: return "standard";
    case Condition::kReactive: return "reactive";
  }
  return "unknown";
}

Condition condition_from_name(std::string_view name) {
  if (name == "control") return Condition::kControl;
  if (name == "standard") return Condition::kStandard;
  if (name == "reactive") return Condition::kReactive;
  fail(ErrorCode::kInvalidArgument, "unknown condition: " + std::string(name));
}

std::vector<Condition> condition_order(const Exp2Config& cfg, std::uint64_t seed) {
  std::vector<Condition> order(cfg.control_episodes, Condition::kControl);
  std::vector<Condition> learned;
  for (int i = 0; i < cfg.learned_episodes / 2; ++i) {
    learned.push_back(Condition::kStandard);
    learned.push_back(Condition::kReactive);
  }
  std::mt19937_64 rng(derive({seed, kOrderStream}));
  std::shuffle(learned.begin(), learned.end(), rng);
  order.insert(order.end(), learned.begin(), learned.end());
  return order;
}

exec::EpisodeResult run_press_episode(const Exp2Config& cfg, const exec::ProtocolSchedule& sched,
                                      agent::QTable& q, TimePoint press, TimeSpan phase,
                                      agent::Rng& rng) {
  env::StopEnv env = env::StopEnv::reset_triggered(cfg.env);
  env.trigger_onset(press);
  Clock clock = Clock::simulated();
  clock.advance(phase);
  exec::EpisodeResult r = exec::run_episode(env, q, cfg.agent, sched, cfg.delays(), clock, rng);
  r.duration = env.terminated_at(clock.now()).value_or(clock.now()) - env.epoch();
  insert_press(r, press);
  return r;
}

exec::EpisodeResult run_control_episode(const Exp2Config& cfg, TimePoint press) {
  env::StopEnv env = env::StopEnv::reset_triggered(cfg.env);
  env.trigger_onset(press);
  if (!env.is_terminal(press)) env.apply_action(env::StopEnv::kStop, press);
  return control_result(env, press);
}

exec::EpisodeResult control_result(const env::StopEnv& env, std::optional<TimePoint> press) {
  exec::EpisodeResult r;
  const TimePoint epoch = env.epoch();
  const TimePoint end = env.terminal_time();
  r.log.log_event(epoch, EventKind::kStateChange,
                  {{"state", env::StopEnv::kNormalState}, {"initial", true}});
  std::optional<TimePoint> flushed = epoch;
  auto flush = [&](TimePoint upto) {
    for (auto& [t, j] : env.state_changes(flushed, upto)) {
      r.log.log_event(t, EventKind::kStateChange, std::move(j));
    }
    flushed = upto;
  };
  bool pressed = false;
  for (const auto& a : env.actions()) {
    if (press && !pressed && *press <= a.effective_at) {
      flush(*press);
      r.log.log_event(*press, EventKind::kButtonPress, {{"press_us", press->us()}});
      pressed = true;
    }
    flush(a.effective_at);
    r.actions.push_back(a.action);
    r.log.log_event(a.effective_at, EventKind::kActionEffective, {{"action", a.action}});
  }
  if (press && !pressed && *press <= end) {
    flush(*press);
    r.log.log_event(*press, EventKind::kButtonPress, {{"press_us", press->us()}});
    pressed = true;
  }
  flush(end);
  r.end_reason = env.terminal_reason(end);
  r.ret = env.cumulative_reward(end);
  r.duration = end - epoch;
  r.failed_stop = r.end_reason == env::TerminalReason::kContact;
  r.log.log_event(end, EventKind::kEpisodeEnd,
                  {{"reason", env::terminal_reason_name(r.end_reason)}, {"return", r.ret}});
  if (press && !pressed) insert_press(r, *press);
  r.onset = env.onset();
  r.reaction = exec::reaction_from_log(r.log, env::StopEnv::kStop);
  if (r.reaction) r.stop_effective = *r.onset + *r.reaction;
  return r;
}

std::uint64_t participant_seed(std::uint64_t seed, int participant) {
  return derive({seed, static_cast<std::uint64_t>(participant)});
}

std::uint64_t agent_seed(std::uint64_t seed, int participant) {
  return derive({seed, static_cast<std::uint64_t>(participant), kAgentStream});
}

void pretrain_agents(const Exp2Config& cfg, std::uint64_t seed, int participant,
                     agent::QTable& q_standard, agent::QTable& q_reactive, agent::Rng& agent_rng) {
  const exec::ProtocolSchedule standard = exec::ProtocolSchedule::standard();
  const exec::ProtocolSchedule reactive = exec::ProtocolSchedule::reactive();
  const TimePoint contact = *env::StopEnv::reset_triggered(cfg.env).contact_time();
  const auto up = static_cast<std::uint64_t>(participant);
  for (int i = 0; i < cfg.pretrain_episodes; ++i) {
    agent::Rng press_rng(derive({seed, up, kPretrainStream, static_cast<std::uint64_t>(i)}));
    const TimePoint press = cfg.scripted.press_time(contact, press_rng);
    const TimeSpan phase = draw_phase(cfg, press_rng);
    run_press_episode(cfg, standard, q_standard, press, phase, agent_rng);
    run_press_episode(cfg, reactive, q_reactive, press, phase, agent_rng);
  }
}

Exp2Result run_experiment2(const Exp2Config& cfg, std::uint64_t seed) {
  cfg.validate();
  Exp2Result out;
  for (int c = 0; c < 3; ++c) out.conditions[c].condition = static_cast<Condition>(c);
  const exec::ProtocolSchedule standard = exec::ProtocolSchedule::standard();
  const exec::ProtocolSchedule reactive = exec::ProtocolSchedule::reactive();
  const TimePoint contact = *env::StopEnv::reset_triggered(cfg.env).contact_time();

  for (int p = 0; p < cfg.participants; ++p) {
    const auto up = static_cast<std::uint64_t>(p);
    agent::QTable q_standard(2, 2, cfg.agent.q_init);
    agent::QTable q_reactive(2, 2, cfg.agent.q_init);
    agent::Rng agent_rng(agent_seed(seed, p));
    pretrain_agents(cfg, seed, p, q_standard, q_reactive, agent_rng);

    const std::vector<Condition> order = condition_order(cfg, participant_seed(seed, p));
    for (std::size_t ep = 0; ep < order.size(); ++ep) {
      agent::Rng press_rng(derive({seed, up, kPressStream, ep}));
      const TimePoint press = cfg.scripted.press_time(contact, press_rng);
      const TimeSpan phase = draw_phase(cfg, press_rng);
      exec::EpisodeResult r;
      switch (order[ep]) {
        case Condition::kControl: r = run_control_episode(cfg, press); break;
        case Condition::kStandard:
          r = run_press_episode(cfg, standard, q_standard, press, phase, agent_rng);
          break;
        case Condition::kReactive:
          r = run_press_episode(cfg, reactive, q_reactive, press, phase, agent_rng);
          break;
      }
      ConditionSummary& sum = out.conditions[static_cast<int>(order[ep])];
      ++sum.episodes;
      if (r.failed_stop) ++sum.failed_stops;
      sum.press_us.push_back(static_cast<double>(press.us()));
      if (r.stop_effective) {
        sum.stop_effective_us.push_back(static_cast<double>(r.stop_effective->us()));
        sum.reaction_us.push_back(static_cast<double>(r.reaction->us()));
      }
      const std::int64_t delay = order[ep] == Condition::kControl ? 0 : cfg.learn_delay.us();
      out.rows.push_back({std::string(condition_name(order[ep])), delay, p, static_cast<int>(ep),
                          r.ret, r.duration.us(), opt_us(r.reaction), r.failed_stop, press.us(),
                          opt_us(r.stop_effective)});
    }
  }
  return out;
}

agent::AgentConfig EquivalenceConfig::default_agent() {
  agent::AgentConfig a;
  a.epsilon = 0.1;
  a.tie_break = agent::TieBreak::kSeededRandom;
  return a;
}

env::HallwayConfig EquivalenceConfig::default_grid() {
  env::HallwayConfig h;
  h.mode = env::HallwayConfig::Mode::kSynchronousGrid;
  return h;
}

void EquivalenceConfig::validate() const {
  if (seeds < 1 || episodes < 1) fail(ErrorCode::kInvalidConfig, "seeds and episodes must be >= 1");
  if (hallway.mode != env::HallwayConfig::Mode::kSynchronousGrid) {
    fail(ErrorCode::kInvalidConfig, "equivalence runs on the synchronous grid hallway");
  }
  agent.validate();
  hallway.validate();
}

namespace {

// The grid has no timing to log; actions and updates are recorded directly.
constexpr exec::RunOptions kLean{.record_log = false, .log_components = false};

std::string describe_mismatch(int seed_index, int episode, const std::string& what) {
  return "seed #" + std::to_string(seed_index) + ", episode " + std::to_string(episode) + ": " +
         what;
}

}  // namespace

EquivalenceReport run_equivalence(const EquivalenceConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  EquivalenceReport rep;
  rep.seeds = cfg.seeds;
  rep.episodes = cfg.episodes;
  const exec::ProtocolSchedule standard = exec::ProtocolSchedule::standard();
  const exec::ProtocolSchedule reactive = exec::ProtocolSchedule::reactive();
  for (int i = 0; i < cfg.seeds; ++i) {
    const std::uint64_t s = derive({seed, static_cast<std::uint64_t>(i)});
    agent::QTable q_std(2, 2, cfg.agent.q_init);
    agent::QTable q_rea(2, 2, cfg.agent.q_init);
    agent::Rng rng_std(s);
    agent::Rng rng_rea(s);
    for (int ep = 0; ep < cfg.episodes; ++ep) {
      env::GridHallway env_std = env::GridHallway::reset(cfg.hallway);
      env::GridHallway env_rea = env::GridHallway::reset(cfg.hallway);
      const auto a = exec::run_episode_synchronous(env_std, q_std, cfg.agent, standard, rng_std, kLean);
      const auto b = exec::run_episode_synchronous(env_rea, q_rea, cfg.agent, reactive, rng_rea, kLean);
      rep.actions_compared += static_cast<std::int64_t>(a.actions.size());
      std::optional<std::string> why;
      if (a.actions != b.actions) {
        why = "action sequences differ";
      } else if (a.updates != b.updates) {
        why = "learning tuples differ";
      } else if (!agent::equal(q_std, q_rea)) {
        why = "Q-tables differ";
      } else if (a.ret != b.ret) {
        why = "returns differ";
      }
      if (why) {
        rep.equal = false;
        rep.first_mismatch = describe_mismatch(i, ep, *why);
        return rep;
      }
    }
  }
  return rep;
}

void HallwayRunConfig::validate() const {
  if (episodes < 1) fail(ErrorCode::kInvalidConfig, "episodes must be at least 1");
  check_name(schedule.name);
  exec::validate_schedule(schedule);
  agent.validate();
  hallway.validate();
}

std::vector<EpisodeRow> run_hallway(const HallwayRunConfig& cfg, agent::QTable& q,
                                    std::uint64_t seed) {
  cfg.validate();
  if (q.num_states() != 2 || q.num_actions() != 2) {
    fail(ErrorCode::kInvalidArgument, "hallway needs a 2x2 Q-table");
  }
  std::vector<EpisodeRow> rows;
  agent::Rng rng(derive({seed, kAgentStream}));
  const exec::DelayModel delays = make_delays(cfg.component, cfg.learn_delay);
  for (int ep = 0; ep < cfg.episodes; ++ep) {
    exec::EpisodeResult r;
    if (cfg.hallway.mode == env::HallwayConfig::Mode::kSynchronousGrid) {
      env::GridHallway env = env::GridHallway::reset(cfg.hallway);
      r = exec::run_episode_synchronous(env, q, cfg.agent, cfg.schedule, rng);
    } else {
      env::ContinuousHallway env = env::ContinuousHallway::reset(cfg.hallway);
      Clock clock = Clock::simulated();
      r = exec::run_episode(env, q, cfg.agent, cfg.schedule, delays, clock, rng);
    }
    rows.push_back({cfg.schedule.name, cfg.learn_delay.us(), 0, ep, r.ret, r.duration.us(),
                    std::nullopt, false, std::nullopt, std::nullopt});
  }
  return rows;
}

std::int64_t demons_equivalent(TimeSpan delay) { return delay.us() * 100 / 333; }

Format format_from_name(std::string_view name) {
  if (name == "csv") return Format::kCsv;
  if (name == "json") return Format::kJson;
  fail(ErrorCode::kInvalidArgument, "unknown format: " + std::string(name));
}

std::vector<EpisodeRow> sorted_rows(std::vector<EpisodeRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const EpisodeRow& a, const EpisodeRow& b) {
    return std::tie(a.schedule, a.delay_us, a.trial, a.episode) <
           std::tie(b.schedule, b.delay_us, b.trial, b.episode);
  });
  return rows;
}

namespace {

constexpr std::string_view kCsvHeader =
    "schedule,delay_us,trial,episode,return,duration_us,reaction_us,failed_stop,press_us,"
    "stop_effective_us";

void put_double(std::string& out, double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

void put_opt(std::string& out, const std::optional<std::int64_t>& v) {
  if (v) out += std::to_string(*v);
}

template <typename T>
T parse_number(std::string_view field, std::string_view what) {
  T value{};
  auto res = std::from_chars(field.data(), field.data() + field.size(), value);
  if (res.ec != std::errc{} || res.ptr != field.data() + field.size()) {
    fail(ErrorCode::kInvalidArgument, "bad " + std::string(what) + " field: '" +
                                          std::string(field) + "'");
  }
  return value;
}

std::optional<std::int64_t> parse_opt(std::string_view field, std::string_view what) {
  if (field.empty()) return std::nullopt;
  return parse_number<std::int64_t>(field, what);
}

nlohmann::json opt_json(const std::optional<std::int64_t>& v) {
  if (!v) return nullptr;
  return *v;
}

std::optional<std::int64_t> opt_from_json(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  if (v.is_null()) return std::nullopt;
  return v.get<std::int64_t>();
}

}  // namespace

std::string rows_to_csv(const std::vector<EpisodeRow>& rows) {
  std::string out(kCsvHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += r.schedule;
    out += ',' + std::to_string(r.delay_us) + ',' + std::to_string(r.trial) + ',' +
           std::to_string(r.episode) + ',';
    put_double(out, r.ret);
    out += ',' + std::to_string(r.duration_us) + ',';
    put_opt(out, r.reaction_us);
    out += r.failed_stop ? ",1," : ",0,";
    put_opt(out, r.press_us);
    out += ',';
    put_opt(out, r.stop_effective_us);
    out += '\n';
  }
  return out;
}

std::vector<EpisodeRow> rows_from_csv(std::string_view csv) {
  std::vector<EpisodeRow> rows;
  std::istringstream in{std::string(csv)};
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    fail(ErrorCode::kInvalidArgument, "CSV header does not match the result schema");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string_view> f;
    std::string_view rest(line);
    for (;;) {
      const auto comma = rest.find(',');
      f.push_back(rest.substr(0, comma));
      if (comma == std::string_view::npos) break;
      rest.remove_prefix(comma + 1);
    }
    if (f.size() != 10) fail(ErrorCode::kInvalidArgument, "CSV row needs 10 fields: " + line);
    EpisodeRow r;
    r.schedule = std::string(f[0]);
    r.delay_us = parse_number<std::int64_t>(f[1], "delay_us");
    r.trial = parse_number<int>(f[2], "trial");
    r.episode = parse_number<int>(f[3], "episode");
    r.ret = parse_number<double>(f[4], "return");
    r.duration_us = parse_number<std::int64_t>(f[5], "duration_us");
    r.reaction_us = parse_opt(f[6], "reaction_us");
    r.failed_stop = parse_number<int>(f[7], "failed_stop") != 0;
    r.press_us = parse_opt(f[8], "press_us");
    r.stop_effective_us = parse_opt(f[9], "stop_effective_us");
    rows.push_back(std::move(r));
  }
  return rows;
}

nlohmann::json rows_to_json(const std::vector<EpisodeRow>& rows) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"schedule", r.schedule},
                   {"delay_us", r.delay_us},
                   {"trial", r.trial},
                   {"episode", r.episode},
                   {"return", r.ret},
                   {"duration_us", r.duration_us},
                   {"reaction_us", opt_json(r.reaction_us)},
                   {"failed_stop", r.failed_stop},
                   {"press_us", opt_json(r.press_us)},
                   {"stop_effective_us", opt_json(r.stop_effective_us)}});
  }
  return {{"v", 1}, {"rows", std::move(arr)}};
}

std::vector<EpisodeRow> rows_from_json(const nlohmann::json& j) {
  try {
    std::vector<EpisodeRow> rows;
    for (const auto& o : j.at("rows")) {
      EpisodeRow r;
      r.schedule = o.at("schedule").get<std::string>();
      r.delay_us = o.at("delay_us").get<std::int64_t>();
      r.trial = o.at("trial").get<int>();
      r.episode = o.at("episode").get<int>();
      r.ret = o.at("return").get<double>();
      r.duration_us = o.at("duration_us").get<std::int64_t>();
      r.reaction_us = opt_from_json(o, "reaction_us");
      r.failed_stop = o.at("failed_stop").get<bool>();
      r.press_us = opt_from_json(o, "press_us");
      r.stop_effective_us = opt_from_json(o, "stop_effective_us");
      rows.push_back(std::move(r));
    }
    return rows;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kInvalidArgument, std::string("malformed result JSON: ") + e.what());
  }
}

void export_results(const std::vector<EpisodeRow>& rows, const std::filesystem::path& path,
                    Format format) {
  const std::vector<EpisodeRow> sorted = sorted_rows(rows);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  if (format == Format::kCsv) {
    out << rows_to_csv(sorted);
  } else {
    out << rows_to_json(sorted).dump(1) << '\n';
  }
  out.flush();
  if (!out) fail(ErrorCode::kIo, "write to " + path.string() + " failed");
}

std::vector<EpisodeRow> load_results(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  if (path.extension() == ".json") {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
      fail(ErrorCode::kInvalidArgument, std::string("cannot parse ") + path.string() + ": " + e.what());
    }
    return rows_from_json(j);
  }
  return rows_from_csv(buf.str());
}

}  // namespace reactrl::experiments
