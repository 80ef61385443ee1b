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


#ifndef REACTRL_EXPERIMENTS_HPP_
#define REACTRL_EXPERIMENTS_HPP_

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "reactrl/agent.hpp"
#include "reactrl/executor.hpp"
#include "reactrl/hallway.hpp"
#include "reactrl/stats.hpp"
#include "reactrl/stop_env.hpp"

namespace reactrl::experiments {

// One exported episode. Absent optionals become empty CSV fields / JSON null.
struct EpisodeRow {
  std::string schedule;  // "standard", "reactive", a custom name, or "control"
  std::int64_t delay_us = 0;
  int trial = 0;  // participant index in the press-to-stop experiment
  int episode = 0;
  double ret = 0.0;
  std::int64_t duration_us = 0;
  std::optional<std::int64_t> reaction_us;
  bool failed_stop = false;
  std::optional<std::int64_t> press_us;
  std::optional<std::int64_t> stop_effective_us;

  friend bool operator==(const EpisodeRow&, const EpisodeRow&) = default;
};

// Default stop-task settings for the delay sweep: -1 per second in Emergency.
env::StopEnvConfig default_sweep_env();

struct Exp1Config {
  int trials = 30;
  int episodes_per_trial = 20;
  int tail = 10;  // last episodes of each trial summed into the tail return
  std::vector<TimeSpan> delays{TimeSpan::millis(0), TimeSpan::millis(50), TimeSpan::millis(100),
                               TimeSpan::millis(250), TimeSpan::millis(500)};
  std::vector<exec::ProtocolSchedule> schedules{exec::ProtocolSchedule::standard(),
                                                exec::ProtocolSchedule::reactive()};
  // Base charge per component, indexed by exec::Component.
  std::array<TimeSpan, 4> component{TimeSpan::micros(1000), TimeSpan::micros(1000),
                                    TimeSpan::micros(1000), TimeSpan::micros(1000)};
  agent::AgentConfig agent;
  env::StopEnvConfig env = default_sweep_env();

  void validate() const;
};

struct Exp1Cell {
  std::string schedule;
  TimeSpan delay;
  // Per trial: sum of the returns of its last `tail` episodes.
  std::vector<double> tail_returns;
  double tail_return_mean = 0.0;
  double tail_return_var = 0.0;
  // Over every episode of every trial; absent when no episode had one.
  std::optional<stats::SummaryStats> reactions;
  // Over the last `tail` episodes only.
  std::optional<stats::SummaryStats> tail_reactions;
};

struct Exp1Result {
  std::vector<Exp1Cell> cells;  // schedules x delays, in config order
  std::vector<EpisodeRow> rows;

  const Exp1Cell& cell(std::string_view schedule, TimeSpan delay) const;
};

// Full factorial sweep in simulated time. The agent's Q-table persists across
// the episodes of a trial and is re-initialised for each trial. Onsets depend
// only on (seed, trial, episode), so every schedule and delay faces the same
// sequence of emergencies.
Exp1Result run_experiment1(const Exp1Config& cfg, std::uint64_t seed);

// Onset seed for one episode of the sweep.
std::uint64_t episode_seed(std::uint64_t seed, int trial, int episode);

enum class ParticipantKind { kScripted, kLive };

// Scripted press: contact time - margin + N(0, jitter_sigma), clamped at 0.
struct ScriptedParticipant {
  TimeSpan margin = TimeSpan::millis(90);
  TimeSpan jitter_sigma = TimeSpan::millis(10);

  TimePoint press_time(TimePoint contact, agent::Rng& rng) const;
};

struct Exp2Config {
  int participants = 1;
  int control_episodes = 10;
  int learned_episodes = 40;  // split evenly between the two schedules
  int pretrain_episodes = 20;  // per agent, before each participant's session
  TimeSpan learn_delay = TimeSpan::millis(50);
  std::array<TimeSpan, 4> component{TimeSpan::micros(1000), TimeSpan::micros(1000),
                                    TimeSpan::micros(1000), TimeSpan::micros(1000)};
  agent::AgentConfig agent;
  env::StopEnvConfig env = default_press_env();
  ParticipantKind participant = ParticipantKind::kScripted;
  ScriptedParticipant scripted;

  // Live sessions.
  int tick_hz = 60;
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::string> static_dir;

  static env::StopEnvConfig default_press_env();
  exec::DelayModel delays() const;
  void validate() const;
};

enum class Condition { kControl, kStandard, kReactive };

std::string_view condition_name(Condition c);
Condition condition_from_name(std::string_view name);

// Control episodes first, then an even split of the two schedules in an
// order shuffled by `seed`.
std::vector<Condition> condition_order(const Exp2Config& cfg, std::uint64_t seed);

struct ConditionSummary {
  Condition condition = Condition::kControl;
  int episodes = 0;
  int failed_stops = 0;
  std::vector<double> press_us;
  std::vector<double> stop_effective_us;
  std::vector<double> reaction_us;  // stop effective minus press, successful stops only
};

struct Exp2Result {
  std::array<ConditionSummary, 3> conditions;  // indexed by Condition
  std::vector<EpisodeRow> rows;

  const ConditionSummary& of(Condition c) const { return conditions[static_cast<int>(c)]; }
};

// Runs one trained agent through one press-to-stop episode in simulated time.
// `press` is when the participant's button goes down (the Emergency onset).
// The agent's loop is free-running with respect to the arm: its first
// component starts `phase` after the arm begins to move. Duration is measured
// from the arm's start.
exec::EpisodeResult run_press_episode(const Exp2Config& cfg, const exec::ProtocolSchedule& sched,
                                      agent::QTable& q, TimePoint press, TimeSpan phase,
                                      agent::Rng& rng);

// Hard-wired control: Stop takes effect at the press itself.
exec::EpisodeResult run_control_episode(const Exp2Config& cfg, TimePoint press);

// Builds the result of a control episode from its finished environment, which
// holds the press (as the onset) and the Stop if one was applied.
exec::EpisodeResult control_result(const env::StopEnv& env, std::optional<TimePoint> press);

// Seed of participant `p`'s session (condition order, presses).
std::uint64_t participant_seed(std::uint64_t seed, int participant);

// Trains both agents on `cfg.pretrain_episodes` scripted presses, exactly as
// run_experiment2 does before participant `p`'s scored episodes.
void pretrain_agents(const Exp2Config& cfg, std::uint64_t seed, int participant,
                     agent::QTable& q_standard, agent::QTable& q_reactive, agent::Rng& agent_rng);

// Agent RNG seed for participant `p`.
std::uint64_t agent_seed(std::uint64_t seed, int participant);

// Scripted-participant experiment. Each participant gets freshly initialised
// agents, pre-trained for `pretrain_episodes` with the same scripted presses.
// Every episode draws its press and a loop phase uniform over one step.
Exp2Result run_experiment2(const Exp2Config& cfg, std::uint64_t seed);

// Standard and reactive orderings on the synchronous grid hallway, compared
// exactly after every episode.
struct EquivalenceConfig {
  int seeds = 20;
  int episodes = 100;
  agent::AgentConfig agent = default_agent();
  env::HallwayConfig hallway = default_grid();

  static agent::AgentConfig default_agent();
  static env::HallwayConfig default_grid();
  void validate() const;
};

struct EquivalenceReport {
  bool equal = true;
  int seeds = 0;
  int episodes = 0;
  std::int64_t actions_compared = 0;
  std::optional<std::string> first_mismatch;
};

EquivalenceReport run_equivalence(const EquivalenceConfig& cfg, std::uint64_t seed);

// Repeated episodes of the continuous hallway with one schedule.
struct HallwayRunConfig {
  int episodes = 20;
  exec::ProtocolSchedule schedule = exec::ProtocolSchedule::reactive();
  std::array<TimeSpan, 4> component{TimeSpan::micros(1000), TimeSpan::micros(1000),
                                    TimeSpan::micros(1000), TimeSpan::micros(1000)};
  TimeSpan learn_delay;
  agent::AgentConfig agent;
  env::HallwayConfig hallway;

  void validate() const;
};

// Trains `q` in place; one row per episode (trial 0).
std::vector<EpisodeRow> run_hallway(const HallwayRunConfig& cfg, agent::QTable& q,
                                    std::uint64_t seed);

// Learn-time budget expressed in prediction learners of 3.33 us each.
std::int64_t demons_equivalent(TimeSpan delay);

enum class Format { kCsv, kJson };

Format format_from_name(std::string_view name);

// Rows sorted by (schedule, delay, trial, episode).
std::vector<EpisodeRow> sorted_rows(std::vector<EpisodeRow> rows);

std::string rows_to_csv(const std::vector<EpisodeRow>& rows);
nlohmann::json rows_to_json(const std::vector<EpisodeRow>& rows);
std::vector<EpisodeRow> rows_from_json(const nlohmann::json& j);
std::vector<EpisodeRow> rows_from_csv(std::string_view csv);

// Writes sorted rows; throws Error(kIo) when the path cannot be written.
void export_results(const std::vector<EpisodeRow>& rows, const std::filesystem::path& path,
                    Format format);
// Reads a file written by export_results (format from the extension: .json
// or anything else as CSV).
std::vector<EpisodeRow> load_results(const std::filesystem::path& path);

}  // namespace reactrl::experiments

#endif  // REACTRL_EXPERIMENTS_HPP_
