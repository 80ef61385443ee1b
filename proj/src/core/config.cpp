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


#include "reactrl/config.hpp"

#include <fstream>
#include <set>
#include <string>

#include "reactrl/error.hpp"

namespace reactrl::config {

namespace {

using nlohmann::json;

// Walks one JSON object, remembering which keys were read so that anything
// left over can be reported as unknown.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail(ErrorCode::kInvalidConfig, where_ + " must be a JSON object");
  }

  // Rejects keys that were never looked up.
  void done() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) fail(ErrorCode::kInvalidConfig, where_ + ": unknown key '" + k + "'");
    }
  }

  const json* find(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    if (const json* v = find(key)) out = as<T>(*v, key);
  }

  void get_span(const std::string& key, TimeSpan& out) {
    if (const json* v = find(key)) out = span(*v, key);
  }

  TimeSpan span(const json& v, const std::string& key) const {
    const auto us = as<std::int64_t>(v, key);
    if (us < 0) fail(ErrorCode::kInvalidConfig, path(key) + " must be non-negative");
    return TimeSpan::micros(us);
  }

  template <typename T>
  T as(const json& v, const std::string& key) const {
    if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) bad_type(key, "a boolean");
    } else if constexpr (std::is_integral_v<T>) {
      if (!v.is_number_integer()) bad_type(key, "an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) bad_type(key, "a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) bad_type(key, "a string");
    }
    return v.get<T>();
  }

  std::string path(const std::string& key) const { return where_ + "." + key; }

 private:
  [[noreturn]] void bad_type(const std::string& key, const char* what) const {
    fail(ErrorCode::kInvalidConfig, path(key) + " must be " + what);
  }

  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

std::array<TimeSpan, 4> components_from_json(const json& v, Reader& parent) {
  std::array<TimeSpan, 4> out{};
  if (v.is_number_integer()) {
    out.fill(parent.span(v, "component_us"));
    return out;
  }
  Reader r(v, parent.path("component_us"));
  for (int c = 0; c < 4; ++c) {
    r.get_span(std::string(exec::component_name(static_cast<exec::Component>(c))), out[c]);
  }
  r.done();
  return out;
}

std::vector<exec::Component> components_list(const json& v, const std::string& where) {
  if (!v.is_array()) fail(ErrorCode::kInvalidConfig, where + " must be an array of names");
  std::vector<exec::Component> out;
  for (const auto& e : v) {
    if (!e.is_string()) fail(ErrorCode::kInvalidConfig, where + " entries must be strings");
    try {
      out.push_back(exec::component_from_name(e.get<std::string>()));
    } catch (const Error& err) {
      fail(ErrorCode::kInvalidConfig, where + ": " + err.what());
    }
  }
  return out;
}

}  // namespace

json load_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::kInvalidConfig, "cannot read config file " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kInvalidConfig, "config " + path.string() + " is not valid JSON: " + e.what());
  }
}

agent::AgentConfig agent_from_json(const json& j, agent::AgentConfig base) {
  Reader r(j, "agent");
  r.get("alpha", base.alpha);
  r.get("gamma", base.gamma);
  r.get("lambda", base.lambda);
  r.get("epsilon", base.epsilon);
  r.get("q_init", base.q_init);
  std::string tie;
  r.get("tie_break", tie);
  if (tie == "first_index") {
    base.tie_break = agent::TieBreak::kFirstIndex;
  } else if (tie == "seeded_random") {
    base.tie_break = agent::TieBreak::kSeededRandom;
  } else if (!tie.empty()) {
    fail(ErrorCode::kInvalidConfig, "agent.tie_break must be first_index or seeded_random");
  }
  r.done();
  base.validate();
  return base;
}

env::StopEnvConfig stop_env_from_json(const json& j, env::StopEnvConfig base) {
  Reader r(j, "env");
  r.get("omega_mdeg_per_s", base.omega_mdeg_per_s);
  if (const json* v = r.find("theta_egg_mdeg")) {
    if (v->is_null()) {
      base.theta_egg_mdeg.reset();
    } else {
      base.theta_egg_mdeg = r.as<std::int64_t>(*v, "theta_egg_mdeg");
    }
  }
  r.get_span("onset_min_us", base.onset_min);
  r.get_span("onset_max_us", base.onset_max);
  r.get("beta_per_us", base.beta);
  r.get("normal_stop_penalty", base.normal_stop_penalty);
  r.get_span("episode_cap_us", base.episode_cap);
  r.done();
  base.validate();
  return base;
}

env::HallwayConfig hallway_from_json(const json& j, env::HallwayConfig base) {
  Reader r(j, "hallway");
  std::string mode;
  r.get("mode", mode);
  if (mode == "continuous") {
    base.mode = env::HallwayConfig::Mode::kContinuous;
  } else if (mode == "synchronous_grid") {
    base.mode = env::HallwayConfig::Mode::kSynchronousGrid;
  } else if (!mode.empty()) {
    fail(ErrorCode::kInvalidConfig, "hallway.mode must be continuous or synchronous_grid");
  }
  r.get("width", base.width);
  r.get("length", base.length);
  r.get("opening_y", base.opening_y);
  r.get("side_length", base.side_length);
  r.get("start_x", base.start_x);
  r.get("start_y", base.start_y);
  r.get("speed", base.speed);
  r.get("wall_penalty", base.wall_penalty);
  r.get("terminal_rate", base.terminal_rate);
  r.get_span("episode_cap_us", base.episode_cap);
  r.get("grid_length", base.grid_length);
  r.get("grid_opening_row", base.grid_opening_row);
  r.get("grid_side_length", base.grid_side_length);
  r.get("grid_start_row", base.grid_start_row);
  r.get("grid_max_steps", base.grid_max_steps);
  r.done();
  base.validate();
  return base;
}

exec::ProtocolSchedule schedule_from_json(const json& j) {
  if (j.is_string()) {
    try {
      return exec::ProtocolSchedule::named(j.get<std::string>());
    } catch (const Error& e) {
      fail(ErrorCode::kInvalidConfig, e.what());
    }
  }
  Reader r(j, "schedule");
  exec::ProtocolSchedule s;
  r.get("name", s.name);
  if (s.name.empty()) fail(ErrorCode::kInvalidConfig, "a custom schedule needs a name");
  if (const json* v = r.find("preamble")) s.preamble = components_list(*v, r.path("preamble"));
  if (const json* v = r.find("body")) s.body = components_list(*v, r.path("body"));
  r.done();
  if ((s.name == "standard" || s.name == "reactive") && !(s == exec::ProtocolSchedule::named(s.name))) {
    fail(ErrorCode::kInvalidConfig, "schedule name '" + s.name + "' is reserved");
  }
  exec::validate_schedule(s);
  return s;
}

json schedule_to_json(const exec::ProtocolSchedule& s) {
  json pre = json::array();
  json body = json::array();
  for (auto c : s.preamble) pre.push_back(exec::component_name(c));
  for (auto c : s.body) body.push_back(exec::component_name(c));
  return {{"name", s.name}, {"preamble", pre}, {"body", body}};
}

experiments::Exp1Config exp1_from_json(const json& j) {
  experiments::Exp1Config c;
  Reader r(j, "exp1");
  r.get("trials", c.trials);
  r.get("episodes_per_trial", c.episodes_per_trial);
  r.get("tail", c.tail);
  if (const json* v = r.find("delays_us")) {
    if (!v->is_array()) fail(ErrorCode::kInvalidConfig, "exp1.delays_us must be an array");
    c.delays.clear();
    for (const auto& d : *v) c.delays.push_back(r.span(d, "delays_us"));
  }
  if (const json* v = r.find("schedules")) {
    if (!v->is_array()) fail(ErrorCode::kInvalidConfig, "exp1.schedules must be an array");
    c.schedules.clear();
    for (const auto& s : *v) c.schedules.push_back(schedule_from_json(s));
  }
  if (const json* v = r.find("component_us")) c.component = components_from_json(*v, r);
  if (const json* v = r.find("agent")) c.agent = agent_from_json(*v, c.agent);
  if (const json* v = r.find("env")) c.env = stop_env_from_json(*v, c.env);
  r.done();
  c.validate();
  return c;
}

experiments::Exp2Config exp2_from_json(const json& j) {
  experiments::Exp2Config c;
  Reader r(j, "exp2");
  r.get("participants", c.participants);
  r.get("control_episodes", c.control_episodes);
  r.get("learned_episodes", c.learned_episodes);
  r.get("pretrain_episodes", c.pretrain_episodes);
  r.get_span("learn_delay_us", c.learn_delay);
  if (const json* v = r.find("component_us")) c.component = components_from_json(*v, r);
  if (const json* v = r.find("agent")) c.agent = agent_from_json(*v, c.agent);
  if (const json* v = r.find("env")) c.env = stop_env_from_json(*v, c.env);
  if (const json* v = r.find("participant")) {
    Reader p(*v, "exp2.participant");
    std::string kind;
    p.get("kind", kind);
    if (kind == "scripted") {
      c.participant = experiments::ParticipantKind::kScripted;
    } else if (kind == "live") {
      c.participant = experiments::ParticipantKind::kLive;
    } else if (!kind.empty()) {
      fail(ErrorCode::kInvalidConfig, "exp2.participant.kind must be scripted or live");
    }
    p.get_span("margin_us", c.scripted.margin);
    p.get_span("jitter_sigma_us", c.scripted.jitter_sigma);
    p.done();
  }
  r.get("tick_hz", c.tick_hz);
  r.get("host", c.host);
  r.get("port", c.port);
  if (const json* v = r.find("static_dir"); v && !v->is_null()) {
    c.static_dir = r.as<std::string>(*v, "static_dir");
  }
  r.done();
  c.validate();
  return c;
}

experiments::EquivalenceConfig equivalence_from_json(const json& j) {
  experiments::EquivalenceConfig c;
  Reader r(j, "equivalence");
  r.get("seeds", c.seeds);
  r.get("episodes", c.episodes);
  if (const json* v = r.find("agent")) c.agent = agent_from_json(*v, c.agent);
  if (const json* v = r.find("hallway")) c.hallway = hallway_from_json(*v, c.hallway);
  r.done();
  c.validate();
  return c;
}

experiments::HallwayRunConfig hallway_run_from_json(const json& j) {
  experiments::HallwayRunConfig c;
  Reader r(j, "hallway_run");
  r.get("episodes", c.episodes);
  if (const json* v = r.find("schedule")) c.schedule = schedule_from_json(*v);
  if (const json* v = r.find("component_us")) c.component = components_from_json(*v, r);
  r.get_span("learn_delay_us", c.learn_delay);
  if (const json* v = r.find("agent")) c.agent = agent_from_json(*v, c.agent);
  if (const json* v = r.find("hallway")) c.hallway = hallway_from_json(*v, c.hallway);
  r.done();
  c.validate();
  return c;
}

}  // namespace reactrl::config
