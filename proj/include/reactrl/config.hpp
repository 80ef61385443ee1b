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


#ifndef REACTRL_CONFIG_HPP_
#define REACTRL_CONFIG_HPP_

#include <filesystem>

#include "json.hpp"
#include "reactrl/experiments.hpp"

// JSON configuration documents. Times are integer microseconds (keys end in
// _us), angles integer millidegrees (_mdeg). Unknown keys are rejected; every
// key is optional and falls back to the defaults of the C++ structs. The
// schema is described in docs/config.md.
namespace reactrl::config {

// Throws Error(kInvalidConfig) when the file is missing or not valid JSON.
nlohmann::json load_json_file(const std::filesystem::path& path);

agent::AgentConfig agent_from_json(const nlohmann::json& j, agent::AgentConfig base = {});
env::StopEnvConfig stop_env_from_json(const nlohmann::json& j, env::StopEnvConfig base = {});
env::HallwayConfig hallway_from_json(const nlohmann::json& j, env::HallwayConfig base = {});
// A reserved name ("standard", "reactive") or {"name", "preamble", "body"}.
exec::ProtocolSchedule schedule_from_json(const nlohmann::json& j);
nlohmann::json schedule_to_json(const exec::ProtocolSchedule& s);

experiments::Exp1Config exp1_from_json(const nlohmann::json& j);
experiments::Exp2Config exp2_from_json(const nlohmann::json& j);
experiments::EquivalenceConfig equivalence_from_json(const nlohmann::json& j);
experiments::HallwayRunConfig hallway_run_from_json(const nlohmann::json& j);

}  // namespace reactrl::config

#endif  // REACTRL_CONFIG_HPP_
