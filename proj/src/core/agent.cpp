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

#include "reactrl/agent.hpp"

#include <cmath>
#include <string>

#include "reactrl/error.hpp"

namespace reactrl::agent {

void AgentConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0)) fail(ErrorCode::kInvalidConfig, "alpha must lie in (0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail(ErrorCode::kInvalidConfig, "gamma must lie in [0, 1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) fail(ErrorCode::kInvalidConfig, "lambda must lie in [0, 1]");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) fail(ErrorCode::kInvalidConfig, "epsilon must lie in [0, 1]");
  if (!std::isfinite(q_init)) fail(ErrorCode::kInvalidConfig, "q_init must be finite");
}

QTable::QTable(int num_states, int num_actions, double q_init)
    : num_states_(num_states), num_actions_(num_actions) {
  if (num_states < 1 || num_actions < 1) {
    fail(ErrorCode::kInvalidArgument, "q-table needs at least one state and one action");
  }
  q_.assign(static_cast<std::size_t>(num_states) * num_actions, q_init);
  e_.assign(q_.size(), 0.0);
}

std::size_t QTable::index(int s, int a) const {
  if (s < 0 || s >= num_states_ || a < 0 || a >= num_actions_) {
    fail(ErrorCode::kInvalidArgument,
         "q-table index (" + std::to_string(s) + ", " + std::to_string(a) + ") out of range");
  }
  return static_cast<std::size_t>(s) * num_actions_ + a;
}

std::span<const double> QTable::q_row(int s) const {
  return {q_.data() + index(s, 0), static_cast<std::size_t>(num_actions_)};
}

void QTable::reset_traces() { std::fill(e_.begin(), e_.end(), 0.0); }

nlohmann::json QTable::to_json() const {
  nlohmann::json q = nlohmann::json::array();
  nlohmann::json e = nlohmann::json::array();
  for (int s = 0; s < num_states_; ++s) {
    nlohmann::json qr = nlohmann::json::array();
    nlohmann::json er = nlohmann::json::array();
    for (int a = 0; a < num_actions_; ++a) {
      qr.push_back(this->q(s, a));
      er.push_back(this->e(s, a));
    }
    q.push_back(std::move(qr));
    e.push_back(std::move(er));
  }
  return {{"states", num_states_}, {"actions", num_actions_}, {"q", q}, {"e", e}};
}

QTable QTable::from_json(const nlohmann::json& j) {
  try {
    QTable t(j.at("states").get<int>(), j.at("actions").get<int>());
    const auto& q = j.at("q");
    const auto& e = j.at("e");
    if (q.size() != static_cast<std::size_t>(t.num_states_) ||
        e.size() != static_cast<std::size_t>(t.num_states_)) {
      fail(ErrorCode::kInvalidConfig, "q-table rows do not match 'states'");
    }
    for (int s = 0; s < t.num_states_; ++s) {
      if (q[s].size() != static_cast<std::size_t>(t.num_actions_) ||
          e[s].size() != static_cast<std::size_t>(t.num_actions_)) {
        fail(ErrorCode::kInvalidConfig, "q-table columns do not match 'actions'");
      }
      for (int a = 0; a < t.num_actions_; ++a) {
        t.q_[t.index(s, a)] = q[s][a].get<double>();
        t.e_[t.index(s, a)] = e[s][a].get<double>();
        if (!std::isfinite(t.q_[t.index(s, a)]) || t.e_[t.index(s, a)] < 0.0) {
          fail(ErrorCode::kInvalidConfig, "q-table entries must be finite with e >= 0");
        }
      }
    }
    return t;
  } catch (const nlohmann::json::exception& ex) {
    fail(ErrorCode::kInvalidConfig, std::string("malformed q-table: ") + ex.what());
  }
}

int choose_action(const QTable& q, int s, const AgentConfig& cfg, Rng& rng) {
  const auto row = q.q_row(s);
  const int n = q.num_actions();
  if (cfg.epsilon > 0.0) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    if (unit(rng) < cfg.epsilon) {
      std::uniform_int_distribution<int> pick(0, n - 1);
      return pick(rng);
    }
  }
  int best = 0;
  int ties = 1;
  for (int a = 1; a < n; ++a) {
    if (row[a] > row[best]) {
      best = a;
      ties = 1;
    } else if (row[a] == row[best]) {
      ++ties;
    }
  }
  if (ties == 1 || cfg.tie_break == TieBreak::kFirstIndex) return best;

  std::uniform_int_distribution<int> pick(0, ties - 1);
  int k = pick(rng);
  for (int a = 0; a < n; ++a) {
    if (row[a] == row[best] && k-- == 0) return a;
  }
  return best;
}

void td_update(QTable& q, int s, int a, double r, std::optional<int> next_state,
               std::optional<int> next_action, const AgentConfig& cfg) {
  double next_value = 0.0;
  if (next_state) {
    if (!next_action) fail(ErrorCode::kInvalidArgument, "non-terminal update needs a next action");
    next_value = q.q(*next_state, *next_action);
  }
  const double delta = r + cfg.gamma * next_value - q.q(s, a);
  q.e_[q.index(s, a)] = 1.0;
  const double decay = cfg.gamma * cfg.lambda;
  for (std::size_t i = 0; i < q.q_.size(); ++i) {
    q.q_[i] += cfg.alpha * delta * q.e_[i];
    q.e_[i] *= decay;
  }
}

}  // namespace reactrl::agent
