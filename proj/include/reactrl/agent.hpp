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

#ifndef REACTRL_AGENT_HPP_
#define REACTRL_AGENT_HPP_

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "json.hpp"

namespace reactrl::agent {

enum class TieBreak { kFirstIndex, kSeededRandom };

struct AgentConfig {
  double alpha = 0.1;
  double gamma = 0.9;
  double lambda = 0.9;
  double epsilon = 0.0;
  TieBreak tie_break = TieBreak::kFirstIndex;
  double q_init = 0.0;

  void validate() const;
};

using Rng = std::mt19937_64;

// Tabular action values with one replacing eligibility trace per entry.
class QTable {
 public:
  QTable(int num_states, int num_actions, double q_init = 0.0);

  int num_states() const { return num_states_; }
  int num_actions() const { return num_actions_; }

  double q(int s, int a) const { return q_[index(s, a)]; }
  double e(int s, int a) const { return e_[index(s, a)]; }
  void set_q(int s, int a, double v) { q_[index(s, a)] = v; }
  std::span<const double> q_row(int s) const;

  void reset_traces();

  // {"states","actions","q":[[..]],"e":[[..]]}
  nlohmann::json to_json() const;
  static QTable from_json(const nlohmann::json& j);

  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  friend void td_update(QTable&, int, int, double, std::optional<int>, std::optional<int>,
                        const AgentConfig&);

  std::size_t index(int s, int a) const;

  int num_states_;
  int num_actions_;
  std::vector<double> q_;
  std::vector<double> e_;
};

// Epsilon-greedy over q[s][.]. Exactly one uniform draw is taken per call
// when epsilon > 0 (plus one more for the exploratory action or a random
// tie-break), so identical call sequences consume the RNG identically.
int choose_action(const QTable& q, int s, const AgentConfig& cfg, Rng& rng);

// SARSA(lambda) with replacing traces:
//   delta = r + gamma * q[s'][a'] - q[s][a]   (q[s'][.] = 0 when s' is terminal)
//   e[s][a] = 1; q += alpha * delta * e; e *= gamma * lambda
// Pass std::nullopt for next_state/next_action when s' is terminal.
void td_update(QTable& q, int s, int a, double r, std::optional<int> next_state,
               std::optional<int> next_action, const AgentConfig& cfg);

inline QTable snapshot(const QTable& q) { return q; }
inline bool equal(const QTable& a, const QTable& b) { return a == b; }

}  // namespace reactrl::agent

#endif  // REACTRL_AGENT_HPP_
