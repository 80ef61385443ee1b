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


#include <cmath>
#include <random>

#include "../oracles/trace_oracle.hpp"
#include "doctest.h"
#include "reactrl/agent.hpp"
#include "reactrl/error.hpp"

using namespace reactrl;
using agent::AgentConfig;
using agent::QTable;

namespace {

QTable table(std::vector<std::vector<double>> rows) {
  QTable q(static_cast<int>(rows.size()), static_cast<int>(rows[0].size()));
  for (int s = 0; s < q.num_states(); ++s) {
    for (int a = 0; a < q.num_actions(); ++a) q.set_q(s, a, rows[s][a]);
  }
  return q;
}

AgentConfig one_step() {
  AgentConfig c;
  c.lambda = 0.0;
  return c;
}

}  // namespace

TEST_CASE("greedy choice") {
  agent::Rng rng(1);
  AgentConfig c;
  CHECK(agent::choose_action(table({{0.0, -1.0}}), 0, c, rng) == 0);
  CHECK(agent::choose_action(table({{-1.0, 0.0}}), 0, c, rng) == 1);
  CHECK(agent::choose_action(table({{0.0, 0.0}}), 0, c, rng) == 0);
}

TEST_CASE("seeded random tie-break visits every tied action") {
  agent::Rng rng(5);
  AgentConfig c;
  c.tie_break = agent::TieBreak::kSeededRandom;
  const QTable q = table({{1.0, 1.0, 0.0}});
  int counts[3] = {0, 0, 0};
  for (int i = 0; i < 2000; ++i) ++counts[agent::choose_action(q, 0, c, rng)];
  CHECK(counts[0] > 800);
  CHECK(counts[1] > 800);
  CHECK(counts[2] == 0);
}

TEST_CASE("epsilon one is uniform") {
  agent::Rng rng(7);
  AgentConfig c;
  c.epsilon = 1.0;
  const QTable q = table({{0.0, -5.0}});
  int zeros = 0;
  const int n = 100'000;
  for (int i = 0; i < n; ++i) zeros += agent::choose_action(q, 0, c, rng) == 0;
  CHECK(static_cast<double>(zeros) / n == doctest::Approx(0.5).epsilon(0.02));
  CHECK(std::abs(static_cast<double>(zeros) / n - 0.5) <= 0.01);
}

TEST_CASE("identical call sequences consume the generator identically") {
  AgentConfig c;
  c.epsilon = 0.3;
  c.tie_break = agent::TieBreak::kSeededRandom;
  const QTable q = table({{0.0, 0.0}, {1.0, 0.0}});
  agent::Rng a(99);
  agent::Rng b(99);
  for (int i = 0; i < 1000; ++i) REQUIRE(agent::choose_action(q, i % 2, c, a) == agent::choose_action(q, i % 2, c, b));
  CHECK(a() == b());
}

TEST_CASE("adding a constant to a row keeps the greedy action") {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  AgentConfig c;
  for (int i = 0; i < 500; ++i) {
    QTable q = table({{u(gen), u(gen), u(gen)}});
    agent::Rng r1(0);
    const int before = agent::choose_action(q, 0, c, r1);
    const double k = u(gen);
    for (int a = 0; a < 3; ++a) q.set_q(0, a, q.q(0, a) + k);
    agent::Rng r2(0);
    CHECK(agent::choose_action(q, 0, c, r2) == before);
  }
}

TEST_CASE("one-step update examples") {
  QTable q(2, 2);
  agent::td_update(q, 0, 1, -1.0, 1, 0, one_step());
  CHECK(q.q(0, 1) == doctest::Approx(-0.1));
  QTable z(2, 2);
  agent::td_update(z, 0, 0, 0.0, 1, 1, AgentConfig{});
  for (int s = 0; s < 2; ++s) {
    for (int a = 0; a < 2; ++a) CHECK(z.q(s, a) == 0.0);
  }
}

TEST_CASE("lambda zero matches the one-step formula on random inputs") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  for (int i = 0; i < 1000; ++i) {
    AgentConfig c;
    c.lambda = 0.0;
    c.alpha = unit(gen);
    c.gamma = unit(gen);
    QTable q = table({{u(gen), u(gen)}, {u(gen), u(gen)}});
    const double r = u(gen);
    const bool terminal = i % 3 == 0;
    const double expect = q.q(0, 1) + c.alpha * (r + (terminal ? 0.0 : c.gamma * q.q(1, 0)) - q.q(0, 1));
    const QTable before = q;
    agent::td_update(q, 0, 1, r, terminal ? std::nullopt : std::optional<int>(1),
                     terminal ? std::nullopt : std::optional<int>(0), c);
    CHECK(q.q(0, 1) == expect);
    CHECK(q.q(1, 0) == before.q(1, 0));
  }
}

TEST_CASE("two-step episode matches the brute-force trace calculation") {
  AgentConfig c;  // alpha 0.1, gamma 0.9, lambda 0.9
  QTable q(2, 2);
  agent::td_update(q, 0, 0, 0.0, 1, 1, c);
  agent::td_update(q, 1, 1, -1.0, std::nullopt, std::nullopt, c);
  const auto ref = oracle::brute_force({{0, 0}, {0, 0}}, {{0, 0, 0.0, 1, 1}, {1, 1, -1.0, {}, {}}}, {});
  CHECK(q.q(1, 1) == doctest::Approx(-0.1).epsilon(1e-15));
  CHECK(q.q(0, 0) == doctest::Approx(-0.1 * 0.81).epsilon(1e-15));
  for (int s = 0; s < 2; ++s) {
    for (int a = 0; a < 2; ++a) CHECK(std::abs(q.q(s, a) - ref[s][a]) < 1e-15);
  }
}

TEST_CASE("random five-step episodes match the brute-force traces") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  for (int i = 0; i < 200; ++i) {
    oracle::Params p{unit(gen), unit(gen), unit(gen)};
    AgentConfig c;
    c.alpha = p.alpha;
    c.gamma = p.gamma;
    c.lambda = p.lambda;
    oracle::Table init(3, std::vector<double>(2));
    QTable q(3, 2);
    for (int s = 0; s < 3; ++s) {
      for (int a = 0; a < 2; ++a) q.set_q(s, a, init[s][a] = u(gen));
    }
    const auto ep = oracle::random_episode(gen, 3, 2, 5);
    for (const auto& t : ep) agent::td_update(q, t.s, t.a, t.r, t.s2, t.a2, c);
    const auto ref = oracle::brute_force(init, ep, p);
    for (int s = 0; s < 3; ++s) {
      for (int a = 0; a < 2; ++a) CHECK(std::abs(q.q(s, a) - ref[s][a]) <= 1e-12);
    }
  }
}

TEST_CASE("traces are replacing, bounded, and resettable") {
  AgentConfig c;
  QTable q(1, 1);
  for (int i = 0; i < 10; ++i) agent::td_update(q, 0, 0, 1.0, 0, 0, c);
  CHECK(q.e(0, 0) == doctest::Approx(c.gamma * c.lambda));
  q.reset_traces();
  CHECK(q.e(0, 0) == 0.0);
}

TEST_CASE("snapshot and equality") {
  QTable q(2, 2);
  const QTable copy = agent::snapshot(q);
  agent::td_update(q, 0, 0, -1.0, 1, 1, AgentConfig{});
  CHECK(copy == QTable(2, 2));
  CHECK(agent::equal(q, q));
  CHECK_FALSE(agent::equal(q, copy));
}

TEST_CASE("Q-table JSON round trip") {
  QTable q(2, 3, 0.5);
  agent::td_update(q, 1, 2, -1.0, 0, 1, AgentConfig{});
  const auto j = q.to_json();
  CHECK(j.at("states") == 2);
  CHECK(j.at("actions") == 3);
  CHECK(QTable::from_json(j) == q);
  CHECK_THROWS_AS(QTable::from_json(nlohmann::json{{"states", 2}}), Error);
}

TEST_CASE("agent config ranges") {
  auto bad = [](auto mutate) {
    AgentConfig c;
    mutate(c);
    try {
      c.validate();
    } catch (const Error& e) {
      return e.code() == ErrorCode::kInvalidConfig;
    }
    return false;
  };
  CHECK(bad([](AgentConfig& c) { c.alpha = 0.0; }));
  CHECK(bad([](AgentConfig& c) { c.alpha = 1.5; }));
  CHECK(bad([](AgentConfig& c) { c.gamma = -0.1; }));
  CHECK(bad([](AgentConfig& c) { c.lambda = 1.1; }));
  CHECK(bad([](AgentConfig& c) { c.epsilon = 2.0; }));
  CHECK_NOTHROW(AgentConfig{}.validate());
}
