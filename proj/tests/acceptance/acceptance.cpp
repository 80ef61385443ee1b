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


// Acceptance report: one PASS/FAIL line per criterion, then a few
// informational lines. Exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "../oracles/hallway_check.hpp"
#include "../oracles/trace_oracle.hpp"
#include "reactrl/agent.hpp"
#include "reactrl/experiments.hpp"
#include "reactrl/stats.hpp"
#include "reactrl/stop_env.hpp"

using namespace reactrl;
using namespace reactrl::experiments;

namespace {

int failures = 0;

void report(bool ok, const std::string& name, const std::string& detail) {
  if (!ok) ++failures;
  std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
}

void info(const std::string& line) { std::printf("INFO %s\n", line.c_str()); }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

void equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  EquivalenceConfig c;
  c.seeds = 20;
  c.episodes = 100;
  const auto r = run_equivalence(c, 0);
  const double s = seconds_since(t0);
  report(r.equal && s < 5.0, "synchronous-equivalence",
         fmt("%d seeds x %d episodes, %lld actions compared, %s, %.2f s (limit 5 s)", r.seeds, r.episodes,
             static_cast<long long>(r.actions_compared), r.equal ? "identical" : r.first_mismatch->c_str(), s));
}

// Medians a policy that stops at the first Emergency observation would reach
// on the same onsets, from the closed forms. Separates onset sampling from
// learning effects.
std::string ideal_medians(const Exp1Config& c, TimeSpan d) {
  const std::int64_t tc = c.component[0].us();
  const std::int64_t step = 4 * tc + d.us();
  std::vector<double> std_r;
  std::vector<double> rea_r;
  for (int trial = 0; trial < c.trials; ++trial) {
    for (int ep = 0; ep < c.episodes_per_trial; ++ep) {
      const std::int64_t o = env::StopEnv::reset(c.env, episode_seed(0, trial, ep)).onset()->us();
      const std::int64_t k = std::max<std::int64_t>(0, (o - 2 * tc + step - 1) / step);
      const std::int64_t wait = 2 * tc + k * step - o;
      rea_r.push_back(static_cast<double>(wait + 2 * tc));
      std_r.push_back(static_cast<double>(wait + 3 * tc + d.us()));
    }
  }
  return fmt("d=%g ms ideal-policy medians on the same onsets: standard %.2f ms, reactive %.2f ms",
             static_cast<double>(d.us()) / 1000.0, stats::summarize(std_r).median / 1000.0,
             stats::summarize(rea_r).median / 1000.0);
}

void sweep() {
  const auto t0 = std::chrono::steady_clock::now();
  Exp1Config c;
  const auto r = run_experiment1(c, 0);
  const double s = seconds_since(t0);
  const double tc = 1.0;  // ms
  bool fig4 = true;
  std::string fig4_detail;
  for (const TimeSpan d : c.delays) {
    const double dms = static_cast<double>(d.us()) / 1000.0;
    const auto& st = r.cell("standard", d);
    const auto& re = r.cell("reactive", d);
    const double ms = st.reactions->median / 1000.0;
    const double mr = re.reactions->median / 1000.0;
    const double gap = ms - mr;
    report(std::abs(gap - (dms + tc)) <= 2 * tc && s < 30.0, fmt("reaction-gap d=%g ms", dms),
           fmt("median standard %.2f ms - reactive %.2f ms = %.2f ms, expected %.2f +/- %.2f ms; sweep %.2f s (limit 30 s)",
               ms, mr, gap, dms + tc, 2 * tc, s));
    const double half = (4 * tc + dms) / 2 + 2 * tc;
    report(std::abs(mr - half) <= 2 * tc, fmt("half-delay d=%g ms", dms),
           fmt("median reactive %.2f ms, expected %.2f +/- %.2f ms", mr, half, 2 * tc));
    if (st.tail_reactions && re.tail_reactions) {
      info(fmt("d=%g ms last-%d-episode medians: standard %.2f ms, reactive %.2f ms, gap %.2f ms", dms, c.tail,
               st.tail_reactions->median / 1000.0, re.tail_reactions->median / 1000.0,
               (st.tail_reactions->median - re.tail_reactions->median) / 1000.0));
    }
    info(ideal_medians(c, d));
    if (d.us() > 0) {
      const bool ok = st.tail_return_mean < re.tail_return_mean && st.tail_return_var >= re.tail_return_var;
      fig4 = fig4 && ok;
      fig4_detail += fmt("d=%g: mean %.4g < %.4g, var %.3g >= %.3g%s; ", dms, st.tail_return_mean, re.tail_return_mean,
                         st.tail_return_var, re.tail_return_var, ok ? "" : " (violated)");
    }
  }
  report(fig4, "return-ordering", fig4_detail + fmt("%d trials at seed 0", c.trials));
}

void press_to_stop() {
  const auto t0 = std::chrono::steady_clock::now();
  Exp2Config c;
  c.participants = 4;
  c.control_episodes = 20;
  c.learned_episodes = 40;
  c.learn_delay = TimeSpan::millis(50);
  c.scripted.margin = TimeSpan::millis(90);
  c.scripted.jitter_sigma = TimeSpan::millis(10);
  c.env.omega_mdeg_per_s = 45'000;
  const auto r = run_experiment2(c, 0);
  const double s = seconds_since(t0);
  const auto& ctl = r.of(Condition::kControl);
  const auto& st = r.of(Condition::kStandard);
  const auto& re = r.of(Condition::kReactive);
  const bool ok = st.failed_stops >= 4 * re.failed_stops && re.failed_stops <= ctl.failed_stops + 2 && s < 30.0;
  report(ok, "failed-stop-ordering",
         fmt("failed stops control %d/%d, standard %d/%d, reactive %d/%d; need standard >= 4 x reactive and "
             "reactive <= control + 2; %.2f s (limit 30 s)",
             ctl.failed_stops, ctl.episodes, st.failed_stops, st.episodes, re.failed_stops, re.episodes, s));
}

void hallway_oracle() {
  std::mt19937_64 rng(7);
  env::HallwayConfig c;
  int bad = 0;
  std::string first;
  for (int i = 0; i < 1000; ++i) {
    const std::string diff = oracle::compare_script(c, oracle::random_script(rng, 12, 12'000));
    if (!diff.empty() && bad++ == 0) first = diff;
  }
  report(bad == 0, "hallway-integrator", bad == 0 ? "1000 random scripts within one 1 ms step"
                                                  : fmt("%d of 1000 scripts differ; first: %s", bad, first.c_str()));
}

void sarsa_oracle() {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> unit(0.05, 1.0);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    oracle::Params p{unit(gen), unit(gen), unit(gen)};
    agent::AgentConfig c;
    c.alpha = p.alpha;
    c.gamma = p.gamma;
    c.lambda = p.lambda;
    oracle::Table init(3, std::vector<double>(2));
    agent::QTable q(3, 2);
    for (int s = 0; s < 3; ++s) {
      for (int a = 0; a < 2; ++a) q.set_q(s, a, init[s][a] = u(gen));
    }
    const auto ep = oracle::random_episode(gen, 3, 2, 5);
    for (const auto& t : ep) agent::td_update(q, t.s, t.a, t.r, t.s2, t.a2, c);
    const auto ref = oracle::brute_force(init, ep, p);
    for (int s = 0; s < 3; ++s) {
      for (int a = 0; a < 2; ++a) worst = std::max(worst, std::abs(q.q(s, a) - ref[s][a]));
    }
  }
  report(worst <= 1e-12, "sarsa-trace-oracle", fmt("1000 five-step episodes, max |dq| = %.3g (limit 1e-12)", worst));
}

void demons() {
  const auto a = demons_equivalent(TimeSpan::millis(50));
  const auto b = demons_equivalent(TimeSpan::millis(500));
  report(a == 15015 && b == 150150, "demons-equivalent",
         fmt("50 ms -> %lld, 500 ms -> %lld (rounded figures 15000 / 150000)", static_cast<long long>(a),
             static_cast<long long>(b)));
}

}  // namespace

int main() {
  equivalence();
  sweep();
  press_to_stop();
  hallway_oracle();
  sarsa_oracle();
  demons();
  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
