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


// reactrl: run experiments, the equivalence check, hallway demos, and serve
// live stop trials.

#include <algorithm>
#include <atomic>
#include <csignal>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <pthread.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "reactrl/reactrl.h"

namespace {

using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitRuntime = 2;

struct Failure {
  rrl_status status;
};

int exit_code(rrl_status s) {
  switch (s) {
    case RRL_OK: return kExitOk;
    case RRL_INVALID_ARGUMENT:
    case RRL_INVALID_CONFIG:
    case RRL_INVALID_SCHEDULE:
      return kExitValidation;
    default:
      return kExitRuntime;
  }
}

void check(rrl_status s) {
  if (s == RRL_OK) return;
  std::cerr << "reactrl: " << rrl_status_name(s) << ": " << rrl_last_error() << "\n";
  throw Failure{s};
}

// Owns a string returned by the C API.
struct CString {
  char* p = nullptr;
  ~CString() { rrl_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct Results {
  rrl_results* p = nullptr;
  ~Results() { rrl_results_free(p); }
};

struct Common {
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "csv";
};

json load_config(const Common& c) {
  if (c.config.empty()) return json::object();
  CString text;
  check(rrl_read_config_file(c.config.c_str(), &text.p));
  return json::parse(text.str());
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text)) {
    std::cerr << "reactrl: cannot write " << path << "\n";
    throw Failure{RRL_IO};
  }
}

// Rows go to --out (summary on stdout) or, without --out, to stdout.
void emit(const Results& r, const Common& c) {
  if (c.out.empty()) {
    CString text;
    check(rrl_results_to_string(r.p, c.format.c_str(), &text.p));
    std::fwrite(text.p, 1, std::strlen(text.p), stdout);
    return;
  }
  check(rrl_results_write(r.p, c.out.c_str(), c.format.c_str()));
  CString summary;
  check(rrl_results_summary(r.p, &summary.p));
  std::cout << summary.str() << "\n";
}

void add_common(CLI::App* cmd, Common& c, bool with_output) {
  cmd->add_option("--config", c.config, "JSON config file");
  cmd->add_option("--seed", c.seed, "Seed for every random stream")->capture_default_str();
  if (with_output) {
    cmd->add_option("--out", c.out, "Output file (stdout when omitted)");
    cmd->add_option("--format", c.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
  }
}

void set_if(json& j, const char* key, const std::optional<int>& v) {
  if (v) j[key] = *v;
}

std::atomic<rrl_server*> g_server{nullptr};

int serve(const json& cfg, std::uint64_t seed, const std::optional<std::string>& host,
          const std::optional<int>& port) {
  // Block the stop signals in every thread; a watcher thread turns them into
  // a server stop.
  sigset_t set;
  sigemptyset(&set);
  sigaddset(&set, SIGINT);
  sigaddset(&set, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &set, nullptr);

  rrl_server* srv = nullptr;
  check(rrl_server_create(cfg.dump().c_str(), seed, &srv));
  struct Free {
    rrl_server* s;
    ~Free() { rrl_server_free(s); }
  } guard{srv};
  int bound = 0;
  check(rrl_server_bind(srv, host ? host->c_str() : nullptr, port.value_or(-1), &bound));
  std::cerr << "reactrl: serving on port " << bound << "\n";
  g_server = srv;
  std::thread watcher([&set] {
    int sig = 0;
    sigwait(&set, &sig);
    if (rrl_server* s = g_server.load()) rrl_server_stop(s);
  });
  const rrl_status st = rrl_server_run(srv);
  g_server = nullptr;
  // Wake the watcher if the server stopped on its own.
  pthread_kill(watcher.native_handle(), SIGTERM);
  watcher.join();
  check(st);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Standard vs reactive SARSA in time-functional environments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(rrl_version()));

  Common exp1c;
  std::optional<int> trials, episodes_per_trial;
  auto* exp1 = app.add_subcommand("exp1", "Delay sweep of the stop task (simulated time)");
  add_common(exp1, exp1c, true);
  exp1->add_option("--trials", trials, "Override trials");
  exp1->add_option("--episodes", episodes_per_trial, "Override episodes per trial");

  Common exp2c;
  std::optional<int> participants;
  auto* exp2 = app.add_subcommand("exp2-sim", "Press-to-stop experiment with scripted participants");
  add_common(exp2, exp2c, true);
  exp2->add_option("--participants", participants, "Override participants");

  Common eqc;
  std::optional<int> eq_seeds, eq_episodes;
  auto* eq = app.add_subcommand("equivalence", "Compare the two orderings on the synchronous grid");
  add_common(eq, eqc, false);
  eq->add_option("--seeds", eq_seeds, "Override number of seeds");
  eq->add_option("--episodes", eq_episodes, "Override episodes per seed");

  Common hwc;
  std::string load_q, save_q;
  std::optional<int> hw_episodes;
  auto* hw = app.add_subcommand("hallway", "Train on the hallway");
  add_common(hw, hwc, true);
  hw->add_option("--episodes", hw_episodes, "Override episodes");
  hw->add_option("--load-q", load_q, "Start from a saved Q-table");
  hw->add_option("--save-q", save_q, "Save the trained Q-table");

  Common svc;
  std::optional<std::string> host;
  std::optional<int> port;
  auto* sv = app.add_subcommand("serve", "Serve live stop trials over HTTP");
  add_common(sv, svc, false);
  sv->add_option("--host", host, "Override bind host");
  sv->add_option("--port", port, "Override bind port (0 picks one)")->check(CLI::Range(0, 65535));

  Common exc;
  std::string input;
  auto* ex = app.add_subcommand("export", "Convert an exported result file");
  ex->add_option("--input", input, "CSV or JSON result file")->required();
  ex->add_option("--out", exc.out, "Output file (stdout when omitted)");
  ex->add_option("--format", exc.format, "Output format")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*exp1) {
      json cfg = load_config(exp1c);
      set_if(cfg, "trials", trials);
      set_if(cfg, "episodes_per_trial", episodes_per_trial);
      // A short run keeps the default tail inside the trial.
      if (episodes_per_trial && !cfg.contains("tail")) cfg["tail"] = std::min(10, std::max(1, *episodes_per_trial));
      Results r;
      check(rrl_run_experiment1(cfg.dump().c_str(), exp1c.seed, &r.p));
      emit(r, exp1c);
    } else if (*exp2) {
      json cfg = load_config(exp2c);
      set_if(cfg, "participants", participants);
      Results r;
      check(rrl_run_experiment2(cfg.dump().c_str(), exp2c.seed, &r.p));
      emit(r, exp2c);
    } else if (*eq) {
      json cfg = load_config(eqc);
      set_if(cfg, "seeds", eq_seeds);
      set_if(cfg, "episodes", eq_episodes);
      int equal = 0;
      CString report;
      check(rrl_check_equivalence(cfg.dump().c_str(), eqc.seed, &equal, &report.p));
      std::cout << report.str() << "\n";
      if (!equal) {
        std::cerr << "reactrl: standard and reactive runs differ\n";
        return kExitRuntime;
      }
    } else if (*hw) {
      json cfg = load_config(hwc);
      set_if(cfg, "episodes", hw_episodes);
      std::string q_in;
      if (!load_q.empty()) {
        std::ifstream f(load_q, std::ios::binary);
        if (!f) {
          std::cerr << "reactrl: cannot read " << load_q << "\n";
          return kExitValidation;
        }
        q_in.assign(std::istreambuf_iterator<char>(f), {});
      }
      Results r;
      CString q_out;
      check(rrl_run_hallway(cfg.dump().c_str(), hwc.seed, q_in.empty() ? nullptr : q_in.c_str(),
                            save_q.empty() ? nullptr : &q_out.p, &r.p));
      if (!save_q.empty()) write_text(save_q, q_out.str() + "\n");
      emit(r, hwc);
    } else if (*sv) {
      return serve(load_config(svc), svc.seed, host, port);
    } else if (*ex) {
      Results r;
      check(rrl_results_load(input.c_str(), &r.p));
      emit(r, exc);
    }
  } catch (const Failure& f) {
    return exit_code(f.status);
  } catch (const json::exception& e) {
    std::cerr << "reactrl: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitOk;
}
