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


#include "reactrl/reactrl.h"

#include <cstdlib>
#include <cstring>
#include <map>
#include <string>
#include <tuple>

#include "json.hpp"
#include "reactrl/config.hpp"
#include "reactrl/error.hpp"
#include "reactrl/experiments.hpp"
#include "reactrl/stats.hpp"
#include "reactrl/trial_server.hpp"

using nlohmann::json;
using namespace reactrl;

struct rrl_results {
  std::vector<experiments::EpisodeRow> rows;
  json summary;
};

struct rrl_server {
  std::unique_ptr<trial::TrialServer> server;
  std::string host;
  int port = 0;
};

namespace {

thread_local std::string g_last_error;

rrl_status to_status(ErrorCode c) { return static_cast<rrl_status>(static_cast<int>(c)); }

template <typename Fn>
rrl_status guarded(Fn&& fn) {
  g_last_error.clear();
  try {
    fn();
    return RRL_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return RRL_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return RRL_INTERNAL;
  }
}

void require(const void* p, const char* what) {
  if (p == nullptr) fail(ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

json parse_config(const char* text) {
  if (text == nullptr || *text == '\0') return json::object();
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded()) fail(ErrorCode::kInvalidConfig, "config is not valid JSON");
  return j;
}

char* dup(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out == nullptr) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json stats_or_null(const std::vector<double>& v) {
  if (v.empty()) return nullptr;
  return stats::to_json(stats::summarize(v));
}

json opt_stats(const std::optional<stats::SummaryStats>& s) {
  return s ? stats::to_json(*s) : json(nullptr);
}

// Per (schedule, delay) aggregate of any row set.
json rows_summary(const std::vector<experiments::EpisodeRow>& rows) {
  struct Acc {
    std::vector<double> returns;
    std::vector<double> reactions;
    int failed = 0;
  };
  std::map<std::tuple<std::string, std::int64_t>, Acc> groups;
  for (const auto& r : rows) {
    Acc& a = groups[{r.schedule, r.delay_us}];
    a.returns.push_back(r.ret);
    if (r.reaction_us) a.reactions.push_back(static_cast<double>(*r.reaction_us));
    if (r.failed_stop) ++a.failed;
  }
  json out = json::array();
  for (const auto& [key, a] : groups) {
    out.push_back({{"schedule", std::get<0>(key)},
                   {"delay_us", std::get<1>(key)},
                   {"episodes", a.returns.size()},
                   {"failed_stops", a.failed},
                   {"return", stats_or_null(a.returns)},
                   {"reaction_us", stats_or_null(a.reactions)}});
  }
  return {{"kind", "rows"}, {"groups", out}};
}

json exp1_summary(const experiments::Exp1Result& r) {
  json cells = json::array();
  for (const auto& c : r.cells) {
    cells.push_back({{"schedule", c.schedule},
                     {"delay_us", c.delay.us()},
                     {"tail_returns", c.tail_returns},
                     {"tail_return_mean", c.tail_return_mean},
                     {"tail_return_var", c.tail_return_var},
                     {"reaction_us", opt_stats(c.reactions)},
                     {"tail_reaction_us", opt_stats(c.tail_reactions)}});
  }
  return {{"kind", "exp1"}, {"cells", cells}};
}

json exp2_summary(const experiments::Exp2Result& r) {
  json conds = json::object();
  for (const auto& c : r.conditions) {
    conds[std::string(experiments::condition_name(c.condition))] = {
        {"episodes", c.episodes},
        {"failed_stops", c.failed_stops},
        {"press_us", stats_or_null(c.press_us)},
        {"stop_effective_us", stats_or_null(c.stop_effective_us)},
        {"reaction_us", stats_or_null(c.reaction_us)}};
  }
  return {{"kind", "exp2"}, {"conditions", conds}};
}

}  // namespace

extern "C" {

const char* rrl_version(void) { return "0.1.0"; }

const char* rrl_status_name(rrl_status status) {
  if (status == RRL_OK) return "ok";
  if (status == RRL_INTERNAL) return "internal";
  if (status >= RRL_INVALID_ARGUMENT && status <= RRL_RUNTIME) {
    return error_code_name(static_cast<ErrorCode>(status));
  }
  return "unknown";
}

const char* rrl_last_error(void) { return g_last_error.c_str(); }

void rrl_string_free(char* s) { std::free(s); }

rrl_status rrl_read_config_file(const char* path, char** out_json) {
  return guarded([&] {
    require(path, "path");
    require(out_json, "out_json");
    *out_json = dup(config::load_json_file(path).dump());
  });
}

rrl_status rrl_run_experiment1(const char* config_json, uint64_t seed, rrl_results** out) {
  return guarded([&] {
    require(out, "out");
    const auto cfg = config::exp1_from_json(parse_config(config_json));
    auto res = experiments::run_experiment1(cfg, seed);
    auto r = std::make_unique<rrl_results>();
    r->summary = exp1_summary(res);
    r->rows = std::move(res.rows);
    *out = r.release();
  });
}

rrl_status rrl_run_experiment2(const char* config_json, uint64_t seed, rrl_results** out) {
  return guarded([&] {
    require(out, "out");
    const auto cfg = config::exp2_from_json(parse_config(config_json));
    auto res = experiments::run_experiment2(cfg, seed);
    auto r = std::make_unique<rrl_results>();
    r->summary = exp2_summary(res);
    r->rows = std::move(res.rows);
    *out = r.release();
  });
}

rrl_status rrl_run_hallway(const char* config_json, uint64_t seed, const char* q_in_json,
                           char** q_out_json, rrl_results** out) {
  return guarded([&] {
    require(out, "out");
    const auto cfg = config::hallway_run_from_json(parse_config(config_json));
    agent::QTable q(2, 2, cfg.agent.q_init);
    if (q_in_json != nullptr && *q_in_json != '\0') {
      json j = json::parse(q_in_json, nullptr, false);
      if (j.is_discarded()) fail(ErrorCode::kInvalidArgument, "Q-table is not valid JSON");
      q = agent::QTable::from_json(j);
    }
    auto r = std::make_unique<rrl_results>();
    r->rows = experiments::run_hallway(cfg, q, seed);
    r->summary = rows_summary(r->rows);
    r->summary["kind"] = "hallway";
    if (q_out_json != nullptr) *q_out_json = dup(q.to_json().dump());
    *out = r.release();
  });
}

rrl_status rrl_check_equivalence(const char* config_json, uint64_t seed, int* equal,
                                 char** report_json) {
  return guarded([&] {
    require(equal, "equal");
    const auto cfg = config::equivalence_from_json(parse_config(config_json));
    const auto rep = experiments::run_equivalence(cfg, seed);
    *equal = rep.equal ? 1 : 0;
    if (report_json != nullptr) {
      json j = {{"equal", rep.equal},
                {"seeds", rep.seeds},
                {"episodes", rep.episodes},
                {"actions_compared", rep.actions_compared},
                {"first_mismatch", rep.first_mismatch ? json(*rep.first_mismatch) : json(nullptr)}};
      *report_json = dup(j.dump());
    }
  });
}

rrl_status rrl_results_write(const rrl_results* r, const char* path, const char* format) {
  return guarded([&] {
    require(r, "results");
    require(path, "path");
    require(format, "format");
    experiments::export_results(r->rows, path, experiments::format_from_name(format));
  });
}

rrl_status rrl_results_to_string(const rrl_results* r, const char* format, char** out) {
  return guarded([&] {
    require(r, "results");
    require(format, "format");
    require(out, "out");
    const auto rows = experiments::sorted_rows(r->rows);
    if (experiments::format_from_name(format) == experiments::Format::kCsv) {
      *out = dup(experiments::rows_to_csv(rows));
    } else {
      *out = dup(experiments::rows_to_json(rows).dump(2) + "\n");
    }
  });
}

rrl_status rrl_results_load(const char* path, rrl_results** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto r = std::make_unique<rrl_results>();
    r->rows = experiments::load_results(path);
    r->summary = rows_summary(r->rows);
    *out = r.release();
  });
}

rrl_status rrl_results_summary(const rrl_results* r, char** out_json) {
  return guarded([&] {
    require(r, "results");
    require(out_json, "out_json");
    *out_json = dup(r->summary.dump(2));
  });
}

size_t rrl_results_row_count(const rrl_results* r) { return r == nullptr ? 0 : r->rows.size(); }

void rrl_results_free(rrl_results* r) { delete r; }

int64_t rrl_demons_equivalent(int64_t delay_us) {
  return experiments::demons_equivalent(TimeSpan::micros(delay_us));
}

rrl_status rrl_server_create(const char* config_json, uint64_t seed, rrl_server** out) {
  return guarded([&] {
    require(out, "out");
    const auto cfg = config::exp2_from_json(parse_config(config_json));
    auto s = std::make_unique<rrl_server>();
    s->host = cfg.host;
    s->port = cfg.port;
    s->server = std::make_unique<trial::TrialServer>(cfg, seed);
    *out = s.release();
  });
}

rrl_status rrl_server_bind(rrl_server* s, const char* host, int port, int* bound_port) {
  return guarded([&] {
    require(s, "server");
    const int p = s->server->bind(host != nullptr ? std::string(host) : s->host, port >= 0 ? port : s->port);
    if (bound_port != nullptr) *bound_port = p;
  });
}

rrl_status rrl_server_run(rrl_server* s) {
  return guarded([&] {
    require(s, "server");
    s->server->run();
  });
}

rrl_status rrl_server_stop(rrl_server* s) {
  return guarded([&] {
    require(s, "server");
    s->server->stop();
  });
}

void rrl_server_free(rrl_server* s) { delete s; }

}  // extern "C"
