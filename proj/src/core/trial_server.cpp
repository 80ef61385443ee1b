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


#include "reactrl/trial_server.hpp"

#include <atomic>
#include <map>
#include <mutex>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "reactrl/config.hpp"
#include "reactrl/error.hpp"
#include "reactrl/trial_service.hpp"

namespace reactrl::trial {

using nlohmann::json;

namespace {

constexpr const char* kJson = "application/json";

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kInvalidConfig:
    case ErrorCode::kInvalidSchedule:
      return 400;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kRuntime:
      return 409;
    default:
      return 500;
  }
}

void reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), kJson);
}

void reply_error(httplib::Response& res, ErrorCode code, const std::string& what) {
  reply(res, http_status(code),
        {{"v", kProtocolVersion}, {"error", error_code_name(code)}, {"message", what}});
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) fail(ErrorCode::kInvalidArgument, "body is not a JSON object");
  return j;
}

std::int64_t int_field(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || !it->is_number_integer()) {
    fail(ErrorCode::kInvalidArgument, std::string("missing integer field '") + key + "'");
  }
  return it->get<std::int64_t>();
}

}  // namespace

struct TrialServer::Impl {
  Impl(experiments::Exp2Config d, std::uint64_t s) : defaults(std::move(d)), seed(s) {}

  experiments::Exp2Config defaults;
  std::uint64_t seed;
  httplib::Server svr;
  int bound_port = -1;
  std::mutex run_mu;  // orders run() against stop()
  std::atomic<bool> stopping{false};
  std::atomic<bool> in_run{false};

  mutable std::mutex mu;
  std::map<std::string, std::shared_ptr<TrialSession>> sessions;
  std::uint64_t next_id = 1;

  std::shared_ptr<TrialSession> find(const std::string& id) const {
    std::lock_guard lock(mu);
    auto it = sessions.find(id);
    if (it == sessions.end()) fail(ErrorCode::kNotFound, "no session '" + id + "'");
    return it->second;
  }

  // Runs `fn` and turns library errors into JSON error replies.
  template <typename Fn>
  void guarded(httplib::Response& res, Fn&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      reply_error(res, e.code(), e.what());
    } catch (const std::exception& e) {
      reply_error(res, ErrorCode::kRuntime, e.what());
    }
  }

  void routes();
  void stream(const std::shared_ptr<TrialSession>& s, httplib::Response& res);
};

void TrialServer::Impl::routes() {
  const std::string base = "/api/v1/sessions";
  const std::string id = R"(/([A-Za-z0-9_-]+))";

  svr.Post(base, [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      const json body = parse_body(req);
      experiments::Exp2Config cfg = defaults;
      if (auto it = body.find("config"); it != body.end()) cfg = config::exp2_from_json(*it);
      std::uint64_t s = seed;
      if (auto it = body.find("seed"); it != body.end()) {
        if (!it->is_number_unsigned()) fail(ErrorCode::kInvalidArgument, "seed must be a non-negative integer");
        s = it->get<std::uint64_t>();
      }
      std::string sid;
      {
        std::lock_guard lock(mu);
        sid = "s" + std::to_string(next_id++);
      }
      auto session = std::make_shared<TrialSession>(sid, std::move(cfg), s);
      json msg = session->session_start_message();
      {
        std::lock_guard lock(mu);
        sessions.emplace(sid, std::move(session));
      }
      reply(res, 201, msg);
    });
  });

  svr.Get(base + id + "/time", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto s = find(req.matches[1]);
      reply(res, 200, {{"v", kProtocolVersion}, {"t_us", s->now_us()}});
    });
  });

  svr.Post(base + id + "/sync", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto s = find(req.matches[1]);
      const json body = parse_body(req);
      s->record_sync(int_field(body, "client_send_us"), int_field(body, "server_us"),
                     int_field(body, "client_recv_us"));
      const ClockSync c = *s->clock_sync();
      reply(res, 200, {{"v", kProtocolVersion}, {"offset_us", c.offset_us}, {"bound_us", c.bound_us}});
    });
  });

  svr.Post(base + id + "/episodes/next", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { reply(res, 200, find(req.matches[1])->begin_episode()); });
  });

  svr.Post(base + id + "/press", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      auto s = find(req.matches[1]);
      const json body = parse_body(req);
      if (auto it = body.find("kind"); it != body.end() && *it != "press") {
        fail(ErrorCode::kInvalidArgument, "expected a press message");
      }
      if (auto it = body.find("v"); it != body.end() && *it != kProtocolVersion) {
        fail(ErrorCode::kInvalidArgument, "unsupported protocol version");
      }
      const PressOutcome o = s->handle_press(static_cast<int>(int_field(body, "episode")),
                                             int_field(body, "client_us"));
      json out = {{"v", kProtocolVersion}, {"outcome", press_outcome_name(o)}};
      if (o != PressOutcome::kAccepted) out["warning"] = "press ignored";
      reply(res, 200, out);
    });
  });

  svr.Post(base + id + "/abort", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      find(req.matches[1])->abort_episode();
      reply(res, 200, {{"v", kProtocolVersion}});
    });
  });

  svr.Get(base + id + "/summary", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { reply(res, 200, find(req.matches[1])->summary_message()); });
  });

  svr.Delete(base + id, [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] {
      std::shared_ptr<TrialSession> s = find(req.matches[1]);
      {
        std::lock_guard lock(mu);
        sessions.erase(s->id());
      }
      s->abort_episode();
      reply(res, 200, {{"v", kProtocolVersion}});
    });
  });

  svr.Get(base + id + "/stream", [this](const httplib::Request& req, httplib::Response& res) {
    guarded(res, [&] { stream(find(req.matches[1]), res); });
  });
}

void TrialServer::Impl::stream(const std::shared_ptr<TrialSession>& s, httplib::Response& res) {
  res.set_header("Cache-Control", "no-cache");
  const auto period = std::chrono::microseconds(1'000'000 / s->config().tick_hz);
  res.set_chunked_content_provider(
      "text/event-stream",
      [this, s, period](std::size_t, httplib::DataSink& sink) {
        auto send = [&](const json& m) {
          const std::string frame = "data: " + m.dump() + "\n\n";
          return sink.write(frame.data(), frame.size());
        };
        if (!send(s->session_start_message())) return false;
        auto next = std::chrono::steady_clock::now();
        while (!stopping) {
          bool summary_sent = false;
          for (const json& m : s->poll()) {
            if (!send(m)) {
              s->abort_episode();
              return false;
            }
            summary_sent = summary_sent || m["kind"] == "session_summary";
          }
          if (summary_sent) break;
          if (!sink.is_writable()) {
            s->abort_episode();
            return false;
          }
          next += period;
          std::this_thread::sleep_until(next);
        }
        sink.done();
        return true;
      },
      [s](bool success) {
        if (!success) s->abort_episode();
      });
}

TrialServer::TrialServer(experiments::Exp2Config defaults, std::uint64_t seed)
    : impl_(std::make_unique<Impl>(std::move(defaults), seed)) {
  impl_->defaults.validate();
  impl_->routes();
  if (impl_->defaults.static_dir && !impl_->svr.set_mount_point("/", *impl_->defaults.static_dir)) {
    fail(ErrorCode::kInvalidConfig, "static_dir does not exist: " + *impl_->defaults.static_dir);
  }
}

TrialServer::~TrialServer() {
  stop();
  std::lock_guard lock(impl_->mu);
  impl_->sessions.clear();
}

int TrialServer::bind(const std::string& host, int port) {
  int p = port == 0 ? impl_->svr.bind_to_any_port(host) : (impl_->svr.bind_to_port(host, port) ? port : -1);
  if (p < 0) fail(ErrorCode::kIo, "cannot bind " + host + ":" + std::to_string(port));
  impl_->bound_port = p;
  return p;
}

void TrialServer::run() {
  if (impl_->bound_port < 0) fail(ErrorCode::kRuntime, "server is not bound");
  {
    std::lock_guard lock(impl_->run_mu);
    if (impl_->stopping) return;
    impl_->in_run = true;
  }
  const bool ok = impl_->svr.listen_after_bind();
  impl_->in_run = false;
  if (!ok && !impl_->stopping) fail(ErrorCode::kIo, "server stopped unexpectedly");
}

void TrialServer::stop() {
  {
    std::lock_guard lock(impl_->run_mu);
    impl_->stopping = true;
  }
  // httplib ignores stop() until the accept loop is up, so retry until run()
  // has either started listening or returned.
  while (impl_->in_run) {
    if (impl_->svr.is_running()) {
      impl_->svr.stop();
      break;
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(1));
  }
}

int TrialServer::port() const { return impl_->bound_port; }

std::size_t TrialServer::session_count() const {
  std::lock_guard lock(impl_->mu);
  return impl_->sessions.size();
}

}  // namespace reactrl::trial
