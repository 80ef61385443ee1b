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


#ifndef REACTRL_TRIAL_SERVER_HPP_
#define REACTRL_TRIAL_SERVER_HPP_

#include <cstdint>
#include <memory>
#include <string>

#include "reactrl/experiments.hpp"

namespace reactrl::trial {

// HTTP front end for live stop trials. All routes live under /api/v1:
//
//   POST /sessions                      {"seed"?, "config"?} -> session_start
//   GET  /sessions/{id}/time            -> {"t_us"}
//   POST /sessions/{id}/sync            {"client_send_us","server_us","client_recv_us"}
//   POST /sessions/{id}/episodes/next   -> episode_start
//   POST /sessions/{id}/press           {"v":1,"kind":"press","episode","client_us"}
//   GET  /sessions/{id}/stream          server-sent events, one message per event
//   POST /sessions/{id}/abort
//   GET  /sessions/{id}/summary         -> session_summary (409 until finished)
//   DELETE /sessions/{id}
//
// Closing the stream while an episode runs aborts that episode.
class TrialServer {
 public:
  TrialServer(experiments::Exp2Config defaults, std::uint64_t seed);
  ~TrialServer();

  TrialServer(const TrialServer&) = delete;
  TrialServer& operator=(const TrialServer&) = delete;

  // Binds host:port (port 0 picks a free one) and returns the bound port.
  // Throws Error(kIo).
  int bind(const std::string& host, int port);
  // Serves until stop(). Requires bind().
  void run();
  void stop();
  int port() const;
  std::size_t session_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace reactrl::trial

#endif  // REACTRL_TRIAL_SERVER_HPP_
