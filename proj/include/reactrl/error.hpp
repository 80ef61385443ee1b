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

#ifndef REACTRL_ERROR_HPP_
#define REACTRL_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace reactrl {

// Every failure raised by the core carries one of these codes. The C API
// maps them one-to-one onto rrl_status values.
enum class ErrorCode {
  kInvalidArgument = 1,
  kInvalidConfig,
  kInvalidSchedule,
  kCalledOnWallClock,
  kNonMonotoneTimestamp,
  kObservedAfterTerminal,
  kActionAfterTerminal,
  kEmptySample,
  kIo,
  kLiveParticipantDisconnected,
  kNotFound,
  kRuntime,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace reactrl

#endif  // REACTRL_ERROR_HPP_
