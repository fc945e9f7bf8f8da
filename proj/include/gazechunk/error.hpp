// Copyright (c) 2026, The gazechunk Authors. All rights reserved.
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

#ifndef GAZECHUNK_ERROR_HPP
#define GAZECHUNK_ERROR_HPP

#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>

namespace gazechunk {

enum class ErrorKind {
  kStructural,        // shapes or layouts disagree
  kConfiguration,     // invalid options or specs
  kDomain,            // argument outside the mathematical domain
  kInsufficientData,  // not enough samples for the requested statistic
  kDivergence,        // training produced a non-finite loss
  kFormat,            // malformed file contents
  kIo,                // filesystem failures
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string format_loss(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

/// Raised when a training loop hits a non-finite loss. Carries the epoch at
/// which it happened and the last finite loss value seen.
class DivergenceError : public Error {
 public:
  DivergenceError(int epoch, double last_finite_loss)
      : Error(ErrorKind::kDivergence,
              "training diverged at epoch " + std::to_string(epoch) +
                  " (last finite loss " + format_loss(last_finite_loss) + ")"),
        epoch_(epoch),
        last_finite_loss_(last_finite_loss) {}

  int epoch() const noexcept { return epoch_; }
  double last_finite_loss() const noexcept { return last_finite_loss_; }

 private:
  int epoch_;
  double last_finite_loss_;
};

/// DivergenceError that also hands back the last parameters whose loss was
/// finite, so callers can inspect or resume from them.
template <class State>
class DivergedWithState : public DivergenceError {
 public:
  DivergedWithState(int epoch, double last_finite_loss, State state)
      : DivergenceError(epoch, last_finite_loss), state_(std::move(state)) {}

  const State& last_finite_state() const noexcept { return state_; }

 private:
  State state_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace gazechunk

#endif  // GAZECHUNK_ERROR_HPP
