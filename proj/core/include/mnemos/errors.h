// Copyright 2026 The Mnemos Authors.
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

#ifndef MNEMOS_ERRORS_H_
#define MNEMOS_ERRORS_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace mnemos {

// Coarse error categories. The command-line tool maps them onto exit codes:
// validation -> 1, contract and transport -> 2.
enum class ErrorKind {
  kValidation,  // malformed input, violated precondition or invariant
  kContract,    // a service answered, but not according to its contract
  kTransport,   // a service could not be reached or timed out
};

std::string_view ErrorKindName(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }

  // Same kind, message prefixed with `context`.
  Error WithContext(std::string_view context) const;

 private:
  ErrorKind kind_;
};

inline Error ValidationError(const std::string& message) {
  return Error(ErrorKind::kValidation, message);
}
inline Error ContractError(const std::string& message) {
  return Error(ErrorKind::kContract, message);
}
inline Error TransportError(const std::string& message) {
  return Error(ErrorKind::kTransport, message);
}

}  // namespace mnemos

#endif  // MNEMOS_ERRORS_H_
