// Copyright 2026 The Procforge Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
// https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PROCFORGE_ERROR_H_
#define PROCFORGE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace procforge {

/// Every failure raised by the library carries one of these codes. The REST
/// layer maps each code to exactly one HTTP status (see api_service.h).
enum class ErrorCode {
  // process model
  kSyntaxError,
  kSchemaError,
  kValidationFailed,
  kUnresolvedReference,
  kRecursiveSubWorkflow,
  kAmbiguousBoundary,
  kCyclicModel,
  // enactment
  kMissingExternalInput,
  kIllegalState,
  kConstraintViolation,
  kRoleMismatch,
  kUnknownDecisionLabel,
  // cloud simulator
  kUnknownMachineType,
  kCapacityExceeded,
  kInstanceNotRunning,
  kMixedClouds,
  kClockRegression,
  // provenance store
  kNotFound,
  kHashMismatch,
  kStorageFailure,
  kCorruptLog,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, std::string const& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace procforge

#endif  // PROCFORGE_ERROR_H_
