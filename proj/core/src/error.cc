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


#include "procforge/error.h"

namespace procforge {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSyntaxError: return "SyntaxError";
    case ErrorCode::kSchemaError: return "SchemaError";
    case ErrorCode::kValidationFailed: return "ValidationFailed";
    case ErrorCode::kUnresolvedReference: return "UnresolvedReference";
    case ErrorCode::kRecursiveSubWorkflow: return "RecursiveSubWorkflow";
    case ErrorCode::kAmbiguousBoundary: return "AmbiguousBoundary";
    case ErrorCode::kCyclicModel: return "CyclicModel";
    case ErrorCode::kMissingExternalInput: return "MissingExternalInput";
    case ErrorCode::kIllegalState: return "IllegalState";
    case ErrorCode::kConstraintViolation: return "ConstraintViolation";
    case ErrorCode::kRoleMismatch: return "RoleMismatch";
    case ErrorCode::kUnknownDecisionLabel: return "UnknownDecisionLabel";
    case ErrorCode::kUnknownMachineType: return "UnknownMachineType";
    case ErrorCode::kCapacityExceeded: return "CapacityExceeded";
    case ErrorCode::kInstanceNotRunning: return "InstanceNotRunning";
    case ErrorCode::kMixedClouds: return "MixedClouds";
    case ErrorCode::kClockRegression: return "ClockRegression";
    case ErrorCode::kNotFound: return "NotFound";
    case ErrorCode::kHashMismatch: return "HashMismatch";
    case ErrorCode::kStorageFailure: return "StorageFailure";
    case ErrorCode::kCorruptLog: return "CorruptLog";
  }
  return "Unknown";
}

}  // namespace procforge
