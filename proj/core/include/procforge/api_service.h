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


#ifndef PROCFORGE_API_SERVICE_H_
#define PROCFORGE_API_SERVICE_H_

#include <nlohmann/json.hpp>

#include <memory>
#include <mutex>
#include <string>
#include <string_view>

#include "procforge/error.h"
#include "procforge/runtime.h"
#include "procforge/server_config.h"

namespace procforge {

struct ApiResponse {
  int status = 200;
  /// Canonical JSON: sorted keys, no insignificant whitespace.
  std::string body;
};

struct ApiError {
  int http_status = 500;
  std::string code;
  std::string message;
};

/// HTTP status for each library error code.
int http_status(ErrorCode code);

/// REST facade over a Runtime. Safe to call from several threads; commands
/// and reads are serialized.
///
///   POST /models                       model document (YAML or JSON)
///   GET  /models                       registered model ids
///   GET  /models/{id}
///   POST /instances                    {model_id, external_inputs, profiles?}
///   GET  /instances
///   GET  /instances/{id}
///   GET  /instances/{id}/report
///   GET  /instances/{id}/events?from_seq=
///   GET  /tasks?role=&instance=
///   POST /tasks/{task_id}/complete     {role, decision_label?}
///   GET  /artifacts/{id}?version=
///   GET  /artifacts/{id}/lineage?version=
///   GET  /costs?cloud=
///   GET  /clock
///   POST /clock/advance                {seconds}
class ApiService {
 public:
  explicit ApiService(std::unique_ptr<Runtime> runtime,
                      ClockMode mode = ClockMode::kManual);

  /// Loads topology, opens the store under data_dir and registers the model
  /// library.
  static std::unique_ptr<ApiService> from_config(ServerConfig const& config);

  /// `target` is the request path plus optional query string, still
  /// percent-encoded.
  ApiResponse handle_request(std::string_view method, std::string_view target,
                             std::string_view body);

  /// Advances the simulated clock (AutoStep driver).
  void tick(std::int64_t seconds);

  ClockMode clock_mode() const { return mode_; }
  /// For tests and the CLI; callers must not mutate concurrently.
  Runtime const& runtime() const { return *runtime_; }

 private:
  ApiResponse dispatch(std::string_view method, std::string_view target,
                       std::string_view body);

  std::mutex mu_;
  std::unique_ptr<Runtime> runtime_;
  ClockMode mode_;
};

/// Percent-decodes one path segment or query component ('+' is a space in
/// queries only).
std::string percent_decode(std::string_view text, bool plus_is_space = false);

}  // namespace procforge

#endif  // PROCFORGE_API_SERVICE_H_
