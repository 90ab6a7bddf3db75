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


#ifndef PROCFORGE_HTTP_SERVER_H_
#define PROCFORGE_HTTP_SERVER_H_

#include <atomic>
#include <functional>
#include <memory>
#include <string>

#include "procforge/api_service.h"

namespace procforge {

/// Serves an ApiService over HTTP/1.1 until stop() is called.
class HttpServer {
 public:
  explicit HttpServer(ApiService& service);
  ~HttpServer();

  /// Binds to host:port (port 0 picks a free port) and returns the port.
  int bind(std::string const& host, int port);
  /// Blocks serving requests. Under AutoStep the clock advances by `step_s`
  /// every wall-clock second.
  void listen(std::int64_t step_s = 0);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace procforge

#endif  // PROCFORGE_HTTP_SERVER_H_
