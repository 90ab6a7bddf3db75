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


#include "procforge/http_server.h"

#include <httplib.h>

#include <chrono>
#include <condition_variable>
#include <mutex>
#include <thread>

namespace procforge {

struct HttpServer::Impl {
  ApiService& service;
  httplib::Server server;
  std::mutex mu;
  std::condition_variable cv;
  bool stopping = false;

  explicit Impl(ApiService& s) : service(s) {}
};

HttpServer::HttpServer(ApiService& service)
    : impl_(std::make_unique<Impl>(service)) {
  auto handler = [this](httplib::Request const& req, httplib::Response& res) {
    ApiResponse out =
        impl_->service.handle_request(req.method, req.target, req.body);
    res.status = out.status;
    res.set_content(out.body, "application/json");
  };
  auto& server = impl_->server;
  server.Get(".*", handler);
  server.Post(".*", handler);
  server.Put(".*", handler);
  server.Patch(".*", handler);
  server.Delete(".*", handler);
  server.Options(".*", handler);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(std::string const& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

void HttpServer::listen(std::int64_t step_s) {
  std::thread ticker;
  if (step_s > 0) {
    ticker = std::thread([this, step_s] {
      std::unique_lock lock(impl_->mu);
      while (!impl_->cv.wait_for(lock, std::chrono::seconds(1),
                                 [this] { return impl_->stopping; })) {
        lock.unlock();
        try {
          impl_->service.tick(step_s);
        } catch (...) {
          // A failed tick leaves the clock where it was; keep serving.
        }
        lock.lock();
      }
    });
  }
  impl_->server.listen_after_bind();
  {
    std::lock_guard lock(impl_->mu);
    impl_->stopping = true;
  }
  impl_->cv.notify_all();
  if (ticker.joinable()) ticker.join();
}

void HttpServer::stop() {
  {
    std::lock_guard lock(impl_->mu);
    impl_->stopping = true;
  }
  impl_->cv.notify_all();
  impl_->server.stop();
}

}  // namespace procforge
