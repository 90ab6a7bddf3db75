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


#include "procforge/server_config.h"

#include <cstdlib>

#include "procforge/error.h"
#include "yaml_util.h"

namespace procforge {

std::string ServerConfig::host() const {
  auto colon = listen_address.rfind(':');
  return colon == std::string::npos ? listen_address
                                    : listen_address.substr(0, colon);
}

int ServerConfig::port() const {
  auto colon = listen_address.rfind(':');
  if (colon == std::string::npos) return 8080;
  return std::stoi(listen_address.substr(colon + 1));
}

ServerConfig parse_server_config(std::string_view text,
                                 std::string const& data_dir_override) {
  using internal::YamlReader;
  ServerConfig config;
  YAML::Node root = YamlReader::load_node(text, "config");
  if (!root.IsNull()) {
    YamlReader r(root, "config");
    r.allow_only({"listen_address", "data_dir", "cloud_topology_path",
                  "model_library_paths", "clock_mode", "step_s"});
    if (auto v = r.optional<std::string>("listen_address")) {
      config.listen_address = *v;
    }
    if (auto v = r.optional<std::string>("data_dir")) config.data_dir = *v;
    if (auto v = r.optional<std::string>("cloud_topology_path")) {
      config.cloud_topology_path = *v;
    }
    config.model_library_paths = r.string_list("model_library_paths");
    auto mode = r.optional<std::string>("clock_mode").value_or("manual");
    if (mode == "manual") {
      config.clock_mode = ClockMode::kManual;
    } else if (mode == "auto_step") {
      config.clock_mode = ClockMode::kAutoStep;
    } else {
      r.fail("clock_mode must be 'manual' or 'auto_step'");
    }
    if (auto v = r.optional<std::int64_t>("step_s")) config.step_s = *v;
    if (config.clock_mode == ClockMode::kAutoStep && config.step_s <= 0) {
      r.fail("step_s must be positive under auto_step");
    }
    auto colon = config.listen_address.rfind(':');
    bool port_ok = colon != std::string::npos &&
                   colon + 1 < config.listen_address.size() &&
                   config.listen_address.find_first_not_of(
                       "0123456789", colon + 1) == std::string::npos &&
                   config.listen_address.size() - colon - 1 <= 5;
    if (!port_ok) r.fail("listen_address must look like host:port");
  }
  if (!data_dir_override.empty()) config.data_dir = data_dir_override;
  if (config.data_dir.empty()) {
    throw Error(ErrorCode::kSchemaError, "config: data_dir must not be empty");
  }
  return config;
}

std::string data_dir_from_env() {
  char const* value = std::getenv("PROCFORGE_DATA_DIR");
  return value ? std::string(value) : std::string();
}

}  // namespace procforge
