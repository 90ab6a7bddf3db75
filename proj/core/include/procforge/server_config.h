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


#ifndef PROCFORGE_SERVER_CONFIG_H_
#define PROCFORGE_SERVER_CONFIG_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace procforge {

enum class ClockMode { kManual, kAutoStep };

struct ServerConfig {
  std::string listen_address = "127.0.0.1:8080";
  std::string data_dir = "procforge-data";
  /// Empty means the built-in two-cloud topology.
  std::string cloud_topology_path;
  /// Model files (or directories of *.yaml) registered at startup.
  std::vector<std::string> model_library_paths;
  ClockMode clock_mode = ClockMode::kManual;
  /// Simulated seconds per wall-clock second under AutoStep.
  std::int64_t step_s = 60;

  std::string host() const;
  int port() const;
};

/// Parses the YAML config. Relative paths stay as written. When
/// `data_dir_override` is non-empty it replaces data_dir (the
/// PROCFORGE_DATA_DIR environment variable).
ServerConfig parse_server_config(std::string_view text,
                                 std::string const& data_dir_override = "");

/// Reads PROCFORGE_DATA_DIR from the environment, empty when unset.
std::string data_dir_from_env();

}  // namespace procforge

#endif  // PROCFORGE_SERVER_CONFIG_H_
