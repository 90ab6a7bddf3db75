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

#ifndef PROCFORGE_SRC_YAML_UTIL_H_
#define PROCFORGE_SRC_YAML_UTIL_H_

#include <yaml-cpp/yaml.h>

#include <charconv>
#include <initializer_list>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "procforge/error.h"

namespace procforge::internal {

/// Schema-checked view over a YAML mapping. Every failure is reported as
/// kSchemaError with the dotted path of the offending key.
class YamlReader {
 public:
  YamlReader(YAML::Node node, std::string path)
      : node_(std::move(node)), path_(std::move(path)) {
    if (!node_.IsMap()) fail("expected a mapping");
  }

  static YamlReader load(std::string_view text, std::string path) {
    YAML::Node node;
    try {
      node = YAML::Load(std::string(text));
    } catch (YAML::Exception const& e) {
      throw Error(ErrorCode::kSyntaxError,
                  path + ": malformed YAML: " + e.what());
    }
    return YamlReader(node, std::move(path));
  }

  static YAML::Node load_node(std::string_view text, std::string const& path) {
    try {
      return YAML::Load(std::string(text));
    } catch (YAML::Exception const& e) {
      throw Error(ErrorCode::kSyntaxError,
                  path + ": malformed YAML: " + e.what());
    }
  }

  [[noreturn]] void fail(std::string const& message) const {
    throw Error(ErrorCode::kSchemaError, path_ + ": " + message);
  }

  void allow_only(std::initializer_list<std::string_view> keys) const {
    for (auto const& kv : node_) {
      if (!kv.first.IsScalar()) fail("non-scalar key");
      auto const& key = kv.first.Scalar();
      bool known = false;
      for (auto k : keys) known = known || k == key;
      if (!known) fail("unknown key '" + key + "'");
    }
  }

  bool has(char const* key) const {
    auto n = node_[key];
    return n.IsDefined() && !n.IsNull();
  }

  template <typename T>
  T required(char const* key) const {
    if (!has(key)) fail(std::string("missing key '") + key + "'");
    return convert<T>(node_[key], key);
  }

  template <typename T>
  std::optional<T> optional(char const* key) const {
    if (!has(key)) return std::nullopt;
    return convert<T>(node_[key], key);
  }

  std::optional<YamlReader> child(char const* key) const {
    if (!has(key)) return std::nullopt;
    return YamlReader(node_[key], path_ + "." + key);
  }

  std::vector<YamlReader> list(char const* key, bool required = false) const {
    std::vector<YamlReader> out;
    if (!has(key)) {
      if (required) fail(std::string("missing key '") + key + "'");
      return out;
    }
    auto seq = node_[key];
    if (!seq.IsSequence()) fail(std::string("'") + key + "' must be a list");
    for (std::size_t i = 0; i < seq.size(); ++i) {
      out.emplace_back(seq[i],
                       path_ + "." + key + "[" + std::to_string(i) + "]");
    }
    return out;
  }

  std::vector<std::string> string_list(char const* key) const {
    std::vector<std::string> out;
    if (!has(key)) return out;
    auto seq = node_[key];
    if (!seq.IsSequence()) fail(std::string("'") + key + "' must be a list");
    for (auto const& item : seq) out.push_back(convert<std::string>(item, key));
    return out;
  }

  YAML::Node const& node() const { return node_; }
  std::string const& path() const { return path_; }

 private:
  template <typename T>
  T convert(YAML::Node const& n, char const* key) const {
    if (!n.IsScalar()) fail(std::string("'") + key + "' must be a scalar");
    try {
      return n.as<T>();
    } catch (YAML::Exception const&) {
      fail(std::string("'") + key + "' has the wrong type");
    }
  }

  YAML::Node node_;
  std::string path_;
};

/// Shortest decimal text that parses back to exactly `value`.
inline std::string emit_double(double value) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, value);
  std::string text(buf, res.ptr);
  if (text.find_first_of(".eEn") == std::string::npos) text += ".0";
  return text;
}

}  // namespace procforge::internal

#endif  // PROCFORGE_SRC_YAML_UTIL_H_
