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


#include "procforge/api_service.h"

#include <algorithm>
#include <charconv>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "procforge/json_codec.h"
#include "procforge/process_model.h"
#include "procforge/report.h"

namespace procforge {

namespace fs = std::filesystem;
using nlohmann::json;

int http_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSyntaxError:
    case ErrorCode::kSchemaError:
    case ErrorCode::kValidationFailed:
    case ErrorCode::kUnresolvedReference:
    case ErrorCode::kRecursiveSubWorkflow:
    case ErrorCode::kAmbiguousBoundary:
    case ErrorCode::kCyclicModel:
    case ErrorCode::kMissingExternalInput:
    case ErrorCode::kUnknownMachineType:
      return 400;
    case ErrorCode::kRoleMismatch:
      return 403;
    case ErrorCode::kNotFound:
      return 404;
    case ErrorCode::kIllegalState:
    case ErrorCode::kConstraintViolation:
    case ErrorCode::kCapacityExceeded:
    case ErrorCode::kInstanceNotRunning:
    case ErrorCode::kMixedClouds:
    case ErrorCode::kClockRegression:
      return 409;
    case ErrorCode::kUnknownDecisionLabel:
      return 422;
    case ErrorCode::kHashMismatch:
    case ErrorCode::kStorageFailure:
    case ErrorCode::kCorruptLog:
      return 500;
  }
  return 500;
}

std::string percent_decode(std::string_view text, bool plus_is_space) {
  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (c == '%') {
      if (i + 2 >= text.size()) {
        throw Error(ErrorCode::kSyntaxError, "bad percent escape in URL");
      }
      int hi = hex(text[i + 1]);
      int lo = hex(text[i + 2]);
      if (hi < 0 || lo < 0) {
        throw Error(ErrorCode::kSyntaxError, "bad percent escape in URL");
      }
      out.push_back(static_cast<char>(hi * 16 + lo));
      i += 2;
    } else if (c == '+' && plus_is_space) {
      out.push_back(' ');
    } else {
      out.push_back(c);
    }
  }
  return out;
}

namespace {

/// Routing failures that are not library errors.
struct RouteError {
  int status;
  std::string code;
  std::string message;
};

ApiResponse respond(int status, json const& body) {
  return {status, body.dump()};
}

ApiResponse error_response(ApiError const& e, json extra = json::object()) {
  json body{{"status", e.http_status}, {"code", e.code}, {"message", e.message}};
  for (auto it = extra.begin(); it != extra.end(); ++it) body[it.key()] = *it;
  return respond(e.http_status, body);
}

struct Target {
  std::vector<std::string> segments;
  std::map<std::string, std::string> query;
};

Target parse_target(std::string_view target) {
  Target t;
  auto qpos = target.find('?');
  std::string_view path = target.substr(0, qpos);
  if (path.empty() || path.front() != '/') {
    throw RouteError{404, "NotFound", "path must start with '/'"};
  }
  path.remove_prefix(1);
  while (true) {
    auto slash = path.find('/');
    t.segments.push_back(percent_decode(path.substr(0, slash)));
    if (slash == std::string_view::npos) break;
    path.remove_prefix(slash + 1);
  }
  if (qpos != std::string_view::npos) {
    std::string_view q = target.substr(qpos + 1);
    while (!q.empty()) {
      auto amp = q.find('&');
      std::string_view pair = q.substr(0, amp);
      if (!pair.empty()) {
        auto eq = pair.find('=');
        std::string key = percent_decode(pair.substr(0, eq), true);
        std::string value =
            eq == std::string_view::npos
                ? std::string()
                : percent_decode(pair.substr(eq + 1), true);
        t.query[key] = value;
      }
      if (amp == std::string_view::npos) break;
      q.remove_prefix(amp + 1);
    }
  }
  return t;
}

[[noreturn]] void schema(std::string const& message) {
  throw Error(ErrorCode::kSchemaError, message);
}

json parse_body(std::string_view body) {
  json j;
  try {
    j = json::parse(body);
  } catch (json::exception const&) {
    throw Error(ErrorCode::kSyntaxError, "request body is not valid JSON");
  }
  if (!j.is_object()) schema("request body must be a JSON object");
  return j;
}

void allow_only(json const& obj, std::initializer_list<char const*> keys) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::none_of(keys.begin(), keys.end(),
                     [&](char const* k) { return it.key() == k; })) {
      schema("unknown field '" + it.key() + "'");
    }
  }
}

std::string string_field(json const& obj, char const* key) {
  auto it = obj.find(key);
  if (it == obj.end()) schema(std::string("missing field '") + key + "'");
  if (!it->is_string()) schema(std::string("'") + key + "' must be a string");
  return it->get<std::string>();
}

std::optional<std::string> optional_string(json const& obj, char const* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_string()) schema(std::string("'") + key + "' must be a string");
  return it->get<std::string>();
}

std::int64_t parse_int(std::string const& text, char const* what) {
  std::int64_t value = 0;
  auto [ptr, ec] =
      std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    schema(std::string("'") + what + "' must be an integer");
  }
  return value;
}

ProfileMap parse_profiles_json(json const& obj) {
  if (!obj.is_object()) schema("'profiles' must be an object");
  ProfileMap out;
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    json const& p = it.value();
    if (!p.is_object()) schema("profile '" + it.key() + "' must be an object");
    allow_only(p,
               {"base_duration_s", "serial_fraction", "sync_overhead_s_per_node"});
    TaskProfile profile;
    auto b = p.find("base_duration_s");
    if (b == p.end() || !b->is_number_integer() || b->get<std::int64_t>() < 1) {
      schema("profile '" + it.key() + "' needs integer base_duration_s >= 1");
    }
    profile.base_duration_s = b->get<std::int64_t>();
    if (auto s = p.find("serial_fraction"); s != p.end()) {
      if (!s->is_number() || !(s->get<double>() >= 0.0) ||
          !(s->get<double>() <= 1.0)) {
        schema("profile '" + it.key() + "' serial_fraction must be in [0,1]");
      }
      profile.serial_fraction = s->get<double>();
    }
    if (auto c = p.find("sync_overhead_s_per_node"); c != p.end()) {
      if (!c->is_number() || !(c->get<double>() >= 0.0)) {
        schema("profile '" + it.key() +
               "' sync_overhead_s_per_node must be >= 0");
      }
      profile.sync_overhead_s_per_node = c->get<double>();
    }
    out[it.key()] = profile;
  }
  return out;
}

json version_json(ArtifactVersion const& v) { return v; }

json lineage_json(LineageNode const& node) {
  json inputs = json::array();
  for (auto const& in : node.inputs) inputs.push_back(lineage_json(in));
  return json{{"artifact", version_json(node.artifact)}, {"inputs", inputs}};
}

json snapshot(Runtime const& rt, std::string const& id) {
  json j = instance_json(rt.instance(id));
  Money cost = rt.instance_cost(id);
  j["cost_to_date"] = money_json(cost);
  j["cost_to_date_micros"] = cost.micros();
  return j;
}

json levels_json(ProcessModel const& flat) {
  json levels = json::array();
  for (auto const& level : topological_levels(flat)) levels.push_back(level);
  return levels;
}

std::string read_text(fs::path const& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::kNotFound, "cannot read '" + path.string() + "'");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

ApiService::ApiService(std::unique_ptr<Runtime> runtime, ClockMode mode)
    : runtime_(std::move(runtime)), mode_(mode) {}

std::unique_ptr<ApiService> ApiService::from_config(
    ServerConfig const& config) {
  std::vector<CloudSpec> topology =
      config.cloud_topology_path.empty()
          ? default_topology()
          : parse_topology(read_text(config.cloud_topology_path));
  auto store = std::make_unique<ProvenanceStore>(fs::path(config.data_dir));
  auto runtime = std::make_unique<Runtime>(std::move(topology), std::move(store));

  std::vector<fs::path> files;
  for (auto const& entry : config.model_library_paths) {
    fs::path p(entry);
    if (fs::is_directory(p)) {
      std::vector<fs::path> found;
      for (auto const& f : fs::directory_iterator(p)) {
        auto ext = f.path().extension();
        if (ext == ".yaml" || ext == ".yml") found.push_back(f.path());
      }
      std::sort(found.begin(), found.end());
      files.insert(files.end(), found.begin(), found.end());
    } else {
      files.push_back(p);
    }
  }
  // Sub-workflows must be registered before their parents; retry until no
  // more progress is made.
  std::vector<ProcessModel> pending;
  for (auto const& f : files) pending.push_back(parse_process(read_text(f)));
  while (!pending.empty()) {
    std::vector<ProcessModel> retry;
    std::optional<Error> last;
    for (auto& m : pending) {
      try {
        runtime->register_model(m);
      } catch (Error const& e) {
        if (e.code() != ErrorCode::kUnresolvedReference) throw;
        last = e;
        retry.push_back(std::move(m));
      }
    }
    if (retry.size() == pending.size()) throw *last;
    pending = std::move(retry);
  }
  return std::make_unique<ApiService>(std::move(runtime), config.clock_mode);
}

void ApiService::tick(std::int64_t seconds) {
  std::lock_guard lock(mu_);
  runtime_->advance_clock(seconds);
}

ApiResponse ApiService::handle_request(std::string_view method,
                                       std::string_view target,
                                       std::string_view body) {
  std::lock_guard lock(mu_);
  try {
    return dispatch(method, target, body);
  } catch (ValidationError const& e) {
    json violations = json::array();
    for (auto const& v : e.violations()) {
      violations.push_back({{"code", std::string(to_string(v.code))},
                            {"subject", v.subject},
                            {"message", v.message}});
    }
    return error_response(
        {http_status(e.code()), std::string(to_string(e.code())), e.what()},
        {{"violations", violations}});
  } catch (Error const& e) {
    return error_response(
        {http_status(e.code()), std::string(to_string(e.code())), e.what()});
  } catch (RouteError const& e) {
    return error_response({e.status, e.code, e.message});
  } catch (std::exception const& e) {
    return error_response({500, "Internal", e.what()});
  }
}

ApiResponse ApiService::dispatch(std::string_view method,
                                 std::string_view target,
                                 std::string_view body) {
  Target t = parse_target(target);
  auto const& s = t.segments;
  Runtime& rt = *runtime_;
  bool const get = method == "GET";
  bool const post = method == "POST";
  auto not_allowed = [&]() -> ApiResponse {
    throw RouteError{405, "MethodNotAllowed",
                     std::string(method) + " is not allowed on " +
                         std::string(target.substr(0, target.find('?')))};
  };
  auto query = [&](char const* key) -> std::optional<std::string> {
    auto it = t.query.find(key);
    if (it == t.query.end()) return std::nullopt;
    return it->second;
  };

  if (s.size() == 1 && s[0] == "models") {
    if (post) {
      std::string id = rt.register_model(parse_process(body));
      return respond(201, {{"model_id", id}});
    }
    if (get) return respond(200, {{"models", rt.model_ids()}});
    return not_allowed();
  }
  if (s.size() == 2 && s[0] == "models") {
    if (!get) return not_allowed();
    ProcessModel const& flat = rt.flattened_model(s[1]);
    return respond(200, {{"model_id", s[1]},
                         {"model", rt.model(s[1])},
                         {"flattened", flat},
                         {"levels", levels_json(flat)}});
  }

  if (s.size() == 1 && s[0] == "instances") {
    if (post) {
      json req = parse_body(body);
      allow_only(req, {"model_id", "external_inputs", "profiles"});
      std::string model_id = string_field(req, "model_id");
      std::set<std::string> inputs;
      if (auto it = req.find("external_inputs"); it != req.end()) {
        if (!it->is_array()) schema("'external_inputs' must be an array");
        for (auto const& v : *it) {
          if (!v.is_string()) schema("'external_inputs' must hold strings");
          inputs.insert(v.get<std::string>());
        }
      }
      ProfileMap profiles;
      if (auto it = req.find("profiles"); it != req.end()) {
        profiles = parse_profiles_json(*it);
      }
      std::string id = rt.create_instance(model_id, inputs, std::move(profiles));
      return respond(201, snapshot(rt, id));
    }
    if (get) {
      json list = json::array();
      for (auto const& id : rt.instance_ids()) {
        auto const& inst = rt.instance(id);
        list.push_back({{"instance_id", id},
                        {"model_id", inst.model.model_id},
                        {"status", std::string(to_string(inst.status))},
                        {"sim_time_s", inst.sim_time_s},
                        {"last_seq", inst.last_seq}});
      }
      return respond(200, {{"instances", list}});
    }
    return not_allowed();
  }
  if (s.size() >= 2 && s.size() <= 3 && s[0] == "instances") {
    if (!get) return not_allowed();
    std::string const& id = s[1];
    if (s.size() == 2) return respond(200, snapshot(rt, id));
    if (s[2] == "report") return respond(200, export_report(rt, id));
    if (s[2] == "events") {
      Enactment const& engine = rt.enactment(id);
      std::int64_t from = 1;
      if (auto q = query("from_seq")) from = parse_int(*q, "from_seq");
      if (from < 1) schema("'from_seq' must be >= 1");
      auto const& globals = rt.global_seqs(id);
      json events = json::array();
      auto const& all = engine.events();
      for (std::size_t i = static_cast<std::size_t>(from - 1); i < all.size();
           ++i) {
        auto const& ev = all[i];
        events.push_back({{"seq", ev.seq},
                          {"global_seq", globals.at(i)},
                          {"t", ev.sim_time_s},
                          {"kind", std::string(to_string(ev.kind))},
                          {"payload", ev.payload}});
      }
      return respond(200, {{"instance_id", id},
                           {"last_seq", engine.instance().last_seq},
                           {"events", events}});
    }
    throw RouteError{404, "NotFound", "no such resource"};
  }

  if (s.size() == 1 && s[0] == "tasks") {
    if (!get) return not_allowed();
    json items = json::array();
    for (auto const& item : rt.worklist(query("role"), query("instance"))) {
      items.push_back(item);
    }
    return respond(200, {{"tasks", items}});
  }
  if (s.size() == 3 && s[0] == "tasks" && s[2] == "complete") {
    if (!post) return not_allowed();
    json req = parse_body(body);
    allow_only(req, {"role", "decision_label"});
    std::string role = string_field(req, "role");
    auto label = optional_string(req, "decision_label");
    rt.complete_task(s[1], role, label);
    auto [instance_id, activity_id] = split_task_id(s[1]);
    auto const& a = rt.instance(instance_id).activity(activity_id);
    return respond(200, {{"task_id", s[1]},
                         {"instance_id", instance_id},
                         {"activity_id", activity_id},
                         {"state", std::string(to_string(a.state))},
                         {"instance", snapshot(rt, instance_id)}});
  }

  if (s.size() >= 2 && s.size() <= 3 && s[0] == "artifacts") {
    if (!get) return not_allowed();
    VersionSelector selector = Latest{};
    if (auto q = query("version"); q && *q != "latest") {
      std::int64_t v = parse_int(*q, "version");
      if (v < 1 || v > std::numeric_limits<int>::max()) {
        schema("'version' must be a positive integer or 'latest'");
      }
      selector = static_cast<int>(v);
    }
    if (s.size() == 2) {
      auto [version, content] = rt.store().get_artifact(s[1], selector);
      json j = version_json(version);
      j["content"] = content;
      return respond(200, j);
    }
    if (s[2] == "lineage") {
      int v = std::holds_alternative<int>(selector)
                  ? std::get<int>(selector)
                  : rt.store().get_artifact(s[1]).first.version;
      return respond(200, lineage_json(rt.store().lineage(s[1], v)));
    }
    throw RouteError{404, "NotFound", "no such resource"};
  }

  if (s.size() == 1 && s[0] == "costs") {
    if (!get) return not_allowed();
    CloudSimulator const& sim = rt.simulator();
    auto filter = query("cloud");
    if (filter) sim.cloud(*filter);
    json clouds = json::object();
    for (auto const& c : sim.clouds()) {
      if (filter && *filter != c.cloud_id) continue;
      Money cost = sim.accrued_cost(CostScope::cloud(c.cloud_id));
      auto free = sim.free_cpus(c.cloud_id);
      clouds[c.cloud_id] = {
          {"kind", std::string(to_string(c.kind))},
          {"cost", money_json(cost)},
          {"cost_micros", cost.micros()},
          {"capacity_cpus",
           c.capacity_cpus ? json(*c.capacity_cpus) : json(nullptr)},
          {"committed_cpus", sim.committed_cpus(c.cloud_id)},
          {"free_cpus", free ? json(*free) : json(nullptr)}};
    }
    json vms = json::array();
    for (auto const& vm : sim.instances()) {
      if (filter && *filter != vm.cloud_id) continue;
      json j = vm;
      Money cost = sim.accrued_cost(CostScope::instance(vm.vm_id));
      j["cost"] = money_json(cost);
      j["cost_micros"] = cost.micros();
      vms.push_back(std::move(j));
    }
    Money total = filter ? sim.accrued_cost(CostScope::cloud(*filter))
                         : sim.accrued_cost(CostScope::all());
    return respond(200, {{"now_s", sim.now()},
                         {"clouds", clouds},
                         {"instances", vms},
                         {"total", money_json(total)},
                         {"total_micros", total.micros()}});
  }

  if (s.size() == 1 && s[0] == "clock") {
    if (!get) return not_allowed();
    return respond(200, {{"now_s", rt.now()},
                         {"mode", mode_ == ClockMode::kManual ? "manual"
                                                              : "auto_step"}});
  }
  if (s.size() == 2 && s[0] == "clock" && s[1] == "advance") {
    if (!post) return not_allowed();
    json req = parse_body(body);
    allow_only(req, {"seconds"});
    auto it = req.find("seconds");
    if (it == req.end()) schema("missing field 'seconds'");
    if (!it->is_number_integer() ||
        (it->is_number_unsigned() &&
         it->get<std::uint64_t>() >
             static_cast<std::uint64_t>(std::numeric_limits<std::int32_t>::max()))) {
      schema("'seconds' must be an integer no larger than 2^31-1");
    }
    std::int64_t seconds = it->get<std::int64_t>();
    if (seconds < 0) schema("'seconds' must be non-negative");
    if (seconds > std::numeric_limits<std::int32_t>::max()) {
      schema("'seconds' must be an integer no larger than 2^31-1");
    }
    rt.advance_clock(seconds);
    return respond(200, {{"now_s", rt.now()}});
  }

  throw RouteError{404, "NotFound", "no such resource"};
}

}  // namespace procforge
