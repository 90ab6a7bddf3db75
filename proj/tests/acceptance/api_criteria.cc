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


#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "criteria.h"
#include "procforge/api_service.h"
#include "procforge/json_codec.h"
#include "procforge/provenance_store.h"
#include "procforge/report.h"
#include "random_models.h"

namespace procforge::acceptance {

using namespace procforge::testing;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kFuzzCases = 600;

std::string slurp(fs::path const& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string sample(std::string const& name) {
  return slurp(fs::path(PROCFORGE_SAMPLES_DIR) / name);
}

std::map<std::string, int> known_error_statuses() {
  std::map<std::string, int> out;
  for (int c = 0; c <= static_cast<int>(ErrorCode::kCorruptLog); ++c) {
    auto code = static_cast<ErrorCode>(c);
    out[std::string(to_string(code))] = http_status(code);
  }
  out["MethodNotAllowed"] = 405;
  return out;
}

/// Returns an empty string when `r` is a well-formed response, otherwise a
/// description of what is wrong with it.
std::string check_mapped(ApiResponse const& r,
                         std::map<std::string, int> const& known) {
  json body = json::parse(r.body, nullptr, false);
  if (body.is_discarded()) return "body is not JSON";
  if (r.status < 400) return "";
  if (!body.is_object() || !body.contains("code") ||
      !body["code"].is_string()) {
    return "error without code";
  }
  auto code = body["code"].get<std::string>();
  auto it = known.find(code);
  if (it == known.end()) return "unmapped error code " + code;
  if (it->second != r.status || body.value("status", 0) != r.status) {
    return "status " + std::to_string(r.status) + " for " + code;
  }
  return "";
}

json profiles_json() {
  json out = json::object();
  for (auto const& [id, p] : parse_profiles(sample("profiles.yaml"))) {
    out[id] = {{"base_duration_s", p.base_duration_s},
               {"serial_fraction", p.serial_fraction},
               {"sync_overhead_s_per_node", p.sync_overhead_s_per_node}};
  }
  return out;
}

std::unique_ptr<ApiService> sample_service() {
  return std::make_unique<ApiService>(std::make_unique<Runtime>(
      parse_topology(sample("topology.yaml")), nullptr));
}

struct Step {
  std::string name;
  std::string method;
  std::string target;
  std::string body;
};

/// Drives the sample process through every endpoint.
std::vector<Step> golden_steps() {
  json const instance_body = {{"model_id", "verify-release"},
                              {"external_inputs", {"requirements"}},
                              {"profiles", profiles_json()}};
  return {
      {"clock-initial", "GET", "/clock", ""},
      {"models-post", "POST", "/models", sample("verify-release.yaml")},
      {"models-post-library", "POST", "/models",
       sample("library/static-analysis.yaml")},
      {"models-post-subworkflow", "POST", "/models",
       sample("with-subworkflow.yaml")},
      {"models-post-cyclic", "POST", "/models", sample("cyclic.yaml")},
      {"models-post-garbage", "POST", "/models", "activities: [unclosed"},
      {"models-list", "GET", "/models", ""},
      {"models-get", "GET", "/models/verify-release", ""},
      {"models-get-flattened", "GET", "/models/reviewed-change", ""},
      {"models-get-missing", "GET", "/models/no-such-model", ""},
      {"instances-post-missing-input", "POST", "/instances",
       R"({"model_id":"verify-release","external_inputs":[]})"},
      {"instances-post", "POST", "/instances", instance_body.dump()},
      {"instances-get", "GET", "/instances/inst-0001", ""},
      {"tasks-all", "GET", "/tasks", ""},
      {"tasks-architect", "GET", "/tasks?role=architect", ""},
      {"tasks-complete-wrong-role", "POST",
       "/tasks/inst-0001:spec-review/complete", R"({"role":"qa"})"},
      {"tasks-complete-review", "POST",
       "/tasks/inst-0001:spec-review/complete", R"({"role":"architect"})"},
      {"events-after-review", "GET", "/instances/inst-0001/events?from_seq=1",
       ""},
      {"clock-advance-hour", "POST", "/clock/advance", R"({"seconds":3600})"},
      {"costs-after-hour", "GET", "/costs", ""},
      {"instances-get-running", "GET", "/instances/inst-0001", ""},
      {"clock-advance-long", "POST", "/clock/advance", R"({"seconds":20000})"},
      {"tasks-qa", "GET", "/tasks?role=qa&instance=inst-0001", ""},
      {"tasks-complete-bad-label", "POST", "/tasks/inst-0001:decision/complete",
       R"({"role":"qa","decision_label":"maybe"})"},
      {"tasks-complete-decision", "POST", "/tasks/inst-0001:decision/complete",
       R"({"role":"qa","decision_label":"pass"})"},
      {"tasks-complete-again", "POST", "/tasks/inst-0001:decision/complete",
       R"({"role":"qa","decision_label":"pass"})"},
      {"clock-advance-finish", "POST", "/clock/advance", R"({"seconds":3600})"},
      {"clock-advance-negative", "POST", "/clock/advance", R"({"seconds":-5})"},
      {"instances-get-completed", "GET", "/instances/inst-0001", ""},
      {"instances-list", "GET", "/instances", ""},
      {"instances-get-missing", "GET", "/instances/inst-9999", ""},
      {"events-tail", "GET", "/instances/inst-0001/events?from_seq=25", ""},
      {"report", "GET", "/instances/inst-0001/report", ""},
      {"artifacts-latest", "GET", "/artifacts/release", ""},
      {"artifacts-version", "GET", "/artifacts/binary?version=1", ""},
      {"artifacts-missing-version", "GET", "/artifacts/binary?version=7", ""},
      {"artifacts-lineage", "GET", "/artifacts/release/lineage", ""},
      {"artifacts-missing", "GET", "/artifacts/no-such-artifact", ""},
      {"costs", "GET", "/costs", ""},
      {"costs-private", "GET", "/costs?cloud=private", ""},
      {"costs-missing-cloud", "GET", "/costs?cloud=mars", ""},
      {"clock-final", "GET", "/clock", ""},
      {"method-not-allowed", "DELETE", "/models", ""},
      {"unknown-route", "GET", "/no/such/route", ""},
  };
}

std::string golden_text(ApiResponse const& r) {
  json body = json::parse(r.body, nullptr, false);
  return std::to_string(r.status) + "\n" +
         (body.is_discarded() ? r.body : body.dump(2)) + "\n";
}

/// Engine-side view of an instance with the fields the API adds removed.
json strip_cost(json snapshot) {
  snapshot.erase("cost_to_date");
  snapshot.erase("cost_to_date_micros");
  return snapshot;
}

std::vector<std::string> equivalence_checks(ApiService& api) {
  std::vector<std::string> problems;
  Runtime const& rt = api.runtime();
  for (auto const& id : rt.instance_ids()) {
    json snapshot =
        json::parse(api.handle_request("GET", "/instances/" + id, "").body);
    auto const& model = rt.flattened_model(rt.instance(id).model.model_id);
    json replayed =
        instance_json(replay(rt.store().log().read(1, id), model));
    if (strip_cost(snapshot) != replayed) {
      problems.push_back(id + ": snapshot differs from replayed log");
    }
    if (strip_cost(snapshot) != instance_json(rt.instance(id))) {
      problems.push_back(id + ": snapshot differs from engine state");
    }
    if (snapshot.at("cost_to_date_micros") != rt.instance_cost(id).micros()) {
      problems.push_back(id + ": cost_to_date differs from simulator");
    }
    json report = json::parse(
        api.handle_request("GET", "/instances/" + id + "/report", "").body);
    if (report != export_report(rt, id)) {
      problems.push_back(id + ": report differs from export_report");
    }
    json events = json::parse(
        api.handle_request("GET", "/instances/" + id + "/events", "").body);
    auto records = rt.store().log().read(1, id);
    auto const& listed = events.at("events");
    if (listed.size() != records.size()) {
      problems.push_back(id + ": event count differs from log");
    } else {
      for (std::size_t i = 0; i < records.size(); ++i) {
        if (listed[i].at("global_seq") != records[i].global_seq ||
            listed[i].at("seq") != i + 1 ||
            listed[i].at("kind") != records[i].kind ||
            listed[i].at("t") != records[i].sim_time_s ||
            listed[i].at("payload") != records[i].payload) {
          problems.push_back(id + ": event " + std::to_string(i + 1) +
                             " differs from log");
        }
      }
    }
  }
  json tasks = json::parse(api.handle_request("GET", "/tasks", "").body);
  if (tasks.at("tasks") != json(rt.worklist())) {
    problems.push_back("worklist differs from engine");
  }
  json costs = json::parse(api.handle_request("GET", "/costs", "").body);
  if (costs.at("total_micros") !=
      rt.simulator().accrued_cost(CostScope::all()).micros()) {
    problems.push_back("cost total differs from simulator");
  }
  return problems;
}

std::string random_bytes(Rng& rng) {
  std::string out;
  auto n = uniform(rng, 0, 48);
  for (int i = 0; i < n; ++i) {
    out.push_back(static_cast<char>(uniform(rng, 0, 255)));
  }
  return out;
}

json random_value(Rng& rng) {
  switch (uniform(rng, 0, 10)) {
    case 0: return nullptr;
    case 1: return uniform(rng, 0, 1) == 1;
    case 2: return uniform(rng, -5, 5);
    case 3: return 1e300;
    case 4: return -9223372036854775807LL - 1;
    case 5: return 18446744073709551615ULL;
    case 6: return 2.5;
    case 7: return "";
    case 8: return "inst-0001:decision";
    case 9: return json::array({1, "x", nullptr});
    default: return json::object({{"k", json::array()}});
  }
}

/// An invalid or borderline body for one of the command endpoints.
std::string mutate(Rng& rng, std::string const& valid) {
  switch (uniform(rng, 0, 6)) {
    case 0:
      return random_bytes(rng);
    case 1:
      return valid.substr(0, uniform(rng, 0, valid.size()));
    case 2: {
      json j = json::parse(valid, nullptr, false);
      if (!j.is_object() || j.empty()) return "{}";
      auto pick = uniform(rng, 0, static_cast<std::int64_t>(j.size()) - 1);
      auto it = j.begin();
      std::advance(it, pick);
      j[it.key()] = random_value(rng);
      return j.dump();
    }
    case 3: {
      json j = json::parse(valid, nullptr, false);
      if (j.is_object()) j["unexpected_" + std::to_string(uniform(rng, 0, 9))] = 1;
      return j.dump();
    }
    case 4: {
      auto depth = uniform(rng, 1, 400);
      return std::string(depth, '[') + std::string(depth, ']');
    }
    case 5:
      return random_value(rng).dump();
    default: {
      std::string s = valid;
      auto edits = uniform(rng, 1, 4);
      for (int i = 0; i < edits && !s.empty(); ++i) {
        s[uniform(rng, 0, static_cast<std::int64_t>(s.size()) - 1)] =
            static_cast<char>(uniform(rng, 32, 126));
      }
      return s;
    }
  }
}

}  // namespace

Outcome api_engine_equivalence() {
  auto const known = known_error_statuses();
  std::vector<std::string> problems;

  // Golden files, one per step.
  bool update = std::getenv("PROCFORGE_UPDATE_GOLDEN") != nullptr;
  fs::path const golden_dir(PROCFORGE_GOLDEN_DIR);
  auto api = sample_service();
  std::set<std::string> routes;
  int index = 0;
  int idempotent_gets = 0;
  for (auto const& step : golden_steps()) {
    ++index;
    ApiResponse r = api->handle_request(step.method, step.target, step.body);
    if (auto bad = check_mapped(r, known); !bad.empty()) {
      problems.push_back(step.name + ": " + bad);
    }
    if (step.method == "GET") {
      ApiResponse again = api->handle_request("GET", step.target, "");
      if (again.status != r.status || again.body != r.body) {
        problems.push_back(step.name + ": repeated GET differs");
      } else {
        ++idempotent_gets;
      }
    }
    char prefix[16];
    std::snprintf(prefix, sizeof prefix, "%02d-", index);
    fs::path file = golden_dir / (prefix + step.name + ".txt");
    std::string text = golden_text(r);
    if (update) {
      fs::create_directories(golden_dir);
      std::ofstream(file, std::ios::binary) << text;
    } else if (!fs::exists(file)) {
      problems.push_back(step.name + ": golden file missing");
    } else if (slurp(file) != text) {
      problems.push_back(step.name + ": response differs from " +
                         file.filename().string());
    }
    std::string path = step.target.substr(0, step.target.find('?'));
    routes.insert(step.method + " " + path);
  }
  for (auto const& p : equivalence_checks(*api)) problems.push_back(p);

  // Fuzzed command bodies against a service with live work.
  Rng rng(0xF022);
  auto fuzz = sample_service();
  fuzz->handle_request("POST", "/models", sample("verify-release.yaml"));
  json const instance_body = {{"model_id", "verify-release"},
                              {"external_inputs", {"requirements"}},
                              {"profiles", profiles_json()}};
  fuzz->handle_request("POST", "/instances", instance_body.dump());
  struct Template {
    std::string target;
    std::string valid;
  };
  std::vector<Template> const templates = {
      {"/models", sample("verify-release.yaml")},
      {"/models", json(parse_process(sample("verify-release.yaml"))).dump()},
      {"/instances", instance_body.dump()},
      {"/tasks/inst-0001:spec-review/complete", R"({"role":"architect"})"},
      {"/tasks/inst-0001:decision/complete",
       R"({"role":"qa","decision_label":"pass"})"},
      {"/clock/advance", R"({"seconds":60})"},
  };
  int errors = 0;
  int internal = 0;
  std::map<std::string, int> codes;
  for (int i = 0; i < kFuzzCases; ++i) {
    auto const& t = templates[uniform(
        rng, 0, static_cast<std::int64_t>(templates.size()) - 1)];
    std::string body = mutate(rng, t.valid);
    ApiResponse r = fuzz->handle_request("POST", t.target, body);
    if (r.status >= 400) {
      ++errors;
      json j = json::parse(r.body, nullptr, false);
      std::string code = j.is_object() ? j.value("code", "") : "";
      ++codes[code];
      if (code == "Internal") ++internal;
    }
    if (auto bad = check_mapped(r, known); !bad.empty()) {
      problems.push_back("fuzz case " + std::to_string(i) + ": " + bad);
    }
  }
  for (auto const& p : equivalence_checks(*fuzz)) {
    problems.push_back("after fuzzing: " + p);
  }

  Outcome out;
  out.pass = problems.empty() && internal == 0;
  out.detail = format(
      "%d golden responses over %zu method/route pairs, %d idempotent GETs, "
      "engine/replay equivalence checked; %d fuzzed bodies, %d rejected, %d "
      "unmapped",
      index, routes.size(), idempotent_gets, kFuzzCases, errors, internal);
  if (!problems.empty()) {
    out.detail += "; " + problems.front() + " (" +
                  std::to_string(problems.size()) + " problems)";
  }
  std::string mix;
  for (auto const& [code, n] : codes) {
    mix += (mix.empty() ? "" : ", ") + code + " " + std::to_string(n);
  }
  out.info.push_back("fuzz rejections by code: " + mix);
  return out;
}

}  // namespace procforge::acceptance
