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


// procforge command-line front end.
//
// Exit codes: 0 success, 1 validation failure, 2 runtime failure.

#include <CLI11.hpp>
#include <httplib.h>
#include <unistd.h>
#include <yaml-cpp/yaml.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "procforge/api_service.h"
#include "procforge/error.h"
#include "procforge/http_server.h"
#include "procforge/process_model.h"
#include "procforge/report.h"
#include "procforge/runtime.h"
#include "procforge/server_config.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace procforge;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kRuntimeFailure = 2;

struct Answer {
  std::string role;
  std::optional<std::string> decision_label;
};

std::string read_file(std::string const& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kNotFound, "cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool is_input_error(ErrorCode code) {
  switch (code) {
    case ErrorCode::kSyntaxError:
    case ErrorCode::kSchemaError:
    case ErrorCode::kValidationFailed:
    case ErrorCode::kUnresolvedReference:
    case ErrorCode::kRecursiveSubWorkflow:
    case ErrorCode::kAmbiguousBoundary:
    case ErrorCode::kCyclicModel:
      return true;
    default:
      return false;
  }
}

int report_error(Error const& e) {
  std::cerr << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
  if (auto const* v = dynamic_cast<ValidationError const*>(&e)) {
    for (auto const& violation : v->violations()) {
      std::cerr << "  " << to_string(violation.code) << " "
                << violation.subject << ": " << violation.message << "\n";
    }
  }
  return is_input_error(e.code()) ? kInvalid : kRuntimeFailure;
}

std::map<std::string, Answer> parse_answers(std::string const& text) {
  std::map<std::string, Answer> answers;
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (YAML::Exception const& e) {
    throw Error(ErrorCode::kSyntaxError,
                std::string("answers: malformed YAML: ") + e.what());
  }
  if (root.IsNull()) return answers;
  if (!root.IsMap()) {
    throw Error(ErrorCode::kSchemaError, "answers: expected a mapping");
  }
  try {
    for (auto const& kv : root) {
      auto id = kv.first.as<std::string>();
      if (!kv.second.IsMap() || !kv.second["role"]) {
        throw Error(ErrorCode::kSchemaError,
                    "answers." + id + ": expected {role, decision_label?}");
      }
      for (auto const& field : kv.second) {
        auto key = field.first.as<std::string>();
        if (key != "role" && key != "decision_label") {
          throw Error(ErrorCode::kSchemaError,
                      "answers." + id + ": unknown key '" + key + "'");
        }
      }
      Answer a;
      a.role = kv.second["role"].as<std::string>();
      if (kv.second["decision_label"]) {
        a.decision_label = kv.second["decision_label"].as<std::string>();
      }
      answers[id] = a;
    }
  } catch (YAML::Exception const& e) {
    throw Error(ErrorCode::kSchemaError,
                std::string("answers: wrong value type: ") + e.what());
  }
  return answers;
}

/// Registers every model under `dir`, retrying so that sub-workflows may be
/// listed in any order.
void register_library(Runtime& rt, std::string const& dir) {
  std::vector<ProcessModel> pending;
  std::vector<fs::path> files;
  for (auto const& f : fs::directory_iterator(dir)) {
    auto ext = f.path().extension();
    if (ext == ".yaml" || ext == ".yml") files.push_back(f.path());
  }
  std::sort(files.begin(), files.end());
  for (auto const& f : files) {
    pending.push_back(parse_process(read_file(f.string())));
  }
  while (!pending.empty()) {
    std::vector<ProcessModel> retry;
    std::optional<Error> last;
    for (auto& m : pending) {
      try {
        rt.register_model(m);
      } catch (Error const& e) {
        if (e.code() != ErrorCode::kUnresolvedReference) throw;
        last = e;
        retry.push_back(std::move(m));
      }
    }
    if (retry.size() == pending.size()) throw *last;
    pending = std::move(retry);
  }
}

int cmd_validate(std::string const& path, std::string const& library) {
  ProcessModel model = parse_process(read_file(path));
  auto violations = validate(model);
  if (!violations.empty()) {
    for (auto const& v : violations) {
      std::cout << to_string(v.code) << " " << v.subject << ": " << v.message
                << "\n";
    }
    return kInvalid;
  }
  bool has_subworkflows =
      std::any_of(model.activities.begin(), model.activities.end(),
                  [](Activity const& a) {
                    return a.kind == ActivityKind::kSubWorkflow;
                  });
  if (has_subworkflows) {
    Runtime rt(default_topology(), nullptr);
    if (!library.empty()) register_library(rt, library);
    rt.register_model(model);
  }
  std::cout << "OK\n";
  return kOk;
}

std::optional<Answer> prompt_answer(WorkItem const& item) {
  if (!::isatty(STDIN_FILENO)) return std::nullopt;
  std::cout << "task " << item.task_id << " (role " << item.role;
  if (!item.guard_options.empty()) {
    std::cout << ", options";
    for (auto const& g : item.guard_options) std::cout << " " << g;
  }
  std::cout << ")\n  enter: <role> [label] > " << std::flush;
  std::string line;
  if (!std::getline(std::cin, line)) return std::nullopt;
  std::istringstream words(line);
  Answer a;
  std::string label;
  words >> a.role >> label;
  if (!label.empty()) a.decision_label = label;
  return a;
}

struct RunOptions {
  std::string model;
  std::string answers;
  std::string report;
  std::string topology;
  std::string profiles;
  std::string library;
  std::string data_dir;
};

int cmd_run(RunOptions const& opt) {
  std::vector<CloudSpec> topology = opt.topology.empty()
                                        ? default_topology()
                                        : parse_topology(read_file(opt.topology));
  std::unique_ptr<ProvenanceStore> store;
  if (!opt.data_dir.empty()) {
    store = std::make_unique<ProvenanceStore>(fs::path(opt.data_dir));
  }
  Runtime rt(std::move(topology), std::move(store));
  if (!opt.library.empty()) register_library(rt, opt.library);
  std::string model_id = rt.register_model(parse_process(read_file(opt.model)));
  std::map<std::string, Answer> answers;
  if (!opt.answers.empty()) answers = parse_answers(read_file(opt.answers));
  ProfileMap profiles;
  if (!opt.profiles.empty()) profiles = parse_profiles(read_file(opt.profiles));

  std::set<std::string> externals;
  for (auto const& art : rt.flattened_model(model_id).artifacts) {
    if (art.external) externals.insert(art.artifact_id);
  }
  std::string id = rt.create_instance(model_id, externals, profiles);

  while (rt.instance(id).status == InstanceStatus::kRunning) {
    auto items = rt.worklist(std::nullopt, id);
    if (!items.empty()) {
      for (auto const& item : items) {
        std::optional<Answer> answer;
        if (auto it = answers.find(item.activity_id); it != answers.end()) {
          answer = it->second;
        } else {
          answer = prompt_answer(item);
        }
        if (!answer) {
          std::cerr << "error: no answer for task " << item.task_id
                    << " (role " << item.role << ")\n";
          return kRuntimeFailure;
        }
        rt.complete_task(item.task_id, answer->role, answer->decision_label);
        std::cout << "t=" << rt.now() << " completed " << item.activity_id
                  << " as " << answer->role;
        if (answer->decision_label) {
          std::cout << " [" << *answer->decision_label << "]";
        }
        std::cout << "\n";
      }
      continue;
    }
    if (!rt.step()) break;
  }

  auto const& inst = rt.instance(id);
  json report = export_report(rt, id);
  if (!opt.report.empty()) {
    std::ofstream out(opt.report, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::kStorageFailure,
                          "cannot write report '" + opt.report + "'");
    out << report.dump(2) << "\n";
  }
  std::cout << "instance " << id << " " << to_string(inst.status) << " at t="
            << inst.sim_time_s << "s\n";
  for (auto const& a : report.at("activities")) {
    std::cout << "  " << a.at("activity_id").get<std::string>() << ": "
              << a.at("state").get<std::string>();
    if (!a.at("attempts").empty()) {
      std::cout << " instances " << a.at("attempts").dump();
    }
    std::cout << "\n";
  }
  std::cout << "total cost " << report.at("cost").at("total").dump()
            << " (accrued " << rt.simulator().accrued_cost(CostScope::all()).units()
            << ")\n";
  if (inst.status == InstanceStatus::kCompleted) return kOk;
  if (inst.status == InstanceStatus::kRunning) {
    std::cerr << "error: instance is stuck; no pending events and no tasks\n";
  }
  return kRuntimeFailure;
}

int cmd_serve(std::string const& config_path) {
  std::string text = config_path.empty() ? "" : read_file(config_path);
  ServerConfig config = parse_server_config(text, data_dir_from_env());
  auto service = ApiService::from_config(config);
  HttpServer server(*service);
  int port = server.bind(config.host(), config.port());
  if (port < 0) {
    std::cerr << "error: cannot listen on " << config.listen_address << "\n";
    return kRuntimeFailure;
  }
  std::cout << "procforge listening on " << config.host() << ":" << port
            << " (data " << config.data_dir << ")" << std::endl;
  server.listen(config.clock_mode == ClockMode::kAutoStep ? config.step_s : 0);
  return kOk;
}

std::string server_url(std::string const& flag) {
  if (!flag.empty()) return flag;
  if (char const* env = std::getenv("PROCFORGE_SERVER")) return env;
  return "http://127.0.0.1:8080";
}

std::string encode(std::string const& text) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : text) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xf]);
    }
  }
  return out;
}

int client_result(httplib::Result const& res) {
  if (!res) {
    std::cerr << "error: cannot reach server: " << httplib::to_string(res.error())
              << "\n";
    return kRuntimeFailure;
  }
  if (res->status >= 200 && res->status < 300) {
    std::cout << json::parse(res->body).dump(2) << "\n";
    return kOk;
  }
  std::cerr << "error: HTTP " << res->status << " " << res->body << "\n";
  int s = res->status;
  return (s == 400 || s == 403 || s == 404 || s == 422) ? kInvalid
                                                        : kRuntimeFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"procforge: software process enactment on a simulated hybrid cloud"};
  app.require_subcommand(1);

  std::string model_path, library;
  auto* validate_cmd = app.add_subcommand("validate", "Check a process model");
  validate_cmd->add_option("model", model_path, "Process model file")->required();
  validate_cmd->add_option("--library", library,
                           "Directory of models for sub-workflow references");

  RunOptions run;
  auto* run_cmd =
      app.add_subcommand("run", "Enact a model to completion under a manual clock");
  run_cmd->add_option("model", run.model, "Process model file")->required();
  run_cmd->add_option("--answers", run.answers,
                      "YAML map activity_id -> {role, decision_label}");
  run_cmd->add_option("--report", run.report, "Write the run report here");
  run_cmd->add_option("--topology", run.topology, "Cloud topology YAML");
  run_cmd->add_option("--profiles", run.profiles, "Task profiles YAML");
  run_cmd->add_option("--library", run.library,
                      "Directory of models for sub-workflow references");
  run_cmd->add_option("--data-dir", run.data_dir,
                      "Persist the event log and artifacts here");

  std::string config_path;
  auto* serve_cmd = app.add_subcommand("serve", "Run the REST API server");
  serve_cmd->add_option("--config", config_path, "Server config YAML");

  std::string server, role, label, task, instance, out_path;
  auto* tasks_cmd = app.add_subcommand("tasks", "List waiting human tasks");
  tasks_cmd->add_option("--role", role, "Only tasks for this role");
  tasks_cmd->add_option("--server", server, "Server URL");

  auto* complete_cmd = app.add_subcommand("complete", "Complete a human task");
  complete_cmd->add_option("task", task, "Task id")->required();
  complete_cmd->add_option("--role", role, "Acting role")->required();
  complete_cmd->add_option("--label", label, "Decision label");
  complete_cmd->add_option("--server", server, "Server URL");

  auto* report_cmd = app.add_subcommand("report", "Fetch an instance report");
  report_cmd->add_option("instance", instance, "Instance id")->required();
  report_cmd->add_option("--server", server, "Server URL");

  try {
    app.parse(argc, argv);
  } catch (CLI::ParseError const& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kInvalid;
  }

  try {
    if (*validate_cmd) return cmd_validate(model_path, library);
    if (*run_cmd) return cmd_run(run);
    if (*serve_cmd) return cmd_serve(config_path);

    httplib::Client client(server_url(server));
    client.set_connection_timeout(5);
    if (*tasks_cmd) {
      std::string path = "/tasks";
      if (!role.empty()) path += "?role=" + encode(role);
      return client_result(client.Get(path));
    }
    if (*complete_cmd) {
      json body{{"role", role}};
      if (!label.empty()) body["decision_label"] = label;
      return client_result(client.Post("/tasks/" + encode(task) + "/complete",
                                       body.dump(), "application/json"));
    }
    if (*report_cmd) {
      return client_result(client.Get("/instances/" + encode(instance) + "/report"));
    }
  } catch (Error const& e) {
    return report_error(e);
  } catch (std::exception const& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeFailure;
  }
  return kOk;
}
