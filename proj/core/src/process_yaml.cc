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

#include <yaml-cpp/yaml.h>

#include <set>
#include <string>

#include "procforge/error.h"
#include "procforge/process_model.h"
#include "yaml_util.h"

namespace procforge {
namespace {

using internal::YamlReader;

ResourceDemand read_demand(YamlReader const& r) {
  r.allow_only({"cpus", "memory_gb"});
  ResourceDemand d;
  d.cpus = r.required<int>("cpus");
  d.memory_gb = r.required<double>("memory_gb");
  return d;
}

ScalingType read_scaling(YamlReader const& r, char const* key) {
  auto text = r.required<std::string>(key);
  if (text == "linear") return ScalingType::kLinear;
  if (text == "exponential") return ScalingType::kExponential;
  r.fail(std::string(key) + " must be 'linear' or 'exponential', got '" + text +
         "'");
}

ElasticityPolicy read_policy(YamlReader const& r) {
  r.allow_only({"machine_type", "initial_instances", "timeout_hours",
                "scaling_type", "max_rounds", "max_instances"});
  ElasticityPolicy p;
  p.machine_type = r.required<std::string>("machine_type");
  p.initial_instances = r.required<int>("initial_instances");
  p.timeout_hours = r.required<double>("timeout_hours");
  p.scaling_type = read_scaling(r, "scaling_type");
  p.max_rounds = r.required<int>("max_rounds");
  p.max_instances = r.required<int>("max_instances");
  return p;
}

ActivityKind read_kind(YamlReader const& r) {
  auto text = r.required<std::string>("kind");
  if (text == "manual") return ActivityKind::kManual;
  if (text == "automated") return ActivityKind::kAutomated;
  if (text == "subworkflow") return ActivityKind::kSubWorkflow;
  r.fail("kind must be manual, automated or subworkflow, got '" + text + "'");
}

Activity read_activity(YamlReader const& r) {
  r.allow_only({"id", "kind", "role", "inputs", "outputs", "confidential",
                "demand", "elasticity", "deadline_hours", "ref"});
  Activity a;
  a.activity_id = r.required<std::string>("id");
  a.kind = read_kind(r);
  a.role_id = r.required<std::string>("role");
  a.inputs = r.string_list("inputs");
  a.outputs = r.string_list("outputs");
  a.confidential = r.optional<bool>("confidential").value_or(false);
  if (auto d = r.child("demand")) a.demand = read_demand(*d);
  if (auto p = r.child("elasticity")) a.elasticity = read_policy(*p);
  a.deadline_hours = r.optional<double>("deadline_hours");
  a.model_ref = r.optional<std::string>("ref").value_or("");
  return a;
}

Edge read_edge(YamlReader const& r) {
  r.allow_only({"from", "to", "guard"});
  return Edge{r.required<std::string>("from"), r.required<std::string>("to"),
              r.optional<std::string>("guard")};
}

ArtifactSpec read_artifact(YamlReader const& r) {
  r.allow_only({"id", "name", "confidential", "external"});
  ArtifactSpec a;
  a.artifact_id = r.required<std::string>("id");
  a.name = r.optional<std::string>("name").value_or(a.artifact_id);
  a.confidential = r.optional<bool>("confidential").value_or(false);
  a.external = r.optional<bool>("external").value_or(false);
  return a;
}

Role read_role(YamlReader const& r) {
  r.allow_only({"id", "name"});
  Role role;
  role.role_id = r.required<std::string>("id");
  role.name = r.optional<std::string>("name").value_or(role.role_id);
  return role;
}

template <typename T, typename IdOf>
void require_unique(std::vector<T> const& items, IdOf id_of,
                    std::string const& what) {
  std::set<std::string> seen;
  for (auto const& item : items) {
    if (!seen.insert(id_of(item)).second) {
      throw Error(ErrorCode::kSchemaError,
                  "duplicate " + what + " id '" + id_of(item) + "'");
    }
  }
}

}  // namespace

ProcessModel parse_process(std::string_view text) {
  YamlReader root = YamlReader::load(text, "process");
  root.allow_only(
      {"model_id", "name", "roles", "artifacts", "activities", "edges"});
  ProcessModel m;
  m.model_id = root.required<std::string>("model_id");
  m.name = root.optional<std::string>("name").value_or(m.model_id);
  for (auto const& r : root.list("roles")) m.roles.push_back(read_role(r));
  for (auto const& a : root.list("artifacts")) {
    m.artifacts.push_back(read_artifact(a));
  }
  for (auto const& a : root.list("activities", /*required=*/true)) {
    m.activities.push_back(read_activity(a));
  }
  for (auto const& e : root.list("edges")) m.edges.push_back(read_edge(e));

  require_unique(m.activities, [](Activity const& a) { return a.activity_id; },
                 "activity");
  require_unique(m.artifacts,
                 [](ArtifactSpec const& a) { return a.artifact_id; },
                 "artifact");
  require_unique(m.roles, [](Role const& r) { return r.role_id; }, "role");
  return m;
}

std::string serialize_process(ProcessModel const& model) {
  using internal::emit_double;
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "model_id" << YAML::Value << model.model_id;
  out << YAML::Key << "name" << YAML::Value << model.name;

  out << YAML::Key << "roles" << YAML::Value << YAML::BeginSeq;
  for (auto const& r : model.roles) {
    out << YAML::BeginMap << YAML::Key << "id" << YAML::Value << r.role_id
        << YAML::Key << "name" << YAML::Value << r.name << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "artifacts" << YAML::Value << YAML::BeginSeq;
  for (auto const& a : model.artifacts) {
    out << YAML::BeginMap << YAML::Key << "id" << YAML::Value << a.artifact_id
        << YAML::Key << "name" << YAML::Value << a.name << YAML::Key
        << "confidential" << YAML::Value << a.confidential << YAML::Key
        << "external" << YAML::Value << a.external << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "activities" << YAML::Value << YAML::BeginSeq;
  for (auto const& a : model.activities) {
    out << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << a.activity_id;
    out << YAML::Key << "kind" << YAML::Value << std::string(to_string(a.kind));
    out << YAML::Key << "role" << YAML::Value << a.role_id;
    out << YAML::Key << "inputs" << YAML::Value << YAML::Flow << a.inputs;
    out << YAML::Key << "outputs" << YAML::Value << YAML::Flow << a.outputs;
    out << YAML::Key << "confidential" << YAML::Value << a.confidential;
    if (a.demand) {
      out << YAML::Key << "demand" << YAML::Value << YAML::BeginMap;
      out << YAML::Key << "cpus" << YAML::Value << a.demand->cpus;
      out << YAML::Key << "memory_gb" << YAML::Value
          << emit_double(a.demand->memory_gb);
      out << YAML::EndMap;
    }
    if (a.elasticity) {
      auto const& p = *a.elasticity;
      out << YAML::Key << "elasticity" << YAML::Value << YAML::BeginMap;
      out << YAML::Key << "machine_type" << YAML::Value << p.machine_type;
      out << YAML::Key << "initial_instances" << YAML::Value
          << p.initial_instances;
      out << YAML::Key << "timeout_hours" << YAML::Value
          << emit_double(p.timeout_hours);
      out << YAML::Key << "scaling_type" << YAML::Value
          << std::string(to_string(p.scaling_type));
      out << YAML::Key << "max_rounds" << YAML::Value << p.max_rounds;
      out << YAML::Key << "max_instances" << YAML::Value << p.max_instances;
      out << YAML::EndMap;
    }
    if (a.deadline_hours) {
      out << YAML::Key << "deadline_hours" << YAML::Value
          << emit_double(*a.deadline_hours);
    }
    if (a.kind == ActivityKind::kSubWorkflow || !a.model_ref.empty()) {
      out << YAML::Key << "ref" << YAML::Value << a.model_ref;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "edges" << YAML::Value << YAML::BeginSeq;
  for (auto const& e : model.edges) {
    out << YAML::BeginMap << YAML::Key << "from" << YAML::Value
        << e.from_activity << YAML::Key << "to" << YAML::Value << e.to_activity;
    if (e.guard) out << YAML::Key << "guard" << YAML::Value << *e.guard;
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace procforge
