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

#include "procforge/json_codec.h"

namespace procforge {

using nlohmann::json;

namespace {

template <typename T>
json nullable(std::optional<T> const& v) {
  return v ? json(*v) : json(nullptr);
}

}  // namespace

json money_json(Money m) { return m.units(); }

void to_json(json& j, ArtifactRef const& ref) {
  j = json{{"artifact", ref.artifact_id}, {"version", ref.version}};
}

void from_json(json const& j, ArtifactRef& ref) {
  j.at("artifact").get_to(ref.artifact_id);
  j.at("version").get_to(ref.version);
}

void to_json(json& j, PlacementDecision const& d) {
  j = json{{"activity_id", d.activity_id},
           {"cloud_id", d.cloud_id},
           {"cloud_kind", std::string(to_string(d.cloud_kind))},
           {"machine_type", d.machine_type},
           {"instance_count", d.instance_count},
           {"estimated_duration_s", d.estimated_duration_s},
           {"estimated_cost", money_json(d.estimated_cost)},
           {"estimated_cost_micros", d.estimated_cost.micros()}};
}

void from_json(json const& j, PlacementDecision& d) {
  j.at("activity_id").get_to(d.activity_id);
  j.at("cloud_id").get_to(d.cloud_id);
  d.cloud_kind = j.at("cloud_kind").get<std::string>() == "private"
                     ? CloudKind::kPrivate
                     : CloudKind::kPublic;
  j.at("machine_type").get_to(d.machine_type);
  j.at("instance_count").get_to(d.instance_count);
  j.at("estimated_duration_s").get_to(d.estimated_duration_s);
  d.estimated_cost =
      Money::from_micros(j.at("estimated_cost_micros").get<std::int64_t>());
}

void to_json(json& j, ActivityInstance const& a) {
  j = json{{"activity_id", a.activity_id},
           {"state", std::string(to_string(a.state))},
           {"attempt", a.attempt},
           {"placement", nullable(a.placement)},
           {"decision_label", nullable(a.decision_label)},
           {"started_at_s", nullable(a.started_at_s)},
           {"finished_at_s", nullable(a.finished_at_s)}};
}

void to_json(json& j, ProcessModel const& m) {
  json roles = json::array();
  for (auto const& r : m.roles) {
    roles.push_back({{"id", r.role_id}, {"name", r.name}});
  }
  json artifacts = json::array();
  for (auto const& a : m.artifacts) {
    artifacts.push_back({{"id", a.artifact_id},
                         {"name", a.name},
                         {"confidential", a.confidential},
                         {"external", a.external}});
  }
  json activities = json::array();
  for (auto const& a : m.activities) {
    json act{{"id", a.activity_id},
             {"kind", std::string(to_string(a.kind))},
             {"role", a.role_id},
             {"inputs", a.inputs},
             {"outputs", a.outputs},
             {"confidential", a.confidential}};
    if (a.demand) {
      act["demand"] = {{"cpus", a.demand->cpus},
                       {"memory_gb", a.demand->memory_gb}};
    }
    if (a.elasticity) {
      auto const& p = *a.elasticity;
      act["elasticity"] = {
          {"machine_type", p.machine_type},
          {"initial_instances", p.initial_instances},
          {"timeout_hours", p.timeout_hours},
          {"scaling_type", std::string(to_string(p.scaling_type))},
          {"max_rounds", p.max_rounds},
          {"max_instances", p.max_instances}};
    }
    if (a.deadline_hours) act["deadline_hours"] = *a.deadline_hours;
    if (!a.model_ref.empty()) act["ref"] = a.model_ref;
    activities.push_back(std::move(act));
  }
  json edges = json::array();
  for (auto const& e : m.edges) {
    json edge{{"from", e.from_activity}, {"to", e.to_activity}};
    if (e.guard) edge["guard"] = *e.guard;
    edges.push_back(std::move(edge));
  }
  j = json{{"model_id", m.model_id},     {"name", m.name},
           {"roles", roles},             {"artifacts", artifacts},
           {"activities", activities},   {"edges", edges}};
}

void to_json(json& j, CloudInstance const& vm) {
  j = json{{"vm_id", vm.vm_id},
           {"cloud_id", vm.cloud_id},
           {"machine_type", vm.machine_type},
           {"state", std::string(to_string(vm.state))},
           {"requested_at_s", vm.requested_at_s},
           {"started_at_s", nullable(vm.started_at_s)},
           {"terminated_at_s", nullable(vm.terminated_at_s)}};
}

void to_json(json& j, TaskProfile const& p) {
  j = json{{"base_duration_s", p.base_duration_s},
           {"serial_fraction", p.serial_fraction},
           {"sync_overhead_s_per_node", p.sync_overhead_s_per_node}};
}

void from_json(json const& j, TaskProfile& p) {
  j.at("base_duration_s").get_to(p.base_duration_s);
  p.serial_fraction = j.value("serial_fraction", 0.0);
  p.sync_overhead_s_per_node = j.value("sync_overhead_s_per_node", 0.0);
}

}  // namespace procforge
