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

#include "procforge/process_model.h"

#include <algorithm>
#include <functional>
#include <set>

#include "procforge/error.h"

namespace procforge {

std::string_view to_string(ActivityKind kind) {
  switch (kind) {
    case ActivityKind::kManual:
      return "manual";
    case ActivityKind::kAutomated:
      return "automated";
    case ActivityKind::kSubWorkflow:
      return "subworkflow";
  }
  return "unknown";
}

std::string_view to_string(ScalingType type) {
  return type == ScalingType::kLinear ? "linear" : "exponential";
}

std::string_view to_string(ViolationCode code) {
  switch (code) {
    case ViolationCode::kDuplicateId:
      return "DuplicateId";
    case ViolationCode::kUnknownActivity:
      return "UnknownActivity";
    case ViolationCode::kUnknownRole:
      return "UnknownRole";
    case ViolationCode::kUnknownArtifact:
      return "UnknownArtifact";
    case ViolationCode::kCycleDetected:
      return "CycleDetected";
    case ViolationCode::kMultipleProducers:
      return "MultipleProducers";
    case ViolationCode::kMissingProducer:
      return "MissingProducer";
    case ViolationCode::kProducedExternal:
      return "ProducedExternal";
    case ViolationCode::kElasticityNotAllowed:
      return "ElasticityNotAllowed";
    case ViolationCode::kSubWorkflowResources:
      return "SubWorkflowResources";
    case ViolationCode::kMissingReference:
      return "MissingReference";
    case ViolationCode::kInvalidGuard:
      return "InvalidGuard";
    case ViolationCode::kDuplicateGuard:
      return "DuplicateGuard";
    case ViolationCode::kInvalidDemand:
      return "InvalidDemand";
    case ViolationCode::kInvalidPolicy:
      return "InvalidPolicy";
    case ViolationCode::kInvalidDeadline:
      return "InvalidDeadline";
  }
  return "Unknown";
}

Activity const* ProcessModel::find_activity(std::string_view id) const {
  auto it = std::find_if(activities.begin(), activities.end(),
                         [&](Activity const& a) { return a.activity_id == id; });
  return it == activities.end() ? nullptr : &*it;
}

ArtifactSpec const* ProcessModel::find_artifact(std::string_view id) const {
  auto it = std::find_if(
      artifacts.begin(), artifacts.end(),
      [&](ArtifactSpec const& a) { return a.artifact_id == id; });
  return it == artifacts.end() ? nullptr : &*it;
}

Role const* ProcessModel::find_role(std::string_view id) const {
  auto it = std::find_if(roles.begin(), roles.end(),
                         [&](Role const& r) { return r.role_id == id; });
  return it == roles.end() ? nullptr : &*it;
}

namespace {

template <typename T, typename IdOf>
void check_unique(std::vector<T> const& items, IdOf id_of,
                  std::string_view what, std::vector<Violation>& out) {
  std::set<std::string> seen;
  std::set<std::string> reported;
  for (auto const& item : items) {
    std::string const& id = id_of(item);
    if (!seen.insert(id).second && reported.insert(id).second) {
      out.push_back({ViolationCode::kDuplicateId, id,
                     std::string("duplicate ") + std::string(what) + " id '" +
                         id + "'"});
    }
  }
}

// Tarjan's strongly connected components; every component with more than
// one node or a self-loop is a cycle.
std::vector<std::vector<std::string>> find_cycles(ProcessModel const& model) {
  std::map<std::string, std::vector<std::string>> adj;
  for (auto const& a : model.activities) adj[a.activity_id];
  for (auto const& e : model.edges) {
    if (adj.count(e.from_activity) && adj.count(e.to_activity)) {
      adj[e.from_activity].push_back(e.to_activity);
    }
  }
  std::map<std::string, int> index;
  std::map<std::string, int> low;
  std::set<std::string> on_stack;
  std::vector<std::string> stack;
  std::vector<std::vector<std::string>> cycles;
  int counter = 0;

  std::function<void(std::string const&)> strongconnect =
      [&](std::string const& v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        on_stack.insert(v);
        for (auto const& w : adj[v]) {
          if (!index.count(w)) {
            strongconnect(w);
            low[v] = std::min(low[v], low[w]);
          } else if (on_stack.count(w)) {
            low[v] = std::min(low[v], index[w]);
          }
        }
        if (low[v] != index[v]) return;
        std::vector<std::string> component;
        std::string w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack.erase(w);
          component.push_back(w);
        } while (w != v);
        bool self_loop = std::find(adj[v].begin(), adj[v].end(), v) !=
                         adj[v].end();
        if (component.size() > 1 || self_loop) {
          std::sort(component.begin(), component.end());
          cycles.push_back(std::move(component));
        }
      };
  for (auto const& [v, _] : adj) {
    if (!index.count(v)) strongconnect(v);
  }
  std::sort(cycles.begin(), cycles.end());
  return cycles;
}

std::string join(std::vector<std::string> const& parts, char sep) {
  std::string out;
  for (auto const& p : parts) {
    if (!out.empty()) out += sep;
    out += p;
  }
  return out;
}

void check_policy(Activity const& a, std::vector<Violation>& out) {
  if (!a.elasticity) return;
  auto const& p = *a.elasticity;
  auto bad = [&](std::string const& why) {
    out.push_back({ViolationCode::kInvalidPolicy, a.activity_id,
                   "elasticity of '" + a.activity_id + "': " + why});
  };
  if (p.machine_type.empty()) bad("machine_type is empty");
  if (p.initial_instances < 1) bad("initial_instances must be >= 1");
  if (p.max_instances < 1) bad("max_instances must be >= 1");
  if (p.initial_instances > p.max_instances) {
    bad("initial_instances exceeds max_instances");
  }
  if (!(p.timeout_hours > 0)) bad("timeout_hours must be positive");
  if (p.max_rounds < 1) bad("max_rounds must be >= 1");
}

}  // namespace

namespace {

std::string describe(std::vector<Violation> const& violations) {
  std::string text = "model has " + std::to_string(violations.size()) +
                     " violation(s)";
  for (auto const& v : violations) {
    text += "; " + std::string(to_string(v.code)) + " " + v.subject;
  }
  return text;
}

}  // namespace

ValidationError::ValidationError(std::vector<Violation> violations)
    : Error(ErrorCode::kValidationFailed, describe(violations)),
      violations_(std::move(violations)) {}

std::vector<Violation> validate(ProcessModel const& model) {
  std::vector<Violation> out;
  check_unique(model.activities,
               [](Activity const& a) -> std::string const& {
                 return a.activity_id;
               },
               "activity", out);
  check_unique(model.artifacts,
               [](ArtifactSpec const& a) -> std::string const& {
                 return a.artifact_id;
               },
               "artifact", out);
  check_unique(model.roles,
               [](Role const& r) -> std::string const& { return r.role_id; },
               "role", out);

  std::map<std::string, int> producers;
  for (auto const& a : model.activities) {
    if (!model.find_role(a.role_id)) {
      out.push_back({ViolationCode::kUnknownRole, a.activity_id,
                     "activity '" + a.activity_id + "' names undeclared role '" +
                         a.role_id + "'"});
    }
    for (auto const* list : {&a.inputs, &a.outputs}) {
      for (auto const& art : *list) {
        if (!model.find_artifact(art)) {
          out.push_back({ViolationCode::kUnknownArtifact, art,
                         "activity '" + a.activity_id +
                             "' references undeclared artifact '" + art + "'"});
        }
      }
    }
    for (auto const& art : a.outputs) ++producers[art];

    if (a.elasticity && a.kind != ActivityKind::kAutomated) {
      out.push_back({ViolationCode::kElasticityNotAllowed, a.activity_id,
                     "elasticity is only allowed on automated activities"});
    }
    if (a.kind == ActivityKind::kSubWorkflow) {
      if (a.demand) {
        out.push_back({ViolationCode::kSubWorkflowResources, a.activity_id,
                       "sub-workflow activity '" + a.activity_id +
                           "' must not declare a demand"});
      }
      if (a.model_ref.empty()) {
        out.push_back({ViolationCode::kMissingReference, a.activity_id,
                       "sub-workflow activity '" + a.activity_id +
                           "' has no ref"});
      }
    } else if (!a.model_ref.empty()) {
      out.push_back({ViolationCode::kMissingReference, a.activity_id,
                     "ref is only allowed on sub-workflow activities"});
    }
    if (a.demand && (a.demand->cpus < 1 || !(a.demand->memory_gb > 0))) {
      out.push_back({ViolationCode::kInvalidDemand, a.activity_id,
                     "demand of '" + a.activity_id +
                         "' needs cpus >= 1 and memory_gb > 0"});
    }
    check_policy(a, out);
    if (a.deadline_hours && !(*a.deadline_hours > 0)) {
      out.push_back({ViolationCode::kInvalidDeadline, a.activity_id,
                     "deadline_hours must be positive"});
    }
  }

  for (auto const& art : model.artifacts) {
    int n = producers.count(art.artifact_id) ? producers[art.artifact_id] : 0;
    if (art.external && n > 0) {
      out.push_back({ViolationCode::kProducedExternal, art.artifact_id,
                     "external artifact '" + art.artifact_id +
                         "' must not be produced by an activity"});
    } else if (!art.external && n == 0) {
      out.push_back({ViolationCode::kMissingProducer, art.artifact_id,
                     "artifact '" + art.artifact_id + "' has no producer"});
    } else if (n > 1) {
      out.push_back({ViolationCode::kMultipleProducers, art.artifact_id,
                     "artifact '" + art.artifact_id + "' has " +
                         std::to_string(n) + " producers"});
    }
  }

  std::map<std::string, std::set<std::string>> guards_by_source;
  for (auto const& e : model.edges) {
    bool known = true;
    for (auto const* end : {&e.from_activity, &e.to_activity}) {
      if (!model.find_activity(*end)) {
        known = false;
        out.push_back({ViolationCode::kUnknownActivity, *end,
                       "edge endpoint '" + *end + "' is not an activity"});
      }
    }
    if (!e.guard) continue;
    std::string const edge_name = e.from_activity + "->" + e.to_activity;
    if (e.guard->empty()) {
      out.push_back({ViolationCode::kInvalidGuard, edge_name,
                     "guard on " + edge_name + " is empty"});
      continue;
    }
    if (known && model.find_activity(e.from_activity)->kind !=
                     ActivityKind::kManual) {
      out.push_back({ViolationCode::kInvalidGuard, edge_name,
                     "guard on " + edge_name +
                         " leaves a non-manual activity"});
    }
    if (!guards_by_source[e.from_activity].insert(*e.guard).second) {
      out.push_back({ViolationCode::kDuplicateGuard, e.from_activity,
                     "guard '" + *e.guard + "' repeated on edges leaving '" +
                         e.from_activity + "'"});
    }
  }

  for (auto const& cycle : find_cycles(model)) {
    out.push_back({ViolationCode::kCycleDetected, join(cycle, ','),
                   "cycle through {" + join(cycle, ',') + "}"});
  }
  return out;
}

namespace {

struct Boundary {
  std::string entry;
  std::string exit;
};

ProcessModel expand_impl(ProcessModel const& model, ModelLibrary const& library,
                         std::vector<std::string>& chain) {
  ProcessModel flat;
  flat.model_id = model.model_id;
  flat.name = model.name;
  flat.roles = model.roles;
  flat.artifacts = model.artifacts;

  std::map<std::string, Boundary> boundaries;
  std::vector<Edge> child_edges;
  for (auto const& a : model.activities) {
    if (a.kind != ActivityKind::kSubWorkflow) {
      flat.activities.push_back(a);
      continue;
    }
    auto it = library.find(a.model_ref);
    if (it == library.end()) {
      throw Error(ErrorCode::kUnresolvedReference,
                  "sub-workflow '" + a.activity_id +
                      "' references unknown model '" + a.model_ref + "'");
    }
    if (std::find(chain.begin(), chain.end(), a.model_ref) != chain.end()) {
      throw Error(ErrorCode::kRecursiveSubWorkflow,
                  "sub-workflow '" + a.activity_id + "' recursively includes '" +
                      a.model_ref + "'");
    }
    chain.push_back(a.model_ref);
    ProcessModel child = expand_impl(it->second, library, chain);
    chain.pop_back();

    std::set<std::string> has_in;
    std::set<std::string> has_out;
    for (auto const& e : child.edges) {
      has_out.insert(e.from_activity);
      has_in.insert(e.to_activity);
    }
    std::vector<std::string> entries;
    std::vector<std::string> exits;
    for (auto const& c : child.activities) {
      if (!has_in.count(c.activity_id)) entries.push_back(c.activity_id);
      if (!has_out.count(c.activity_id)) exits.push_back(c.activity_id);
    }
    if (entries.size() != 1 || exits.size() != 1) {
      throw Error(ErrorCode::kAmbiguousBoundary,
                  "model '" + a.model_ref + "' used by '" + a.activity_id +
                      "' has " + std::to_string(entries.size()) +
                      " entries and " + std::to_string(exits.size()) +
                      " exits; exactly one of each is required");
    }

    std::string const prefix = a.activity_id + "/";
    std::set<std::string> bound(a.inputs.begin(), a.inputs.end());
    bound.insert(a.outputs.begin(), a.outputs.end());
    auto rename_artifact = [&](std::string const& id) {
      return bound.count(id) ? id : prefix + id;
    };

    for (auto c : child.activities) {
      c.activity_id = prefix + c.activity_id;
      for (auto& in : c.inputs) in = rename_artifact(in);
      for (auto& out : c.outputs) out = rename_artifact(out);
      c.confidential = c.confidential || a.confidential;
      flat.activities.push_back(std::move(c));
    }
    for (auto e : child.edges) {
      e.from_activity = prefix + e.from_activity;
      e.to_activity = prefix + e.to_activity;
      child_edges.push_back(std::move(e));
    }
    for (auto art : child.artifacts) {
      if (bound.count(art.artifact_id)) {
        if (!flat.find_artifact(art.artifact_id)) {
          flat.artifacts.push_back(std::move(art));
        }
        continue;
      }
      art.artifact_id = prefix + art.artifact_id;
      flat.artifacts.push_back(std::move(art));
    }
    for (auto const& r : child.roles) {
      if (!flat.find_role(r.role_id)) flat.roles.push_back(r);
    }
    boundaries[a.activity_id] = {prefix + entries.front(),
                                 prefix + exits.front()};
  }

  for (auto e : model.edges) {
    if (auto it = boundaries.find(e.from_activity); it != boundaries.end()) {
      e.from_activity = it->second.exit;
    }
    if (auto it = boundaries.find(e.to_activity); it != boundaries.end()) {
      e.to_activity = it->second.entry;
    }
    flat.edges.push_back(std::move(e));
  }
  for (auto& e : child_edges) flat.edges.push_back(std::move(e));
  return flat;
}

}  // namespace

ProcessModel expand_subworkflows(ProcessModel const& model,
                                 ModelLibrary const& library) {
  std::vector<std::string> chain{model.model_id};
  return expand_impl(model, library, chain);
}

std::vector<std::vector<std::string>> topological_levels(
    ProcessModel const& model) {
  std::map<std::string, int> indegree;
  std::map<std::string, std::vector<std::string>> successors;
  for (auto const& a : model.activities) indegree[a.activity_id];
  for (auto const& e : model.edges) {
    if (!indegree.count(e.from_activity) || !indegree.count(e.to_activity)) {
      continue;
    }
    successors[e.from_activity].push_back(e.to_activity);
    ++indegree[e.to_activity];
  }

  std::vector<std::vector<std::string>> levels;
  std::vector<std::string> frontier;
  for (auto const& [id, deg] : indegree) {
    if (deg == 0) frontier.push_back(id);
  }
  std::size_t placed = 0;
  while (!frontier.empty()) {
    std::sort(frontier.begin(), frontier.end());
    placed += frontier.size();
    std::vector<std::string> next;
    for (auto const& id : frontier) {
      for (auto const& s : successors[id]) {
        if (--indegree[s] == 0) next.push_back(s);
      }
    }
    levels.push_back(std::move(frontier));
    frontier = std::move(next);
  }
  if (placed != indegree.size()) {
    throw Error(ErrorCode::kCyclicModel,
                "model '" + model.model_id + "' contains a cycle");
  }
  return levels;
}

bool is_effectively_confidential(ProcessModel const& model,
                                 Activity const& activity) {
  if (activity.confidential) return true;
  for (auto const* list : {&activity.inputs, &activity.outputs}) {
    for (auto const& id : *list) {
      if (auto const* art = model.find_artifact(id); art && art->confidential) {
        return true;
      }
    }
  }
  return false;
}

}  // namespace procforge
