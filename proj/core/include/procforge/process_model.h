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

#ifndef PROCFORGE_PROCESS_MODEL_H_
#define PROCFORGE_PROCESS_MODEL_H_

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "procforge/error.h"

namespace procforge {

enum class ActivityKind { kManual, kAutomated, kSubWorkflow };
enum class ScalingType { kLinear, kExponential };

std::string_view to_string(ActivityKind kind);
std::string_view to_string(ScalingType type);

struct ResourceDemand {
  int cpus = 1;
  double memory_gb = 1.0;

  friend bool operator==(ResourceDemand const&, ResourceDemand const&) = default;
};

/// Scale-up-on-timeout parameters of an automated activity.
struct ElasticityPolicy {
  std::string machine_type;
  int initial_instances = 1;
  double timeout_hours = 1.0;
  ScalingType scaling_type = ScalingType::kExponential;
  int max_rounds = 1;
  int max_instances = 1;

  friend bool operator==(ElasticityPolicy const&,
                         ElasticityPolicy const&) = default;
};

struct Activity {
  std::string activity_id;
  ActivityKind kind = ActivityKind::kAutomated;
  std::string role_id;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  bool confidential = false;
  std::optional<ResourceDemand> demand;
  std::optional<ElasticityPolicy> elasticity;
  std::optional<double> deadline_hours;
  /// Library key of the child model; set only for kSubWorkflow.
  std::string model_ref;

  friend bool operator==(Activity const&, Activity const&) = default;
};

struct Edge {
  std::string from_activity;
  std::string to_activity;
  std::optional<std::string> guard;

  friend bool operator==(Edge const&, Edge const&) = default;
};

struct ArtifactSpec {
  std::string artifact_id;
  std::string name;
  bool confidential = false;
  bool external = false;

  friend bool operator==(ArtifactSpec const&, ArtifactSpec const&) = default;
};

struct Role {
  std::string role_id;
  std::string name;

  friend bool operator==(Role const&, Role const&) = default;
};

struct ProcessModel {
  std::string model_id;
  std::string name;
  std::vector<Role> roles;
  std::vector<ArtifactSpec> artifacts;
  std::vector<Activity> activities;
  std::vector<Edge> edges;

  Activity const* find_activity(std::string_view id) const;
  ArtifactSpec const* find_artifact(std::string_view id) const;
  Role const* find_role(std::string_view id) const;

  friend bool operator==(ProcessModel const&, ProcessModel const&) = default;
};

enum class ViolationCode {
  kDuplicateId,
  kUnknownActivity,
  kUnknownRole,
  kUnknownArtifact,
  kCycleDetected,
  kMultipleProducers,
  kMissingProducer,
  kProducedExternal,
  kElasticityNotAllowed,
  kSubWorkflowResources,
  kMissingReference,
  kInvalidGuard,
  kDuplicateGuard,
  kInvalidDemand,
  kInvalidPolicy,
  kInvalidDeadline,
};

std::string_view to_string(ViolationCode code);

struct Violation {
  ViolationCode code;
  /// The offending id; for cycles, the ids on the cycle joined by ','.
  std::string subject;
  std::string message;

  friend bool operator==(Violation const&, Violation const&) = default;
};

/// Parses a process definition document (YAML). Throws Error with
/// kSyntaxError for malformed YAML and kSchemaError for missing, unknown or
/// mistyped keys and duplicate ids.
ProcessModel parse_process(std::string_view text);

/// Emits the document form of `model`; keys appear in the documented order
/// and optional fields are omitted when unset.
std::string serialize_process(ProcessModel const& model);

/// Returns every invariant breach of `model`; empty iff the model is
/// well-formed.
std::vector<Violation> validate(ProcessModel const& model);

/// kValidationFailed carrying the violations that caused it.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<Violation> violations);
  std::vector<Violation> const& violations() const { return violations_; }

 private:
  std::vector<Violation> violations_;
};

using ModelLibrary = std::map<std::string, ProcessModel, std::less<>>;

/// Replaces every sub-workflow activity by the activities of the referenced
/// child model (recursively). Child activity ids become
/// "<parent_activity_id>/<child_id>". Child artifacts named in the
/// sub-workflow activity's inputs/outputs bind to the parent artifact of the
/// same id; all other child artifacts are namespaced like activities.
ProcessModel expand_subworkflows(ProcessModel const& model,
                                 ModelLibrary const& library);

/// Groups activities into levels such that every edge goes from a lower to a
/// higher level; ids inside a level are sorted.
std::vector<std::vector<std::string>> topological_levels(
    ProcessModel const& model);

/// True when the activity is itself confidential or touches a confidential
/// artifact.
bool is_effectively_confidential(ProcessModel const& model,
                                 Activity const& activity);

}  // namespace procforge

#endif  // PROCFORGE_PROCESS_MODEL_H_
