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

#ifndef PROCFORGE_SCHEDULER_H_
#define PROCFORGE_SCHEDULER_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "procforge/activity_state.h"
#include "procforge/cloud_simulator.h"
#include "procforge/money.h"
#include "procforge/process_model.h"

namespace procforge {

struct PlacementDecision {
  std::string activity_id;
  std::string cloud_id;
  CloudKind cloud_kind = CloudKind::kPublic;
  std::string machine_type;
  int instance_count = 1;
  std::int64_t estimated_duration_s = 0;
  /// instance_count * ceil(estimated_duration_s / 3600) * hourly price.
  Money estimated_cost;

  friend bool operator==(PlacementDecision const&,
                         PlacementDecision const&) = default;
};

/// A cloud as seen by the planner: its spec plus the cpus still free on it
/// (nullopt when unbounded).
struct CloudCapacity {
  CloudSpec spec;
  std::optional<int> free_cpus;
};

/// One ready automated activity to place.
struct PlacementRequest {
  Activity activity;
  TaskProfile profile;
  int attempt = 0;
  /// Activity flag or any touched artifact flagged confidential.
  bool confidential = false;
};

struct SchedulingProblem {
  std::vector<PlacementRequest> ready;
  std::vector<CloudCapacity> clouds;
};

/// nullopt marks an activity that could not be placed (Deferred).
using PlacementPlan =
    std::map<std::string, std::optional<PlacementDecision>, std::less<>>;

/// Every (cloud, machine type, count) candidate satisfying confidentiality,
/// demand, capacity and deadline constraints, ordered by the planner's
/// preference (cost, duration, cloud id, machine type).
std::vector<PlacementDecision> feasible_options(
    PlacementRequest const& request, std::vector<CloudCapacity> const& clouds);

/// Greedy earliest-deadline-first placement: each activity takes its
/// cheapest feasible candidate given capacity consumed by earlier ones.
PlacementPlan plan_placements(SchedulingProblem const& problem);

/// Order in which plan_placements considers the ready activities.
std::vector<std::size_t> placement_order(SchedulingProblem const& problem);

struct Exhausted {
  friend bool operator==(Exhausted, Exhausted) = default;
};
using ScaleResult = std::variant<int, Exhausted>;

/// Instance count for elastic round `attempt`: exponential doubles and
/// linear adds initial_instances per round, both capped at max_instances.
ScaleResult next_scale(ElasticityPolicy const& policy, int attempt);

struct RescaleDirective {
  int attempt = 0;
  int new_count = 1;
  std::int64_t new_timeout_s = 0;

  friend bool operator==(RescaleDirective const&,
                         RescaleDirective const&) = default;
};
struct Fail {
  friend bool operator==(Fail, Fail) = default;
};
using TimeoutDecision = std::variant<RescaleDirective, Fail>;

/// Reaction to a timed-out round `attempt` of an activity in `state`.
/// Throws kIllegalState unless `state` is TimedOut.
TimeoutDecision on_timeout(ActivityState state, ElasticityPolicy const& policy,
                           int attempt);

/// Per-round timeout in seconds; constant across rounds.
std::int64_t policy_timeout_s(ElasticityPolicy const& policy);

}  // namespace procforge

#endif  // PROCFORGE_SCHEDULER_H_
