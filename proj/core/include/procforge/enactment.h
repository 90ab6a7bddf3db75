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

#ifndef PROCFORGE_ENACTMENT_H_
#define PROCFORGE_ENACTMENT_H_

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "procforge/activity_state.h"
#include "procforge/artifact.h"
#include "procforge/money.h"
#include "procforge/process_model.h"
#include "procforge/scheduler.h"

namespace procforge {

enum class InstanceStatus { kRunning, kCompleted, kFailed };
std::string_view to_string(InstanceStatus status);

struct ActivityInstance {
  std::string activity_id;
  ActivityState state = ActivityState::kPending;
  /// Elastic round index; incremented on each TimedOut -> Scheduled.
  int attempt = 0;
  std::optional<PlacementDecision> placement;
  std::optional<std::string> decision_label;
  std::optional<std::int64_t> started_at_s;
  std::optional<std::int64_t> finished_at_s;

  friend bool operator==(ActivityInstance const&,
                         ActivityInstance const&) = default;
};

struct ProcessInstance {
  std::string instance_id;
  ProcessModel model;
  std::map<std::string, ActivityInstance, std::less<>> activity_states;
  std::set<ArtifactRef> available_artifacts;
  InstanceStatus status = InstanceStatus::kRunning;
  std::int64_t sim_time_s = 0;
  /// Sequence number of the last applied event; 0 before instantiation.
  std::uint64_t last_seq = 0;

  ActivityInstance const& activity(std::string_view id) const;
  bool has_artifact(std::string_view artifact_id) const;
  /// Highest available version of `artifact_id`, or 0.
  int latest_version(std::string_view artifact_id) const;

  friend bool operator==(ProcessInstance const&,
                         ProcessInstance const&) = default;
};

enum class EventKind {
  kInstantiated,
  kBecameReady,
  kDispatched,
  kStarted,
  kHumanCompleted,
  kTaskCompleted,
  kTimedOut,
  kRescaled,
  kSkipped,
  kFailed,
  kInstanceCompleted,
};
std::string_view to_string(EventKind kind);
std::optional<EventKind> event_kind_from_string(std::string_view text);

struct EnactmentEvent {
  /// Per-instance sequence number, contiguous from 1.
  std::uint64_t seq = 0;
  std::string instance_id;
  std::int64_t sim_time_s = 0;
  EventKind kind = EventKind::kInstantiated;
  nlohmann::json payload = nlohmann::json::object();
};

/// Applies one event to `instance`. This is the only place instance state
/// changes, both live and during replay. Throws kCorruptLog when the event
/// is out of sequence or implies an illegal transition.
void apply_event(ProcessInstance& instance, EnactmentEvent const& event);

/// The state of an instance before its Instantiated event.
ProcessInstance blank_instance(std::string instance_id, ProcessModel model);

/// Pending activities whose inputs are available and whose incoming edges
/// are all satisfied or dead, with at least one satisfied.
std::set<std::string> ready_set(ProcessInstance const& instance);

struct StatusSummary {
  InstanceStatus status = InstanceStatus::kRunning;
  std::map<ActivityState, int> counts;
  std::int64_t sim_time_s = 0;
  Money cost_to_date;
};

StatusSummary instance_status(ProcessInstance const& instance);

/// SHA-256 over the canonical form of (activity states sorted by id,
/// available artifacts sorted).
std::string state_hash(ProcessInstance const& instance);
/// The canonical form hashed by state_hash.
std::string canonical_state(ProcessInstance const& instance);

enum class TaskResult { kSucceeded, kTimedOut };

/// Drives one process instance. Every command validates its preconditions,
/// then emits events which are applied through apply_event, so the event
/// log alone reconstructs the instance.
class Enactment {
 public:
  /// Called after each event is applied, with the updated instance.
  using EventSink = std::function<void(EnactmentEvent const&,
                                       ProcessInstance const&)>;

  /// Throws kMissingExternalInput when a declared-external artifact is not
  /// in `external_inputs`, kSchemaError when an input is not declared
  /// external.
  static Enactment instantiate(std::string instance_id, ProcessModel model,
                               std::set<std::string> const& external_inputs,
                               std::int64_t now_s,
                               ArtifactPublisher* publisher = nullptr,
                               EventSink sink = nullptr);

  ProcessInstance const& instance() const { return instance_; }
  std::vector<EnactmentEvent> const& events() const { return events_; }

  /// Skips dead branches, promotes ready activities (manual ones go straight
  /// to AwaitingHuman) and completes the instance when nothing is left.
  void settle(std::int64_t now_s);

  void dispatch(std::string_view activity_id,
                PlacementDecision const& placement, std::int64_t now_s);
  /// Scheduled -> Running once the placement's instances are up.
  void start(std::string_view activity_id,
             std::vector<std::string> const& vm_ids, std::int64_t now_s);
  void complete_manual_task(std::string_view activity_id,
                            std::string_view actor_role,
                            std::optional<std::string> const& decision_label,
                            std::int64_t now_s);
  /// Returns the rescale to perform when a timed-out activity may retry;
  /// nullopt otherwise (success, or the activity failed).
  std::optional<RescaleDirective> on_task_result(std::string_view activity_id,
                                                 TaskResult result,
                                                 std::int64_t now_s);
  /// TimedOut -> Scheduled on the next elastic round.
  void rescale(std::string_view activity_id,
               PlacementDecision const& placement, std::int64_t now_s);

  /// TimedOut -> Failed when the next round can never be placed.
  void abandon(std::string_view activity_id, std::string const& reason,
               std::int64_t now_s);

  StatusSummary status() const { return instance_status(instance_); }

 private:
  Enactment(ProcessInstance instance, ArtifactPublisher* publisher,
            EventSink sink)
      : instance_(std::move(instance)),
        publisher_(publisher),
        sink_(std::move(sink)) {}

  void emit(EventKind kind, nlohmann::json payload, std::int64_t now_s);
  void require_running() const;
  ActivityInstance const& require_state(std::string_view activity_id,
                                        ActivityState expected) const;
  void check_placement(Activity const& activity,
                       PlacementDecision const& placement) const;
  nlohmann::json consumed_inputs(Activity const& activity) const;
  nlohmann::json publish_outputs(Activity const& activity,
                                 nlohmann::json const& inputs,
                                 std::int64_t now_s);
  void emit_skips(std::int64_t now_s);

  ProcessInstance instance_;
  std::vector<EnactmentEvent> events_;
  ArtifactPublisher* publisher_;
  EventSink sink_;
};

}  // namespace procforge

#endif  // PROCFORGE_ENACTMENT_H_
