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


#ifndef PROCFORGE_RUNTIME_H_
#define PROCFORGE_RUNTIME_H_

#include <nlohmann/json.hpp>

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "procforge/cloud_simulator.h"
#include "procforge/enactment.h"
#include "procforge/process_model.h"
#include "procforge/provenance_store.h"
#include "procforge/scheduler.h"

namespace procforge {

using ProfileMap = std::map<std::string, TaskProfile, std::less<>>;

/// Parses a YAML mapping activity_id -> {base_duration_s, serial_fraction,
/// sync_overhead_s_per_node}.
ProfileMap parse_profiles(std::string_view text);

/// A human task waiting in some instance.
struct WorkItem {
  std::string task_id;
  std::string instance_id;
  std::string activity_id;
  std::string role;
  std::vector<std::string> guard_options;
  std::int64_t waiting_since_s = 0;
};

void to_json(nlohmann::json& j, WorkItem const& item);

/// "<instance_id>:<activity_id>"; activity ids may contain ':' but instance
/// ids never do.
std::string make_task_id(std::string_view instance_id,
                         std::string_view activity_id);
std::pair<std::string, std::string> split_task_id(std::string_view task_id);

/// Wires the engine, the cloud simulator, the scheduler and the provenance
/// store together and drives every instance under one simulated clock.
/// Not thread-safe; callers serialize access.
class Runtime {
 public:
  Runtime(std::vector<CloudSpec> topology,
          std::unique_ptr<ProvenanceStore> store);

  /// Validates and stores a model. Sub-workflow references resolve against
  /// models registered earlier. Throws kValidationFailed listing the
  /// violations, or the expansion errors. Re-registering an id replaces it
  /// for future instances.
  std::string register_model(ProcessModel model);
  ProcessModel const& model(std::string_view model_id) const;
  /// Flattened form used by instances.
  ProcessModel const& flattened_model(std::string_view model_id) const;
  std::vector<std::string> model_ids() const;

  std::string create_instance(std::string_view model_id,
                              std::set<std::string> const& external_inputs,
                              ProfileMap profiles = {});
  Enactment const& enactment(std::string_view instance_id) const;
  ProcessInstance const& instance(std::string_view instance_id) const {
    return enactment(instance_id).instance();
  }
  std::vector<std::string> instance_ids() const;
  /// Global log sequence numbers of one instance's events, by local seq.
  std::vector<std::uint64_t> const& global_seqs(
      std::string_view instance_id) const;

  void complete_task(std::string_view task_id, std::string_view role,
                     std::optional<std::string> const& decision_label);

  /// Moves simulated time forward by `seconds`, handling every event due on
  /// the way in order.
  void advance_clock(std::int64_t seconds);
  /// Advances to the next pending simulator event. Returns false when none.
  bool step();
  std::int64_t now() const { return sim_.now(); }

  std::vector<WorkItem> worklist(std::optional<std::string> role = {},
                                 std::optional<std::string> instance = {}) const;

  /// Cost of the cloud instances used by one process instance.
  Money instance_cost(std::string_view instance_id) const;
  std::map<std::string, Money> instance_cost_by_cloud(
      std::string_view instance_id) const;
  /// VM ids used per attempt of one activity.
  std::map<int, std::vector<std::string>> activity_vms(
      std::string_view instance_id, std::string_view activity_id) const;

  /// Observes every event right after it is applied and logged.
  using EventObserver = std::function<void(EventRecord const&,
                                           ProcessInstance const&)>;
  void set_event_observer(EventObserver observer) {
    observer_ = std::move(observer);
  }

  CloudSimulator const& simulator() const { return sim_; }
  ProvenanceStore const& store() const { return *store_; }
  ProvenanceStore& store() { return *store_; }

 private:
  struct Run {
    std::unique_ptr<Enactment> engine;
    ProfileMap profiles;
    std::vector<std::uint64_t> global_seqs;
    // activity -> attempt -> vms
    std::map<std::string, std::map<int, std::vector<std::string>>> vms;
  };
  struct TaskRef {
    std::string instance_id;
    std::string activity_id;
  };
  struct PendingRescale {
    std::string instance_id;
    std::string activity_id;
    RescaleDirective directive;
  };

  Run& run(std::string_view instance_id);
  Run const& run(std::string_view instance_id) const;
  TaskProfile profile_for(Run const& r, std::string_view activity_id) const;
  PlacementRequest request_for(Run const& r, std::string_view activity_id,
                               int attempt) const;
  std::vector<CloudCapacity> capacities() const;
  void handle(std::vector<SimEvent> const& events);
  /// Settles instances, places ready work and starts tasks whose machines
  /// are up, until nothing changes at the current time.
  void pump();
  bool place_rescales();
  bool place_ready();
  bool start_scheduled();
  void provision_for(Run& r, PlacementDecision const& placement, int attempt);

  CloudSimulator sim_;
  std::unique_ptr<ProvenanceStore> store_;
  std::map<std::string, ProcessModel, std::less<>> models_;
  ModelLibrary flattened_;
  std::map<std::string, Run, std::less<>> runs_;
  std::map<std::uint64_t, TaskRef> tasks_;
  std::vector<PendingRescale> rescales_;
  std::uint64_t next_instance_ = 1;
  EventObserver observer_;
};

}  // namespace procforge

#endif  // PROCFORGE_RUNTIME_H_
