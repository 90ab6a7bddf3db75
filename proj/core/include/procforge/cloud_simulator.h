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

#ifndef PROCFORGE_CLOUD_SIMULATOR_H_
#define PROCFORGE_CLOUD_SIMULATOR_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "procforge/money.h"

namespace procforge {

enum class CloudKind { kPublic, kPrivate };
std::string_view to_string(CloudKind kind);

struct MachineType {
  std::string name;
  int cpus = 1;
  double memory_gb = 1.0;
  Money price_per_hour;

  friend bool operator==(MachineType const&, MachineType const&) = default;
};

using Catalog = std::map<std::string, MachineType, std::less<>>;

struct CloudSpec {
  std::string cloud_id;
  CloudKind kind = CloudKind::kPublic;
  Catalog catalog;
  /// nullopt means unbounded.
  std::optional<int> capacity_cpus;
  std::int64_t provisioning_latency_s = 120;

  friend bool operator==(CloudSpec const&, CloudSpec const&) = default;
};

/// small{1 cpu, 2 GB, 0.05/h}, medium{2, 4, 0.10/h}, large{4, 8, 0.20/h}.
Catalog default_catalog();
/// One unbounded public cloud "public" and one 8-cpu private cloud
/// "private", both with the default catalog and 120 s provisioning latency.
std::vector<CloudSpec> default_topology();

/// Parses a cloud topology document: a YAML list of clouds. Throws
/// kSyntaxError / kSchemaError.
std::vector<CloudSpec> parse_topology(std::string_view text);

enum class VmState { kProvisioning, kRunning, kTerminated };
std::string_view to_string(VmState state);

struct CloudInstance {
  std::string vm_id;
  std::string cloud_id;
  std::string machine_type;
  VmState state = VmState::kProvisioning;
  std::int64_t requested_at_s = 0;
  /// Set when the instance becomes Running; billing starts here.
  std::optional<std::int64_t> started_at_s;
  std::optional<std::int64_t> terminated_at_s;

  friend bool operator==(CloudInstance const&, CloudInstance const&) = default;
};

/// Parallel duration model of a task: d(n) = s*B + (1-s)*B/n + c*(n-1).
struct TaskProfile {
  std::int64_t base_duration_s = 60;
  double serial_fraction = 0.0;
  double sync_overhead_s_per_node = 0.0;

  friend bool operator==(TaskProfile const&, TaskProfile const&) = default;
};

/// d(n) rounded up to whole seconds. `nodes` must be >= 1.
std::int64_t task_duration(TaskProfile const& profile, int nodes);

enum class SimEventKind { kInstanceRunning, kTaskSucceeded, kTaskTimedOut };
std::string_view to_string(SimEventKind kind);

struct SimEvent {
  std::int64_t fire_time_s = 0;
  /// Insertion order; breaks ties between events at the same time.
  std::uint64_t order = 0;
  SimEventKind kind = SimEventKind::kInstanceRunning;
  std::string vm_id;         // kInstanceRunning
  std::uint64_t task_id = 0;  // task outcomes

  friend bool operator==(SimEvent const&, SimEvent const&) = default;
};

struct TaskOutcome {
  std::uint64_t task_id = 0;
  bool succeeded = false;
  std::int64_t fires_at_s = 0;
  std::int64_t duration_s = 0;
};

/// Pending events ordered by (fire time, insertion order).
class SimClock {
 public:
  std::int64_t now() const { return now_s_; }
  SimEvent const& schedule(std::int64_t fire_time_s, SimEvent event);
  std::optional<std::int64_t> next_fire_time() const;
  /// Pops every event with fire time <= until_s, in order, and moves the
  /// clock to until_s. Throws kClockRegression when until_s < now().
  std::vector<SimEvent> advance(std::int64_t until_s);
  std::size_t pending() const { return queue_.size(); }

 private:
  std::int64_t now_s_ = 0;
  std::uint64_t next_order_ = 0;
  std::map<std::pair<std::int64_t, std::uint64_t>, SimEvent> queue_;
};

class CostScope {
 public:
  static CostScope all() { return CostScope(Kind::kAll, {}); }
  static CostScope cloud(std::string id) {
    return CostScope(Kind::kCloud, std::move(id));
  }
  static CostScope instance(std::string vm_id) {
    return CostScope(Kind::kInstance, std::move(vm_id));
  }

 private:
  friend class CloudSimulator;
  enum class Kind { kAll, kCloud, kInstance };
  CostScope(Kind kind, std::string id) : kind_(kind), id_(std::move(id)) {}
  Kind kind_;
  std::string id_;
};

/// Discrete-event simulation of a set of public/private clouds. Simulated
/// time is the only clock.
class CloudSimulator {
 public:
  explicit CloudSimulator(std::vector<CloudSpec> clouds);

  std::vector<CloudSpec> const& clouds() const { return clouds_; }
  CloudSpec const& cloud(std::string_view cloud_id) const;
  std::int64_t now() const { return clock_.now(); }

  /// Creates `count` instances in Provisioning; each becomes Running after
  /// the cloud's provisioning latency. Throws kNotFound (cloud),
  /// kUnknownMachineType, kCapacityExceeded.
  std::vector<CloudInstance> provision(std::string_view cloud_id,
                                       std::string_view machine_type,
                                       int count);

  /// Starts a task on Running instances of one cloud and schedules its
  /// outcome: success after task_duration(profile, n) if that fits within
  /// `timeout_s`, otherwise a timeout after `timeout_s`. The instances are
  /// terminated when the outcome fires.
  TaskOutcome run_task(std::vector<std::string> const& vm_ids,
                       TaskProfile const& profile,
                       std::optional<std::int64_t> timeout_s);

  std::vector<SimEvent> advance_clock(std::int64_t until_s);
  std::optional<std::int64_t> next_event_time() const {
    return clock_.next_fire_time();
  }

  /// Sum over billed instances of ceil(running seconds / 3600) * hourly
  /// price. Instances still running are billed up to now().
  Money accrued_cost(CostScope const& scope) const;

  /// Free cpus on a bounded cloud; nullopt when unbounded.
  std::optional<int> free_cpus(std::string_view cloud_id) const;
  /// Cpus held by instances that are not Terminated.
  int committed_cpus(std::string_view cloud_id) const;

  CloudInstance const& instance(std::string_view vm_id) const;
  std::vector<CloudInstance> instances() const;

 private:
  struct Task {
    std::vector<std::string> vm_ids;
  };

  MachineType const& machine(CloudInstance const& vm) const;
  Money instance_cost(CloudInstance const& vm) const;

  std::vector<CloudSpec> clouds_;
  SimClock clock_;
  std::map<std::string, CloudInstance, std::less<>> vms_;
  std::map<std::string, std::uint64_t, std::less<>> busy_;  // vm -> task
  std::map<std::uint64_t, Task> tasks_;
  std::uint64_t next_vm_ = 1;
  std::uint64_t next_task_ = 1;
};

}  // namespace procforge

#endif  // PROCFORGE_CLOUD_SIMULATOR_H_
