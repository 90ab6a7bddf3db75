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

#include "procforge/cloud_simulator.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "procforge/error.h"
#include "yaml_util.h"

namespace procforge {

std::string_view to_string(CloudKind kind) {
  return kind == CloudKind::kPublic ? "public" : "private";
}

std::string_view to_string(VmState state) {
  switch (state) {
    case VmState::kProvisioning:
      return "Provisioning";
    case VmState::kRunning:
      return "Running";
    case VmState::kTerminated:
      return "Terminated";
  }
  return "Unknown";
}

std::string_view to_string(SimEventKind kind) {
  switch (kind) {
    case SimEventKind::kInstanceRunning:
      return "InstanceRunning";
    case SimEventKind::kTaskSucceeded:
      return "TaskSucceeded";
    case SimEventKind::kTaskTimedOut:
      return "TaskTimedOut";
  }
  return "Unknown";
}

Catalog default_catalog() {
  Catalog c;
  c["small"] = {"small", 1, 2.0, Money::from_micros(50'000)};
  c["medium"] = {"medium", 2, 4.0, Money::from_micros(100'000)};
  c["large"] = {"large", 4, 8.0, Money::from_micros(200'000)};
  return c;
}

std::vector<CloudSpec> default_topology() {
  return {
      CloudSpec{"private", CloudKind::kPrivate, default_catalog(), 8, 120},
      CloudSpec{"public", CloudKind::kPublic, default_catalog(), std::nullopt,
                120},
  };
}

std::vector<CloudSpec> parse_topology(std::string_view text) {
  using internal::YamlReader;
  YAML::Node root = YamlReader::load_node(text, "topology");
  if (!root.IsSequence()) {
    throw Error(ErrorCode::kSchemaError,
                "topology: expected a list of clouds");
  }
  std::vector<CloudSpec> clouds;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < root.size(); ++i) {
    YamlReader r(root[i], "topology[" + std::to_string(i) + "]");
    r.allow_only({"cloud_id", "kind", "capacity_cpus",
                  "provisioning_latency_s", "catalog"});
    CloudSpec c;
    c.cloud_id = r.required<std::string>("cloud_id");
    if (!ids.insert(c.cloud_id).second) {
      r.fail("duplicate cloud_id '" + c.cloud_id + "'");
    }
    auto kind = r.required<std::string>("kind");
    if (kind == "public") {
      c.kind = CloudKind::kPublic;
    } else if (kind == "private") {
      c.kind = CloudKind::kPrivate;
    } else {
      r.fail("kind must be 'public' or 'private'");
    }
    c.capacity_cpus = r.optional<int>("capacity_cpus");
    if (c.capacity_cpus && *c.capacity_cpus < 1) {
      r.fail("capacity_cpus must be positive");
    }
    if (c.kind == CloudKind::kPrivate && !c.capacity_cpus) {
      r.fail("private clouds need a finite capacity_cpus");
    }
    c.provisioning_latency_s =
        r.optional<std::int64_t>("provisioning_latency_s").value_or(120);
    if (c.provisioning_latency_s < 0) {
      r.fail("provisioning_latency_s must be non-negative");
    }
    for (auto const& m : r.list("catalog", /*required=*/true)) {
      m.allow_only({"name", "cpus", "memory_gb", "price_per_hour"});
      MachineType t;
      t.name = m.required<std::string>("name");
      t.cpus = m.required<int>("cpus");
      t.memory_gb = m.required<double>("memory_gb");
      double price = m.required<double>("price_per_hour");
      if (t.cpus < 1 || !(t.memory_gb > 0) || !(price >= 0)) {
        m.fail("machine type needs cpus >= 1, memory_gb > 0, price >= 0");
      }
      t.price_per_hour = Money::from_units(price);
      if (!c.catalog.emplace(t.name, t).second) {
        m.fail("duplicate machine type '" + t.name + "'");
      }
    }
    if (c.catalog.empty()) r.fail("catalog must not be empty");
    clouds.push_back(std::move(c));
  }
  return clouds;
}

std::int64_t task_duration(TaskProfile const& profile, int nodes) {
  if (nodes < 1) {
    throw Error(ErrorCode::kIllegalState,
                "task needs at least one node, got " + std::to_string(nodes));
  }
  double const b = static_cast<double>(profile.base_duration_s);
  double const s = profile.serial_fraction;
  double const n = nodes;
  double const d = s * b + (1.0 - s) * b / n +
                   profile.sync_overhead_s_per_node * (n - 1.0);
  // Absorb representation error so that exact integers stay exact.
  return static_cast<std::int64_t>(std::ceil(d - 1e-9 * std::max(1.0, d)));
}

SimEvent const& SimClock::schedule(std::int64_t fire_time_s, SimEvent event) {
  event.fire_time_s = fire_time_s;
  event.order = next_order_++;
  auto key = std::make_pair(fire_time_s, event.order);
  return queue_.emplace(key, std::move(event)).first->second;
}

std::optional<std::int64_t> SimClock::next_fire_time() const {
  if (queue_.empty()) return std::nullopt;
  return queue_.begin()->first.first;
}

std::vector<SimEvent> SimClock::advance(std::int64_t until_s) {
  if (until_s < now_s_) {
    throw Error(ErrorCode::kClockRegression,
                "cannot move clock from " + std::to_string(now_s_) + " to " +
                    std::to_string(until_s));
  }
  std::vector<SimEvent> fired;
  while (!queue_.empty() && queue_.begin()->first.first <= until_s) {
    fired.push_back(std::move(queue_.begin()->second));
    queue_.erase(queue_.begin());
  }
  now_s_ = until_s;
  return fired;
}

CloudSimulator::CloudSimulator(std::vector<CloudSpec> clouds)
    : clouds_(std::move(clouds)) {}

CloudSpec const& CloudSimulator::cloud(std::string_view cloud_id) const {
  for (auto const& c : clouds_) {
    if (c.cloud_id == cloud_id) return c;
  }
  throw Error(ErrorCode::kNotFound,
              "unknown cloud '" + std::string(cloud_id) + "'");
}

int CloudSimulator::committed_cpus(std::string_view cloud_id) const {
  auto const& c = cloud(cloud_id);
  int used = 0;
  for (auto const& [_, vm] : vms_) {
    if (vm.cloud_id == cloud_id && vm.state != VmState::kTerminated) {
      used += c.catalog.at(vm.machine_type).cpus;
    }
  }
  return used;
}

std::optional<int> CloudSimulator::free_cpus(std::string_view cloud_id) const {
  auto const& c = cloud(cloud_id);
  if (!c.capacity_cpus) return std::nullopt;
  return *c.capacity_cpus - committed_cpus(cloud_id);
}

std::vector<CloudInstance> CloudSimulator::provision(
    std::string_view cloud_id, std::string_view machine_type, int count) {
  auto const& c = cloud(cloud_id);
  auto mt = c.catalog.find(machine_type);
  if (mt == c.catalog.end()) {
    throw Error(ErrorCode::kUnknownMachineType,
                "cloud '" + c.cloud_id + "' has no machine type '" +
                    std::string(machine_type) + "'");
  }
  if (count < 1) {
    throw Error(ErrorCode::kIllegalState, "instance count must be positive");
  }
  if (c.capacity_cpus) {
    long long wanted = static_cast<long long>(mt->second.cpus) * count;
    if (committed_cpus(cloud_id) + wanted > *c.capacity_cpus) {
      throw Error(ErrorCode::kCapacityExceeded,
                  "cloud '" + c.cloud_id + "' cannot fit " +
                      std::to_string(wanted) + " more cpus (capacity " +
                      std::to_string(*c.capacity_cpus) + ", committed " +
                      std::to_string(committed_cpus(cloud_id)) + ")");
    }
  }
  std::vector<CloudInstance> created;
  for (int i = 0; i < count; ++i) {
    char suffix[32];
    std::snprintf(suffix, sizeof suffix, "-vm%06llu",
                  static_cast<unsigned long long>(next_vm_++));
    CloudInstance vm;
    vm.vm_id = c.cloud_id + suffix;
    vm.cloud_id = c.cloud_id;
    vm.machine_type = mt->second.name;
    vm.requested_at_s = now();
    SimEvent ev;
    ev.kind = SimEventKind::kInstanceRunning;
    ev.vm_id = vm.vm_id;
    clock_.schedule(now() + c.provisioning_latency_s, ev);
    vms_.emplace(vm.vm_id, vm);
    created.push_back(std::move(vm));
  }
  return created;
}

TaskOutcome CloudSimulator::run_task(std::vector<std::string> const& vm_ids,
                                     TaskProfile const& profile,
                                     std::optional<std::int64_t> timeout_s) {
  if (vm_ids.empty()) {
    throw Error(ErrorCode::kInstanceNotRunning, "no instances given");
  }
  std::string const& cloud_id = instance(vm_ids.front()).cloud_id;
  std::set<std::string> distinct;
  for (auto const& id : vm_ids) {
    auto const& vm = instance(id);
    if (vm.state != VmState::kRunning || busy_.count(id) ||
        !distinct.insert(id).second) {
      throw Error(ErrorCode::kInstanceNotRunning,
                  "instance '" + id + "' is not available to run a task");
    }
    if (vm.cloud_id != cloud_id) {
      throw Error(ErrorCode::kMixedClouds,
                  "instances span clouds '" + cloud_id + "' and '" +
                      vm.cloud_id + "'");
    }
  }
  TaskOutcome outcome;
  outcome.task_id = next_task_++;
  outcome.duration_s =
      task_duration(profile, static_cast<int>(vm_ids.size()));
  outcome.succeeded = !timeout_s || outcome.duration_s <= *timeout_s;
  outcome.fires_at_s =
      now() + (outcome.succeeded ? outcome.duration_s : *timeout_s);

  SimEvent ev;
  ev.kind = outcome.succeeded ? SimEventKind::kTaskSucceeded
                              : SimEventKind::kTaskTimedOut;
  ev.task_id = outcome.task_id;
  clock_.schedule(outcome.fires_at_s, ev);
  for (auto const& id : vm_ids) busy_[id] = outcome.task_id;
  tasks_[outcome.task_id] = Task{vm_ids};
  return outcome;
}

std::vector<SimEvent> CloudSimulator::advance_clock(std::int64_t until_s) {
  if (until_s < now()) {
    throw Error(ErrorCode::kClockRegression,
                "cannot move clock from " + std::to_string(now()) + " to " +
                    std::to_string(until_s));
  }
  std::vector<SimEvent> fired;
  // Events are applied one fire time at a time so that instance state seen
  // by later events is consistent with earlier ones.
  while (auto next = clock_.next_fire_time()) {
    if (*next > until_s) break;
    for (auto& ev : clock_.advance(*next)) {
      if (ev.kind == SimEventKind::kInstanceRunning) {
        auto& vm = vms_.at(ev.vm_id);
        vm.state = VmState::kRunning;
        vm.started_at_s = ev.fire_time_s;
      } else {
        auto task = tasks_.find(ev.task_id);
        for (auto const& id : task->second.vm_ids) {
          auto& vm = vms_.at(id);
          vm.state = VmState::kTerminated;
          vm.terminated_at_s = ev.fire_time_s;
          busy_.erase(id);
        }
        tasks_.erase(task);
      }
      fired.push_back(std::move(ev));
    }
  }
  clock_.advance(until_s);
  return fired;
}

MachineType const& CloudSimulator::machine(CloudInstance const& vm) const {
  return cloud(vm.cloud_id).catalog.at(vm.machine_type);
}

Money CloudSimulator::instance_cost(CloudInstance const& vm) const {
  if (!vm.started_at_s) return {};
  std::int64_t end = vm.terminated_at_s.value_or(now());
  std::int64_t seconds = end - *vm.started_at_s;
  std::int64_t hours = (seconds + 3599) / 3600;
  return hours * machine(vm).price_per_hour;
}

Money CloudSimulator::accrued_cost(CostScope const& scope) const {
  switch (scope.kind_) {
    case CostScope::Kind::kInstance:
      return instance_cost(instance(scope.id_));
    case CostScope::Kind::kCloud: {
      cloud(scope.id_);
      Money total;
      for (auto const& [_, vm] : vms_) {
        if (vm.cloud_id == scope.id_) total += instance_cost(vm);
      }
      return total;
    }
    case CostScope::Kind::kAll:
      break;
  }
  Money total;
  for (auto const& [_, vm] : vms_) total += instance_cost(vm);
  return total;
}

CloudInstance const& CloudSimulator::instance(std::string_view vm_id) const {
  auto it = vms_.find(vm_id);
  if (it == vms_.end()) {
    throw Error(ErrorCode::kNotFound,
                "unknown instance '" + std::string(vm_id) + "'");
  }
  return it->second;
}

std::vector<CloudInstance> CloudSimulator::instances() const {
  std::vector<CloudInstance> out;
  for (auto const& [_, vm] : vms_) out.push_back(vm);
  return out;
}

}  // namespace procforge
