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


#include "procforge/runtime.h"

#include <algorithm>
#include <cstdio>

#include "procforge/error.h"
#include "procforge/json_codec.h"
#include "yaml_util.h"

namespace procforge {

using nlohmann::json;

ProfileMap parse_profiles(std::string_view text) {
  using internal::YamlReader;
  YAML::Node root = YamlReader::load_node(text, "profiles");
  ProfileMap profiles;
  if (root.IsNull()) return profiles;
  if (!root.IsMap()) {
    throw Error(ErrorCode::kSchemaError,
                "profiles: expected a mapping of activity ids");
  }
  for (auto const& kv : root) {
    std::string id = kv.first.as<std::string>();
    YamlReader r(kv.second, "profiles." + id);
    r.allow_only(
        {"base_duration_s", "serial_fraction", "sync_overhead_s_per_node"});
    TaskProfile p;
    p.base_duration_s = r.required<std::int64_t>("base_duration_s");
    p.serial_fraction = r.optional<double>("serial_fraction").value_or(0.0);
    p.sync_overhead_s_per_node =
        r.optional<double>("sync_overhead_s_per_node").value_or(0.0);
    if (p.base_duration_s < 1 || !(p.serial_fraction >= 0.0) ||
        !(p.serial_fraction <= 1.0) || !(p.sync_overhead_s_per_node >= 0.0)) {
      r.fail("need base_duration_s >= 1, serial_fraction in [0,1], "
             "sync_overhead_s_per_node >= 0");
    }
    profiles[id] = p;
  }
  return profiles;
}

void to_json(json& j, WorkItem const& item) {
  j = json{{"task_id", item.task_id},
           {"instance_id", item.instance_id},
           {"activity_id", item.activity_id},
           {"role", item.role},
           {"guard_options", item.guard_options},
           {"waiting_since_s", item.waiting_since_s}};
}

std::string make_task_id(std::string_view instance_id,
                         std::string_view activity_id) {
  return std::string(instance_id) + ":" + std::string(activity_id);
}

std::pair<std::string, std::string> split_task_id(std::string_view task_id) {
  auto colon = task_id.find(':');
  if (colon == std::string_view::npos || colon == 0 ||
      colon + 1 == task_id.size()) {
    throw Error(ErrorCode::kNotFound,
                "malformed task id '" + std::string(task_id) + "'");
  }
  return {std::string(task_id.substr(0, colon)),
          std::string(task_id.substr(colon + 1))};
}

Runtime::Runtime(std::vector<CloudSpec> topology,
                 std::unique_ptr<ProvenanceStore> store)
    : sim_(std::move(topology)), store_(std::move(store)) {
  if (!store_) store_ = std::make_unique<ProvenanceStore>();
  // Keep instance ids unique across restarts on the same data directory.
  for (auto const& rec : store_->log().read()) {
    unsigned long long n = 0;
    if (std::sscanf(rec.instance_id.c_str(), "inst-%llu", &n) == 1) {
      next_instance_ = std::max<std::uint64_t>(next_instance_, n + 1);
    }
  }
}

std::string Runtime::register_model(ProcessModel model) {
  auto violations = validate(model);
  if (!violations.empty()) throw ValidationError(std::move(violations));
  ProcessModel flat = expand_subworkflows(model, models_);
  std::string id = model.model_id;
  models_.insert_or_assign(id, std::move(model));
  flattened_.insert_or_assign(id, std::move(flat));
  return id;
}

ProcessModel const& Runtime::model(std::string_view model_id) const {
  auto it = models_.find(model_id);
  if (it == models_.end()) {
    throw Error(ErrorCode::kNotFound,
                "unknown model '" + std::string(model_id) + "'");
  }
  return it->second;
}

ProcessModel const& Runtime::flattened_model(std::string_view model_id) const {
  model(model_id);
  return flattened_.find(model_id)->second;
}

std::vector<std::string> Runtime::model_ids() const {
  std::vector<std::string> ids;
  for (auto const& [id, _] : models_) ids.push_back(id);
  return ids;
}

std::string Runtime::create_instance(std::string_view model_id,
                                     std::set<std::string> const& external_inputs,
                                     ProfileMap profiles) {
  ProcessModel const& flat = flattened_model(model_id);
  char buf[32];
  std::snprintf(buf, sizeof buf, "inst-%04llu",
                static_cast<unsigned long long>(next_instance_));
  std::string id = buf;

  Run r;
  r.profiles = std::move(profiles);
  auto inserted = runs_.emplace(id, std::move(r)).first;
  Run* slot = &inserted->second;
  auto sink = [this, slot](EnactmentEvent const& ev,
                           ProcessInstance const& live) {
    EventRecord rec = store_->append_event(ev.instance_id, ev.sim_time_s,
                                           std::string(to_string(ev.kind)),
                                           ev.payload);
    slot->global_seqs.push_back(rec.global_seq);
    if (observer_) observer_(rec, live);
  };
  try {
    slot->engine = std::make_unique<Enactment>(Enactment::instantiate(
        id, flat, external_inputs, sim_.now(), store_.get(), sink));
  } catch (...) {
    runs_.erase(inserted);
    throw;
  }
  ++next_instance_;
  pump();
  return id;
}

Runtime::Run& Runtime::run(std::string_view instance_id) {
  auto it = runs_.find(instance_id);
  if (it == runs_.end()) {
    throw Error(ErrorCode::kNotFound,
                "unknown instance '" + std::string(instance_id) + "'");
  }
  return it->second;
}

Runtime::Run const& Runtime::run(std::string_view instance_id) const {
  return const_cast<Runtime*>(this)->run(instance_id);
}

Enactment const& Runtime::enactment(std::string_view instance_id) const {
  return *run(instance_id).engine;
}

std::vector<std::string> Runtime::instance_ids() const {
  std::vector<std::string> ids;
  for (auto const& [id, _] : runs_) ids.push_back(id);
  return ids;
}

std::vector<std::uint64_t> const& Runtime::global_seqs(
    std::string_view instance_id) const {
  return run(instance_id).global_seqs;
}

void Runtime::complete_task(std::string_view task_id, std::string_view role,
                            std::optional<std::string> const& decision_label) {
  auto [instance_id, activity_id] = split_task_id(task_id);
  Run& r = run(instance_id);
  if (!r.engine->instance().model.find_activity(activity_id)) {
    throw Error(ErrorCode::kNotFound,
                "unknown task '" + std::string(task_id) + "'");
  }
  r.engine->complete_manual_task(activity_id, role, decision_label,
                                 sim_.now());
  pump();
}

void Runtime::advance_clock(std::int64_t seconds) {
  if (seconds < 0) {
    throw Error(ErrorCode::kClockRegression,
                "cannot advance the clock by a negative amount");
  }
  std::int64_t const target = sim_.now() + seconds;
  pump();
  while (auto next = sim_.next_event_time()) {
    if (*next > target) break;
    handle(sim_.advance_clock(*next));
    pump();
  }
  sim_.advance_clock(target);
  pump();
}

bool Runtime::step() {
  pump();
  auto next = sim_.next_event_time();
  if (!next) return false;
  handle(sim_.advance_clock(*next));
  pump();
  return true;
}

void Runtime::handle(std::vector<SimEvent> const& events) {
  for (auto const& ev : events) {
    if (ev.kind == SimEventKind::kInstanceRunning) continue;
    auto it = tasks_.find(ev.task_id);
    if (it == tasks_.end()) continue;
    TaskRef ref = it->second;
    tasks_.erase(it);
    Run& r = run(ref.instance_id);
    if (r.engine->instance().status != InstanceStatus::kRunning) continue;
    auto directive = r.engine->on_task_result(
        ref.activity_id,
        ev.kind == SimEventKind::kTaskSucceeded ? TaskResult::kSucceeded
                                                : TaskResult::kTimedOut,
        sim_.now());
    if (directive) {
      rescales_.push_back({ref.instance_id, ref.activity_id, *directive});
    }
  }
}

TaskProfile Runtime::profile_for(Run const& r,
                                 std::string_view activity_id) const {
  auto it = r.profiles.find(activity_id);
  return it == r.profiles.end() ? TaskProfile{} : it->second;
}

PlacementRequest Runtime::request_for(Run const& r,
                                      std::string_view activity_id,
                                      int attempt) const {
  ProcessModel const& m = r.engine->instance().model;
  Activity const& a = *m.find_activity(activity_id);
  return PlacementRequest{a, profile_for(r, activity_id), attempt,
                          is_effectively_confidential(m, a)};
}

std::vector<CloudCapacity> Runtime::capacities() const {
  std::vector<CloudCapacity> out;
  for (auto const& c : sim_.clouds()) {
    out.push_back({c, sim_.free_cpus(c.cloud_id)});
  }
  return out;
}

void Runtime::provision_for(Run& r, PlacementDecision const& placement,
                            int attempt) {
  auto vms = sim_.provision(placement.cloud_id, placement.machine_type,
                            placement.instance_count);
  auto& ids = r.vms[placement.activity_id][attempt];
  for (auto const& vm : vms) ids.push_back(vm.vm_id);
}

void Runtime::pump() {
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto& [id, r] : runs_) r.engine->settle(sim_.now());
    changed |= place_rescales();
    changed |= place_ready();
    changed |= start_scheduled();
    // Zero-latency provisioning and zero-length tasks fire at the current
    // time.
    if (auto next = sim_.next_event_time(); next && *next <= sim_.now()) {
      handle(sim_.advance_clock(sim_.now()));
      changed = true;
    }
  }
}

bool Runtime::place_rescales() {
  bool changed = false;
  std::vector<PendingRescale> waiting;
  for (auto& p : rescales_) {
    Run& r = run(p.instance_id);
    auto const& state = r.engine->instance().activity(p.activity_id);
    if (r.engine->instance().status != InstanceStatus::kRunning ||
        state.state != ActivityState::kTimedOut) {
      continue;
    }
    PlacementRequest req = request_for(r, p.activity_id, p.directive.attempt);
    auto options = feasible_options(req, capacities());
    if (options.empty()) {
      std::vector<CloudCapacity> empty;
      for (auto const& c : sim_.clouds()) empty.push_back({c, c.capacity_cpus});
      if (feasible_options(req, empty).empty()) {
        r.engine->abandon(p.activity_id,
                          "no cloud can host elastic round " +
                              std::to_string(p.directive.attempt),
                          sim_.now());
        changed = true;
      } else {
        waiting.push_back(p);
      }
      continue;
    }
    r.engine->rescale(p.activity_id, options.front(), sim_.now());
    provision_for(r, options.front(), p.directive.attempt);
    changed = true;
  }
  rescales_ = std::move(waiting);
  return changed;
}

bool Runtime::place_ready() {
  SchedulingProblem problem;
  problem.clouds = capacities();
  std::map<std::string, std::pair<std::string, std::string>> keys;
  for (auto const& [id, r] : runs_) {
    auto const& inst = r.engine->instance();
    if (inst.status != InstanceStatus::kRunning) continue;
    for (auto const& [aid, a] : inst.activity_states) {
      if (a.state != ActivityState::kReady) continue;
      if (inst.model.find_activity(aid)->kind != ActivityKind::kAutomated) {
        continue;
      }
      PlacementRequest req = request_for(r, aid, a.attempt);
      // Activity ids are only unique within an instance.
      req.activity.activity_id = make_task_id(id, aid);
      keys[req.activity.activity_id] = {id, aid};
      problem.ready.push_back(std::move(req));
    }
  }
  if (problem.ready.empty()) return false;
  PlacementPlan plan = plan_placements(problem);
  bool changed = false;
  for (std::size_t i : placement_order(problem)) {
    auto const& key = problem.ready[i].activity.activity_id;
    auto const& decision = plan.at(key);
    if (!decision) continue;
    auto const& [instance_id, activity_id] = keys.at(key);
    PlacementDecision placement = *decision;
    placement.activity_id = activity_id;
    Run& r = run(instance_id);
    r.engine->dispatch(activity_id, placement, sim_.now());
    provision_for(r, placement,
                  r.engine->instance().activity(activity_id).attempt);
    changed = true;
  }
  return changed;
}

bool Runtime::start_scheduled() {
  bool changed = false;
  for (auto& [id, r] : runs_) {
    auto const& inst = r.engine->instance();
    if (inst.status != InstanceStatus::kRunning) continue;
    std::vector<std::string> scheduled;
    for (auto const& [aid, a] : inst.activity_states) {
      if (a.state == ActivityState::kScheduled) scheduled.push_back(aid);
    }
    for (auto const& aid : scheduled) {
      int attempt = inst.activity(aid).attempt;
      auto const& vms = r.vms[aid][attempt];
      bool up = !vms.empty() &&
                std::all_of(vms.begin(), vms.end(), [&](auto const& vm) {
                  return sim_.instance(vm).state == VmState::kRunning;
                });
      if (!up) continue;
      Activity const& spec = *inst.model.find_activity(aid);
      std::optional<std::int64_t> timeout;
      if (spec.elasticity) timeout = policy_timeout_s(*spec.elasticity);
      r.engine->start(aid, vms, sim_.now());
      TaskOutcome outcome = sim_.run_task(vms, profile_for(r, aid), timeout);
      tasks_[outcome.task_id] = TaskRef{id, aid};
      changed = true;
    }
  }
  return changed;
}

std::vector<WorkItem> Runtime::worklist(
    std::optional<std::string> role, std::optional<std::string> instance) const {
  std::vector<WorkItem> items;
  for (auto const& [id, r] : runs_) {
    if (instance && *instance != id) continue;
    auto const& inst = r.engine->instance();
    if (inst.status != InstanceStatus::kRunning) continue;
    for (auto const& [aid, a] : inst.activity_states) {
      if (a.state != ActivityState::kAwaitingHuman) continue;
      Activity const& spec = *inst.model.find_activity(aid);
      if (role && *role != spec.role_id) continue;
      WorkItem item;
      item.task_id = make_task_id(id, aid);
      item.instance_id = id;
      item.activity_id = aid;
      item.role = spec.role_id;
      for (auto const& e : inst.model.edges) {
        if (e.from_activity == aid && e.guard) {
          item.guard_options.push_back(*e.guard);
        }
      }
      item.waiting_since_s = a.started_at_s.value_or(inst.sim_time_s);
      items.push_back(std::move(item));
    }
  }
  return items;
}

Money Runtime::instance_cost(std::string_view instance_id) const {
  Money total;
  for (auto const& [cloud, cost] : instance_cost_by_cloud(instance_id)) {
    total += cost;
  }
  return total;
}

std::map<std::string, Money> Runtime::instance_cost_by_cloud(
    std::string_view instance_id) const {
  std::map<std::string, Money> out;
  for (auto const& [aid, attempts] : run(instance_id).vms) {
    for (auto const& [attempt, vms] : attempts) {
      for (auto const& vm : vms) {
        out[sim_.instance(vm).cloud_id] +=
            sim_.accrued_cost(CostScope::instance(vm));
      }
    }
  }
  return out;
}

std::map<int, std::vector<std::string>> Runtime::activity_vms(
    std::string_view instance_id, std::string_view activity_id) const {
  auto const& r = run(instance_id);
  auto it = r.vms.find(std::string(activity_id));
  if (it == r.vms.end()) return {};
  return it->second;
}

}  // namespace procforge
