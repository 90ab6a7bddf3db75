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

#include "procforge/enactment.h"

#include <algorithm>

#include "procforge/digest.h"
#include "procforge/error.h"
#include "procforge/json_codec.h"

namespace procforge {

using nlohmann::json;

std::string_view to_string(ActivityState state) {
  switch (state) {
    case ActivityState::kPending:
      return "Pending";
    case ActivityState::kReady:
      return "Ready";
    case ActivityState::kScheduled:
      return "Scheduled";
    case ActivityState::kRunning:
      return "Running";
    case ActivityState::kAwaitingHuman:
      return "AwaitingHuman";
    case ActivityState::kTimedOut:
      return "TimedOut";
    case ActivityState::kCompleted:
      return "Completed";
    case ActivityState::kFailed:
      return "Failed";
    case ActivityState::kSkipped:
      return "Skipped";
  }
  return "Unknown";
}

std::optional<ActivityState> activity_state_from_string(std::string_view text) {
  for (auto s : kAllActivityStates) {
    if (to_string(s) == text) return s;
  }
  return std::nullopt;
}

std::string_view to_string(InstanceStatus status) {
  switch (status) {
    case InstanceStatus::kRunning:
      return "Running";
    case InstanceStatus::kCompleted:
      return "Completed";
    case InstanceStatus::kFailed:
      return "Failed";
  }
  return "Unknown";
}

namespace {

constexpr EventKind kAllEventKinds[] = {
    EventKind::kInstantiated,   EventKind::kBecameReady,
    EventKind::kDispatched,     EventKind::kStarted,
    EventKind::kHumanCompleted, EventKind::kTaskCompleted,
    EventKind::kTimedOut,       EventKind::kRescaled,
    EventKind::kSkipped,        EventKind::kFailed,
    EventKind::kInstanceCompleted,
};

[[noreturn]] void corrupt(EnactmentEvent const& ev, std::string const& why) {
  throw Error(ErrorCode::kCorruptLog,
              "event " + std::to_string(ev.seq) + " (" +
                  std::string(to_string(ev.kind)) + "): " + why);
}

enum class EdgeStatus { kOpen, kSatisfied, kDead };

EdgeStatus edge_status(ProcessInstance const& inst, Edge const& e) {
  auto const& pred = inst.activity(e.from_activity);
  if (pred.state == ActivityState::kSkipped) return EdgeStatus::kDead;
  if (pred.state != ActivityState::kCompleted) return EdgeStatus::kOpen;
  if (e.guard && e.guard != pred.decision_label) return EdgeStatus::kDead;
  return EdgeStatus::kSatisfied;
}

// A pending activity can never run when every incoming edge is dead, or when
// one of its inputs comes from a skipped producer.
bool is_dead(ProcessInstance const& inst, Activity const& a) {
  bool any_incoming = false;
  bool all_dead = true;
  for (auto const& e : inst.model.edges) {
    if (e.to_activity != a.activity_id) continue;
    any_incoming = true;
    all_dead = all_dead && edge_status(inst, e) == EdgeStatus::kDead;
  }
  if (any_incoming && all_dead) return true;
  for (auto const& input : a.inputs) {
    if (inst.has_artifact(input)) continue;
    for (auto const& producer : inst.model.activities) {
      if (std::find(producer.outputs.begin(), producer.outputs.end(), input) !=
              producer.outputs.end() &&
          inst.activity(producer.activity_id).state ==
              ActivityState::kSkipped) {
        return true;
      }
    }
  }
  return false;
}

void add_outputs(ProcessInstance& inst, EnactmentEvent const& ev) {
  for (auto const& out : ev.payload.at("outputs")) {
    inst.available_artifacts.insert(out.get<ArtifactRef>());
  }
}

}  // namespace

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::kInstantiated:
      return "Instantiated";
    case EventKind::kBecameReady:
      return "BecameReady";
    case EventKind::kDispatched:
      return "Dispatched";
    case EventKind::kStarted:
      return "Started";
    case EventKind::kHumanCompleted:
      return "HumanCompleted";
    case EventKind::kTaskCompleted:
      return "TaskCompleted";
    case EventKind::kTimedOut:
      return "TimedOut";
    case EventKind::kRescaled:
      return "Rescaled";
    case EventKind::kSkipped:
      return "Skipped";
    case EventKind::kFailed:
      return "Failed";
    case EventKind::kInstanceCompleted:
      return "InstanceCompleted";
  }
  return "Unknown";
}

std::optional<EventKind> event_kind_from_string(std::string_view text) {
  for (auto k : kAllEventKinds) {
    if (to_string(k) == text) return k;
  }
  return std::nullopt;
}

ActivityInstance const& ProcessInstance::activity(std::string_view id) const {
  auto it = activity_states.find(id);
  if (it == activity_states.end()) {
    throw Error(ErrorCode::kNotFound, "instance '" + instance_id +
                                          "' has no activity '" +
                                          std::string(id) + "'");
  }
  return it->second;
}

bool ProcessInstance::has_artifact(std::string_view artifact_id) const {
  return latest_version(artifact_id) > 0;
}

int ProcessInstance::latest_version(std::string_view artifact_id) const {
  int best = 0;
  for (auto it = available_artifacts.lower_bound(
           ArtifactRef{std::string(artifact_id), 0});
       it != available_artifacts.end() && it->artifact_id == artifact_id;
       ++it) {
    best = std::max(best, it->version);
  }
  return best;
}

ProcessInstance blank_instance(std::string instance_id, ProcessModel model) {
  ProcessInstance inst;
  inst.instance_id = std::move(instance_id);
  for (auto const& a : model.activities) {
    ActivityInstance state;
    state.activity_id = a.activity_id;
    inst.activity_states[a.activity_id] = std::move(state);
  }
  inst.model = std::move(model);
  return inst;
}

void apply_event(ProcessInstance& inst, EnactmentEvent const& ev) {
  if (ev.instance_id != inst.instance_id) {
    corrupt(ev, "belongs to instance '" + ev.instance_id + "'");
  }
  if (ev.seq != inst.last_seq + 1) {
    corrupt(ev, "expected sequence number " +
                    std::to_string(inst.last_seq + 1));
  }
  if (ev.sim_time_s < inst.sim_time_s) corrupt(ev, "time moves backwards");
  if ((ev.kind == EventKind::kInstantiated) != (inst.last_seq == 0)) {
    corrupt(ev, "Instantiated must be the first event, and only the first");
  }
  if (inst.status != InstanceStatus::kRunning) {
    corrupt(ev, "instance already finished");
  }

  auto target = [&]() -> std::pair<ActivityInstance&, Activity const&> {
    std::string id;
    try {
      id = ev.payload.at("activity").get<std::string>();
    } catch (json::exception const&) {
      corrupt(ev, "payload lacks an activity id");
    }
    auto it = inst.activity_states.find(id);
    auto const* spec = inst.model.find_activity(id);
    if (it == inst.activity_states.end() || !spec) {
      corrupt(ev, "unknown activity '" + id + "'");
    }
    return {it->second, *spec};
  };
  auto move_to = [&](ActivityInstance& a, ActivityState to) {
    if (!is_legal_transition(a.state, to)) {
      corrupt(ev, "illegal transition of '" + a.activity_id + "' from " +
                      std::string(to_string(a.state)) + " to " +
                      std::string(to_string(to)));
    }
    a.state = to;
  };

  try {
    switch (ev.kind) {
      case EventKind::kInstantiated:
        for (auto const& in : ev.payload.at("external_inputs")) {
          inst.available_artifacts.insert(in.get<ArtifactRef>());
        }
        break;
      case EventKind::kBecameReady: {
        auto [a, spec] = target();
        move_to(a, ActivityState::kReady);
        if (spec.kind == ActivityKind::kManual) {
          move_to(a, ActivityState::kAwaitingHuman);
          a.started_at_s = ev.sim_time_s;
        }
        break;
      }
      case EventKind::kDispatched: {
        auto [a, spec] = target();
        if (spec.kind != ActivityKind::kAutomated) {
          corrupt(ev, "only automated activities are dispatched");
        }
        move_to(a, ActivityState::kScheduled);
        a.placement = ev.payload.at("placement").get<PlacementDecision>();
        break;
      }
      case EventKind::kStarted: {
        auto [a, spec] = target();
        move_to(a, ActivityState::kRunning);
        a.started_at_s = ev.sim_time_s;
        break;
      }
      case EventKind::kTaskCompleted: {
        auto [a, spec] = target();
        move_to(a, ActivityState::kCompleted);
        a.finished_at_s = ev.sim_time_s;
        add_outputs(inst, ev);
        break;
      }
      case EventKind::kHumanCompleted: {
        auto [a, spec] = target();
        move_to(a, ActivityState::kCompleted);
        a.finished_at_s = ev.sim_time_s;
        auto const& label = ev.payload.at("decision_label");
        if (!label.is_null()) a.decision_label = label.get<std::string>();
        add_outputs(inst, ev);
        break;
      }
      case EventKind::kTimedOut: {
        auto [a, spec] = target();
        move_to(a, ActivityState::kTimedOut);
        break;
      }
      case EventKind::kRescaled: {
        auto [a, spec] = target();
        int next = ev.payload.at("attempt").get<int>();
        if (next != a.attempt + 1) corrupt(ev, "attempt must grow by one");
        move_to(a, ActivityState::kScheduled);
        a.attempt = next;
        a.placement = ev.payload.at("placement").get<PlacementDecision>();
        break;
      }
      case EventKind::kSkipped: {
        auto [a, spec] = target();
        move_to(a, ActivityState::kSkipped);
        break;
      }
      case EventKind::kFailed: {
        auto [a, spec] = target();
        move_to(a, ActivityState::kFailed);
        a.finished_at_s = ev.sim_time_s;
        inst.status = InstanceStatus::kFailed;
        break;
      }
      case EventKind::kInstanceCompleted:
        for (auto const& [id, a] : inst.activity_states) {
          if (a.state != ActivityState::kCompleted &&
              a.state != ActivityState::kSkipped) {
            corrupt(ev, "activity '" + id + "' is still " +
                            std::string(to_string(a.state)));
          }
        }
        inst.status = InstanceStatus::kCompleted;
        break;
    }
  } catch (json::exception const& e) {
    corrupt(ev, std::string("malformed payload: ") + e.what());
  }
  inst.last_seq = ev.seq;
  inst.sim_time_s = ev.sim_time_s;
}

std::set<std::string> ready_set(ProcessInstance const& inst) {
  std::set<std::string> ready;
  if (inst.status != InstanceStatus::kRunning || inst.last_seq == 0) {
    return ready;
  }
  for (auto const& a : inst.model.activities) {
    if (inst.activity(a.activity_id).state != ActivityState::kPending) continue;
    bool inputs_ok = std::all_of(
        a.inputs.begin(), a.inputs.end(),
        [&](std::string const& id) { return inst.has_artifact(id); });
    if (!inputs_ok) continue;
    bool any_incoming = false;
    bool any_satisfied = false;
    bool any_open = false;
    for (auto const& e : inst.model.edges) {
      if (e.to_activity != a.activity_id) continue;
      any_incoming = true;
      switch (edge_status(inst, e)) {
        case EdgeStatus::kOpen:
          any_open = true;
          break;
        case EdgeStatus::kSatisfied:
          any_satisfied = true;
          break;
        case EdgeStatus::kDead:
          break;
      }
    }
    if (!any_open && (!any_incoming || any_satisfied)) {
      ready.insert(a.activity_id);
    }
  }
  return ready;
}

StatusSummary instance_status(ProcessInstance const& inst) {
  StatusSummary s;
  s.status = inst.status;
  s.sim_time_s = inst.sim_time_s;
  for (auto const& [_, a] : inst.activity_states) ++s.counts[a.state];
  return s;
}

std::string canonical_state(ProcessInstance const& inst) {
  json activities = json::array();
  for (auto const& [_, a] : inst.activity_states) activities.push_back(a);
  json artifacts = json::array();
  for (auto const& ref : inst.available_artifacts) artifacts.push_back(ref);
  return json{{"activities", activities}, {"artifacts", artifacts}}.dump();
}

std::string state_hash(ProcessInstance const& inst) {
  return sha256_hex(canonical_state(inst));
}

// ---------------------------------------------------------------------------
// Enactment commands
// ---------------------------------------------------------------------------

Enactment Enactment::instantiate(std::string instance_id, ProcessModel model,
                                 std::set<std::string> const& external_inputs,
                                 std::int64_t now_s,
                                 ArtifactPublisher* publisher,
                                 EventSink sink) {
  for (auto const& id : external_inputs) {
    auto const* art = model.find_artifact(id);
    if (!art || !art->external) {
      throw Error(ErrorCode::kSchemaError,
                  "'" + id + "' is not a declared external artifact");
    }
  }
  for (auto const& art : model.artifacts) {
    if (art.external && !external_inputs.count(art.artifact_id)) {
      throw Error(ErrorCode::kMissingExternalInput,
                  "external input '" + art.artifact_id + "' not supplied");
    }
  }

  Enactment e(blank_instance(instance_id, std::move(model)), publisher,
              std::move(sink));
  e.instance_.sim_time_s = now_s;
  json inputs = json::array();
  for (auto const& id : external_inputs) {
    std::string content = "external:" + id;
    Producer producer{e.instance_.instance_id, "", 0};
    PublishedArtifact pub;
    if (publisher) {
      pub = publisher->publish(id, content, producer, {}, now_s);
    } else {
      pub = {ArtifactRef{id, 1}, sha256_hex(content)};
    }
    json ref = pub.ref;
    ref["hash"] = pub.content_hash;
    inputs.push_back(std::move(ref));
  }
  e.emit(EventKind::kInstantiated,
         {{"model_id", e.instance_.model.model_id},
          {"external_inputs", std::move(inputs)}},
         now_s);
  if (e.instance_.model.activities.empty()) {
    e.emit(EventKind::kInstanceCompleted, json::object(), now_s);
  }
  return e;
}

void Enactment::emit(EventKind kind, json payload, std::int64_t now_s) {
  if (now_s < instance_.sim_time_s) {
    throw Error(ErrorCode::kClockRegression,
                "command at t=" + std::to_string(now_s) +
                    " precedes instance time " +
                    std::to_string(instance_.sim_time_s));
  }
  EnactmentEvent ev;
  ev.seq = instance_.last_seq + 1;
  ev.instance_id = instance_.instance_id;
  ev.sim_time_s = now_s;
  ev.kind = kind;
  ev.payload = std::move(payload);
  apply_event(instance_, ev);
  events_.push_back(ev);
  if (sink_) sink_(events_.back(), instance_);
}

void Enactment::require_running() const {
  if (instance_.status != InstanceStatus::kRunning) {
    throw Error(ErrorCode::kIllegalState,
                "instance '" + instance_.instance_id + "' is " +
                    std::string(to_string(instance_.status)));
  }
}

ActivityInstance const& Enactment::require_state(
    std::string_view activity_id, ActivityState expected) const {
  auto const& a = instance_.activity(activity_id);
  if (a.state != expected) {
    throw Error(ErrorCode::kIllegalState,
                "activity '" + a.activity_id + "' is " +
                    std::string(to_string(a.state)) + ", expected " +
                    std::string(to_string(expected)));
  }
  return a;
}

void Enactment::check_placement(Activity const& activity,
                                PlacementDecision const& placement) const {
  if (placement.activity_id != activity.activity_id) {
    throw Error(ErrorCode::kIllegalState,
                "placement is for '" + placement.activity_id + "', not '" +
                    activity.activity_id + "'");
  }
  if (placement.instance_count < 1) {
    throw Error(ErrorCode::kConstraintViolation,
                "placement needs at least one instance");
  }
  if (placement.cloud_kind == CloudKind::kPublic &&
      is_effectively_confidential(instance_.model, activity)) {
    throw Error(ErrorCode::kConstraintViolation,
                "confidential activity '" + activity.activity_id +
                    "' cannot run on public cloud '" + placement.cloud_id +
                    "'");
  }
}

json Enactment::consumed_inputs(Activity const& activity) const {
  json inputs = json::array();
  for (auto const& id : activity.inputs) {
    inputs.push_back(ArtifactRef{id, instance_.latest_version(id)});
  }
  return inputs;
}

json Enactment::publish_outputs(Activity const& activity, json const& inputs,
                                std::int64_t now_s) {
  auto const& state = instance_.activity(activity.activity_id);
  std::vector<ArtifactRef> consumed = inputs.get<std::vector<ArtifactRef>>();
  json outputs = json::array();
  for (auto const& id : activity.outputs) {
    std::string content = json{{"activity", activity.activity_id},
                               {"artifact", id},
                               {"attempt", state.attempt},
                               {"inputs", inputs},
                               {"model", instance_.model.model_id}}
                              .dump();
    Producer producer{instance_.instance_id, activity.activity_id,
                      state.attempt};
    PublishedArtifact pub;
    if (publisher_) {
      pub = publisher_->publish(id, content, producer, consumed, now_s);
    } else {
      pub = {ArtifactRef{id, instance_.latest_version(id) + 1},
             sha256_hex(content)};
    }
    json ref = pub.ref;
    ref["hash"] = pub.content_hash;
    outputs.push_back(std::move(ref));
  }
  return outputs;
}

void Enactment::emit_skips(std::int64_t now_s) {
  bool changed = true;
  while (changed && instance_.status == InstanceStatus::kRunning) {
    changed = false;
    for (auto const& a : instance_.model.activities) {
      if (instance_.activity(a.activity_id).state == ActivityState::kPending &&
          is_dead(instance_, a)) {
        emit(EventKind::kSkipped, {{"activity", a.activity_id}}, now_s);
        changed = true;
      }
    }
  }
}

void Enactment::settle(std::int64_t now_s) {
  if (instance_.status != InstanceStatus::kRunning) return;
  emit_skips(now_s);
  for (auto const& id : ready_set(instance_)) {
    emit(EventKind::kBecameReady, {{"activity", id}}, now_s);
  }
  bool done = std::all_of(
      instance_.activity_states.begin(), instance_.activity_states.end(),
      [](auto const& kv) {
        return kv.second.state == ActivityState::kCompleted ||
               kv.second.state == ActivityState::kSkipped;
      });
  if (done) emit(EventKind::kInstanceCompleted, json::object(), now_s);
}

void Enactment::dispatch(std::string_view activity_id,
                         PlacementDecision const& placement,
                         std::int64_t now_s) {
  require_running();
  require_state(activity_id, ActivityState::kReady);
  auto const& spec = *instance_.model.find_activity(activity_id);
  if (spec.kind != ActivityKind::kAutomated) {
    throw Error(ErrorCode::kIllegalState,
                "only automated activities can be dispatched");
  }
  check_placement(spec, placement);
  emit(EventKind::kDispatched,
       {{"activity", spec.activity_id}, {"placement", placement}}, now_s);
}

void Enactment::start(std::string_view activity_id,
                      std::vector<std::string> const& vm_ids,
                      std::int64_t now_s) {
  require_running();
  auto const& a = require_state(activity_id, ActivityState::kScheduled);
  auto const& spec = *instance_.model.find_activity(activity_id);
  emit(EventKind::kStarted,
       {{"activity", spec.activity_id},
        {"attempt", a.attempt},
        {"inputs", consumed_inputs(spec)},
        {"vms", vm_ids}},
       now_s);
}

void Enactment::complete_manual_task(
    std::string_view activity_id, std::string_view actor_role,
    std::optional<std::string> const& decision_label, std::int64_t now_s) {
  require_running();
  require_state(activity_id, ActivityState::kAwaitingHuman);
  auto const& spec = *instance_.model.find_activity(activity_id);
  if (spec.role_id != actor_role) {
    throw Error(ErrorCode::kRoleMismatch,
                "activity '" + spec.activity_id + "' belongs to role '" +
                    spec.role_id + "', not '" + std::string(actor_role) + "'");
  }
  std::vector<std::string> guards;
  for (auto const& e : instance_.model.edges) {
    if (e.from_activity == spec.activity_id && e.guard) {
      guards.push_back(*e.guard);
    }
  }
  if (!guards.empty() &&
      (!decision_label || std::find(guards.begin(), guards.end(),
                                    *decision_label) == guards.end())) {
    throw Error(ErrorCode::kUnknownDecisionLabel,
                "decision '" + spec.activity_id + "' does not offer label '" +
                    decision_label.value_or("") + "'");
  }
  json inputs = consumed_inputs(spec);
  json outputs = publish_outputs(spec, inputs, now_s);
  emit(EventKind::kHumanCompleted,
       {{"activity", spec.activity_id},
        {"role", std::string(actor_role)},
        {"decision_label",
         decision_label ? json(*decision_label) : json(nullptr)},
        {"inputs", std::move(inputs)},
        {"outputs", std::move(outputs)}},
       now_s);
  emit_skips(now_s);
}

std::optional<RescaleDirective> Enactment::on_task_result(
    std::string_view activity_id, TaskResult result, std::int64_t now_s) {
  require_running();
  auto const& a = require_state(activity_id, ActivityState::kRunning);
  auto const& spec = *instance_.model.find_activity(activity_id);
  int const attempt = a.attempt;
  if (result == TaskResult::kSucceeded) {
    json inputs = consumed_inputs(spec);
    json outputs = publish_outputs(spec, inputs, now_s);
    emit(EventKind::kTaskCompleted,
         {{"activity", spec.activity_id},
          {"attempt", attempt},
          {"inputs", std::move(inputs)},
          {"outputs", std::move(outputs)}},
         now_s);
    return std::nullopt;
  }
  emit(EventKind::kTimedOut,
       {{"activity", spec.activity_id}, {"attempt", attempt}}, now_s);
  TimeoutDecision decision = Fail{};
  if (spec.elasticity) {
    decision = on_timeout(ActivityState::kTimedOut, *spec.elasticity, attempt);
  }
  if (auto const* rescale = std::get_if<RescaleDirective>(&decision)) {
    return *rescale;
  }
  emit(EventKind::kFailed,
       {{"activity", spec.activity_id},
        {"reason", spec.elasticity ? "elastic rounds exhausted"
                                   : "timed out without elasticity policy"}},
       now_s);
  return std::nullopt;
}

void Enactment::rescale(std::string_view activity_id,
                        PlacementDecision const& placement,
                        std::int64_t now_s) {
  require_running();
  auto const& a = require_state(activity_id, ActivityState::kTimedOut);
  auto const& spec = *instance_.model.find_activity(activity_id);
  if (!spec.elasticity) {
    throw Error(ErrorCode::kIllegalState,
                "activity '" + spec.activity_id + "' has no elasticity policy");
  }
  auto next = next_scale(*spec.elasticity, a.attempt + 1);
  auto const* count = std::get_if<int>(&next);
  if (!count || *count != placement.instance_count) {
    throw Error(ErrorCode::kIllegalState,
                "rescale of '" + spec.activity_id +
                    "' does not match the next elastic round");
  }
  check_placement(spec, placement);
  emit(EventKind::kRescaled,
       {{"activity", spec.activity_id},
        {"attempt", a.attempt + 1},
        {"placement", placement}},
       now_s);
}

void Enactment::abandon(std::string_view activity_id,
                        std::string const& reason, std::int64_t now_s) {
  require_running();
  auto const& a = require_state(activity_id, ActivityState::kTimedOut);
  emit(EventKind::kFailed, {{"activity", a.activity_id}, {"reason", reason}},
       now_s);
}

}  // namespace procforge
