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


#include "procforge/report.h"

#include <map>
#include <string>

#include "procforge/json_codec.h"

namespace procforge {

using nlohmann::json;

json instance_json(ProcessInstance const& inst) {
  json activities = json::object();
  for (auto const& [id, a] : inst.activity_states) activities[id] = a;
  json artifacts = json::array();
  for (auto const& ref : inst.available_artifacts) artifacts.push_back(ref);
  json counts = json::object();
  for (auto const& [state, n] : instance_status(inst).counts) {
    counts[std::string(to_string(state))] = n;
  }
  return json{{"instance_id", inst.instance_id},
              {"model_id", inst.model.model_id},
              {"status", std::string(to_string(inst.status))},
              {"sim_time_s", inst.sim_time_s},
              {"last_seq", inst.last_seq},
              {"activities", std::move(activities)},
              {"artifacts", std::move(artifacts)},
              {"counts", std::move(counts)},
              {"state_hash", state_hash(inst)}};
}

namespace {

struct ActivityHistory {
  json timeline = json::array();
  json placements = json::array();
  json attempts = json::array();
};

void mark(ActivityHistory& h, ActivityState state, std::int64_t t) {
  h.timeline.push_back({{"state", std::string(to_string(state))}, {"t", t}});
}

}  // namespace

json export_report(Runtime const& runtime, std::string_view instance_id) {
  Enactment const& engine = runtime.enactment(instance_id);
  ProcessInstance const& inst = engine.instance();

  std::map<std::string, ActivityHistory> history;
  for (auto const& ev : engine.events()) {
    if (ev.kind == EventKind::kInstantiated) {
      for (auto const& a : inst.model.activities) {
        mark(history[a.activity_id], ActivityState::kPending, ev.sim_time_s);
      }
      continue;
    }
    if (!ev.payload.contains("activity")) continue;
    std::string id = ev.payload.at("activity").get<std::string>();
    auto& h = history[id];
    switch (ev.kind) {
      case EventKind::kBecameReady:
        mark(h, ActivityState::kReady, ev.sim_time_s);
        if (inst.model.find_activity(id)->kind == ActivityKind::kManual) {
          mark(h, ActivityState::kAwaitingHuman, ev.sim_time_s);
        }
        break;
      case EventKind::kDispatched:
      case EventKind::kRescaled: {
        mark(h, ActivityState::kScheduled, ev.sim_time_s);
        json placement = ev.payload.at("placement");
        placement["attempt"] = ev.payload.value("attempt", 0);
        h.attempts.push_back(placement.at("instance_count"));
        h.placements.push_back(std::move(placement));
        break;
      }
      case EventKind::kStarted:
        mark(h, ActivityState::kRunning, ev.sim_time_s);
        break;
      case EventKind::kTaskCompleted:
      case EventKind::kHumanCompleted:
        mark(h, ActivityState::kCompleted, ev.sim_time_s);
        break;
      case EventKind::kTimedOut:
        mark(h, ActivityState::kTimedOut, ev.sim_time_s);
        break;
      case EventKind::kSkipped:
        mark(h, ActivityState::kSkipped, ev.sim_time_s);
        break;
      case EventKind::kFailed:
        mark(h, ActivityState::kFailed, ev.sim_time_s);
        break;
      default:
        break;
    }
  }

  json activities = json::array();
  for (auto const& spec : inst.model.activities) {
    auto const& a = inst.activity(spec.activity_id);
    auto& h = history[spec.activity_id];
    Money cost;
    json vms = json::array();
    for (auto const& [attempt, ids] :
         runtime.activity_vms(instance_id, spec.activity_id)) {
      for (auto const& vm : ids) {
        cost += runtime.simulator().accrued_cost(CostScope::instance(vm));
        vms.push_back(runtime.simulator().instance(vm));
      }
    }
    activities.push_back(
        {{"activity_id", spec.activity_id},
         {"kind", std::string(to_string(spec.kind))},
         {"state", std::string(to_string(a.state))},
         {"attempt", a.attempt},
         {"decision_label", a.decision_label ? json(*a.decision_label)
                                             : json(nullptr)},
         {"timeline", std::move(h.timeline)},
         {"placements", std::move(h.placements)},
         {"attempts", std::move(h.attempts)},
         {"vms", std::move(vms)},
         {"cost", money_json(cost)},
         {"cost_micros", cost.micros()}});
  }

  json by_cloud = json::object();
  Money total;
  for (auto const& [cloud, cost] : runtime.instance_cost_by_cloud(instance_id)) {
    by_cloud[cloud] = {{"cost", money_json(cost)},
                       {"cost_micros", cost.micros()}};
    total += cost;
  }
  json counts = json::object();
  for (auto const& [state, n] : instance_status(inst).counts) {
    counts[std::string(to_string(state))] = n;
  }
  return json{{"instance_id", inst.instance_id},
              {"model_id", inst.model.model_id},
              {"status", std::string(to_string(inst.status))},
              {"sim_time_s", inst.sim_time_s},
              {"generated_at_s", runtime.now()},
              {"counts", std::move(counts)},
              {"activities", std::move(activities)},
              {"cost",
               {{"by_cloud", std::move(by_cloud)},
                {"total", money_json(total)},
                {"total_micros", total.micros()}}},
              {"state_hash", state_hash(inst)}};
}

}  // namespace procforge
