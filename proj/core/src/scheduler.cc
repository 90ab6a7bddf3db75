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

#include "procforge/scheduler.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <tuple>

#include "procforge/error.h"

namespace procforge {

namespace {

// Instance count of round k before the max_instances cap, saturated just
// above `ceiling` so large k cannot overflow.
std::int64_t uncapped_scale(ElasticityPolicy const& p, int k,
                            std::int64_t ceiling) {
  std::int64_t n = p.initial_instances;
  if (p.scaling_type == ScalingType::kLinear) {
    std::int64_t steps = static_cast<std::int64_t>(k) + 1;
    if (n > 0 && steps > ceiling / n) return ceiling + 1;
    return n * steps;
  }
  for (int i = 0; i < k; ++i) {
    if (n > ceiling) return ceiling + 1;
    n *= 2;
  }
  return n;
}

bool preferred(PlacementDecision const& a, PlacementDecision const& b) {
  return std::tie(a.estimated_cost, a.estimated_duration_s, a.cloud_id,
                  a.machine_type) < std::tie(b.estimated_cost,
                                             b.estimated_duration_s,
                                             b.cloud_id, b.machine_type);
}

}  // namespace

ScaleResult next_scale(ElasticityPolicy const& policy, int attempt) {
  if (attempt < 0) {
    throw Error(ErrorCode::kIllegalState, "attempt must be non-negative");
  }
  if (attempt >= policy.max_rounds) return Exhausted{};
  std::int64_t const cap = policy.max_instances;
  if (attempt > 0 && uncapped_scale(policy, attempt - 1, cap) >= cap) {
    return Exhausted{};
  }
  return static_cast<int>(std::min(uncapped_scale(policy, attempt, cap), cap));
}

std::int64_t policy_timeout_s(ElasticityPolicy const& policy) {
  return std::max<std::int64_t>(1, std::llround(policy.timeout_hours * 3600.0));
}

TimeoutDecision on_timeout(ActivityState state, ElasticityPolicy const& policy,
                           int attempt) {
  if (state != ActivityState::kTimedOut) {
    throw Error(ErrorCode::kIllegalState,
                "rescale requested for an activity in state " +
                    std::string(to_string(state)));
  }
  auto next = next_scale(policy, attempt + 1);
  if (std::holds_alternative<Exhausted>(next)) return Fail{};
  return RescaleDirective{attempt + 1, std::get<int>(next),
                          policy_timeout_s(policy)};
}

std::vector<PlacementDecision> feasible_options(
    PlacementRequest const& request, std::vector<CloudCapacity> const& clouds) {
  Activity const& a = request.activity;
  int count = 1;
  if (a.elasticity) {
    auto scale = next_scale(*a.elasticity, request.attempt);
    if (std::holds_alternative<Exhausted>(scale)) return {};
    count = std::get<int>(scale);
  }
  std::int64_t const duration = task_duration(request.profile, count);
  if (a.deadline_hours &&
      static_cast<double>(duration) > *a.deadline_hours * 3600.0) {
    return {};
  }
  std::int64_t const hours = (duration + 3599) / 3600;

  std::vector<PlacementDecision> out;
  for (auto const& cloud : clouds) {
    if (request.confidential && cloud.spec.kind == CloudKind::kPublic) continue;
    for (auto const& [name, mt] : cloud.spec.catalog) {
      if (a.elasticity && name != a.elasticity->machine_type) continue;
      long long const cpus = static_cast<long long>(mt.cpus) * count;
      if (a.demand && (cpus < a.demand->cpus ||
                       mt.memory_gb < a.demand->memory_gb)) {
        continue;
      }
      if (cloud.free_cpus && cpus > *cloud.free_cpus) continue;
      PlacementDecision d;
      d.activity_id = a.activity_id;
      d.cloud_id = cloud.spec.cloud_id;
      d.cloud_kind = cloud.spec.kind;
      d.machine_type = name;
      d.instance_count = count;
      d.estimated_duration_s = duration;
      d.estimated_cost = (count * hours) * mt.price_per_hour;
      out.push_back(std::move(d));
    }
  }
  std::sort(out.begin(), out.end(), preferred);
  return out;
}

std::vector<std::size_t> placement_order(SchedulingProblem const& problem) {
  std::vector<std::size_t> order(problem.ready.size());
  std::iota(order.begin(), order.end(), 0);
  auto key = [&](std::size_t i) {
    auto const& a = problem.ready[i].activity;
    double deadline = a.deadline_hours.value_or(
        std::numeric_limits<double>::infinity());
    return std::make_tuple(!a.deadline_hours.has_value(), deadline,
                           std::cref(a.activity_id));
  };
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return key(x) < key(y); });
  return order;
}

PlacementPlan plan_placements(SchedulingProblem const& problem) {
  std::vector<CloudCapacity> clouds = problem.clouds;
  std::sort(clouds.begin(), clouds.end(),
            [](CloudCapacity const& a, CloudCapacity const& b) {
              return a.spec.cloud_id < b.spec.cloud_id;
            });
  PlacementPlan plan;
  for (std::size_t i : placement_order(problem)) {
    auto const& request = problem.ready[i];
    auto options = feasible_options(request, clouds);
    if (options.empty()) {
      plan[request.activity.activity_id] = std::nullopt;
      continue;
    }
    PlacementDecision best = options.front();
    for (auto& cloud : clouds) {
      if (cloud.spec.cloud_id == best.cloud_id && cloud.free_cpus) {
        *cloud.free_cpus -=
            cloud.spec.catalog.at(best.machine_type).cpus * best.instance_count;
      }
    }
    plan[request.activity.activity_id] = std::move(best);
  }
  return plan;
}

}  // namespace procforge
