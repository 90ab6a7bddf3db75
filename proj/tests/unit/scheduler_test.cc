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


#include <gtest/gtest.h>

#include "oracles.h"
#include "procforge/scheduler.h"
#include "random_models.h"
#include "test_util.h"

namespace procforge {
namespace {

CloudCapacity bounded(std::string id, CloudKind kind, std::optional<int> free,
                      Catalog catalog = default_catalog()) {
  CloudSpec spec{std::move(id), kind, std::move(catalog), free, 0};
  return {spec, free};
}

PlacementRequest request(std::string id, std::int64_t duration_s,
                         bool confidential = false) {
  PlacementRequest r;
  r.activity.activity_id = std::move(id);
  r.activity.kind = ActivityKind::kAutomated;
  r.activity.role_id = "ci";
  r.profile = {duration_s, 0.0, 0.0};
  r.confidential = confidential;
  return r;
}

ElasticityPolicy policy(ScalingType type, int initial, int rounds, int cap) {
  return {"medium", initial, 1.0, type, rounds, cap};
}

TEST(FeasibleOptions, ConfidentialOnlyPrivate) {
  auto options = feasible_options(
      request("a", 600, true),
      {bounded("pub", CloudKind::kPublic, std::nullopt),
       bounded("priv", CloudKind::kPrivate, 8)});
  ASSERT_FALSE(options.empty());
  for (auto const& o : options) {
    EXPECT_EQ(o.cloud_id, "priv");
    EXPECT_EQ(o.cloud_kind, CloudKind::kPrivate);
  }
}

TEST(FeasibleOptions, DemandFiltersMachineTypes) {
  Catalog catalog = default_catalog();
  catalog.erase("large");
  auto r = request("a", 600);
  r.activity.demand = ResourceDemand{2, 1.0};
  auto options =
      feasible_options(r, {bounded("pub", CloudKind::kPublic, std::nullopt, catalog)});
  ASSERT_EQ(options.size(), 1u);
  EXPECT_EQ(options[0].machine_type, "medium");
}

TEST(FeasibleOptions, DemandCountsAllNodesButMemoryPerNode) {
  auto r = request("a", 600);
  r.activity.elasticity = ElasticityPolicy{"small", 4, 1.0,
                                           ScalingType::kLinear, 1, 4};
  r.activity.demand = ResourceDemand{4, 2.0};
  EXPECT_EQ(feasible_options(r, {bounded("p", CloudKind::kPublic, std::nullopt)})
                .size(),
            1u);
  r.activity.demand = ResourceDemand{4, 3.0};
  EXPECT_TRUE(
      feasible_options(r, {bounded("p", CloudKind::kPublic, std::nullopt)}).empty());
}

TEST(FeasibleOptions, DeadlineInfeasible) {
  auto r = request("a", 7200);
  r.activity.deadline_hours = 1.0;
  EXPECT_TRUE(feasible_options(r, {bounded("p", CloudKind::kPublic, std::nullopt),
                                   bounded("q", CloudKind::kPrivate, 8)})
                  .empty());
}

TEST(FeasibleOptions, PrivateCapacityRespected) {
  auto r = request("a", 600);
  r.activity.elasticity = policy(ScalingType::kExponential, 2, 3, 8);
  r.attempt = 2;  // 8 medium nodes = 16 cpus
  EXPECT_TRUE(feasible_options(r, {bounded("q", CloudKind::kPrivate, 8)}).empty());
  r.attempt = 1;  // 4 nodes = 8 cpus
  auto options = feasible_options(r, {bounded("q", CloudKind::kPrivate, 8)});
  ASSERT_EQ(options.size(), 1u);
  EXPECT_EQ(options[0].instance_count, 4);
}

TEST(FeasibleOptions, CostInvariant) {
  testing::Rng rng(1);
  for (int i = 0; i < 500; ++i) {
    auto r = request("a", testing::uniform(rng, 1, 20000));
    r.profile.serial_fraction = 0.25;
    r.profile.sync_overhead_s_per_node = 3.0;
    if (testing::chance(rng, 50)) {
      r.activity.elasticity = ElasticityPolicy{
          testing::chance(rng, 50) ? "small" : "large",
          static_cast<int>(testing::uniform(rng, 1, 3)), 1.0,
          ScalingType::kLinear, 3, 9};
      r.attempt = static_cast<int>(testing::uniform(rng, 0, 2));
    }
    auto clouds = std::vector<CloudCapacity>{
        bounded("p", CloudKind::kPublic, std::nullopt)};
    for (auto const& o : feasible_options(r, clouds)) {
      auto price = clouds[0].spec.catalog.at(o.machine_type).price_per_hour;
      std::int64_t hours = (o.estimated_duration_s + 3599) / 3600;
      EXPECT_EQ(o.estimated_cost, (o.instance_count * hours) * price);
      EXPECT_EQ(o.estimated_duration_s, task_duration(r.profile, o.instance_count));
      EXPECT_GE(o.instance_count, 1);
    }
  }
}

TEST(PlanPlacements, MinimumCostPick) {
  Catalog catalog = default_catalog();
  catalog.erase("small");
  SchedulingProblem p;
  p.ready = {request("a", 1800)};
  p.clouds = {bounded("pub", CloudKind::kPublic, std::nullopt, catalog)};
  auto plan = plan_placements(p);
  ASSERT_TRUE(plan.at("a"));
  EXPECT_EQ(plan.at("a")->machine_type, "medium");
  EXPECT_EQ(plan.at("a")->estimated_cost.micros(), 100'000);
}

TEST(PlanPlacements, CheapestCloudWins) {
  Catalog cheap = default_catalog();
  for (auto& [name, t] : cheap) {
    t.price_per_hour = Money::from_micros(t.price_per_hour.micros() / 2);
  }
  SchedulingProblem p;
  p.ready = {request("a", 1800)};
  p.clouds = {bounded("a-pub", CloudKind::kPublic, std::nullopt),
              bounded("z-priv", CloudKind::kPrivate, 8, cheap)};
  auto plan = plan_placements(p);
  EXPECT_EQ(plan.at("a")->cloud_id, "z-priv");
  EXPECT_EQ(plan.at("a")->estimated_cost.micros(), 25'000);
}

TEST(PlanPlacements, LexicographicTieBreak) {
  SchedulingProblem p;
  p.ready = {request("x", 1800)};
  p.clouds = {bounded("b", CloudKind::kPublic, std::nullopt),
              bounded("a", CloudKind::kPublic, std::nullopt)};
  EXPECT_EQ(plan_placements(p).at("x")->cloud_id, "a");
}

TEST(PlanPlacements, EdfConsumesPrivateCapacityFirst) {
  SchedulingProblem p;
  auto early = request("zz-early", 600, true);
  early.activity.deadline_hours = 1.0;
  early.activity.demand = ResourceDemand{4, 1.0};
  auto late = request("aa-late", 600, true);
  late.activity.demand = ResourceDemand{4, 1.0};
  p.ready = {late, early};
  p.clouds = {bounded("priv", CloudKind::kPrivate, 4),
              bounded("pub", CloudKind::kPublic, std::nullopt)};
  auto plan = plan_placements(p);
  ASSERT_TRUE(plan.at("zz-early"));
  EXPECT_EQ(plan.at("zz-early")->cloud_id, "priv");
  EXPECT_FALSE(plan.at("aa-late"));
}

TEST(PlanPlacements, OrderIsDeadlineThenId) {
  SchedulingProblem p;
  auto a = request("a", 60);
  auto b = request("b", 60);
  b.activity.deadline_hours = 3.0;
  auto c = request("c", 60);
  c.activity.deadline_hours = 1.0;
  auto d = request("d", 60);
  d.activity.deadline_hours = 1.0;
  p.ready = {a, b, d, c};
  std::vector<std::string> order;
  for (auto i : placement_order(p)) order.push_back(p.ready[i].activity.activity_id);
  EXPECT_EQ(order, (std::vector<std::string>{"c", "d", "b", "a"}));
}

TEST(PlanPlacements, DeterministicAndOptimalOnUncoupledProblems) {
  testing::Rng rng(21);
  int checked = 0;
  for (int i = 0; i < 400; ++i) {
    ProcessModel m = testing::random_model(rng, "p", {1, 4, true, true});
    auto profiles = testing::random_profiles(rng, m);
    SchedulingProblem p;
    for (auto const& spec : testing::random_topology(rng)) {
      p.clouds.push_back({spec, spec.capacity_cpus});
    }
    for (auto const& a : m.activities) {
      if (a.kind != ActivityKind::kAutomated) continue;
      PlacementRequest r;
      r.activity = a;
      r.profile = profiles[a.activity_id];
      r.confidential = is_effectively_confidential(m, a);
      p.ready.push_back(r);
    }
    auto plan = plan_placements(p);
    EXPECT_EQ(plan, plan_placements(p));
    if (!testing::capacity_uncoupled(p)) continue;
    auto best = testing::exhaustive_min_cost(p);
    bool all = true;
    std::int64_t cost = 0;
    for (auto const& [id, d] : plan) {
      all = all && d.has_value();
      if (d) cost += d->estimated_cost.micros();
    }
    EXPECT_EQ(all, best.feasible);
    // Per-cloud price lists can make greedy dearer; it is never cheaper.
    if (all) {
      EXPECT_GE(cost, best.cost_micros);
    }
    ++checked;
  }
  EXPECT_GT(checked, 100);
}

TEST(NextScale, Recurrences) {
  auto exp = policy(ScalingType::kExponential, 2, 10, 1 << 20);
  auto lin = policy(ScalingType::kLinear, 3, 10, 1 << 20);
  for (int k = 0; k + 1 < 10; ++k) {
    EXPECT_EQ(std::get<int>(next_scale(exp, k + 1)), 2 * std::get<int>(next_scale(exp, k)));
    EXPECT_EQ(std::get<int>(next_scale(lin, k + 1)), std::get<int>(next_scale(lin, k)) + 3);
  }
}

TEST(NextScale, CapAndExhaustion) {
  auto p = policy(ScalingType::kExponential, 2, 4, 10);
  EXPECT_EQ(next_scale(p, 3), ScaleResult(10));
  EXPECT_EQ(next_scale(p, 4), ScaleResult(Exhausted{}));
  auto q = policy(ScalingType::kLinear, 3, 9, 6);
  EXPECT_EQ(next_scale(q, 1), ScaleResult(6));
  EXPECT_EQ(next_scale(q, 2), ScaleResult(Exhausted{}));
  EXPECT_ERROR_CODE(next_scale(p, -1), kIllegalState);
}

TEST(NextScale, MonotoneAndMatchesOracle) {
  for (int type = 0; type < 2; ++type) {
    for (int initial = 1; initial <= 5; ++initial) {
      for (int cap = initial; cap <= 40; ++cap) {
        auto p = policy(type ? ScalingType::kLinear : ScalingType::kExponential,
                        initial, 6, cap);
        int previous = 0;
        for (int k = 0; k < 8; ++k) {
          auto r = next_scale(p, k);
          auto want = testing::oracle_next_scale(p, k);
          if (!want) {
            EXPECT_TRUE(std::holds_alternative<Exhausted>(r));
            continue;
          }
          ASSERT_TRUE(std::holds_alternative<int>(r));
          EXPECT_EQ(std::get<int>(r), *want);
          EXPECT_GE(std::get<int>(r), previous);
          previous = std::get<int>(r);
        }
      }
    }
  }
}

TEST(OnTimeout, Examples) {
  EXPECT_EQ(on_timeout(ActivityState::kTimedOut,
                       policy(ScalingType::kExponential, 2, 3, 8), 0),
            TimeoutDecision(RescaleDirective{1, 4, 3600}));
  EXPECT_EQ(std::get<RescaleDirective>(
                on_timeout(ActivityState::kTimedOut,
                           policy(ScalingType::kLinear, 3, 5, 20), 1))
                .new_count,
            9);
  EXPECT_EQ(on_timeout(ActivityState::kTimedOut,
                       policy(ScalingType::kLinear, 3, 1, 20), 0),
            TimeoutDecision(Fail{}));
}

TEST(OnTimeout, ConstantTimeoutPerRound) {
  auto p = policy(ScalingType::kLinear, 1, 5, 5);
  p.timeout_hours = 0.25;
  for (int k = 0; k < 4; ++k) {
    EXPECT_EQ(std::get<RescaleDirective>(on_timeout(ActivityState::kTimedOut, p, k))
                  .new_timeout_s,
              900);
  }
}

TEST(OnTimeout, RequiresTimedOut) {
  EXPECT_ERROR_CODE(on_timeout(ActivityState::kRunning,
                               policy(ScalingType::kLinear, 1, 2, 2), 0),
                    kIllegalState);
}

}  // namespace
}  // namespace procforge
