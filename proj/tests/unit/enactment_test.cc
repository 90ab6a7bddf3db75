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

#include "procforge/enactment.h"
#include "procforge/process_model.h"
#include "test_util.h"

namespace procforge {
namespace {

ProcessModel sample() {
  return parse_process(testing::sample_text("verify-release.yaml"));
}

PlacementDecision placement(std::string id, CloudKind kind, int count = 1) {
  PlacementDecision d;
  d.activity_id = std::move(id);
  d.cloud_id = kind == CloudKind::kPrivate ? "private" : "public";
  d.cloud_kind = kind;
  d.machine_type = "medium";
  d.instance_count = count;
  return d;
}

ActivityState state(Enactment const& e, std::string_view id) {
  return e.instance().activity(id).state;
}

/// Drives an automated activity from Ready to a task result.
void run_automated(Enactment& e, std::string const& id, TaskResult result,
                   std::int64_t t, int count = 1) {
  e.dispatch(id, placement(id, CloudKind::kPrivate, count), t);
  e.start(id, {"vm-" + id}, t);
  e.on_task_result(id, result, t);
  e.settle(t);
}

/// Sample instance advanced to the QA decision.
Enactment at_decision() {
  auto e = Enactment::instantiate("i", sample(), {"requirements"}, 0);
  e.settle(0);
  e.complete_manual_task("spec-review", "architect", std::nullopt, 1);
  e.settle(1);
  run_automated(e, "build", TaskResult::kSucceeded, 2);
  run_automated(e, "model-check", TaskResult::kSucceeded, 3, 2);
  return e;
}

TEST(Instantiate, AllPending) {
  auto e = Enactment::instantiate("i", sample(), {"requirements"}, 0);
  auto const& inst = e.instance();
  EXPECT_EQ(inst.activity_states.size(), 6u);
  for (auto const& [id, a] : inst.activity_states) {
    EXPECT_EQ(a.state, ActivityState::kPending) << id;
  }
  EXPECT_EQ(inst.available_artifacts,
            (std::set<ArtifactRef>{{"requirements", 1}}));
  ASSERT_EQ(e.events().size(), 1u);
  EXPECT_EQ(e.events()[0].kind, EventKind::kInstantiated);
  EXPECT_EQ(e.events()[0].seq, 1u);
  auto status = e.status();
  EXPECT_EQ(status.counts.at(ActivityState::kPending), 6);
}

TEST(Instantiate, MissingExternalInput) {
  EXPECT_ERROR_CODE(Enactment::instantiate("i", sample(), {}, 0),
                    kMissingExternalInput);
}

TEST(Instantiate, UndeclaredInputIsSchemaError) {
  EXPECT_ERROR_CODE(
      Enactment::instantiate("i", sample(), {"requirements", "binary"}, 0),
      kSchemaError);
}

TEST(Instantiate, EmptyModelCompletes) {
  ProcessModel m;
  m.model_id = "empty";
  auto e = Enactment::instantiate("i", m, {}, 0);
  EXPECT_EQ(e.instance().status, InstanceStatus::kCompleted);
  EXPECT_EQ(e.events().back().kind, EventKind::kInstanceCompleted);
}

TEST(ReadySet, ChainProgression) {
  ProcessModel m = parse_process(R"(
model_id: chain
name: chain
roles: [{id: r, name: R}]
artifacts:
  - {id: in, name: In, external: true}
  - {id: x, name: X}
  - {id: y, name: Y}
activities:
  - {id: a, kind: automated, role: r, inputs: [in], outputs: [x]}
  - {id: b, kind: automated, role: r, inputs: [x], outputs: [y]}
  - {id: c, kind: automated, role: r, inputs: [y]}
edges:
  - {from: a, to: b}
  - {from: b, to: c}
)");
  auto e = Enactment::instantiate("i", m, {"in"}, 0);
  EXPECT_EQ(ready_set(e.instance()), (std::set<std::string>{"a"}));
  e.settle(0);
  EXPECT_EQ(state(e, "a"), ActivityState::kReady);
  run_automated(e, "a", TaskResult::kSucceeded, 10);
  EXPECT_EQ(state(e, "b"), ActivityState::kReady);
  EXPECT_TRUE(e.instance().has_artifact("x"));
  EXPECT_EQ(ready_set(e.instance()), std::set<std::string>{});
}

TEST(ReadySet, InputsGateEvenWithoutEdges) {
  ProcessModel m = parse_process(R"(
model_id: gate
name: gate
roles: [{id: r, name: R}]
artifacts:
  - {id: x, name: X}
activities:
  - {id: a, kind: manual, role: r, outputs: [x]}
  - {id: b, kind: manual, role: r, inputs: [x]}
)");
  auto e = Enactment::instantiate("i", m, {}, 0);
  EXPECT_EQ(ready_set(e.instance()), (std::set<std::string>{"a"}));
}

TEST(Decision, FailRoutesToFixAndSkipsPackage) {
  auto e = at_decision();
  EXPECT_EQ(state(e, "decision"), ActivityState::kAwaitingHuman);
  e.complete_manual_task("decision", "qa", std::string("fail"), 4);
  e.settle(4);
  EXPECT_EQ(state(e, "fix"), ActivityState::kReady);
  EXPECT_EQ(state(e, "package"), ActivityState::kSkipped);
  EXPECT_EQ(e.instance().activity("decision").decision_label, "fail");
  run_automated(e, "fix", TaskResult::kSucceeded, 5);
  EXPECT_EQ(e.instance().status, InstanceStatus::kCompleted);
}

TEST(Decision, PassRoutesToPackageAndSkipsFix) {
  auto e = at_decision();
  e.complete_manual_task("decision", "qa", std::string("pass"), 4);
  e.settle(4);
  EXPECT_EQ(state(e, "fix"), ActivityState::kSkipped);
  EXPECT_EQ(state(e, "package"), ActivityState::kReady);
  run_automated(e, "package", TaskResult::kSucceeded, 5);
  EXPECT_EQ(e.instance().status, InstanceStatus::kCompleted);
  auto status = e.status();
  EXPECT_EQ(status.counts.at(ActivityState::kCompleted), 5);
  EXPECT_EQ(status.counts.at(ActivityState::kSkipped), 1);
  EXPECT_TRUE(ready_set(e.instance()).empty());
}

TEST(Decision, UnknownLabel) {
  auto e = at_decision();
  EXPECT_ERROR_CODE(e.complete_manual_task("decision", "qa", std::string("maybe"), 4),
                    kUnknownDecisionLabel);
  EXPECT_ERROR_CODE(e.complete_manual_task("decision", "qa", std::nullopt, 4),
                    kUnknownDecisionLabel);
  EXPECT_EQ(state(e, "decision"), ActivityState::kAwaitingHuman);
}

TEST(ManualTask, RoleMismatchAndHappyPath) {
  auto e = Enactment::instantiate("i", sample(), {"requirements"}, 0);
  e.settle(0);
  EXPECT_EQ(state(e, "spec-review"), ActivityState::kAwaitingHuman);
  EXPECT_ERROR_CODE(e.complete_manual_task("spec-review", "dev", std::nullopt, 1),
                    kRoleMismatch);
  e.complete_manual_task("spec-review", "architect", std::nullopt, 1);
  EXPECT_EQ(state(e, "spec-review"), ActivityState::kCompleted);
  EXPECT_EQ(e.instance().latest_version("design-spec"), 1);
  EXPECT_EQ(e.events().back().kind, EventKind::kHumanCompleted);
  EXPECT_ERROR_CODE(e.complete_manual_task("spec-review", "architect", std::nullopt, 1),
                    kIllegalState);
}

TEST(Dispatch, HappyPathAndGuards) {
  auto e = Enactment::instantiate("i", sample(), {"requirements"}, 0);
  e.settle(0);
  EXPECT_ERROR_CODE(e.dispatch("build", placement("build", CloudKind::kPrivate), 0),
                    kIllegalState);
  e.complete_manual_task("spec-review", "architect", std::nullopt, 1);
  e.settle(1);
  EXPECT_ERROR_CODE(e.dispatch("build", placement("build", CloudKind::kPublic), 1),
                    kConstraintViolation);
  e.dispatch("build", placement("build", CloudKind::kPrivate), 1);
  EXPECT_EQ(state(e, "build"), ActivityState::kScheduled);
  EXPECT_EQ(e.instance().activity("build").placement->cloud_id, "private");
  EXPECT_EQ(e.events().back().kind, EventKind::kDispatched);
}

TEST(Dispatch, ManualActivityRejected) {
  auto e = Enactment::instantiate("i", sample(), {"requirements"}, 0);
  e.settle(0);
  EXPECT_ERROR_CODE(
      e.dispatch("spec-review", placement("spec-review", CloudKind::kPrivate), 0),
      kIllegalState);
}

TEST(TaskResult, SucceededPublishesVersionOne) {
  auto e = at_decision();
  EXPECT_EQ(state(e, "model-check"), ActivityState::kCompleted);
  EXPECT_EQ(e.instance().latest_version("check-report"), 1);
}

TEST(TaskResult, TimeoutRescalesThenFails) {
  auto e = Enactment::instantiate("i", sample(), {"requirements"}, 0);
  e.settle(0);
  e.complete_manual_task("spec-review", "architect", std::nullopt, 1);
  e.settle(1);
  run_automated(e, "build", TaskResult::kSucceeded, 2);
  e.dispatch("model-check", placement("model-check", CloudKind::kPrivate, 2), 3);
  e.start("model-check", {"v1", "v2"}, 3);
  auto directive = e.on_task_result("model-check", TaskResult::kTimedOut, 3603);
  ASSERT_TRUE(directive);
  EXPECT_EQ(directive->attempt, 1);
  EXPECT_EQ(directive->new_count, 4);
  EXPECT_EQ(state(e, "model-check"), ActivityState::kTimedOut);
  EXPECT_ERROR_CODE(
      e.rescale("model-check", placement("model-check", CloudKind::kPrivate, 3), 3603),
      kIllegalState);
  e.rescale("model-check", placement("model-check", CloudKind::kPrivate, 4), 3603);
  EXPECT_EQ(e.instance().activity("model-check").attempt, 1);
  EXPECT_EQ(state(e, "model-check"), ActivityState::kScheduled);
  e.start("model-check", {"v3"}, 3700);
  directive = e.on_task_result("model-check", TaskResult::kTimedOut, 7300);
  ASSERT_TRUE(directive);
  e.rescale("model-check", placement("model-check", CloudKind::kPrivate, 8), 7300);
  e.start("model-check", {"v4"}, 7400);
  // Third round (attempt 2) of max_rounds 3 exhausts the policy.
  EXPECT_FALSE(e.on_task_result("model-check", TaskResult::kTimedOut, 11000));
  EXPECT_EQ(state(e, "model-check"), ActivityState::kFailed);
  EXPECT_EQ(e.instance().status, InstanceStatus::kFailed);
  // A failed instance accepts no further commands; settling is a no-op.
  std::size_t events = e.events().size();
  e.settle(11000);
  EXPECT_EQ(e.events().size(), events);
  EXPECT_ERROR_CODE(e.complete_manual_task("decision", "qa", std::string("pass"), 11000),
                    kIllegalState);
}

TEST(TaskResult, TimeoutWithoutPolicyFails) {
  auto e = Enactment::instantiate("i", sample(), {"requirements"}, 0);
  e.settle(0);
  e.complete_manual_task("spec-review", "architect", std::nullopt, 1);
  e.settle(1);
  e.dispatch("build", placement("build", CloudKind::kPrivate), 1);
  e.start("build", {"v"}, 1);
  EXPECT_FALSE(e.on_task_result("build", TaskResult::kTimedOut, 2));
  EXPECT_EQ(state(e, "build"), ActivityState::kFailed);
}

TEST(TaskResult, RequiresRunning) {
  auto e = Enactment::instantiate("i", sample(), {"requirements"}, 0);
  EXPECT_ERROR_CODE(e.on_task_result("build", TaskResult::kSucceeded, 0),
                    kIllegalState);
}

TEST(Abandon, FailsTimedOutActivity) {
  auto e = Enactment::instantiate("i", sample(), {"requirements"}, 0);
  e.settle(0);
  e.complete_manual_task("spec-review", "architect", std::nullopt, 1);
  e.settle(1);
  run_automated(e, "build", TaskResult::kSucceeded, 2);
  e.dispatch("model-check", placement("model-check", CloudKind::kPrivate, 2), 3);
  e.start("model-check", {"v1"}, 3);
  ASSERT_TRUE(e.on_task_result("model-check", TaskResult::kTimedOut, 10));
  e.abandon("model-check", "no capacity", 10);
  EXPECT_EQ(state(e, "model-check"), ActivityState::kFailed);
  EXPECT_EQ(e.instance().status, InstanceStatus::kFailed);
}

TEST(Events, SequenceAndTimeMonotone) {
  auto e = at_decision();
  e.complete_manual_task("decision", "qa", std::string("pass"), 4);
  e.settle(4);
  std::uint64_t seq = 0;
  std::int64_t t = 0;
  for (auto const& ev : e.events()) {
    EXPECT_EQ(ev.seq, ++seq);
    EXPECT_GE(ev.sim_time_s, t);
    t = ev.sim_time_s;
  }
  EXPECT_EQ(e.instance().last_seq, seq);
}

TEST(Events, ReplayingThroughApplyEventReproducesState) {
  auto e = at_decision();
  ProcessInstance copy = blank_instance("i", sample());
  for (auto const& ev : e.events()) apply_event(copy, ev);
  EXPECT_EQ(copy, e.instance());
  EXPECT_EQ(state_hash(copy), state_hash(e.instance()));
}

TEST(ApplyEvent, RejectsIllegalTransitions) {
  auto e = at_decision();
  ProcessInstance copy = blank_instance("i", sample());
  apply_event(copy, e.events()[0]);
  EnactmentEvent bad;
  bad.seq = 2;
  bad.instance_id = "i";
  bad.kind = EventKind::kDispatched;
  bad.payload = {{"activity", "build"},
                 {"placement", nlohmann::json::object()}};
  EXPECT_ERROR_CODE(apply_event(copy, bad), kCorruptLog);
  EnactmentEvent gap = e.events()[1];
  gap.seq = 5;
  EXPECT_ERROR_CODE(apply_event(copy, gap), kCorruptLog);
}

TEST(StateHash, IgnoresEventHistoryButNotState) {
  auto a = Enactment::instantiate("i", sample(), {"requirements"}, 0);
  auto b = Enactment::instantiate("i", sample(), {"requirements"}, 50);
  EXPECT_EQ(canonical_state(a.instance()), canonical_state(b.instance()));
  b.settle(50);
  EXPECT_NE(state_hash(a.instance()), state_hash(b.instance()));
  EXPECT_EQ(state_hash(a.instance()).size(), 64u);
}

TEST(Transitions, LegalRelation) {
  using S = ActivityState;
  EXPECT_TRUE(is_legal_transition(S::kPending, S::kReady));
  EXPECT_TRUE(is_legal_transition(S::kTimedOut, S::kScheduled));
  EXPECT_FALSE(is_legal_transition(S::kCompleted, S::kReady));
  EXPECT_FALSE(is_legal_transition(S::kReady, S::kRunning));
  for (S s : kAllActivityStates) {
    if (is_terminal(s)) {
      for (S t : kAllActivityStates) EXPECT_FALSE(is_legal_transition(s, t));
    }
    EXPECT_EQ(activity_state_from_string(to_string(s)), s);
  }
}

}  // namespace
}  // namespace procforge
