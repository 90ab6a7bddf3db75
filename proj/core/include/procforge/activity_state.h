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

#ifndef PROCFORGE_ACTIVITY_STATE_H_
#define PROCFORGE_ACTIVITY_STATE_H_

#include <optional>
#include <string_view>

namespace procforge {

enum class ActivityState {
  kPending,
  kReady,
  kScheduled,
  kRunning,
  kAwaitingHuman,
  kTimedOut,
  kCompleted,
  kFailed,
  kSkipped,
};

inline constexpr ActivityState kAllActivityStates[] = {
    ActivityState::kPending,   ActivityState::kReady,
    ActivityState::kScheduled, ActivityState::kRunning,
    ActivityState::kAwaitingHuman, ActivityState::kTimedOut,
    ActivityState::kCompleted, ActivityState::kFailed,
    ActivityState::kSkipped,
};

std::string_view to_string(ActivityState state);
std::optional<ActivityState> activity_state_from_string(std::string_view text);

/// The legal lifecycle edges of an activity instance.
constexpr bool is_legal_transition(ActivityState from, ActivityState to) {
  using S = ActivityState;
  switch (from) {
    case S::kPending:
      return to == S::kReady || to == S::kSkipped;
    case S::kReady:
      return to == S::kScheduled || to == S::kAwaitingHuman;
    case S::kScheduled:
      return to == S::kRunning;
    case S::kRunning:
      return to == S::kCompleted || to == S::kTimedOut || to == S::kFailed;
    case S::kTimedOut:
      return to == S::kScheduled || to == S::kFailed;
    case S::kAwaitingHuman:
      return to == S::kCompleted;
    case S::kCompleted:
    case S::kFailed:
    case S::kSkipped:
      return false;
  }
  return false;
}

constexpr bool is_terminal(ActivityState s) {
  return s == ActivityState::kCompleted || s == ActivityState::kFailed ||
         s == ActivityState::kSkipped;
}

}  // namespace procforge

#endif  // PROCFORGE_ACTIVITY_STATE_H_
