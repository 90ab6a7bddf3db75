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


// Acceptance suite: one PASS/FAIL line per criterion. Tolerances and time
// budgets are fixed here. Exit status is non-zero when any criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "criteria.h"

namespace {

using procforge::acceptance::Outcome;

struct Criterion {
  int number;
  std::string title;
  double budget_s;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  namespace pa = procforge::acceptance;
  std::vector<Criterion> criteria = {
      {1, "Confidentiality safety", 10.0, pa::confidentiality_safety},
      {2, "Scheduler oracle", 60.0, pa::scheduler_oracle},
      {3, "Elastic recurrences", 1.0, pa::elastic_recurrences},
      {4, "Diminishing returns of parallelism", 1.0, pa::diminishing_returns},
      {5, "End-to-end elastic run", 5.0, pa::end_to_end_elastic_run},
      {6, "Replay determinism", 60.0, pa::replay_determinism},
      {7, "Precondition safety", 60.0, pa::precondition_safety},
      {8, "Billing conservation", 60.0, pa::billing_conservation},
      {9, "API/engine equivalence", 60.0, pa::api_engine_equivalence},
  };

  int failures = 0;
  for (auto const& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = c.run();
    } catch (std::exception const& e) {
      outcome = {false, std::string("threw: ") + e.what(), {}};
    }
    double seconds = std::chrono::duration<double>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    bool in_budget = seconds < c.budget_s;
    bool pass = outcome.pass && in_budget;
    if (!pass) ++failures;
    for (auto const& line : outcome.info) {
      std::cout << "       info: " << line << "\n";
    }
    char timing[64];
    std::snprintf(timing, sizeof timing, "%.2fs of %.0fs", seconds, c.budget_s);
    std::cout << (pass ? "[PASS] " : "[FAIL] ") << c.number << ". " << c.title
              << ": " << outcome.detail << " (" << timing
              << (in_budget ? "" : ", over budget") << ")" << std::endl;
  }
  std::cout << (failures == 0 ? "all acceptance criteria passed"
                              : std::to_string(failures) +
                                    " acceptance criteria failed")
            << std::endl;
  return failures == 0 ? 0 : 1;
}
