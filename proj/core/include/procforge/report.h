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


#ifndef PROCFORGE_REPORT_H_
#define PROCFORGE_REPORT_H_

#include <nlohmann/json.hpp>

#include <string_view>

#include "procforge/enactment.h"
#include "procforge/runtime.h"

namespace procforge {

/// JSON snapshot of an instance: everything the event log determines.
nlohmann::json instance_json(ProcessInstance const& instance);

/// Run report: per-activity timeline, placements and per-attempt instance
/// counts, per-cloud and total cost. Throws kNotFound.
nlohmann::json export_report(Runtime const& runtime,
                             std::string_view instance_id);

}  // namespace procforge

#endif  // PROCFORGE_REPORT_H_
