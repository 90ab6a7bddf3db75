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

#ifndef PROCFORGE_JSON_CODEC_H_
#define PROCFORGE_JSON_CODEC_H_

// JSON forms of the domain types used in event payloads and API bodies.
// Money is written both as units (for readers) and micros (exact).

#include <nlohmann/json.hpp>

#include "procforge/artifact.h"
#include "procforge/cloud_simulator.h"
#include "procforge/enactment.h"
#include "procforge/process_model.h"
#include "procforge/scheduler.h"

namespace procforge {

void to_json(nlohmann::json& j, ArtifactRef const& ref);
void from_json(nlohmann::json const& j, ArtifactRef& ref);

void to_json(nlohmann::json& j, PlacementDecision const& d);
void from_json(nlohmann::json const& j, PlacementDecision& d);

void to_json(nlohmann::json& j, ActivityInstance const& a);

void to_json(nlohmann::json& j, ProcessModel const& m);

void to_json(nlohmann::json& j, CloudInstance const& vm);

void to_json(nlohmann::json& j, TaskProfile const& p);
void from_json(nlohmann::json const& j, TaskProfile& p);

nlohmann::json money_json(Money m);

}  // namespace procforge

#endif  // PROCFORGE_JSON_CODEC_H_
