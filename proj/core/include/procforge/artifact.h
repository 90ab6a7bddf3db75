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

#ifndef PROCFORGE_ARTIFACT_H_
#define PROCFORGE_ARTIFACT_H_

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace procforge {

/// One version of one artifact.
struct ArtifactRef {
  std::string artifact_id;
  int version = 1;

  friend auto operator<=>(ArtifactRef const&, ArtifactRef const&) = default;
  friend bool operator==(ArtifactRef const&, ArtifactRef const&) = default;
};

/// Who produced an artifact version. An empty activity_id means the version
/// was supplied externally as a process input.
struct Producer {
  std::string instance_id;
  std::string activity_id;
  int attempt = 0;

  bool external() const { return activity_id.empty(); }
  friend bool operator==(Producer const&, Producer const&) = default;
};

struct PublishedArtifact {
  ArtifactRef ref;
  std::string content_hash;
};

/// Sink for artifact versions produced during enactment; assigns versions.
class ArtifactPublisher {
 public:
  virtual ~ArtifactPublisher() = default;

  virtual PublishedArtifact publish(std::string const& artifact_id,
                                    std::string const& content,
                                    Producer const& producer,
                                    std::vector<ArtifactRef> const& consumed,
                                    std::int64_t created_at_s) = 0;
};

}  // namespace procforge

#endif  // PROCFORGE_ARTIFACT_H_
