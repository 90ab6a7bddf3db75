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

#ifndef PROCFORGE_PROVENANCE_STORE_H_
#define PROCFORGE_PROVENANCE_STORE_H_

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "procforge/artifact.h"
#include "procforge/enactment.h"

namespace procforge {

struct ArtifactVersion {
  std::string artifact_id;
  int version = 1;
  std::string content_hash;
  std::uint64_t size_bytes = 0;
  Producer producer;
  std::int64_t created_at_s = 0;
  /// Exact input versions the producing activity consumed.
  std::vector<ArtifactRef> consumed;

  ArtifactRef ref() const { return {artifact_id, version}; }
  friend bool operator==(ArtifactVersion const&,
                         ArtifactVersion const&) = default;
};

void to_json(nlohmann::json& j, ArtifactVersion const& v);
void from_json(nlohmann::json const& j, ArtifactVersion& v);

struct EventRecord {
  std::uint64_t global_seq = 0;
  std::string instance_id;
  std::int64_t sim_time_s = 0;
  std::string kind;
  nlohmann::json payload = nlohmann::json::object();

  /// The log line for this record (no trailing newline).
  std::string canonical() const;
};

/// Append-only event log: one canonical JSON object per line, preceded by a
/// header line naming the format and digest algorithm. File-backed logs are
/// synced before an append returns.
class EventLog {
 public:
  /// Log kept in memory only.
  EventLog();
  /// Opens (or creates) the log file at `path`, continuing after the last
  /// persisted record.
  explicit EventLog(std::filesystem::path path, bool sync = true);
  ~EventLog();
  EventLog(EventLog const&) = delete;
  EventLog& operator=(EventLog const&) = delete;

  EventRecord append(std::string instance_id, std::int64_t sim_time_s,
                     std::string kind, nlohmann::json payload);
  /// Records with global_seq >= from_seq, optionally for one instance.
  std::vector<EventRecord> read(std::uint64_t from_seq = 1,
                                std::optional<std::string> instance = {}) const;
  std::uint64_t last_seq() const;
  /// Header line plus every record line, each newline-terminated.
  std::string bytes() const;

  static std::string header_line();
  static EventRecord parse_line(std::string_view line);

 private:
  mutable std::shared_mutex mu_;
  std::optional<std::filesystem::path> path_;
  int fd_ = -1;
  bool sync_ = true;
  std::vector<EventRecord> records_;
  std::vector<std::string> lines_;
};

struct Latest {};
using VersionSelector = std::variant<Latest, int>;

struct LineageNode {
  ArtifactVersion artifact;
  std::vector<LineageNode> inputs;
};

/// Versioned content-addressed artifact store plus the event log.
///
/// On disk (when a root is given):
///   <root>/log.jsonl                    event log
///   <root>/blobs/<first 2 hex>/<hash>   artifact content, one blob per hash
///   <root>/artifacts/<artifact_id>.json version index (id percent-encoded)
class ProvenanceStore : public ArtifactPublisher {
 public:
  /// Memory-only store.
  ProvenanceStore();
  /// Store rooted at `root`, reloading any existing index and log.
  explicit ProvenanceStore(std::filesystem::path root, bool sync = true);

  ArtifactVersion put_artifact(std::string const& artifact_id,
                               std::string_view content,
                               Producer const& producer,
                               std::vector<ArtifactRef> const& consumed = {},
                               std::int64_t created_at_s = 0);
  /// Throws kNotFound for unknown artifacts/versions and kHashMismatch when
  /// the stored bytes no longer match their digest.
  std::pair<ArtifactVersion, std::string> get_artifact(
      std::string_view artifact_id, VersionSelector selector = Latest{}) const;
  std::vector<ArtifactVersion> versions(std::string_view artifact_id) const;
  std::vector<std::string> artifact_ids() const;
  std::size_t blob_count() const;

  EventRecord append_event(std::string instance_id, std::int64_t sim_time_s,
                           std::string kind, nlohmann::json payload) {
    return log_->append(std::move(instance_id), sim_time_s, std::move(kind),
                        std::move(payload));
  }
  EventLog const& log() const { return *log_; }

  /// Ancestry of one artifact version down to external leaves.
  LineageNode lineage(std::string_view artifact_id, int version) const;

  PublishedArtifact publish(std::string const& artifact_id,
                            std::string const& content,
                            Producer const& producer,
                            std::vector<ArtifactRef> const& consumed,
                            std::int64_t created_at_s) override;

  std::optional<std::filesystem::path> const& root() const { return root_; }

 private:
  ArtifactVersion const& find_version(std::string_view artifact_id,
                                      VersionSelector selector) const;
  void store_blob(std::string const& hash, std::string_view content);
  std::string load_blob(std::string const& hash) const;
  void write_index(std::string const& artifact_id) const;
  LineageNode lineage_impl(ArtifactVersion const& v,
                           std::vector<ArtifactRef>& path) const;

  mutable std::shared_mutex mu_;
  std::optional<std::filesystem::path> root_;
  std::map<std::string, std::vector<ArtifactVersion>, std::less<>> index_;
  std::map<std::string, std::string> memory_blobs_;
  std::size_t disk_blobs_ = 0;
  std::unique_ptr<EventLog> log_;
};

/// Reconstructs an instance from its event records. Throws kCorruptLog when
/// the records are empty, out of order, or imply an illegal transition.
ProcessInstance replay(std::vector<EventRecord> const& events,
                       ProcessModel const& model);

/// Converts a log record back to an engine event with per-instance `seq`.
EnactmentEvent to_enactment_event(EventRecord const& record,
                                  std::uint64_t seq);

/// Percent-encodes everything outside [A-Za-z0-9._-].
std::string escape_path_component(std::string_view id);

}  // namespace procforge

#endif  // PROCFORGE_PROVENANCE_STORE_H_
