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

#include "procforge/provenance_store.h"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cctype>
#include <cstring>
#include <fstream>
#include <mutex>
#include <sstream>

#include "procforge/digest.h"
#include "procforge/error.h"
#include "procforge/json_codec.h"

namespace procforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void storage_failure(std::string const& what) {
  throw Error(ErrorCode::kStorageFailure, what);
}

std::string read_file(fs::path const& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) storage_failure("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Writes via a temporary file and rename so readers never see a torn file.
void write_file_atomic(fs::path const& path, std::string_view content) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) storage_failure("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) storage_failure("short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) storage_failure("cannot rename " + tmp.string() + ": " + ec.message());
}

void write_all(int fd, std::string_view data) {
  while (!data.empty()) {
    ssize_t n = ::write(fd, data.data(), data.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      storage_failure(std::string("log write failed: ") + std::strerror(errno));
    }
    data.remove_prefix(static_cast<std::size_t>(n));
  }
}

json producer_json(Producer const& p) {
  if (p.external()) return json{{"external", true}, {"instance", p.instance_id}};
  return json{{"instance", p.instance_id},
              {"activity", p.activity_id},
              {"attempt", p.attempt}};
}

Producer producer_from_json(json const& j) {
  Producer p;
  p.instance_id = j.value("instance", "");
  if (!j.value("external", false)) {
    p.activity_id = j.at("activity").get<std::string>();
    p.attempt = j.at("attempt").get<int>();
  }
  return p;
}

}  // namespace

std::string escape_path_component(std::string_view id) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : id) {
    if (std::isalnum(c) || c == '.' || c == '_' || c == '-') {
      out.push_back(static_cast<char>(c));
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xf]);
    }
  }
  // "." and ".." are not usable file names.
  if (out == "." || out == "..") {
    std::string dots;
    for (std::size_t i = 0; i < out.size(); ++i) dots += "%2E";
    return dots;
  }
  return out;
}

void to_json(json& j, ArtifactVersion const& v) {
  j = json{{"artifact_id", v.artifact_id},
           {"version", v.version},
           {"content_hash", v.content_hash},
           {"size_bytes", v.size_bytes},
           {"producer", producer_json(v.producer)},
           {"created_at_s", v.created_at_s},
           {"consumed", v.consumed}};
}

void from_json(json const& j, ArtifactVersion& v) {
  j.at("artifact_id").get_to(v.artifact_id);
  j.at("version").get_to(v.version);
  j.at("content_hash").get_to(v.content_hash);
  j.at("size_bytes").get_to(v.size_bytes);
  v.producer = producer_from_json(j.at("producer"));
  j.at("created_at_s").get_to(v.created_at_s);
  v.consumed = j.at("consumed").get<std::vector<ArtifactRef>>();
}

// ---------------------------------------------------------------------------
// EventLog
// ---------------------------------------------------------------------------

std::string EventRecord::canonical() const {
  // Envelope keys in fixed order; payload keys sorted.
  return "{\"seq\":" + std::to_string(global_seq) +
         ",\"instance\":" + json(instance_id).dump() +
         ",\"t\":" + std::to_string(sim_time_s) + ",\"kind\":" +
         json(kind).dump() + ",\"payload\":" + payload.dump() + "}";
}

std::string EventLog::header_line() {
  return "{\"format\":\"procforge-log\",\"version\":1,\"hash_alg\":\"" +
         std::string(kHashAlgorithm) + "\"}";
}

EventRecord EventLog::parse_line(std::string_view line) {
  try {
    json j = json::parse(line);
    EventRecord r;
    r.global_seq = j.at("seq").get<std::uint64_t>();
    r.instance_id = j.at("instance").get<std::string>();
    r.sim_time_s = j.at("t").get<std::int64_t>();
    r.kind = j.at("kind").get<std::string>();
    r.payload = j.at("payload");
    if (j.size() != 5) throw Error(ErrorCode::kCorruptLog, "extra fields");
    return r;
  } catch (json::exception const& e) {
    throw Error(ErrorCode::kCorruptLog,
                std::string("unreadable log record: ") + e.what());
  }
}

EventLog::EventLog() = default;

EventLog::EventLog(fs::path path, bool sync) : path_(path), sync_(sync) {
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  bool fresh = !fs::exists(path) || fs::file_size(path) == 0;
  if (!fresh) {
    std::string content = read_file(path);
    // A trailing line without newline was never acknowledged; drop it.
    std::size_t keep = content.rfind('\n');
    keep = keep == std::string::npos ? 0 : keep + 1;
    if (keep != content.size()) {
      fs::resize_file(path, keep, ec);
      if (ec) storage_failure("cannot truncate torn log tail: " + ec.message());
      content.resize(keep);
    }
    std::istringstream lines(content);
    std::string line;
    if (!std::getline(lines, line)) {
      fresh = true;
    } else {
      json header;
      try {
        header = json::parse(line);
      } catch (json::exception const&) {
        storage_failure("log header is not JSON: " + path.string());
      }
      if (header.value("format", "") != "procforge-log" ||
          header.value("version", 0) != 1 ||
          header.value("hash_alg", "") != kHashAlgorithm) {
        storage_failure("unsupported log header in " + path.string());
      }
      while (std::getline(lines, line)) {
        EventRecord r = parse_line(line);
        if (r.global_seq != records_.size() + 1) {
          throw Error(ErrorCode::kCorruptLog,
                      "log sequence gap at " + std::to_string(r.global_seq));
        }
        lines_.push_back(line);
        records_.push_back(std::move(r));
      }
    }
  }
  fd_ = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND | O_CLOEXEC, 0644);
  if (fd_ < 0) {
    storage_failure("cannot open log " + path.string() + ": " +
                    std::strerror(errno));
  }
  if (fresh) {
    if (::ftruncate(fd_, 0) != 0) storage_failure("cannot reset log file");
    write_all(fd_, header_line() + "\n");
    if (sync_) ::fsync(fd_);
  }
}

EventLog::~EventLog() {
  if (fd_ >= 0) ::close(fd_);
}

EventRecord EventLog::append(std::string instance_id, std::int64_t sim_time_s,
                             std::string kind, json payload) {
  std::unique_lock lock(mu_);
  EventRecord r;
  r.global_seq = records_.size() + 1;
  r.instance_id = std::move(instance_id);
  r.sim_time_s = sim_time_s;
  r.kind = std::move(kind);
  r.payload = std::move(payload);
  std::string line = r.canonical();
  if (fd_ >= 0) {
    write_all(fd_, line + "\n");
    if (sync_ && ::fsync(fd_) != 0) storage_failure("log fsync failed");
  }
  lines_.push_back(std::move(line));
  records_.push_back(r);
  return r;
}

std::vector<EventRecord> EventLog::read(
    std::uint64_t from_seq, std::optional<std::string> instance) const {
  std::shared_lock lock(mu_);
  std::vector<EventRecord> out;
  std::size_t start = from_seq == 0 ? 0 : from_seq - 1;
  for (std::size_t i = start; i < records_.size(); ++i) {
    if (!instance || records_[i].instance_id == *instance) {
      out.push_back(records_[i]);
    }
  }
  return out;
}

std::uint64_t EventLog::last_seq() const {
  std::shared_lock lock(mu_);
  return records_.size();
}

std::string EventLog::bytes() const {
  std::shared_lock lock(mu_);
  std::string out = header_line() + "\n";
  for (auto const& line : lines_) out += line + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// ProvenanceStore
// ---------------------------------------------------------------------------

ProvenanceStore::ProvenanceStore() : log_(std::make_unique<EventLog>()) {}

ProvenanceStore::ProvenanceStore(fs::path root, bool sync) : root_(root) {
  std::error_code ec;
  fs::create_directories(root / "blobs", ec);
  fs::create_directories(root / "artifacts", ec);
  if (ec) storage_failure("cannot create " + root.string() + ": " + ec.message());
  for (auto const& entry : fs::directory_iterator(root / "artifacts")) {
    if (entry.path().extension() != ".json") continue;
    try {
      json j = json::parse(read_file(entry.path()));
      auto versions = j.at("versions").get<std::vector<ArtifactVersion>>();
      index_[j.at("artifact_id").get<std::string>()] = std::move(versions);
    } catch (json::exception const& e) {
      storage_failure("unreadable index " + entry.path().string() + ": " +
                      e.what());
    }
  }
  for (auto const& entry : fs::recursive_directory_iterator(root / "blobs")) {
    if (entry.is_regular_file() && entry.path().extension() != ".tmp") {
      ++disk_blobs_;
    }
  }
  log_ = std::make_unique<EventLog>(root / "log.jsonl", sync);
}

void ProvenanceStore::store_blob(std::string const& hash,
                                 std::string_view content) {
  if (!root_) {
    auto [it, inserted] = memory_blobs_.emplace(hash, std::string(content));
    if (!inserted && it->second != content) {
      storage_failure("digest collision on " + hash);
    }
    return;
  }
  fs::path dir = *root_ / "blobs" / hash.substr(0, 2);
  fs::path path = dir / hash;
  if (fs::exists(path)) {
    if (read_file(path) != content) storage_failure("digest collision on " + hash);
    return;
  }
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) storage_failure("cannot create " + dir.string());
  write_file_atomic(path, content);
  ++disk_blobs_;
}

std::string ProvenanceStore::load_blob(std::string const& hash) const {
  if (!root_) {
    auto it = memory_blobs_.find(hash);
    if (it == memory_blobs_.end()) storage_failure("missing blob " + hash);
    return it->second;
  }
  fs::path path = *root_ / "blobs" / hash.substr(0, 2) / hash;
  if (!fs::exists(path)) storage_failure("missing blob " + hash);
  return read_file(path);
}

void ProvenanceStore::write_index(std::string const& artifact_id) const {
  if (!root_) return;
  json j{{"artifact_id", artifact_id}, {"versions", index_.at(artifact_id)}};
  write_file_atomic(
      *root_ / "artifacts" / (escape_path_component(artifact_id) + ".json"),
      j.dump(2) + "\n");
}

ArtifactVersion ProvenanceStore::put_artifact(
    std::string const& artifact_id, std::string_view content,
    Producer const& producer, std::vector<ArtifactRef> const& consumed,
    std::int64_t created_at_s) {
  std::unique_lock lock(mu_);
  ArtifactVersion v;
  v.artifact_id = artifact_id;
  v.content_hash = sha256_hex(content);
  v.size_bytes = content.size();
  v.producer = producer;
  v.created_at_s = created_at_s;
  v.consumed = consumed;
  store_blob(v.content_hash, content);
  auto& versions = index_[artifact_id];
  v.version = static_cast<int>(versions.size()) + 1;
  versions.push_back(v);
  write_index(artifact_id);
  return v;
}

ArtifactVersion const& ProvenanceStore::find_version(
    std::string_view artifact_id, VersionSelector selector) const {
  auto it = index_.find(artifact_id);
  if (it == index_.end() || it->second.empty()) {
    throw Error(ErrorCode::kNotFound,
                "unknown artifact '" + std::string(artifact_id) + "'");
  }
  if (std::holds_alternative<Latest>(selector)) return it->second.back();
  int version = std::get<int>(selector);
  if (version < 1 || version > static_cast<int>(it->second.size())) {
    throw Error(ErrorCode::kNotFound,
                "artifact '" + std::string(artifact_id) + "' has no version " +
                    std::to_string(version));
  }
  return it->second[version - 1];
}

std::pair<ArtifactVersion, std::string> ProvenanceStore::get_artifact(
    std::string_view artifact_id, VersionSelector selector) const {
  std::shared_lock lock(mu_);
  ArtifactVersion const& v = find_version(artifact_id, selector);
  std::string content = load_blob(v.content_hash);
  if (sha256_hex(content) != v.content_hash) {
    throw Error(ErrorCode::kHashMismatch,
                "stored content of '" + v.artifact_id + "' v" +
                    std::to_string(v.version) + " does not match its digest");
  }
  return {v, std::move(content)};
}

std::vector<ArtifactVersion> ProvenanceStore::versions(
    std::string_view artifact_id) const {
  std::shared_lock lock(mu_);
  auto it = index_.find(artifact_id);
  if (it == index_.end()) {
    throw Error(ErrorCode::kNotFound,
                "unknown artifact '" + std::string(artifact_id) + "'");
  }
  return it->second;
}

std::vector<std::string> ProvenanceStore::artifact_ids() const {
  std::shared_lock lock(mu_);
  std::vector<std::string> ids;
  for (auto const& [id, _] : index_) ids.push_back(id);
  return ids;
}

std::size_t ProvenanceStore::blob_count() const {
  std::shared_lock lock(mu_);
  return root_ ? disk_blobs_ : memory_blobs_.size();
}

LineageNode ProvenanceStore::lineage_impl(
    ArtifactVersion const& v, std::vector<ArtifactRef>& path) const {
  LineageNode node{v, {}};
  path.push_back(v.ref());
  for (auto const& input : v.consumed) {
    if (std::find(path.begin(), path.end(), input) != path.end()) continue;
    node.inputs.push_back(
        lineage_impl(find_version(input.artifact_id, input.version), path));
  }
  path.pop_back();
  return node;
}

LineageNode ProvenanceStore::lineage(std::string_view artifact_id,
                                     int version) const {
  std::shared_lock lock(mu_);
  std::vector<ArtifactRef> path;
  return lineage_impl(find_version(artifact_id, version), path);
}

PublishedArtifact ProvenanceStore::publish(
    std::string const& artifact_id, std::string const& content,
    Producer const& producer, std::vector<ArtifactRef> const& consumed,
    std::int64_t created_at_s) {
  ArtifactVersion v =
      put_artifact(artifact_id, content, producer, consumed, created_at_s);
  return {v.ref(), v.content_hash};
}

// ---------------------------------------------------------------------------
// Replay
// ---------------------------------------------------------------------------

EnactmentEvent to_enactment_event(EventRecord const& record,
                                  std::uint64_t seq) {
  auto kind = event_kind_from_string(record.kind);
  if (!kind) {
    throw Error(ErrorCode::kCorruptLog,
                "unknown event kind '" + record.kind + "'");
  }
  EnactmentEvent ev;
  ev.seq = seq;
  ev.instance_id = record.instance_id;
  ev.sim_time_s = record.sim_time_s;
  ev.kind = *kind;
  ev.payload = record.payload;
  return ev;
}

ProcessInstance replay(std::vector<EventRecord> const& events,
                       ProcessModel const& model) {
  if (events.empty()) {
    throw Error(ErrorCode::kCorruptLog, "cannot replay an empty log");
  }
  ProcessInstance inst = blank_instance(events.front().instance_id, model);
  std::uint64_t previous = 0;
  for (std::size_t i = 0; i < events.size(); ++i) {
    if (events[i].global_seq <= previous) {
      throw Error(ErrorCode::kCorruptLog,
                  "log records out of order at " +
                      std::to_string(events[i].global_seq));
    }
    previous = events[i].global_seq;
    apply_event(inst, to_enactment_event(events[i], i + 1));
  }
  return inst;
}

}  // namespace procforge
