#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace gos {

enum class EventKind { created, response, annotation_import, cluster_run };

std::string_view event_kind_name(EventKind kind);
std::optional<EventKind> parse_event_kind(std::string_view name);

struct SurveyEvent {
  std::uint64_t sequence = 0;
  EventKind kind = EventKind::created;
  std::string survey_id;
  nlohmann::json payload;

  nlohmann::json to_json() const;
  static SurveyEvent from_json(const nlohmann::json& document);
};

struct Snapshot {
  std::uint64_t sequence = 0;  // last event folded into `state`
  nlohmann::json state;
};

/// Append-only JSON-lines event log plus an atomically replaced snapshot file
/// in one directory. A torn final line (crash during append) is ignored on
/// read.
class EventLog {
 public:
  explicit EventLog(std::filesystem::path directory);
  ~EventLog();
  EventLog(const EventLog&) = delete;
  EventLog& operator=(const EventLog&) = delete;

  /// Writes and flushes one event to stable storage.
  void append(const SurveyEvent& event);
  std::vector<SurveyEvent> read_after(std::uint64_t sequence) const;

  void write_snapshot(const Snapshot& snapshot);
  std::optional<Snapshot> read_snapshot() const;

  const std::filesystem::path& directory() const { return directory_; }
  std::filesystem::path events_path() const { return directory_ / "events.jsonl"; }
  std::filesystem::path snapshot_path() const { return directory_ / "snapshot.json"; }

 private:
  std::filesystem::path directory_;
  std::FILE* file_ = nullptr;
  std::mutex mutex_;
};

}  // namespace gos
