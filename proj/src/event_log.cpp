#include "gos/event_log.hpp"

#include <unistd.h>

#include <array>
#include <stdexcept>

#include "gos/util.hpp"

namespace gos {

namespace {
constexpr std::array<std::string_view, 4> kKindNames{"created", "response", "annotation_import", "cluster_run"};
}

std::string_view event_kind_name(EventKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<EventKind> parse_event_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == name) return static_cast<EventKind>(i);
  return std::nullopt;
}

nlohmann::json SurveyEvent::to_json() const {
  return {{"seq", sequence}, {"kind", event_kind_name(kind)}, {"survey", survey_id}, {"payload", payload}};
}

SurveyEvent SurveyEvent::from_json(const nlohmann::json& document) {
  SurveyEvent event;
  event.sequence = document.at("seq").get<std::uint64_t>();
  auto kind = parse_event_kind(document.at("kind").get<std::string>());
  if (!kind) throw std::runtime_error("event log: unknown event kind");
  event.kind = *kind;
  event.survey_id = document.at("survey").get<std::string>();
  event.payload = document.at("payload");
  return event;
}

EventLog::EventLog(std::filesystem::path directory) : directory_(std::move(directory)) {
  std::filesystem::create_directories(directory_);
  if (std::filesystem::exists(events_path())) {
    // Drop a torn tail so the next append starts on a fresh line.
    std::string content = read_file(events_path());
    if (!content.empty() && content.back() != '\n') {
      auto keep = content.find_last_of('\n');
      std::filesystem::resize_file(events_path(), keep == std::string::npos ? 0 : keep + 1);
      log_warn("event log: truncated torn final record");
    }
  }
  file_ = std::fopen(events_path().c_str(), "ab");
  if (!file_) throw std::runtime_error("event log: cannot open " + events_path().string());
}

EventLog::~EventLog() {
  if (file_) std::fclose(file_);
}

void EventLog::append(const SurveyEvent& event) {
  std::string line = event.to_json().dump() + "\n";
  std::lock_guard lock(mutex_);
  if (std::fwrite(line.data(), 1, line.size(), file_) != line.size() || std::fflush(file_) != 0)
    throw std::runtime_error("event log: write failed");
  ::fsync(::fileno(file_));
}

std::vector<SurveyEvent> EventLog::read_after(std::uint64_t sequence) const {
  std::vector<SurveyEvent> events;
  if (!std::filesystem::exists(events_path())) return events;
  auto lines = split_lines(read_file(events_path()));
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto document = nlohmann::json::parse(lines[i], nullptr, false);
    if (document.is_discarded()) {
      if (i + 1 == lines.size()) {
        log_warn("event log: ignoring torn final record");
        break;
      }
      throw std::runtime_error("event log: corrupt record at line " + std::to_string(i + 1));
    }
    SurveyEvent event = SurveyEvent::from_json(document);
    if (event.sequence > sequence) events.push_back(std::move(event));
  }
  return events;
}

void EventLog::write_snapshot(const Snapshot& snapshot) {
  auto tmp = directory_ / "snapshot.json.tmp";
  std::string text = nlohmann::json{{"seq", snapshot.sequence}, {"state", snapshot.state}}.dump();
  std::FILE* out = std::fopen(tmp.c_str(), "wb");
  if (!out) throw std::runtime_error("event log: cannot write " + tmp.string());
  bool ok = std::fwrite(text.data(), 1, text.size(), out) == text.size() && std::fflush(out) == 0 &&
            ::fsync(::fileno(out)) == 0;
  std::fclose(out);
  if (!ok) throw std::runtime_error("event log: snapshot write failed");
  std::filesystem::rename(tmp, snapshot_path());
}

std::optional<Snapshot> EventLog::read_snapshot() const {
  if (!std::filesystem::exists(snapshot_path())) return std::nullopt;
  auto document = nlohmann::json::parse(read_file(snapshot_path()));
  return Snapshot{document.at("seq").get<std::uint64_t>(), document.at("state")};
}

}  // namespace gos
