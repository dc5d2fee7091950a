#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <shared_mutex>
#include <string>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "gos/analysis.hpp"
#include "gos/annotation.hpp"
#include "gos/event_log.hpp"
#include "gos/graph.hpp"

namespace gos {

struct ServiceConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::filesystem::path data_dir = "gos-data";
  /// Directory of static web assets served at "/"; empty disables it.
  std::filesystem::path static_dir;
  int session_ttl_seconds = 3600;
  /// Write a snapshot after this many events (0 disables snapshots).
  std::size_t snapshot_every = 200;
  std::size_t workers = 2;
  /// Seed for menu sampling; 0 draws one from the OS.
  std::uint64_t rng_seed = 0;

  /// Reads an optional JSON config file, then applies GOS_HOST, GOS_PORT,
  /// GOS_DATA_DIR, GOS_STATIC_DIR, GOS_SESSION_TTL and GOS_WORKERS.
  static ServiceConfig load(const std::optional<std::filesystem::path>& file);
};

/// HTTP-agnostic result of a service call.
struct Reply {
  int status = 200;
  nlohmann::json body;
};

/// Fixed-size worker pool for background clustering jobs.
class WorkerPool {
 public:
  explicit WorkerPool(std::size_t workers);
  ~WorkerPool();
  void submit(std::function<void()> task);
  /// Blocks until the queue is empty and no task is running.
  void wait_idle();

 private:
  std::vector<std::thread> threads_;
  std::deque<std::function<void()>> queue_;
  std::mutex mutex_;
  std::condition_variable wake_;
  std::condition_variable idle_;
  std::size_t running_ = 0;
  bool stopping_ = false;
};

/// Survey lifecycle, respondent sessions, annotation import, clustering jobs
/// and analytics. State is event-sourced: every accepted mutation is appended
/// to the log before it is acknowledged, and construction replays the log.
///
/// Writes to survey state are serialized through one writer lock; menu reads,
/// exports and analytics take shared locks. Sessions are ephemeral and are not
/// part of the replayed state, except that consumed session ids are.
class SurveyService {
 public:
  using Clock = std::function<std::chrono::steady_clock::time_point()>;

  explicit SurveyService(ServiceConfig config, Clock clock = {});
  ~SurveyService();

  Reply create_survey(const nlohmann::json& body);
  Reply survey_stats(const std::string& survey_id) const;
  Reply open_session(const std::string& survey_id);
  Reply session_menu(const std::string& session_id, int extend);
  Reply submit_response(const std::string& session_id, const nlohmann::json& body);
  Reply export_survey(const std::string& survey_id) const;
  Reply import_annotations(const std::string& survey_id, const std::string& admin_token, const std::string& csv);
  Reply start_cluster(const std::string& survey_id, const std::string& admin_token, const nlohmann::json& body);
  Reply job_status(const std::string& job_id) const;
  Reply popularity(const std::string& survey_id, std::size_t pad_rows) const;
  Reply palette(const std::string& survey_id, const std::vector<std::uint32_t>& excluded) const;
  Reply agreement(const std::string& survey_id, const std::optional<std::string>& a,
                  const std::optional<std::string>& b) const;

  /// Blocks until all queued clustering jobs have finished.
  void wait_for_jobs();
  /// Full replayable state (surveys, annotations, cluster results, consumed
  /// sessions) as one document; used for snapshots and equality checks.
  nlohmann::json state_document() const;
  std::uint64_t last_sequence() const;
  const ServiceConfig& config() const { return config_; }

 private:
  struct ClusterRun {
    std::string job_id;
    std::size_t n_opinions = 0;
    std::size_t n_respondents = 0;
    std::size_t label_space = 0;
    std::vector<std::uint32_t> labels;
    double score = 0.0;
    nlohmann::json config;
    std::map<std::uint32_t, std::string> names;
  };
  struct Survey {
    std::string id;
    std::string admin_token;
    OpinionGraph graph;
    AnnotationSet annotations;
    std::optional<ClusterRun> latest;
    std::unordered_set<std::string> consumed_sessions;
  };
  struct Session {
    std::string survey_id;
    std::vector<OpinionId> menu;
    std::chrono::steady_clock::time_point expires_at;
    bool consumed = false;
  };
  struct Job {
    std::string survey_id;
    std::string status;  // queued | running | done | failed
    std::string error;
    nlohmann::json result;
  };

  void replay();
  void apply(const SurveyEvent& event);
  /// Appends under the writer lock, applies, and snapshots when due.
  void record(SurveyEvent event);
  void restore(const nlohmann::json& state);
  std::uint64_t next_menu_seed();
  const Survey* find_survey(const std::string& id) const;
  Survey* find_survey(const std::string& id);
  bool authorized(const Survey& survey, const std::string& token) const;
  Reply run_analysis(const std::string& survey_id,
                     const std::function<nlohmann::json(const Survey&, const ClusterRun&)>& build) const;

  ServiceConfig config_;
  Clock clock_;
  EventLog log_;
  std::map<std::string, Survey> surveys_;
  std::uint64_t sequence_ = 0;
  std::uint64_t events_since_snapshot_ = 0;
  mutable std::shared_mutex state_mutex_;

  std::unordered_map<std::string, Session> sessions_;
  std::mutex session_mutex_;

  std::map<std::string, Job> jobs_;
  mutable std::mutex job_mutex_;

  std::mt19937_64 rng_;
  std::mutex rng_mutex_;
  WorkerPool pool_;
};

}  // namespace gos
