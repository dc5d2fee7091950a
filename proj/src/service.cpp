#include "gos/service.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>

#include "gos/graph_io.hpp"
#include "gos/inference.hpp"
#include "gos/simulator.hpp"
#include "gos/util.hpp"

namespace gos {

using nlohmann::json;

namespace {

Reply error_reply(int status, const std::string& message) { return {status, json{{"error", message}}}; }

std::optional<std::string> env(const char* name) {
  const char* value = std::getenv(name);
  if (!value || !*value) return std::nullopt;
  return std::string(value);
}

json annotations_to_json(const AnnotationSet& set) {
  json entries = json::array();
  for (const auto& [key, group] : set.entries()) entries.push_back({key.first, key.second, group_code(group)});
  return {{"annotators", set.annotators()}, {"entries", entries}};
}

AnnotationSet annotations_from_json(const json& doc) {
  AnnotationSet set;
  // Register annotators first so their order survives the round trip.
  std::vector<std::string> annotators = doc.at("annotators").get<std::vector<std::string>>();
  std::map<std::pair<std::string, std::string>, SemanticGroup> entries;
  for (const auto& e : doc.at("entries")) {
    auto group = parse_group_code(e.at(2).get<std::string>());
    if (!group) throw std::runtime_error("snapshot: unknown group code");
    entries[{e.at(0).get<std::string>(), e.at(1).get<std::string>()}] = *group;
  }
  for (const auto& annotator : annotators)
    for (const auto& [key, group] : entries)
      if (key.second == annotator) set.set(key.first, key.second, group);
  return set;
}

json names_to_json(const std::map<std::uint32_t, std::string>& names) {
  json out = json::object();
  for (const auto& [group, name] : names) out[std::to_string(group)] = name;
  return out;
}

std::map<std::uint32_t, std::string> names_from_json(const json& doc) {
  std::map<std::uint32_t, std::string> names;
  for (const auto& [key, value] : doc.items())
    names[static_cast<std::uint32_t>(std::stoul(key))] = value.get<std::string>();
  return names;
}

}  // namespace

ServiceConfig ServiceConfig::load(const std::optional<std::filesystem::path>& file) {
  ServiceConfig config;
  if (file) {
    json doc = json::parse(read_file(*file));
    config.host = doc.value("host", config.host);
    config.port = doc.value("port", config.port);
    config.data_dir = doc.value("data_dir", config.data_dir.string());
    config.static_dir = doc.value("static_dir", config.static_dir.string());
    config.session_ttl_seconds = doc.value("session_ttl_seconds", config.session_ttl_seconds);
    config.snapshot_every = doc.value("snapshot_every", config.snapshot_every);
    config.workers = doc.value("workers", config.workers);
    config.rng_seed = doc.value("rng_seed", config.rng_seed);
  }
  if (auto v = env("GOS_HOST")) config.host = *v;
  if (auto v = env("GOS_PORT")) config.port = std::stoi(*v);
  if (auto v = env("GOS_DATA_DIR")) config.data_dir = *v;
  if (auto v = env("GOS_STATIC_DIR")) config.static_dir = *v;
  if (auto v = env("GOS_SESSION_TTL")) config.session_ttl_seconds = std::stoi(*v);
  if (auto v = env("GOS_WORKERS")) config.workers = static_cast<std::size_t>(std::stoul(*v));
  return config;
}

WorkerPool::WorkerPool(std::size_t workers) {
  for (std::size_t i = 0; i < std::max<std::size_t>(1, workers); ++i) {
    threads_.emplace_back([this] {
      for (;;) {
        std::function<void()> task;
        {
          std::unique_lock lock(mutex_);
          wake_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
          if (queue_.empty()) return;
          task = std::move(queue_.front());
          queue_.pop_front();
          ++running_;
        }
        task();
        {
          std::lock_guard lock(mutex_);
          --running_;
        }
        idle_.notify_all();
      }
    });
  }
}

WorkerPool::~WorkerPool() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  for (auto& t : threads_) t.join();
}

void WorkerPool::submit(std::function<void()> task) {
  {
    std::lock_guard lock(mutex_);
    queue_.push_back(std::move(task));
  }
  wake_.notify_one();
}

void WorkerPool::wait_idle() {
  std::unique_lock lock(mutex_);
  idle_.wait(lock, [this] { return queue_.empty() && running_ == 0; });
}

SurveyService::SurveyService(ServiceConfig config, Clock clock)
    : config_(std::move(config)),
      clock_(clock ? std::move(clock) : Clock([] { return std::chrono::steady_clock::now(); })),
      log_(config_.data_dir),
      rng_(config_.rng_seed != 0 ? config_.rng_seed : std::random_device{}()),
      pool_(config_.workers) {
  replay();
}

SurveyService::~SurveyService() { pool_.wait_idle(); }

void SurveyService::replay() {
  std::uint64_t from = 0;
  if (auto snapshot = log_.read_snapshot()) {
    restore(snapshot->state);
    from = snapshot->sequence;
    sequence_ = from;
  }
  auto events = log_.read_after(from);
  for (const auto& event : events) {
    apply(event);
    sequence_ = event.sequence;
  }
  if (!events.empty() || from > 0)
    log_info("replayed " + std::to_string(events.size()) + " events after snapshot " + std::to_string(from));
}

void SurveyService::apply(const SurveyEvent& event) {
  const json& p = event.payload;
  switch (event.kind) {
    case EventKind::created: {
      Survey survey;
      survey.id = event.survey_id;
      survey.admin_token = p.at("admin_token").get<std::string>();
      auto seeds = p.at("seed_opinions").get<std::vector<std::string>>();
      survey.graph = new_survey(seeds, config_from_json(p.at("config")));
      surveys_.emplace(survey.id, std::move(survey));
      break;
    }
    case EventKind::response: {
      Survey* survey = find_survey(event.survey_id);
      if (!survey) throw std::runtime_error("event for unknown survey " + event.survey_id);
      auto menu = p.at("menu").get<std::vector<std::string>>();
      auto selected = p.at("selected").get<std::vector<std::string>>();
      auto texts = p.at("new_texts").get<std::vector<std::string>>();
      survey->graph.submit_response(menu, selected, texts);
      survey->consumed_sessions.insert(p.at("session").get<std::string>());
      break;
    }
    case EventKind::annotation_import: {
      Survey* survey = find_survey(event.survey_id);
      if (!survey) throw std::runtime_error("event for unknown survey " + event.survey_id);
      auto imported = gos::import_annotations(p.at("csv").get<std::string>(), &survey->graph);
      merge_annotations(survey->annotations, imported.annotations);
      break;
    }
    case EventKind::cluster_run: {
      Survey* survey = find_survey(event.survey_id);
      if (!survey) throw std::runtime_error("event for unknown survey " + event.survey_id);
      ClusterRun run;
      run.job_id = p.at("job").get<std::string>();
      run.n_opinions = p.at("n_opinions").get<std::size_t>();
      run.n_respondents = p.at("n_respondents").get<std::size_t>();
      run.label_space = p.at("label_space").get<std::size_t>();
      run.labels = p.at("labels").get<std::vector<std::uint32_t>>();
      run.score = p.at("score").get<double>();
      run.config = p.at("config");
      run.names = names_from_json(p.at("names"));
      survey->latest = std::move(run);
      break;
    }
  }
}

void SurveyService::record(SurveyEvent event) {
  event.sequence = sequence_ + 1;
  apply(event);
  log_.append(event);
  sequence_ = event.sequence;
  if (config_.snapshot_every > 0 && ++events_since_snapshot_ >= config_.snapshot_every) {
    log_.write_snapshot({sequence_, state_document()});
    events_since_snapshot_ = 0;
  }
}

json SurveyService::state_document() const {
  json surveys = json::array();
  for (const auto& [id, s] : surveys_) {
    std::vector<std::string> consumed(s.consumed_sessions.begin(), s.consumed_sessions.end());
    std::sort(consumed.begin(), consumed.end());
    json latest = nullptr;
    if (s.latest) {
      latest = {{"job", s.latest->job_id},
                {"n_opinions", s.latest->n_opinions},
                {"n_respondents", s.latest->n_respondents},
                {"label_space", s.latest->label_space},
                {"labels", s.latest->labels},
                {"score", s.latest->score},
                {"config", s.latest->config},
                {"names", names_to_json(s.latest->names)}};
    }
    surveys.push_back({{"id", id},
                       {"admin_token", s.admin_token},
                       {"graph", graph_to_json(s.graph)},
                       {"annotations", annotations_to_json(s.annotations)},
                       {"latest_cluster", latest},
                       {"consumed_sessions", consumed}});
  }
  return {{"surveys", surveys}};
}

void SurveyService::restore(const json& state) {
  surveys_.clear();
  for (const auto& doc : state.at("surveys")) {
    Survey s;
    s.id = doc.at("id").get<std::string>();
    s.admin_token = doc.at("admin_token").get<std::string>();
    s.graph = graph_from_json(doc.at("graph"));
    s.annotations = annotations_from_json(doc.at("annotations"));
    for (const auto& session : doc.at("consumed_sessions")) s.consumed_sessions.insert(session.get<std::string>());
    const json& latest = doc.at("latest_cluster");
    if (!latest.is_null()) {
      ClusterRun run;
      run.job_id = latest.at("job").get<std::string>();
      run.n_opinions = latest.at("n_opinions").get<std::size_t>();
      run.n_respondents = latest.at("n_respondents").get<std::size_t>();
      run.label_space = latest.at("label_space").get<std::size_t>();
      run.labels = latest.at("labels").get<std::vector<std::uint32_t>>();
      run.score = latest.at("score").get<double>();
      run.config = latest.at("config");
      run.names = names_from_json(latest.at("names"));
      s.latest = std::move(run);
    }
    surveys_.emplace(s.id, std::move(s));
  }
}

std::uint64_t SurveyService::last_sequence() const {
  std::shared_lock lock(state_mutex_);
  return sequence_;
}

std::uint64_t SurveyService::next_menu_seed() {
  std::lock_guard lock(rng_mutex_);
  return rng_();
}

const SurveyService::Survey* SurveyService::find_survey(const std::string& id) const {
  auto it = surveys_.find(id);
  return it == surveys_.end() ? nullptr : &it->second;
}

SurveyService::Survey* SurveyService::find_survey(const std::string& id) {
  auto it = surveys_.find(id);
  return it == surveys_.end() ? nullptr : &it->second;
}

bool SurveyService::authorized(const Survey& survey, const std::string& token) const {
  return !token.empty() && token == survey.admin_token;
}

Reply SurveyService::create_survey(const json& body) {
  if (!body.is_object()) return error_reply(400, "expected a JSON object");
  std::vector<std::string> seeds;
  SurveyConfig config;
  try {
    if (body.value("use_default_seeds", false)) seeds = default_seed_opinions();
    if (body.contains("seed_opinions")) {
      auto extra = body.at("seed_opinions").get<std::vector<std::string>>();
      seeds.insert(seeds.end(), extra.begin(), extra.end());
    }
    if (body.contains("config")) config = config_from_json(body.at("config"));
  } catch (const std::exception& e) {
    return error_reply(400, e.what());
  }
  SurveyEvent event;
  event.kind = EventKind::created;
  event.survey_id = "s" + random_token().substr(0, 12);
  std::string admin = random_token();
  event.payload = {{"admin_token", admin}, {"seed_opinions", seeds}, {"config", config_to_json(config)}};
  std::unique_lock lock(state_mutex_);
  record(event);
  return {201, {{"survey_id", event.survey_id}, {"admin_token", admin}, {"opinions", seeds.size()}}};
}

Reply SurveyService::survey_stats(const std::string& survey_id) const {
  std::shared_lock lock(state_mutex_);
  const Survey* s = find_survey(survey_id);
  if (!s) return error_reply(404, "unknown survey");
  json latest = nullptr;
  if (s->latest) {
    std::set<std::uint32_t> groups(s->latest->labels.begin(), s->latest->labels.end());
    latest = {{"job", s->latest->job_id}, {"score", s->latest->score}, {"occupied_groups", groups.size()},
              {"n_opinions", s->latest->n_opinions}, {"n_respondents", s->latest->n_respondents}};
  }
  return {200,
          {{"survey_id", survey_id},
           {"config", config_to_json(s->graph.config())},
           {"opinions", s->graph.num_opinions()},
           {"respondents", s->graph.num_respondents()},
           {"edges", s->graph.num_edges()},
           {"posting_rate", posting_rate(s->graph)},
           {"annotators", s->annotations.annotators()},
           {"annotations", s->annotations.size()},
           {"latest_cluster", latest}}};
}

Reply SurveyService::open_session(const std::string& survey_id) {
  std::vector<OpinionId> menu;
  json items = json::array();
  int max_menu = 0;
  {
    std::shared_lock lock(state_mutex_);
    const Survey* s = find_survey(survey_id);
    if (!s) return error_reply(404, "unknown survey");
    menu = sample_menu(s->graph, s->graph.config().min_menu, next_menu_seed());
    max_menu = s->graph.config().max_menu;
    for (const auto& id : menu) items.push_back({{"id", id}, {"text", s->graph.opinions()[*s->graph.opinion_index(id)].text}});
  }
  std::string token = random_token();
  Session session{survey_id, menu, clock_() + std::chrono::seconds(config_.session_ttl_seconds), false};
  {
    std::lock_guard lock(session_mutex_);
    sessions_.emplace(token, std::move(session));
  }
  return {201,
          {{"session_id", token},
           {"survey_id", survey_id},
           {"menu", items},
           {"max_menu", max_menu},
           {"remaining_extension", max_menu - static_cast<int>(menu.size())},
           {"expires_in_seconds", config_.session_ttl_seconds}}};
}

Reply SurveyService::session_menu(const std::string& session_id, int extend) {
  if (extend < 0) return error_reply(400, "extend must be >= 0");
  std::lock_guard session_lock(session_mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    std::shared_lock lock(state_mutex_);
    for (const auto& [id, s] : surveys_)
      if (s.consumed_sessions.contains(session_id)) return error_reply(410, "session already used");
    return error_reply(404, "unknown session");
  }
  Session& session = it->second;
  if (session.consumed) return error_reply(410, "session already used");
  if (clock_() > session.expires_at) {
    sessions_.erase(it);
    return error_reply(410, "session expired");
  }
  std::shared_lock lock(state_mutex_);
  const Survey* s = find_survey(session.survey_id);
  if (!s) return error_reply(404, "unknown survey");
  const auto max_menu = static_cast<std::size_t>(s->graph.config().max_menu);
  if (extend > 0 && session.menu.size() < max_menu) {
    std::size_t room = max_menu - session.menu.size();
    auto extra = draw_opinions(s->graph, std::min<std::size_t>(room, static_cast<std::size_t>(extend)), session.menu,
                               next_menu_seed());
    session.menu.insert(session.menu.end(), extra.begin(), extra.end());
  }
  json items = json::array();
  for (const auto& id : session.menu)
    items.push_back({{"id", id}, {"text", s->graph.opinions()[*s->graph.opinion_index(id)].text}});
  return {200,
          {{"session_id", session_id},
           {"survey_id", session.survey_id},
           {"menu", items},
           {"max_menu", max_menu},
           {"remaining_extension", max_menu - session.menu.size()}}};
}

Reply SurveyService::submit_response(const std::string& session_id, const json& body) {
  if (!body.is_object()) return error_reply(400, "expected a JSON object");
  std::vector<std::string> selected, texts;
  try {
    if (body.contains("selected")) selected = body.at("selected").get<std::vector<std::string>>();
    if (body.contains("new_texts")) texts = body.at("new_texts").get<std::vector<std::string>>();
    if (body.contains("new_opinion")) {
      auto text = body.at("new_opinion").get<std::string>();
      if (!text.empty()) texts.push_back(text);
    }
  } catch (const std::exception& e) {
    return error_reply(400, e.what());
  }

  std::lock_guard session_lock(session_mutex_);
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) {
    std::shared_lock lock(state_mutex_);
    for (const auto& [id, s] : surveys_)
      if (s.consumed_sessions.contains(session_id)) return error_reply(410, "session already used");
    return error_reply(404, "unknown session");
  }
  Session& session = it->second;
  if (session.consumed) return error_reply(410, "session already used");
  if (clock_() > session.expires_at) {
    sessions_.erase(it);
    return error_reply(410, "session expired");
  }

  SurveyEvent event;
  event.kind = EventKind::response;
  event.survey_id = session.survey_id;
  event.payload = {{"session", session_id}, {"menu", session.menu}, {"selected", selected}, {"new_texts", texts}};
  std::string respondent;
  {
    std::unique_lock lock(state_mutex_);
    Survey* s = find_survey(session.survey_id);
    if (!s) return error_reply(404, "unknown survey");
    try {
      record(event);
    } catch (const GraphError& e) {
      return error_reply(422, e.what());
    }
    respondent = s->graph.respondents().back().id;
  }
  session.consumed = true;
  return {201, {{"respondent_id", respondent}, {"survey_id", session.survey_id}}};
}

Reply SurveyService::export_survey(const std::string& survey_id) const {
  std::shared_lock lock(state_mutex_);
  const Survey* s = find_survey(survey_id);
  if (!s) return error_reply(404, "unknown survey");
  return {200, graph_to_json(s->graph)};
}

Reply SurveyService::import_annotations(const std::string& survey_id, const std::string& admin_token,
                                        const std::string& csv) {
  std::unique_lock lock(state_mutex_);
  Survey* s = find_survey(survey_id);
  if (!s) return error_reply(404, "unknown survey");
  if (!authorized(*s, admin_token)) return error_reply(403, "admin token required");
  AnnotationImport preview = gos::import_annotations(csv, &s->graph);
  json rejected = json::array(), warnings = json::array();
  for (const auto& r : preview.rejected) rejected.push_back({{"line", r.line}, {"message", r.message}});
  for (const auto& w : preview.warnings) warnings.push_back({{"line", w.line}, {"message", w.message}});
  if (!preview.annotations.empty()) {
    SurveyEvent event;
    event.kind = EventKind::annotation_import;
    event.survey_id = survey_id;
    event.payload = {{"csv", csv}};
    record(event);
  }
  return {200,
          {{"accepted", preview.annotations.size()},
           {"rejected", rejected},
           {"warnings", warnings},
           {"annotators", s->annotations.annotators()}}};
}

Reply SurveyService::start_cluster(const std::string& survey_id, const std::string& admin_token, const json& body) {
  InferenceConfig inference;
  bool use_annotations = true;
  double epsilon = kDefaultPriorEpsilon;
  try {
    const json& b = body.is_object() ? body : json::object();
    inference.sweeps = b.value("sweeps", inference.sweeps);
    inference.restarts = b.value("restarts", inference.restarts);
    inference.rng_seed = b.value("seed", inference.rng_seed);
    inference.p_new_group = b.value("p_new_group", inference.p_new_group);
    inference.label_space = b.value("label_space", inference.label_space);
    inference.greedy_sweeps = b.value("greedy_sweeps", inference.greedy_sweeps);
    use_annotations = b.value("use_annotations", use_annotations);
    epsilon = b.value("epsilon", epsilon);
    inference.validate();
  } catch (const std::exception& e) {
    return error_reply(400, e.what());
  }

  OpinionGraph graph;
  AnnotationSet annotations;
  {
    std::shared_lock lock(state_mutex_);
    const Survey* s = find_survey(survey_id);
    if (!s) return error_reply(404, "unknown survey");
    if (!authorized(*s, admin_token)) return error_reply(403, "admin token required");
    if (s->graph.num_edges() == 0) return error_reply(409, "survey has no responses to cluster");
    graph = s->graph;
    if (use_annotations) annotations = s->annotations;
  }
  std::string job_id = "j" + random_token().substr(0, 16);
  {
    std::lock_guard lock(job_mutex_);
    jobs_[job_id] = Job{survey_id, "queued", "", nullptr};
  }
  json config_doc = {{"sweeps", inference.sweeps},       {"restarts", inference.restarts},
                     {"seed", inference.rng_seed},       {"p_new_group", inference.p_new_group},
                     {"use_annotations", use_annotations}, {"epsilon", epsilon}};

  pool_.submit([this, job_id, survey_id, graph = std::move(graph), annotations = std::move(annotations), inference,
                epsilon, config_doc] {
    {
      std::lock_guard lock(job_mutex_);
      jobs_[job_id].status = "running";
    }
    try {
      BipartiteGraph bipartite = to_bipartite(graph);
      std::optional<PriorField> field;
      if (!annotations.empty()) field = build_prior_field(annotations, graph, epsilon);
      InferenceResult result = infer(bipartite, field ? &*field : nullptr, inference);
      auto names = name_groups(graph, result.partition, annotations);
      SurveyEvent event;
      event.kind = EventKind::cluster_run;
      event.survey_id = survey_id;
      event.payload = {{"job", job_id},
                       {"n_opinions", graph.num_opinions()},
                       {"n_respondents", graph.num_respondents()},
                       {"label_space", result.label_space},
                       {"labels", result.partition.labels()},
                       {"score", result.score},
                       {"config", config_doc},
                       {"names", names_to_json(names)}};
      {
        std::unique_lock lock(state_mutex_);
        record(event);
      }
      std::lock_guard lock(job_mutex_);
      Job& job = jobs_[job_id];
      job.status = "done";
      job.result = {{"score", result.score}, {"occupied_groups", result.partition.occupied()},
                    {"names", names_to_json(names)}, {"report", inference_report(result)}};
    } catch (const std::exception& e) {
      std::lock_guard lock(job_mutex_);
      jobs_[job_id].status = "failed";
      jobs_[job_id].error = e.what();
    }
  });
  return {202, {{"job_id", job_id}, {"status", "queued"}}};
}

Reply SurveyService::job_status(const std::string& job_id) const {
  std::lock_guard lock(job_mutex_);
  auto it = jobs_.find(job_id);
  if (it == jobs_.end()) return error_reply(404, "unknown job");
  json body = {{"job_id", job_id}, {"survey_id", it->second.survey_id}, {"status", it->second.status}};
  if (!it->second.error.empty()) body["error"] = it->second.error;
  if (!it->second.result.is_null()) body["result"] = it->second.result;
  return {200, body};
}

void SurveyService::wait_for_jobs() { pool_.wait_idle(); }

Reply SurveyService::run_analysis(const std::string& survey_id,
                                  const std::function<json(const Survey&, const ClusterRun&)>& build) const {
  std::shared_lock lock(state_mutex_);
  const Survey* s = find_survey(survey_id);
  if (!s) return error_reply(404, "unknown survey");
  if (!s->latest) return error_reply(409, "no completed cluster run");
  try {
    return {200, build(*s, *s->latest)};
  } catch (const std::exception& e) {
    return error_reply(422, e.what());
  }
}

Reply SurveyService::popularity(const std::string& survey_id, std::size_t pad_rows) const {
  return run_analysis(survey_id, [pad_rows](const Survey& s, const ClusterRun& run) {
    OpinionGraph graph = s.graph.prefix(run.n_opinions, run.n_respondents);
    BipartiteGraph bipartite = to_bipartite(graph);
    Partition partition(bipartite, run.labels, run.label_space);
    return popularity_to_json(popularity_matrix(bipartite, partition, run.names, pad_rows));
  });
}

Reply SurveyService::palette(const std::string& survey_id, const std::vector<std::uint32_t>& excluded) const {
  return run_analysis(survey_id, [&excluded](const Survey& s, const ClusterRun& run) {
    OpinionGraph graph = s.graph.prefix(run.n_opinions, run.n_respondents);
    BipartiteGraph bipartite = to_bipartite(graph);
    Partition partition(bipartite, run.labels, run.label_space);
    return palette_to_json(palette_layout(graph, bipartite, partition, run.names, excluded));
  });
}

Reply SurveyService::agreement(const std::string& survey_id, const std::optional<std::string>& a,
                               const std::optional<std::string>& b) const {
  std::shared_lock lock(state_mutex_);
  const Survey* s = find_survey(survey_id);
  if (!s) return error_reply(404, "unknown survey");
  std::vector<std::pair<std::string, std::string>> pairs;
  if (a || b) {
    if (!a || !b) return error_reply(400, "give both annotators or neither");
    pairs.emplace_back(*a, *b);
  } else {
    const auto& names = s->annotations.annotators();
    for (std::size_t i = 0; i < names.size(); ++i)
      for (std::size_t j = i + 1; j < names.size(); ++j) pairs.emplace_back(names[i], names[j]);
  }
  json codes = json::array();
  for (std::size_t g = 0; g < kSemanticGroupCount; ++g) codes.push_back(group_code(static_cast<SemanticGroup>(g)));
  json out = json::array();
  for (const auto& [x, y] : pairs) {
    try {
      AgreementMatrix m = agreement_matrix(s->annotations, x, y);
      json rows = json::array();
      for (const auto& row : m) rows.push_back(row);
      out.push_back({{"a", x}, {"b", y}, {"matrix", rows}});
    } catch (const AnnotationError& e) {
      return error_reply(422, e.what());
    }
  }
  return {200, {{"groups", codes}, {"pairs", out}}};
}

}  // namespace gos
