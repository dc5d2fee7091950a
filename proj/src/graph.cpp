#include "gos/graph.hpp"

#include <algorithm>
#include <random>

#include "gos/util.hpp"

namespace gos {

void SurveyConfig::validate() const {
  if (min_menu < 1) throw GraphError("survey config: min_menu must be at least 1");
  if (max_menu < min_menu) throw GraphError("survey config: max_menu must be >= min_menu");
  if (max_new_opinions_per_respondent < 0)
    throw GraphError("survey config: max_new_opinions_per_respondent must be >= 0");
}

int SurveyConfig::clamp_menu(int n) const { return std::clamp(n, min_menu, max_menu); }

OpinionGraph::OpinionGraph(SurveyConfig config) : config_(config) { config_.validate(); }

std::optional<std::uint32_t> OpinionGraph::opinion_index(std::string_view id) const {
  auto it = opinion_by_id_.find(std::string(id));
  if (it == opinion_by_id_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::uint32_t> OpinionGraph::respondent_index(std::string_view id) const {
  auto it = respondent_by_id_.find(std::string(id));
  if (it == respondent_by_id_.end()) return std::nullopt;
  return it->second;
}

bool OpinionGraph::has_edge(std::uint32_t opinion, std::uint32_t respondent) const {
  return edge_set_.contains(edge_key(opinion, respondent));
}

bool OpinionGraph::id_taken(std::string_view id) const {
  std::string key(id);
  return opinion_by_id_.contains(key) || respondent_by_id_.contains(key);
}

std::string OpinionGraph::fresh_id(char prefix) const {
  std::size_t serial = prefix == 'o' ? opinions_.size() : respondents_.size();
  std::string id = prefix + std::to_string(serial);
  while (id_taken(id)) id = prefix + std::to_string(++serial);
  return id;
}

void OpinionGraph::insert_opinion(Opinion opinion) {
  if (id_taken(opinion.id)) throw GraphError("duplicate vertex id '" + opinion.id + "'");
  opinion_by_id_.emplace(opinion.id, static_cast<std::uint32_t>(opinions_.size()));
  next_seq_ = std::max(next_seq_, opinion.created_at + 1);
  opinions_.push_back(std::move(opinion));
  opinion_adj_.emplace_back();
}

void OpinionGraph::insert_respondent(Respondent respondent) {
  if (id_taken(respondent.id)) throw GraphError("duplicate vertex id '" + respondent.id + "'");
  respondent_by_id_.emplace(respondent.id, static_cast<std::uint32_t>(respondents_.size()));
  next_seq_ = std::max(next_seq_, respondent.created_at + 1);
  respondents_.push_back(std::move(respondent));
  respondent_adj_.emplace_back();
}

void OpinionGraph::insert_edge(Edge edge) {
  if (edge.opinion >= opinions_.size() || edge.respondent >= respondents_.size())
    throw GraphError("edge endpoint out of range");
  if (!edge_set_.insert(edge_key(edge.opinion, edge.respondent)).second)
    throw GraphError("duplicate edge (" + opinions_[edge.opinion].id + ", " +
                     respondents_[edge.respondent].id + ")");
  edges_.push_back(edge);
  opinion_adj_[edge.opinion].push_back(edge.respondent);
  respondent_adj_[edge.respondent].push_back(edge.opinion);
}

OpinionId OpinionGraph::add_seed_opinion(std::string text) {
  Opinion opinion{fresh_id('o'), std::move(text), std::nullopt, next_seq_};
  OpinionId id = opinion.id;
  insert_opinion(std::move(opinion));
  return id;
}

RespondentId OpinionGraph::submit_response(std::span<const OpinionId> menu,
                                           std::span<const OpinionId> selected,
                                           std::span<const std::string> new_texts) {
  if (selected.empty() && new_texts.empty())
    throw GraphError("empty response: select at least one opinion or post a new one");
  if (!new_texts.empty() && !config_.allow_new_opinions)
    throw GraphError("this survey does not accept new opinions");
  if (new_texts.size() > static_cast<std::size_t>(config_.max_new_opinions_per_respondent))
    throw GraphError("too many new opinions: " + std::to_string(new_texts.size()) + " > " +
                     std::to_string(config_.max_new_opinions_per_respondent));

  std::size_t pool = opinions_.size();
  std::size_t min_size = std::min<std::size_t>(static_cast<std::size_t>(config_.min_menu), pool);
  if (menu.size() > static_cast<std::size_t>(config_.max_menu) || menu.size() < min_size)
    throw GraphError("menu size " + std::to_string(menu.size()) + " outside [" +
                     std::to_string(min_size) + ", " + std::to_string(config_.max_menu) + "]");

  std::unordered_set<std::string_view> menu_ids;
  for (const auto& id : menu) {
    if (!opinion_index(id)) throw GraphError("menu lists unknown opinion '" + id + "'");
    if (!menu_ids.insert(id).second) throw GraphError("menu lists opinion '" + id + "' twice");
  }
  std::vector<std::uint32_t> chosen;
  std::unordered_set<std::string_view> seen;
  for (const auto& id : selected) {
    if (!menu_ids.contains(id)) throw GraphError("selected opinion '" + id + "' was not in the menu");
    if (!seen.insert(id).second) throw GraphError("opinion '" + id + "' selected twice");
    chosen.push_back(*opinion_index(id));
  }

  Respondent respondent{fresh_id('r'), next_seq_, std::vector<OpinionId>(menu.begin(), menu.end())};
  RespondentId rid = respondent.id;
  insert_respondent(std::move(respondent));
  auto r = static_cast<std::uint32_t>(respondents_.size() - 1);
  for (std::uint32_t o : chosen) insert_edge({o, r});
  for (const auto& text : new_texts) {
    Opinion opinion{fresh_id('o'), text, rid, next_seq_};
    insert_opinion(std::move(opinion));
    insert_edge({static_cast<std::uint32_t>(opinions_.size() - 1), r});
  }
  return rid;
}

OpinionGraph OpinionGraph::prefix(std::size_t n_opinions, std::size_t n_respondents) const {
  n_opinions = std::min(n_opinions, opinions_.size());
  n_respondents = std::min(n_respondents, respondents_.size());
  OpinionGraph out(config_);
  for (std::size_t i = 0; i < n_opinions; ++i) out.insert_opinion(opinions_[i]);
  for (std::size_t i = 0; i < n_respondents; ++i) out.insert_respondent(respondents_[i]);
  for (const Edge& e : edges_)
    if (e.opinion < n_opinions && e.respondent < n_respondents) out.insert_edge(e);
  return out;
}

OpinionGraph new_survey(std::span<const std::string> seed_opinions, SurveyConfig config) {
  OpinionGraph graph(config);
  for (const auto& text : seed_opinions) graph.add_seed_opinion(text);
  return graph;
}

std::vector<OpinionId> draw_opinions(const OpinionGraph& graph, std::size_t count,
                                     std::span<const OpinionId> exclude, std::uint64_t rng_seed) {
  std::unordered_set<std::string_view> excluded(exclude.begin(), exclude.end());
  std::vector<std::uint32_t> candidates;
  candidates.reserve(graph.num_opinions());
  for (std::uint32_t i = 0; i < graph.num_opinions(); ++i)
    if (!excluded.contains(graph.opinions()[i].id)) candidates.push_back(i);

  std::mt19937_64 rng(rng_seed);
  std::size_t take = std::min(count, candidates.size());
  // Partial Fisher-Yates: the first `take` slots are a uniform random sample in random order.
  for (std::size_t i = 0; i < take; ++i) {
    std::uniform_int_distribution<std::size_t> pick(i, candidates.size() - 1);
    std::swap(candidates[i], candidates[pick(rng)]);
  }
  std::vector<OpinionId> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i) out.push_back(graph.opinions()[candidates[i]].id);
  return out;
}

std::vector<OpinionId> sample_menu(const OpinionGraph& graph, int n, std::uint64_t rng_seed) {
  int clamped = graph.config().clamp_menu(n);
  if (clamped != n)
    log_info("menu request of " + std::to_string(n) + " clamped to " + std::to_string(clamped));
  return draw_opinions(graph, static_cast<std::size_t>(clamped), {}, rng_seed);
}

std::vector<std::string> check_invariants(const OpinionGraph& graph) {
  std::vector<std::string> problems;
  const auto& opinions = graph.opinions();
  const auto& respondents = graph.respondents();
  const auto& config = graph.config();

  std::unordered_set<std::uint64_t> stamps;
  for (std::size_t i = 0; i < opinions.size(); ++i) {
    if (!stamps.insert(opinions[i].created_at).second)
      problems.push_back("opinion '" + opinions[i].id + "': created_at reused");
    if (i > 0 && opinions[i].created_at <= opinions[i - 1].created_at)
      problems.push_back("opinion '" + opinions[i].id + "': out of creation order");
  }
  for (std::size_t i = 0; i < respondents.size(); ++i) {
    if (!stamps.insert(respondents[i].created_at).second)
      problems.push_back("respondent '" + respondents[i].id + "': created_at reused");
    if (i > 0 && respondents[i].created_at <= respondents[i - 1].created_at)
      problems.push_back("respondent '" + respondents[i].id + "': out of creation order");
  }

  for (std::uint32_t o = 0; o < opinions.size(); ++o) {
    const Opinion& op = opinions[o];
    if (!op.author) continue;
    auto author = graph.respondent_index(*op.author);
    if (!author) {
      problems.push_back("opinion '" + op.id + "': unknown author '" + *op.author + "'");
      continue;
    }
    if (respondents[*author].created_at >= op.created_at)
      problems.push_back("opinion '" + op.id + "': created before its author");
    if (!graph.has_edge(o, *author))
      problems.push_back("opinion '" + op.id + "': no edge to its author");
  }

  for (std::uint32_t r = 0; r < respondents.size(); ++r) {
    const Respondent& resp = respondents[r];
    const auto& neighbors = graph.respondent_neighbors(r);
    if (neighbors.empty()) problems.push_back("respondent '" + resp.id + "': degree 0");

    std::unordered_set<std::string_view> menu;
    std::size_t pool = 0;
    for (const Opinion& op : opinions)
      if (op.created_at < resp.created_at) ++pool;
    for (const auto& id : resp.menu) {
      if (!menu.insert(id).second) problems.push_back("respondent '" + resp.id + "': menu repeats '" + id + "'");
      auto o = graph.opinion_index(id);
      if (!o) {
        problems.push_back("respondent '" + resp.id + "': menu lists unknown opinion '" + id + "'");
      } else if (opinions[*o].created_at > resp.created_at) {
        problems.push_back("respondent '" + resp.id + "': menu lists later opinion '" + id + "'");
      }
    }
    std::size_t lo = std::min<std::size_t>(static_cast<std::size_t>(config.min_menu), pool);
    if (resp.menu.size() < lo || resp.menu.size() > static_cast<std::size_t>(config.max_menu))
      problems.push_back("respondent '" + resp.id + "': menu size " + std::to_string(resp.menu.size()) +
                         " outside [" + std::to_string(lo) + ", " + std::to_string(config.max_menu) + "]");

    for (std::uint32_t o : neighbors) {
      const Opinion& op = opinions[o];
      bool authored = op.author && *op.author == resp.id;
      if (!authored && !menu.contains(op.id))
        problems.push_back("respondent '" + resp.id + "': edge to '" + op.id + "' outside its menu");
    }
  }

  std::unordered_set<std::uint64_t> seen;
  for (const Edge& e : graph.edges()) {
    std::uint64_t key = (static_cast<std::uint64_t>(e.opinion) << 32) | e.respondent;
    if (!seen.insert(key).second) problems.push_back("duplicate edge");
  }
  return problems;
}

std::vector<std::string> default_seed_opinions() {
  return {
      "Domestic violence",
      "I had to close my business because of a declining number of customers.",
      "I cannot concentrate on my work because of school closure.",
      "I am afraid of the pressure that I might experience from others if I become infected with "
      "COVID-19.",
      "My business is suffering.",
      "I do not know what is going to happen to me if I become infected.",
      "I am hesitant to visit my doctor even when I feel sick with the common cold, etc., because "
      "I do not want to catch the virus.",
      "I cannot get a PCR test even when I want to get tested.",
      "I cannot get a paid leave even if I tested positive with COVID-19, and I would have no "
      "choice but to take a leave without pay or quit my job.",
      "I am not sure if I can afford to pay medical bills if I become infected.",
      "I am spending too much on childcare costs.",
      "I do not have much money left and I am not sure if I can survive without public assistance.",
  };
}

}  // namespace gos
