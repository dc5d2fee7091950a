#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace gos {

using OpinionId = std::string;
using RespondentId = std::string;

/// Raised for rejected responses and structurally invalid graphs.
class GraphError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SurveyConfig {
  int min_menu = 8;
  int max_menu = 24;
  bool allow_new_opinions = true;
  int max_new_opinions_per_respondent = 5;

  /// Throws GraphError unless 1 <= min_menu <= max_menu and the new-opinion
  /// cap is non-negative.
  void validate() const;
  int clamp_menu(int n) const;

  friend bool operator==(const SurveyConfig&, const SurveyConfig&) = default;
};

struct Opinion {
  OpinionId id;
  std::string text;
  /// Empty for seed opinions, otherwise the authoring respondent.
  std::optional<RespondentId> author;
  std::uint64_t created_at = 0;

  bool is_seed() const { return !author.has_value(); }
  friend bool operator==(const Opinion&, const Opinion&) = default;
};

struct Respondent {
  RespondentId id;
  std::uint64_t created_at = 0;
  std::vector<OpinionId> menu;

  friend bool operator==(const Respondent&, const Respondent&) = default;
};

/// Edge endpoints as positions in the opinion and respondent arrays.
struct Edge {
  std::uint32_t opinion = 0;
  std::uint32_t respondent = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Bipartite graph of opinion and respondent vertices grown by a survey.
///
/// Opinions and respondents are kept in creation order; `created_at` values
/// come from one monotone counter shared by both vertex kinds. Edges are
/// kept in insertion order, at most one per (opinion, respondent) pair.
class OpinionGraph {
 public:
  OpinionGraph() = default;
  explicit OpinionGraph(SurveyConfig config);

  const SurveyConfig& config() const { return config_; }
  const std::vector<Opinion>& opinions() const { return opinions_; }
  const std::vector<Respondent>& respondents() const { return respondents_; }
  const std::vector<Edge>& edges() const { return edges_; }

  std::size_t num_opinions() const { return opinions_.size(); }
  std::size_t num_respondents() const { return respondents_.size(); }
  std::size_t num_edges() const { return edges_.size(); }
  std::uint64_t next_sequence() const { return next_seq_; }

  std::optional<std::uint32_t> opinion_index(std::string_view id) const;
  std::optional<std::uint32_t> respondent_index(std::string_view id) const;
  bool has_edge(std::uint32_t opinion, std::uint32_t respondent) const;

  /// Opinions adjacent to a respondent, in edge insertion order.
  const std::vector<std::uint32_t>& respondent_neighbors(std::uint32_t respondent) const {
    return respondent_adj_[respondent];
  }
  const std::vector<std::uint32_t>& opinion_neighbors(std::uint32_t opinion) const {
    return opinion_adj_[opinion];
  }

  /// Adds a seed opinion (no author, no edges).
  OpinionId add_seed_opinion(std::string text);

  /// Records one response. `menu` is the list of opinions that was shown,
  /// `selected` must be a subset of it. Each new text becomes an opinion
  /// authored by the new respondent and immediately joins the sampling pool.
  /// Throws GraphError when the response is rejected; the graph is then
  /// unchanged.
  RespondentId submit_response(std::span<const OpinionId> menu,
                               std::span<const OpinionId> selected,
                               std::span<const std::string> new_texts);

  /// Low-level insertion used by the importer. No validation beyond id
  /// uniqueness; run check_invariants afterwards.
  void insert_opinion(Opinion opinion);
  void insert_respondent(Respondent respondent);
  void insert_edge(Edge edge);

  /// The graph as it was when it held `n_opinions` opinions and
  /// `n_respondents` respondents (creation-order prefix).
  OpinionGraph prefix(std::size_t n_opinions, std::size_t n_respondents) const;

  friend bool operator==(const OpinionGraph& a, const OpinionGraph& b) {
    return a.config_ == b.config_ && a.opinions_ == b.opinions_ &&
           a.respondents_ == b.respondents_ && a.edges_ == b.edges_;
  }

 private:
  std::string fresh_id(char prefix) const;
  bool id_taken(std::string_view id) const;
  static std::uint64_t edge_key(std::uint32_t o, std::uint32_t r) {
    return (static_cast<std::uint64_t>(o) << 32) | r;
  }

  SurveyConfig config_;
  std::vector<Opinion> opinions_;
  std::vector<Respondent> respondents_;
  std::vector<Edge> edges_;
  std::unordered_map<std::string, std::uint32_t> opinion_by_id_;
  std::unordered_map<std::string, std::uint32_t> respondent_by_id_;
  std::unordered_set<std::uint64_t> edge_set_;
  std::vector<std::vector<std::uint32_t>> opinion_adj_;
  std::vector<std::vector<std::uint32_t>> respondent_adj_;
  std::uint64_t next_seq_ = 0;
};

/// A survey with the given seed opinions and no respondents. Duplicate
/// texts become distinct vertices.
OpinionGraph new_survey(std::span<const std::string> seed_opinions, SurveyConfig config = {});

/// `n` is clamped into [min_menu, max_menu]; returns min(n, pool) distinct
/// opinion ids drawn uniformly without replacement, in presentation order.
/// Deterministic for a fixed `rng_seed`.
std::vector<OpinionId> sample_menu(const OpinionGraph& graph, int n, std::uint64_t rng_seed);

/// Unclamped uniform draw of up to `count` opinions not listed in `exclude`.
std::vector<OpinionId> draw_opinions(const OpinionGraph& graph, std::size_t count,
                                     std::span<const OpinionId> exclude, std::uint64_t rng_seed);

/// Full scan of the structural invariants. Returns one message per violation.
std::vector<std::string> check_invariants(const OpinionGraph& graph);

/// The twelve initial opinions used to seed the original COVID-19 surveys.
std::vector<std::string> default_seed_opinions();

}  // namespace gos
