#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "gos/annotation.hpp"
#include "gos/graph.hpp"
#include "gos/sbm.hpp"

namespace gos {

/// Log prior probability of each label for each vertex, dense N x L.
class LogPrior {
 public:
  LogPrior() = default;
  static LogPrior uniform(std::size_t num_vertices, std::size_t label_space);

  /// Embeds a K-label prior field into L >= K labels. Labels past K take the
  /// row's smallest entry (epsilon for annotated rows, 1/K for uniform rows)
  /// and each row is renormalised, so uniform rows become 1/L and the
  /// eta/epsilon ratio is preserved. K = 0 yields the uniform prior.
  static LogPrior from_field(const PriorField& field, std::size_t label_space);

  std::size_t label_space() const { return label_space_; }
  std::size_t num_vertices() const { return label_space_ == 0 ? 0 : values_.size() / label_space_; }
  double operator()(std::size_t v, std::size_t label) const { return values_[v * label_space_ + label]; }

 private:
  std::size_t label_space_ = 0;
  std::vector<double> values_;
};

/// score = -description_length + sum_v ln pi_v(label(v)), in nats.
double posterior_score(const BipartiteGraph& graph, const Partition& partition, const LogPrior& prior);
/// Without a field the prior is uniform over the partition's label space.
double posterior_score(const BipartiteGraph& graph, const Partition& partition, const PriorField* field = nullptr);

struct InferenceConfig {
  std::size_t sweeps = 2000;
  std::size_t restarts = 10;
  std::uint64_t rng_seed = 1;
  /// 0 derives the label space: K from the prior field plus `headroom` when K < 30.
  std::size_t label_space = 0;
  std::size_t headroom = 30;
  double p_new_group = 0.1;
  /// Inverse temperature; +infinity accepts only improving moves.
  double beta = 1.0;
  /// Cap on best-improvement sweeps after sampling; they stop early once a
  /// sweep moves nothing.
  std::size_t greedy_sweeps = 100;
  std::size_t threads = 1;
  /// Record the score every `trace_every` sweeps.
  std::size_t trace_every = 10;

  void validate() const;
};

std::size_t resolve_label_space(const InferenceConfig& config, const PriorField* field);

/// One Metropolis-Hastings chain over type-pure partitions.
///
/// Proposal for a vertex in group r: with probability p_new a uniformly chosen
/// empty label, otherwise a uniformly chosen occupied group of the vertex's
/// type (possibly r itself, a null move). Acceptance includes the Hastings
/// ratio of the reverse proposal, so at beta = 1 the chain targets
/// exp(score) over labelled type-pure partitions.
class McmcChain {
 public:
  McmcChain(const BipartiteGraph& graph, Partition initial, const LogPrior& prior, double p_new_group,
            double beta, std::uint64_t seed);

  /// One pass over all vertices in random order. Returns accepted moves.
  std::size_t sweep();
  /// One pass moving each vertex to its best-scoring type-consistent group
  /// when that strictly improves the score.
  std::size_t greedy_sweep();
  /// Merges the pair of same-type groups whose union improves the score the
  /// most. Returns false when no merge improves it. Not part of the sampling
  /// kernel; used only by the optimisation phase of infer().
  bool greedy_merge();

  /// Change in score if vertex v moved to `target`.
  double move_delta(std::size_t v, std::uint32_t target);

  double score() const { return score_; }
  const Partition& partition() const { return partition_; }
  /// Check cached statistics against a full scan after every sweep.
  void set_verify(bool verify) { verify_ = verify; }

 private:
  void apply_move(std::size_t v, std::uint32_t target, double delta);
  void list_insert(std::vector<std::uint32_t>& list, std::uint32_t group);
  void list_erase(std::vector<std::uint32_t>& list, std::uint32_t group);
  double sbm_delta(std::size_t v, std::uint32_t target);
  std::vector<std::uint32_t>& occupied_list(VertexType t) { return occupied_[static_cast<int>(t)]; }

  const BipartiteGraph& graph_;
  const LogPrior& prior_;
  Partition partition_;
  double p_new_;
  double beta_;
  std::mt19937_64 rng_;
  LogFactorial lnfact_;
  double score_ = 0.0;
  bool verify_ = false;
  std::vector<std::uint32_t> occupied_[2];
  std::vector<std::uint32_t> empty_;
  std::vector<std::uint32_t> position_;  // index of each label within its list
  std::vector<std::uint32_t> neighbor_counts_;
  std::vector<std::uint32_t> order_;
};

/// Convenience wrapper: one sampling sweep over `partition` in place.
/// Returns the number of accepted moves.
std::size_t mcmc_sweep(const BipartiteGraph& graph, Partition& partition, const LogPrior& prior,
                       const InferenceConfig& config, std::mt19937_64& rng);

/// Random type-pure assignment using min(L, N) groups, all occupied.
Partition random_initial_partition(const BipartiteGraph& graph, std::size_t label_space, std::mt19937_64& rng);

struct RestartTrace {
  std::uint64_t seed = 0;
  std::vector<double> scores;
  double final_score = 0.0;
  std::size_t occupied = 0;
  std::size_t accepted = 0;
};

struct InferenceResult {
  Partition partition;
  double score = 0.0;
  std::size_t best_restart = 0;
  std::size_t label_space = 0;
  std::vector<RestartTrace> restarts;
};

/// Best partition over independent restarts. Deterministic for fixed inputs
/// and rng_seed regardless of the thread count.
InferenceResult infer(const BipartiteGraph& graph, const PriorField* field, const InferenceConfig& config);

nlohmann::json inference_report(const InferenceResult& result);

/// Names opinion groups by the majority annotation of their members (ties go
/// to the earlier group code), "unlabeled-i" when no member is annotated.
/// Respondent groups are named "respondents-i". Counters follow label order.
std::map<std::uint32_t, std::string> name_groups(const OpinionGraph& graph, const Partition& partition,
                                                 const AnnotationSet& annotations);

/// `vertex_id,vertex_type,group_index,group_name` per vertex.
std::string export_partition_csv(const OpinionGraph& graph, const Partition& partition,
                                 const std::map<std::uint32_t, std::string>& names);

struct ImportedPartition {
  Partition partition;
  std::map<std::uint32_t, std::string> names;
};

/// Reads the CSV written by export_partition_csv. Every vertex of `graph`
/// must appear exactly once. The label space is max(group_index) + 1 unless
/// `label_space` is larger.
ImportedPartition import_partition_csv(std::string_view csv, const OpinionGraph& graph,
                                       const BipartiteGraph& bipartite, std::size_t label_space = 0);

}  // namespace gos
