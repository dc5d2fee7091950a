#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gos/graph.hpp"

namespace gos {

enum class VertexType : std::uint8_t { opinion, respondent };

/// Index-based view of an opinion graph for inference. Vertices
/// [0, n_opinions) are opinions, the rest respondents.
class BipartiteGraph {
 public:
  BipartiteGraph() = default;
  /// `edges` pairs are (opinion position, respondent position), each counted
  /// from zero within its own vertex type.
  BipartiteGraph(std::size_t n_opinions, std::size_t n_respondents,
                 std::span<const std::pair<std::uint32_t, std::uint32_t>> edges);

  std::size_t num_vertices() const { return n_opinions_ + n_respondents_; }
  std::size_t num_opinions() const { return n_opinions_; }
  std::size_t num_respondents() const { return n_respondents_; }
  std::size_t num_edges() const { return edges_.size(); }
  VertexType type(std::size_t v) const { return v < n_opinions_ ? VertexType::opinion : VertexType::respondent; }
  /// Global vertex index of respondent position `r`.
  std::uint32_t respondent_vertex(std::size_t r) const { return static_cast<std::uint32_t>(n_opinions_ + r); }
  const std::vector<std::uint32_t>& neighbors(std::size_t v) const { return adjacency_[v]; }
  /// Edges as (opinion vertex, respondent vertex) global indices.
  const std::vector<std::pair<std::uint32_t, std::uint32_t>>& edges() const { return edges_; }

 private:
  std::size_t n_opinions_ = 0;
  std::size_t n_respondents_ = 0;
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges_;
  std::vector<std::vector<std::uint32_t>> adjacency_;
};

BipartiteGraph to_bipartite(const OpinionGraph& graph);

/// ln(k!) with a lazily grown table; falls back to lgamma past `cap` entries.
class LogFactorial {
 public:
  explicit LogFactorial(std::size_t cap = std::size_t{1} << 22) : cap_(cap) {}
  void reserve(std::size_t n);
  double operator()(std::uint64_t k);
  double log_binomial(std::uint64_t n, std::uint64_t k) {
    return (*this)(n) - (*this)(k) - (*this)(n - k);
  }

 private:
  std::size_t cap_;
  std::vector<double> table_;
};

class PartitionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Group assignment of every vertex with cached block statistics:
/// group sizes n_r, per-type counts, the symmetric block edge matrix e_rs
/// (e_rr counts each internal edge twice) and the occupied-group count B.
class Partition {
 public:
  Partition() = default;
  /// Throws PartitionError when a label is >= label_space or the label count
  /// differs from the vertex count.
  Partition(const BipartiteGraph& graph, std::vector<std::uint32_t> labels, std::size_t label_space);

  std::size_t label_space() const { return label_space_; }
  std::size_t num_vertices() const { return labels_.size(); }
  const std::vector<std::uint32_t>& labels() const { return labels_; }
  std::uint32_t label(std::size_t v) const { return labels_[v]; }

  std::uint64_t group_size(std::size_t r) const { return opinion_counts_[r] + respondent_counts_[r]; }
  std::uint64_t type_count(std::size_t r, VertexType t) const {
    return t == VertexType::opinion ? opinion_counts_[r] : respondent_counts_[r];
  }
  std::uint64_t edge_count(std::size_t r, std::size_t s) const { return block_edges_[r * label_space_ + s]; }
  std::size_t occupied() const { return occupied_; }
  bool is_occupied(std::size_t r) const { return group_size(r) > 0; }
  /// True when no group mixes opinions and respondents.
  bool type_pure() const;

  /// Moves one vertex and updates the cached statistics incrementally.
  void move_vertex(const BipartiteGraph& graph, std::size_t v, std::uint32_t target);

  /// Recomputes the statistics from labels and throws std::logic_error on any
  /// mismatch with the cached values.
  void verify(const BipartiteGraph& graph) const;

  friend bool operator==(const Partition& a, const Partition& b) {
    return a.label_space_ == b.label_space_ && a.labels_ == b.labels_;
  }

 private:
  void add_to_group(std::size_t r, VertexType t);
  void remove_from_group(std::size_t r, VertexType t);

  std::size_t label_space_ = 0;
  std::vector<std::uint32_t> labels_;
  std::vector<std::uint64_t> opinion_counts_;
  std::vector<std::uint64_t> respondent_counts_;
  std::vector<std::uint64_t> block_edges_;
  std::size_t occupied_ = 0;
};

/// The three negative log-probability terms of the microcanonical SBM, in nats.
struct DescriptionLength {
  double adjacency = 0.0;   // -ln P(A | e, b)
  double edge_counts = 0.0; // -ln P(e)
  double partition = 0.0;   // -ln P(b)
  double total() const { return adjacency + edge_counts + partition; }
};

/// Flat (non-degree-corrected) microcanonical SBM description length:
///   -ln P(A|e,b) = sum_{r<s} ln C(n_r n_s, e_rs) + sum_r ln C(n_r(n_r-1)/2, e_rr/2)
///   -ln P(e)     = ln multiset(B(B+1)/2, E)
///   -ln P(b)     = ln N! - sum_r ln n_r! + ln C(N-1, B-1) + ln N
/// Evaluated with lgamma from the partition's cached statistics.
DescriptionLength description_length_terms(const BipartiteGraph& graph, const Partition& partition);
double description_length(const BipartiteGraph& graph, const Partition& partition);

}  // namespace gos
