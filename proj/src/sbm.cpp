#include "gos/sbm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gos {

BipartiteGraph::BipartiteGraph(std::size_t n_opinions, std::size_t n_respondents,
                               std::span<const std::pair<std::uint32_t, std::uint32_t>> edges)
    : n_opinions_(n_opinions), n_respondents_(n_respondents), adjacency_(n_opinions + n_respondents) {
  edges_.reserve(edges.size());
  for (const auto& [o, r] : edges) {
    if (o >= n_opinions || r >= n_respondents) throw std::out_of_range("bipartite edge endpoint out of range");
    std::uint32_t rv = respondent_vertex(r);
    edges_.emplace_back(o, rv);
    adjacency_[o].push_back(rv);
    adjacency_[rv].push_back(o);
  }
}

BipartiteGraph to_bipartite(const OpinionGraph& graph) {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> edges;
  edges.reserve(graph.num_edges());
  for (const Edge& e : graph.edges()) edges.emplace_back(e.opinion, e.respondent);
  return BipartiteGraph(graph.num_opinions(), graph.num_respondents(), edges);
}

void LogFactorial::reserve(std::size_t n) {
  n = std::min(n, cap_);
  if (table_.size() > n) return;
  std::size_t start = table_.size();
  table_.resize(n + 1);
  for (std::size_t k = start; k <= n; ++k) table_[k] = std::lgamma(static_cast<double>(k) + 1.0);
}

double LogFactorial::operator()(std::uint64_t k) {
  if (k < table_.size()) return table_[k];
  if (k <= cap_) {
    reserve(std::max<std::size_t>(k, table_.size() * 2));
    return table_[k];
  }
  return std::lgamma(static_cast<double>(k) + 1.0);
}

Partition::Partition(const BipartiteGraph& graph, std::vector<std::uint32_t> labels, std::size_t label_space)
    : label_space_(label_space),
      labels_(std::move(labels)),
      opinion_counts_(label_space, 0),
      respondent_counts_(label_space, 0),
      block_edges_(label_space * label_space, 0) {
  if (labels_.size() != graph.num_vertices())
    throw PartitionError("partition has " + std::to_string(labels_.size()) + " labels for " +
                         std::to_string(graph.num_vertices()) + " vertices");
  for (std::size_t v = 0; v < labels_.size(); ++v) {
    if (labels_[v] >= label_space_)
      throw PartitionError("vertex " + std::to_string(v) + " has label " + std::to_string(labels_[v]) +
                           " outside label space " + std::to_string(label_space_));
    add_to_group(labels_[v], graph.type(v));
  }
  for (const auto& [o, r] : graph.edges()) {
    std::size_t a = labels_[o], b = labels_[r];
    ++block_edges_[a * label_space_ + b];
    ++block_edges_[b * label_space_ + a];
  }
}

void Partition::add_to_group(std::size_t r, VertexType t) {
  if (group_size(r) == 0) ++occupied_;
  ++(t == VertexType::opinion ? opinion_counts_[r] : respondent_counts_[r]);
}

void Partition::remove_from_group(std::size_t r, VertexType t) {
  --(t == VertexType::opinion ? opinion_counts_[r] : respondent_counts_[r]);
  if (group_size(r) == 0) --occupied_;
}

bool Partition::type_pure() const {
  for (std::size_t r = 0; r < label_space_; ++r)
    if (opinion_counts_[r] > 0 && respondent_counts_[r] > 0) return false;
  return true;
}

void Partition::move_vertex(const BipartiteGraph& graph, std::size_t v, std::uint32_t target) {
  if (target >= label_space_) throw PartitionError("move target outside label space");
  std::uint32_t source = labels_[v];
  if (source == target) return;
  const std::size_t L = label_space_;
  for (std::uint32_t u : graph.neighbors(v)) {
    std::size_t t = labels_[u];
    --block_edges_[source * L + t];
    --block_edges_[t * L + source];
    ++block_edges_[target * L + t];
    ++block_edges_[t * L + target];
  }
  remove_from_group(source, graph.type(v));
  add_to_group(target, graph.type(v));
  labels_[v] = target;
}

void Partition::verify(const BipartiteGraph& graph) const {
  Partition fresh(graph, labels_, label_space_);
  if (fresh.opinion_counts_ != opinion_counts_ || fresh.respondent_counts_ != respondent_counts_)
    throw std::logic_error("partition: cached group sizes inconsistent with labels");
  if (fresh.block_edges_ != block_edges_)
    throw std::logic_error("partition: cached block edge counts inconsistent with labels");
  if (fresh.occupied_ != occupied_) throw std::logic_error("partition: cached occupied count inconsistent");
}

namespace {
double log_binomial(double n, double k) {
  if (k == 0.0 || k == n) return 0.0;
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}
}  // namespace

DescriptionLength description_length_terms(const BipartiteGraph& graph, const Partition& partition) {
  DescriptionLength dl;
  const std::size_t L = partition.label_space();
  std::vector<std::size_t> occupied;
  for (std::size_t r = 0; r < L; ++r)
    if (partition.is_occupied(r)) occupied.push_back(r);

  for (std::size_t i = 0; i < occupied.size(); ++i) {
    std::size_t r = occupied[i];
    auto nr = static_cast<double>(partition.group_size(r));
    dl.adjacency += log_binomial(nr * (nr - 1.0) / 2.0, static_cast<double>(partition.edge_count(r, r)) / 2.0);
    for (std::size_t j = i + 1; j < occupied.size(); ++j) {
      std::size_t s = occupied[j];
      auto ns = static_cast<double>(partition.group_size(s));
      dl.adjacency += log_binomial(nr * ns, static_cast<double>(partition.edge_count(r, s)));
    }
  }

  const auto N = static_cast<double>(graph.num_vertices());
  const auto E = static_cast<double>(graph.num_edges());
  const auto B = static_cast<double>(partition.occupied());
  const double pairs = B * (B + 1.0) / 2.0;
  dl.edge_counts = E > 0.0 ? log_binomial(pairs + E - 1.0, E) : 0.0;

  if (N > 0.0) {
    dl.partition = std::lgamma(N + 1.0) + log_binomial(N - 1.0, B - 1.0) + std::log(N);
    for (std::size_t r : occupied) dl.partition -= std::lgamma(static_cast<double>(partition.group_size(r)) + 1.0);
  }
  return dl;
}

double description_length(const BipartiteGraph& graph, const Partition& partition) {
  return description_length_terms(graph, partition).total();
}

}  // namespace gos
