#include "gos/inference.hpp"

#include <algorithm>
#include <atomic>
#include <mutex>
#include <cmath>
#include <numeric>
#include <thread>

#include "gos/util.hpp"

namespace gos {

LogPrior LogPrior::uniform(std::size_t num_vertices, std::size_t label_space) {
  LogPrior prior;
  prior.label_space_ = label_space;
  prior.values_.assign(num_vertices * label_space, -std::log(static_cast<double>(label_space)));
  return prior;
}

LogPrior LogPrior::from_field(const PriorField& field, std::size_t label_space) {
  const std::size_t K = field.num_labels();
  if (K == 0) return uniform(field.num_vertices(), label_space);
  if (label_space < K)
    throw PartitionError("label space " + std::to_string(label_space) + " smaller than prior field K = " +
                         std::to_string(K));
  LogPrior prior;
  prior.label_space_ = label_space;
  prior.values_.resize(field.num_vertices() * label_space);
  for (std::size_t v = 0; v < field.num_vertices(); ++v) {
    auto row = field.row(v);
    const double fill = *std::min_element(row.begin(), row.end());
    const double total = std::accumulate(row.begin(), row.end(), 0.0) + fill * static_cast<double>(label_space - K);
    double* out = prior.values_.data() + v * label_space;
    for (std::size_t k = 0; k < label_space; ++k) out[k] = std::log((k < K ? row[k] : fill) / total);
  }
  return prior;
}

double posterior_score(const BipartiteGraph& graph, const Partition& partition, const LogPrior& prior) {
  if (prior.label_space() != partition.label_space() || prior.num_vertices() != partition.num_vertices())
    throw PartitionError("prior shape does not match the partition");
  double score = -description_length(graph, partition);
  for (std::size_t v = 0; v < partition.num_vertices(); ++v) score += prior(v, partition.label(v));
  return score;
}

double posterior_score(const BipartiteGraph& graph, const Partition& partition, const PriorField* field) {
  if (field && field->num_labels() > 0) {
    if (field->num_vertices() != graph.num_vertices())
      throw PartitionError("prior field rows do not match the graph's vertices");
    return posterior_score(graph, partition, LogPrior::from_field(*field, partition.label_space()));
  }
  return posterior_score(graph, partition, LogPrior::uniform(graph.num_vertices(), partition.label_space()));
}

void InferenceConfig::validate() const {
  if (sweeps < 1) throw std::invalid_argument("inference: sweeps must be >= 1");
  if (restarts < 1) throw std::invalid_argument("inference: restarts must be >= 1");
  if (!(p_new_group >= 0.0 && p_new_group <= 1.0)) throw std::invalid_argument("inference: p_new_group must be in [0, 1]");
  if (!(beta > 0.0)) throw std::invalid_argument("inference: beta must be positive");
  if (trace_every < 1) throw std::invalid_argument("inference: trace_every must be >= 1");
}

std::size_t resolve_label_space(const InferenceConfig& config, const PriorField* field) {
  const std::size_t K = field ? field->num_labels() : 0;
  if (config.label_space > 0) {
    if (config.label_space < K)
      throw std::invalid_argument("inference: label_space must be at least K = " + std::to_string(K));
    return config.label_space;
  }
  return K + (K < 30 ? config.headroom : 0);
}

McmcChain::McmcChain(const BipartiteGraph& graph, Partition initial, const LogPrior& prior, double p_new_group,
                     double beta, std::uint64_t seed)
    : graph_(graph),
      prior_(prior),
      partition_(std::move(initial)),
      p_new_(p_new_group),
      beta_(beta),
      rng_(seed) {
  const std::size_t L = partition_.label_space();
  if (prior_.label_space() != L || prior_.num_vertices() != graph_.num_vertices())
    throw PartitionError("prior shape does not match the partition");
  if (!partition_.type_pure()) throw PartitionError("MCMC requires a type-pure initial partition");
  position_.assign(L, 0);
  neighbor_counts_.assign(L, 0);
  for (std::uint32_t r = 0; r < L; ++r) {
    if (!partition_.is_occupied(r)) {
      list_insert(empty_, r);
    } else {
      auto t = partition_.type_count(r, VertexType::opinion) > 0 ? VertexType::opinion : VertexType::respondent;
      list_insert(occupied_list(t), r);
    }
  }
  order_.resize(graph_.num_vertices());
  std::iota(order_.begin(), order_.end(), 0u);
  lnfact_.reserve(graph_.num_opinions() * graph_.num_respondents() + graph_.num_vertices() + graph_.num_edges() +
                  L * (L + 1) / 2);
  score_ = posterior_score(graph_, partition_, prior_);
}

void McmcChain::list_insert(std::vector<std::uint32_t>& list, std::uint32_t group) {
  position_[group] = static_cast<std::uint32_t>(list.size());
  list.push_back(group);
}

void McmcChain::list_erase(std::vector<std::uint32_t>& list, std::uint32_t group) {
  std::uint32_t at = position_[group];
  std::uint32_t last = list.back();
  list[at] = last;
  position_[last] = at;
  list.pop_back();
}

double McmcChain::sbm_delta(std::size_t v, std::uint32_t s) {
  const std::uint32_t r = partition_.label(v);
  if (r == s) return 0.0;
  const auto& part = partition_;
  for (std::uint32_t u : graph_.neighbors(v)) ++neighbor_counts_[part.label(u)];

  auto pair_term = [&](std::uint64_t na, std::uint64_t nb, std::uint64_t e) {
    return e == 0 ? 0.0 : lnfact_.log_binomial(na * nb, e);
  };
  auto self_term = [&](std::uint64_t n, std::uint64_t e2) {
    return e2 == 0 ? 0.0 : lnfact_.log_binomial(n * (n - 1) / 2, e2 / 2);
  };

  const std::uint64_t nr = part.group_size(r);
  const std::uint64_t ns = part.group_size(s);
  double before = 0.0;
  double after = 0.0;
  for (const auto& list : occupied_) {
    for (std::uint32_t t : list) {
      if (t == r || t == s) continue;
      const std::uint64_t ert = part.edge_count(r, t);
      const std::uint64_t est = part.edge_count(s, t);
      if (ert == 0 && est == 0) continue;
      const std::uint64_t nt = part.group_size(t);
      const std::uint64_t ct = neighbor_counts_[t];
      before += pair_term(nr, nt, ert) + pair_term(ns, nt, est);
      after += pair_term(nr - 1, nt, ert - ct) + pair_term(ns + 1, nt, est + ct);
    }
  }
  const std::uint64_t cr = neighbor_counts_[r];
  const std::uint64_t cs = neighbor_counts_[s];
  const std::uint64_t ers = part.edge_count(r, s);
  before += pair_term(nr, ns, ers) + self_term(nr, part.edge_count(r, r)) + self_term(ns, part.edge_count(s, s));
  after += pair_term(nr - 1, ns + 1, ers + cr - cs) + self_term(nr - 1, part.edge_count(r, r) - 2 * cr) +
           self_term(ns + 1, part.edge_count(s, s) + 2 * cs);

  for (std::uint32_t u : graph_.neighbors(v)) neighbor_counts_[part.label(u)] = 0;

  double delta = after - before;
  // Group-size factorials: -ln n_r! - ln n_s! before and after.
  delta += std::log(static_cast<double>(nr)) - std::log(static_cast<double>(ns + 1));

  const std::uint64_t B = part.occupied();
  const std::uint64_t B_after = B - (nr == 1 ? 1 : 0) + (ns == 0 ? 1 : 0);
  if (B_after != B) {
    const std::uint64_t E = graph_.num_edges();
    const std::uint64_t N = graph_.num_vertices();
    if (E > 0) {
      delta += lnfact_.log_binomial(B_after * (B_after + 1) / 2 + E - 1, E) -
               lnfact_.log_binomial(B * (B + 1) / 2 + E - 1, E);
    }
    delta += lnfact_.log_binomial(N - 1, B_after - 1) - lnfact_.log_binomial(N - 1, B - 1);
  }
  return delta;
}

double McmcChain::move_delta(std::size_t v, std::uint32_t target) {
  const std::uint32_t r = partition_.label(v);
  if (r == target) return 0.0;
  return -sbm_delta(v, target) + prior_(v, target) - prior_(v, r);
}

void McmcChain::apply_move(std::size_t v, std::uint32_t target, double delta) {
  const std::uint32_t r = partition_.label(v);
  const VertexType t = graph_.type(v);
  const bool target_was_empty = !partition_.is_occupied(target);
  partition_.move_vertex(graph_, v, target);
  if (target_was_empty) {
    list_erase(empty_, target);
    list_insert(occupied_list(t), target);
  }
  if (!partition_.is_occupied(r)) {
    list_erase(occupied_list(t), r);
    list_insert(empty_, r);
  }
  score_ += delta;
}

std::size_t McmcChain::sweep() {
  std::shuffle(order_.begin(), order_.end(), rng_);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const bool greedy = std::isinf(beta_);
  std::size_t accepted = 0;
  for (std::uint32_t v : order_) {
    const std::uint32_t r = partition_.label(v);
    const VertexType t = graph_.type(v);
    auto& occupied = occupied_list(t);
    const bool to_empty = unit(rng_) < p_new_;
    std::uint32_t s;
    if (to_empty) {
      if (empty_.empty()) continue;
      s = empty_[std::uniform_int_distribution<std::size_t>(0, empty_.size() - 1)(rng_)];
    } else {
      s = occupied[std::uniform_int_distribution<std::size_t>(0, occupied.size() - 1)(rng_)];
      if (s == r) continue;
    }
    const double delta = move_delta(v, s);
    bool accept;
    if (greedy) {
      accept = delta > 0.0;
    } else {
      const auto n_empty = static_cast<double>(empty_.size());
      const auto n_occupied = static_cast<double>(occupied.size());
      const double log_forward = to_empty ? std::log(p_new_ / n_empty) : std::log((1.0 - p_new_) / n_occupied);
      double log_reverse;
      if (partition_.group_size(r) == 1) {
        log_reverse = std::log(p_new_ / (n_empty - (to_empty ? 1.0 : 0.0) + 1.0));
      } else {
        log_reverse = std::log((1.0 - p_new_) / (n_occupied + (to_empty ? 1.0 : 0.0)));
      }
      const double log_ratio = beta_ * delta + log_reverse - log_forward;
      accept = log_ratio >= 0.0 || std::log(unit(rng_)) < log_ratio;
    }
    if (accept) {
      apply_move(v, s, delta);
      ++accepted;
    }
  }
  if (verify_) partition_.verify(graph_);
  return accepted;
}

std::size_t McmcChain::greedy_sweep() {
  constexpr double kMinGain = 1e-9;
  std::shuffle(order_.begin(), order_.end(), rng_);
  std::size_t moved = 0;
  for (std::uint32_t v : order_) {
    const std::uint32_t r = partition_.label(v);
    const VertexType t = graph_.type(v);
    double best = kMinGain;
    std::uint32_t best_target = r;
    for (std::uint32_t s : occupied_list(t)) {
      if (s == r) continue;
      double delta = move_delta(v, s);
      if (delta > best) {
        best = delta;
        best_target = s;
      }
    }
    if (!empty_.empty()) {
      // The SBM part is identical for every empty label; only the prior differs.
      const double structural = -sbm_delta(v, empty_.front());
      for (std::uint32_t s : empty_) {
        double delta = structural + prior_(v, s) - prior_(v, r);
        if (delta > best) {
          best = delta;
          best_target = s;
        }
      }
    }
    if (best_target != r) {
      apply_move(v, best_target, move_delta(v, best_target));
      ++moved;
    }
  }
  if (verify_) partition_.verify(graph_);
  return moved;
}

bool McmcChain::greedy_merge() {
  constexpr double kMinGain = 1e-9;
  std::vector<std::vector<std::uint32_t>> members(partition_.label_space());
  for (std::uint32_t v = 0; v < graph_.num_vertices(); ++v) members[partition_.label(v)].push_back(v);

  const double start = score_;
  double best = kMinGain;
  std::uint32_t best_from = 0, best_into = 0;
  for (const auto type : {VertexType::opinion, VertexType::respondent}) {
    const std::vector<std::uint32_t> groups = occupied_list(type);
    for (std::uint32_t r : groups) {
      for (std::uint32_t s : groups) {
        if (r == s) continue;
        double gain = 0.0;
        for (std::uint32_t v : members[r]) {
          double d = move_delta(v, s);
          apply_move(v, s, d);
          gain += d;
        }
        for (std::uint32_t v : members[r]) apply_move(v, r, move_delta(v, r));
        score_ = start;
        if (gain > best) {
          best = gain;
          best_from = r;
          best_into = s;
        }
      }
    }
  }
  if (best <= kMinGain) return false;
  for (std::uint32_t v : members[best_from]) apply_move(v, best_into, move_delta(v, best_into));
  return true;
}

std::size_t mcmc_sweep(const BipartiteGraph& graph, Partition& partition, const LogPrior& prior,
                       const InferenceConfig& config, std::mt19937_64& rng) {
  McmcChain chain(graph, partition, prior, config.p_new_group, config.beta, rng());
  std::size_t accepted = chain.sweep();
  partition = chain.partition();
  return accepted;
}

Partition random_initial_partition(const BipartiteGraph& graph, std::size_t label_space, std::mt19937_64& rng) {
  const std::size_t N = graph.num_vertices();
  const std::size_t n_o = graph.num_opinions();
  const std::size_t n_r = graph.num_respondents();
  if (N == 0) return Partition(graph, {}, label_space);
  const std::size_t groups = std::min(label_space, N);
  if (n_o > 0 && n_r > 0 && groups < 2)
    throw std::invalid_argument("inference: a graph with both vertex types needs a label space of at least 2");

  std::size_t g_o = 0;
  if (n_r == 0) {
    g_o = groups;
  } else if (n_o > 0) {
    auto proportional = static_cast<std::size_t>(
        std::llround(static_cast<double>(groups) * static_cast<double>(n_o) / static_cast<double>(N)));
    const std::size_t lo = std::max<std::size_t>(1, groups > n_r ? groups - n_r : 0);
    const std::size_t hi = std::min(n_o, groups - 1);
    g_o = std::clamp(proportional, lo, hi);
  }
  const std::size_t g_r = groups - g_o;

  std::vector<std::uint32_t> labels_pool(label_space);
  std::iota(labels_pool.begin(), labels_pool.end(), 0u);
  std::shuffle(labels_pool.begin(), labels_pool.end(), rng);

  std::vector<std::uint32_t> labels(N, 0);
  auto assign = [&](std::size_t first_vertex, std::size_t count, std::size_t label_offset, std::size_t n_groups) {
    if (count == 0) return;
    std::vector<std::uint32_t> order(count);
    std::iota(order.begin(), order.end(), static_cast<std::uint32_t>(first_vertex));
    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_int_distribution<std::size_t> pick(0, n_groups - 1);
    for (std::size_t i = 0; i < count; ++i)
      labels[order[i]] = labels_pool[label_offset + (i < n_groups ? i : pick(rng))];
  };
  assign(0, n_o, 0, g_o);
  assign(n_o, n_r, g_o, g_r);
  return Partition(graph, std::move(labels), label_space);
}

InferenceResult infer(const BipartiteGraph& graph, const PriorField* field, const InferenceConfig& config) {
  config.validate();
  if (graph.num_vertices() == 0) throw std::invalid_argument("inference: empty graph");
  const PriorField* used_field = field && field->num_labels() > 0 ? field : nullptr;
  if (used_field && used_field->num_vertices() != graph.num_vertices())
    throw std::invalid_argument("inference: prior field rows do not match the graph's vertices");
  const std::size_t L = resolve_label_space(config, used_field);
  const LogPrior prior = used_field ? LogPrior::from_field(*used_field, L) : LogPrior::uniform(graph.num_vertices(), L);

  std::vector<Partition> finals(config.restarts);
  std::vector<RestartTrace> traces(config.restarts);

  auto run = [&](std::size_t restart) {
    RestartTrace& trace = traces[restart];
    trace.seed = mix_seed(config.rng_seed, restart);
    std::mt19937_64 rng(trace.seed);
    Partition init = random_initial_partition(graph, L, rng);
    McmcChain chain(graph, std::move(init), prior, config.p_new_group, config.beta, rng());
    trace.scores.push_back(chain.score());
    for (std::size_t sweep = 1; sweep <= config.sweeps; ++sweep) {
      trace.accepted += chain.sweep();
      if (sweep % config.trace_every == 0) trace.scores.push_back(chain.score());
    }
    // Vertex-level descent, then improving merges, until neither helps.
    std::size_t budget = config.greedy_sweeps;
    for (;;) {
      while (budget > 0 && chain.greedy_sweep() > 0) --budget;
      if (!chain.greedy_merge()) break;
    }
    finals[restart] = chain.partition();
    trace.final_score = posterior_score(graph, finals[restart], prior);
    trace.occupied = finals[restart].occupied();
    trace.scores.push_back(trace.final_score);
  };

  const std::size_t threads = std::clamp<std::size_t>(config.threads, 1, config.restarts);
  if (threads == 1) {
    for (std::size_t i = 0; i < config.restarts; ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    std::exception_ptr failure;
    std::mutex failure_mutex;
    for (std::size_t w = 0; w < threads; ++w) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < config.restarts; i = next++) {
          try {
            run(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& worker : workers) worker.join();
    if (failure) std::rethrow_exception(failure);
  }

  InferenceResult result;
  result.label_space = L;
  for (std::size_t i = 0; i < config.restarts; ++i)
    if (i == 0 || traces[i].final_score > traces[result.best_restart].final_score) result.best_restart = i;
  result.partition = finals[result.best_restart];
  result.score = traces[result.best_restart].final_score;
  result.restarts = std::move(traces);
  return result;
}

nlohmann::json inference_report(const InferenceResult& result) {
  nlohmann::json restarts = nlohmann::json::array();
  for (const auto& trace : result.restarts)
    restarts.push_back({{"seed", trace.seed},
                        {"final_score", trace.final_score},
                        {"occupied_groups", trace.occupied},
                        {"accepted_moves", trace.accepted},
                        {"score_trace", trace.scores}});
  return {{"best_restart", result.best_restart},
          {"best_score", result.score},
          {"occupied_groups", result.partition.occupied()},
          {"label_space", result.label_space},
          {"restarts", std::move(restarts)}};
}

std::map<std::uint32_t, std::string> name_groups(const OpinionGraph& graph, const Partition& partition,
                                                 const AnnotationSet& annotations) {
  const std::size_t L = partition.label_space();
  const std::size_t n_o = graph.num_opinions();
  std::vector<std::array<std::size_t, kSemanticGroupCount>> tallies(L);
  for (auto& t : tallies) t.fill(0);
  for (std::size_t o = 0; o < n_o; ++o)
    for (const auto& [annotator, group] : annotations.labels_of(graph.opinions()[o].id))
      ++tallies[partition.label(o)][group_position(group)];

  std::map<std::uint32_t, std::string> names;
  std::map<std::string, int> used;
  std::size_t unlabeled = 0;
  std::size_t respondent_groups = 0;
  for (std::uint32_t r = 0; r < L; ++r) {
    if (!partition.is_occupied(r)) continue;
    if (partition.type_count(r, VertexType::opinion) == 0) {
      names[r] = "respondents-" + std::to_string(respondent_groups++);
      continue;
    }
    const auto& tally = tallies[r];
    auto best = std::max_element(tally.begin(), tally.end());  // first maximum wins ties
    if (*best == 0) {
      names[r] = "unlabeled-" + std::to_string(unlabeled++);
      continue;
    }
    std::string name(group_display_name(static_cast<SemanticGroup>(best - tally.begin())));
    int count = ++used[name];
    names[r] = count == 1 ? name : name + " (" + std::to_string(count) + ")";
  }
  return names;
}

std::string export_partition_csv(const OpinionGraph& graph, const Partition& partition,
                                 const std::map<std::uint32_t, std::string>& names) {
  std::string out = "vertex_id,vertex_type,group_index,group_name\n";
  auto row = [&](const std::string& id, const char* type, std::uint32_t group) {
    auto it = names.find(group);
    out += csv_escape(id);
    out += ',';
    out += type;
    out += ',';
    out += std::to_string(group);
    out += ',';
    out += csv_escape(it == names.end() ? std::string{} : it->second);
    out += '\n';
  };
  const std::size_t n_o = graph.num_opinions();
  for (std::size_t o = 0; o < n_o; ++o) row(graph.opinions()[o].id, "opinion", partition.label(o));
  for (std::size_t r = 0; r < graph.num_respondents(); ++r)
    row(graph.respondents()[r].id, "respondent", partition.label(n_o + r));
  return out;
}

ImportedPartition import_partition_csv(std::string_view csv, const OpinionGraph& graph,
                                       const BipartiteGraph& bipartite, std::size_t label_space) {
  auto lines = split_lines(csv);
  if (lines.empty() || lines.front() != "vertex_id,vertex_type,group_index,group_name")
    throw PartitionError("partition CSV: missing header vertex_id,vertex_type,group_index,group_name");
  const std::size_t N = bipartite.num_vertices();
  const std::size_t n_o = graph.num_opinions();
  std::vector<std::int64_t> labels(N, -1);
  ImportedPartition out;
  std::uint32_t max_label = 0;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const std::string where = "partition CSV line " + std::to_string(i + 1);
    auto fields = split_csv_record(lines[i]);
    if (fields.size() != 4) throw PartitionError(where + ": expected 4 fields");
    std::size_t v;
    if (fields[1] == "opinion") {
      auto o = graph.opinion_index(fields[0]);
      if (!o) throw PartitionError(where + ": unknown opinion '" + fields[0] + "'");
      v = *o;
    } else if (fields[1] == "respondent") {
      auto r = graph.respondent_index(fields[0]);
      if (!r) throw PartitionError(where + ": unknown respondent '" + fields[0] + "'");
      v = n_o + *r;
    } else {
      throw PartitionError(where + ": vertex_type must be opinion or respondent");
    }
    if (labels[v] >= 0) throw PartitionError(where + ": vertex '" + fields[0] + "' listed twice");
    std::uint32_t group;
    try {
      std::size_t used = 0;
      unsigned long parsed = std::stoul(fields[2], &used);
      if (used != fields[2].size()) throw std::invalid_argument("trailing");
      group = static_cast<std::uint32_t>(parsed);
    } catch (const std::exception&) {
      throw PartitionError(where + ": bad group_index '" + fields[2] + "'");
    }
    labels[v] = group;
    max_label = std::max(max_label, group);
    out.names.emplace(group, fields[3]);
  }
  std::vector<std::uint32_t> final_labels(N);
  for (std::size_t v = 0; v < N; ++v) {
    if (labels[v] < 0) throw PartitionError("partition CSV: vertex " + std::to_string(v) + " missing");
    final_labels[v] = static_cast<std::uint32_t>(labels[v]);
  }
  const std::size_t L = std::max<std::size_t>(label_space, N == 0 ? 0 : max_label + 1);
  out.partition = Partition(bipartite, std::move(final_labels), L);
  return out;
}

}  // namespace gos
