#include "gos/simulator.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "gos/graph_io.hpp"
#include "gos/util.hpp"

namespace gos {

namespace {

constexpr int kMaxSelectionRedraws = 1000;

void check_distribution(const std::vector<double>& p, std::size_t size, const std::string& what) {
  if (p.size() != size) throw std::invalid_argument(what + ": expected " + std::to_string(size) + " entries");
  double total = 0.0;
  for (double x : p) {
    if (!(x >= 0.0)) throw std::invalid_argument(what + ": negative entry");
    total += x;
  }
  if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument(what + ": entries must sum to 1");
}

std::vector<double> normalized(std::vector<double> weights) {
  double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (total <= 0.0) {
    std::fill(weights.begin(), weights.end(), 1.0 / static_cast<double>(weights.size()));
  } else {
    for (double& w : weights) w /= total;
  }
  return weights;
}

}  // namespace

void PlantedModel::validate() const {
  if (opinion_groups == 0 || respondent_groups == 0) throw std::invalid_argument("planted model: need >= 1 group of each type");
  if (affinity.size() != respondent_groups) throw std::invalid_argument("planted model: affinity needs one row per respondent group");
  for (const auto& row : affinity) {
    if (row.size() != opinion_groups) throw std::invalid_argument("planted model: affinity row length != opinion groups");
    for (double a : row)
      if (!(a >= 0.0 && a <= 1.0)) throw std::invalid_argument("planted model: affinity entries must lie in [0, 1]");
  }
  if (!(p_new >= 0.0 && p_new <= 1.0)) throw std::invalid_argument("planted model: p_new must lie in [0, 1]");
  if (menu_size < 0) throw std::invalid_argument("planted model: menu_size must be >= 0");
  if (!respondent_prior.empty()) check_distribution(respondent_prior, respondent_groups, "respondent_prior");
  if (!new_opinion_prior.empty()) {
    if (new_opinion_prior.size() != respondent_groups)
      throw std::invalid_argument("new_opinion_prior: one row per respondent group");
    for (const auto& row : new_opinion_prior) check_distribution(row, opinion_groups, "new_opinion_prior row");
  }
  survey.validate();
}

PlantedModel assortative_model(std::size_t respondent_groups, std::size_t opinion_groups, double diagonal,
                               double off_diagonal) {
  PlantedModel model;
  model.respondent_groups = respondent_groups;
  model.opinion_groups = opinion_groups;
  model.affinity.assign(respondent_groups, std::vector<double>(opinion_groups, off_diagonal));
  for (std::size_t g = 0; g < std::min(respondent_groups, opinion_groups); ++g) model.affinity[g][g] = diagonal;
  return model;
}

std::vector<std::uint32_t> SimulationResult::planted_vertex_labels(std::size_t opinion_group_count) const {
  std::vector<std::uint32_t> labels(opinion_groups.begin(), opinion_groups.end());
  for (std::uint32_t g : respondent_groups) labels.push_back(static_cast<std::uint32_t>(opinion_group_count) + g);
  return labels;
}

SimulationResult simulate(const PlantedModel& model, const std::vector<std::size_t>& seed_opinions_per_group) {
  model.validate();
  if (seed_opinions_per_group.size() != model.opinion_groups)
    throw std::invalid_argument("simulate: seed_opinions_per_group needs one count per opinion group");

  const std::vector<double> respondent_prior =
      model.respondent_prior.empty()
          ? std::vector<double>(model.respondent_groups, 1.0 / static_cast<double>(model.respondent_groups))
          : model.respondent_prior;
  std::vector<std::vector<double>> opinion_prior = model.new_opinion_prior;
  if (opinion_prior.empty())
    for (const auto& row : model.affinity) opinion_prior.push_back(normalized(row));

  SimulationResult result;
  result.graph = OpinionGraph(model.survey);
  for (std::size_t g = 0; g < model.opinion_groups; ++g) {
    for (std::size_t i = 0; i < seed_opinions_per_group[g]; ++i) {
      result.graph.add_seed_opinion("seed opinion " + std::to_string(g) + "." + std::to_string(i));
      result.opinion_groups.push_back(static_cast<std::uint32_t>(g));
    }
  }

  std::mt19937_64 rng(model.rng_seed);
  std::discrete_distribution<std::uint32_t> pick_group(respondent_prior.begin(), respondent_prior.end());
  std::vector<std::discrete_distribution<std::uint32_t>> pick_opinion_group;
  for (const auto& row : opinion_prior) pick_opinion_group.emplace_back(row.begin(), row.end());
  std::bernoulli_distribution posts(model.survey.allow_new_opinions ? model.p_new : 0.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  for (std::size_t i = 0; i < model.respondents; ++i) {
    const std::uint32_t group = pick_group(rng);
    const auto menu = sample_menu(result.graph, model.menu_size, rng());
    bool post = posts(rng);

    auto draw = [&] {
      std::vector<OpinionId> chosen;
      for (const auto& id : menu) {
        std::uint32_t og = result.opinion_groups[*result.graph.opinion_index(id)];
        if (unit(rng) < model.affinity[group][og]) chosen.push_back(id);
      }
      return chosen;
    };
    std::vector<OpinionId> selected = draw();
    if (selected.empty() && !post) {
      ++result.report.resampled_responses;
      for (int attempt = 0; attempt < kMaxSelectionRedraws && selected.empty(); ++attempt) selected = draw();
      if (selected.empty()) {
        ++result.report.forced_responses;
        if (!menu.empty()) {
          selected.push_back(menu[std::uniform_int_distribution<std::size_t>(0, menu.size() - 1)(rng)]);
        } else {
          post = true;
        }
      }
    }

    std::vector<std::string> texts;
    std::uint32_t new_group = 0;
    if (post) {
      new_group = pick_opinion_group[group](rng);
      texts.push_back("synthetic opinion " + std::to_string(result.graph.num_opinions()));
    }
    result.graph.submit_response(menu, selected, texts);
    result.respondent_groups.push_back(group);
    if (post) result.opinion_groups.push_back(new_group);
  }

  std::vector<std::size_t> per_group(model.opinion_groups, 0);
  for (std::uint32_t g : result.opinion_groups) ++per_group[g];
  for (std::size_t g = 0; g < model.opinion_groups; ++g)
    if (per_group[g] == 0) result.report.warnings.push_back("opinion group " + std::to_string(g) + " has no opinions");
  if (result.report.resampled_responses > 0)
    result.report.warnings.push_back(std::to_string(result.report.resampled_responses) +
                                     " empty responses were redrawn (biases low-affinity respondents)");
  for (const auto& w : result.report.warnings) log_warn("simulate: " + w);
  return result;
}

double posting_rate(const OpinionGraph& graph) {
  if (graph.num_respondents() == 0) return 0.0;
  std::unordered_set<std::string> authors;
  for (const auto& op : graph.opinions())
    if (op.author) authors.insert(*op.author);
  return static_cast<double>(authors.size()) / static_cast<double>(graph.num_respondents());
}

SimulationSpec simulation_spec_from_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw std::invalid_argument("simulation config: expected an object");
  SimulationSpec spec;
  PlantedModel& m = spec.model;
  m.opinion_groups = doc.value("opinion_groups", m.opinion_groups);
  m.respondent_groups = doc.value("respondent_groups", m.respondent_groups);
  if (doc.contains("affinity")) {
    m.affinity = doc.at("affinity").get<std::vector<std::vector<double>>>();
  } else {
    double on = doc.value("affinity_diagonal", 0.9);
    double off = doc.value("affinity_off_diagonal", 0.05);
    m.affinity = assortative_model(m.respondent_groups, m.opinion_groups, on, off).affinity;
  }
  m.p_new = doc.value("p_new", m.p_new);
  m.respondents = doc.value("respondents", m.respondents);
  m.menu_size = doc.value("menu_size", m.menu_size);
  m.respondent_prior = doc.value("respondent_prior", m.respondent_prior);
  m.new_opinion_prior = doc.value("new_opinion_prior", m.new_opinion_prior);
  m.rng_seed = doc.value("rng_seed", m.rng_seed);
  if (doc.contains("survey")) m.survey = config_from_json(doc.at("survey"));
  spec.seed_opinions_per_group =
      doc.value("seed_opinions_per_group", std::vector<std::size_t>(m.opinion_groups, 4));
  m.validate();
  return spec;
}

nlohmann::json simulation_spec_to_json(const SimulationSpec& spec) {
  const PlantedModel& m = spec.model;
  return {{"opinion_groups", m.opinion_groups},
          {"respondent_groups", m.respondent_groups},
          {"affinity", m.affinity},
          {"p_new", m.p_new},
          {"respondents", m.respondents},
          {"menu_size", m.menu_size},
          {"respondent_prior", m.respondent_prior},
          {"new_opinion_prior", m.new_opinion_prior},
          {"rng_seed", m.rng_seed},
          {"survey", config_to_json(m.survey)},
          {"seed_opinions_per_group", spec.seed_opinions_per_group}};
}

std::string export_planted_csv(const SimulationResult& result) {
  std::string out = "vertex_id,vertex_type,planted_group\n";
  const auto& g = result.graph;
  for (std::size_t o = 0; o < g.num_opinions(); ++o)
    out += csv_escape(g.opinions()[o].id) + ",opinion," + std::to_string(result.opinion_groups[o]) + "\n";
  for (std::size_t r = 0; r < g.num_respondents(); ++r)
    out += csv_escape(g.respondents()[r].id) + ",respondent," + std::to_string(result.respondent_groups[r]) + "\n";
  return out;
}

}  // namespace gos
