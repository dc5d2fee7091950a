#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "gos/graph.hpp"

namespace gos {

/// Synthetic respondent population with planted opinion and respondent
/// groups. Respondents select each presented opinion independently with
/// probability affinity[respondent group][opinion group].
struct PlantedModel {
  std::size_t opinion_groups = 2;
  std::size_t respondent_groups = 2;
  /// respondent_groups x opinion_groups selection probabilities.
  std::vector<std::vector<double>> affinity;
  double p_new = 0.08;
  std::size_t respondents = 300;
  int menu_size = 8;
  /// Respondent group distribution; empty means uniform.
  std::vector<double> respondent_prior;
  /// Group distribution of a new opinion given its author's group; empty
  /// means each affinity row normalised.
  std::vector<std::vector<double>> new_opinion_prior;
  std::uint64_t rng_seed = 1;
  SurveyConfig survey;

  /// Throws std::invalid_argument on shape or range errors.
  void validate() const;
};

/// Model with `diagonal` affinity where opinion group == respondent group and
/// `off_diagonal` elsewhere.
PlantedModel assortative_model(std::size_t respondent_groups, std::size_t opinion_groups, double diagonal,
                               double off_diagonal);

struct SimulationReport {
  /// Respondents whose first selection draw was empty and was redrawn.
  std::size_t resampled_responses = 0;
  /// Respondents given a single forced selection after repeated empty draws.
  std::size_t forced_responses = 0;
  std::vector<std::string> warnings;
};

struct SimulationResult {
  OpinionGraph graph;
  std::vector<std::uint32_t> opinion_groups;     // per opinion, creation order
  std::vector<std::uint32_t> respondent_groups;  // per respondent, creation order
  SimulationReport report;

  /// Joint vertex labels (opinions first); respondent groups are offset by
  /// the number of opinion groups so the two types never share a label.
  std::vector<std::uint32_t> planted_vertex_labels(std::size_t opinion_group_count) const;
};

SimulationResult simulate(const PlantedModel& model, const std::vector<std::size_t>& seed_opinions_per_group);

/// Fraction of respondents that authored at least one opinion.
double posting_rate(const OpinionGraph& graph);

/// Declarative config: the model fields plus "seed_opinions_per_group".
struct SimulationSpec {
  PlantedModel model;
  std::vector<std::size_t> seed_opinions_per_group;
};
SimulationSpec simulation_spec_from_json(const nlohmann::json& document);
nlohmann::json simulation_spec_to_json(const SimulationSpec& spec);

/// `vertex_id,vertex_type,planted_group` per vertex.
std::string export_planted_csv(const SimulationResult& result);

}  // namespace gos
