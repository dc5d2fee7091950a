#pragma once

#include <string>
#include <string_view>

#include "json.hpp"
#include "gos/graph.hpp"

namespace gos {

/// Document layout: {"config": {...}, "opinions": [...], "respondents": [...],
/// "edges": [{"opinion": id, "respondent": id}, ...]}. Array order is creation
/// order.
nlohmann::json graph_to_json(const OpinionGraph& graph);

/// Rebuilds a graph and runs the full invariant scan. Throws GraphError naming
/// the first offending record.
OpinionGraph graph_from_json(const nlohmann::json& document);

std::string export_graph(const OpinionGraph& graph);
OpinionGraph import_graph(std::string_view text);

/// `opinion_id,respondent_id` per edge, with header.
std::string export_edge_csv(const OpinionGraph& graph);

nlohmann::json config_to_json(const SurveyConfig& config);
SurveyConfig config_from_json(const nlohmann::json& document);

}  // namespace gos
