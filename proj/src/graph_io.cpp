#include "gos/graph_io.hpp"

#include "gos/util.hpp"

namespace gos {

using nlohmann::json;

json config_to_json(const SurveyConfig& config) {
  return json{{"min_menu", config.min_menu},
              {"max_menu", config.max_menu},
              {"allow_new_opinions", config.allow_new_opinions},
              {"max_new_opinions_per_respondent", config.max_new_opinions_per_respondent}};
}

SurveyConfig config_from_json(const json& document) {
  if (!document.is_object()) throw GraphError("config: expected an object");
  SurveyConfig config;
  config.min_menu = document.value("min_menu", config.min_menu);
  config.max_menu = document.value("max_menu", config.max_menu);
  config.allow_new_opinions = document.value("allow_new_opinions", config.allow_new_opinions);
  config.max_new_opinions_per_respondent =
      document.value("max_new_opinions_per_respondent", config.max_new_opinions_per_respondent);
  config.validate();
  return config;
}

json graph_to_json(const OpinionGraph& graph) {
  json opinions = json::array();
  for (const Opinion& op : graph.opinions()) {
    json origin = op.author ? json{{"respondent", *op.author}} : json("seed");
    opinions.push_back({{"id", op.id}, {"text", op.text}, {"origin", origin}, {"created_at", op.created_at}});
  }
  json respondents = json::array();
  for (const Respondent& r : graph.respondents())
    respondents.push_back({{"id", r.id}, {"created_at", r.created_at}, {"menu", r.menu}});
  json edges = json::array();
  for (const Edge& e : graph.edges())
    edges.push_back({{"opinion", graph.opinions()[e.opinion].id},
                     {"respondent", graph.respondents()[e.respondent].id}});
  return json{{"config", config_to_json(graph.config())},
              {"opinions", std::move(opinions)},
              {"respondents", std::move(respondents)},
              {"edges", std::move(edges)}};
}

namespace {

const json& require(const json& object, const char* key, const std::string& where) {
  if (!object.is_object() || !object.contains(key))
    throw GraphError(where + ": missing field '" + key + "'");
  return object.at(key);
}

std::string require_string(const json& object, const char* key, const std::string& where) {
  const json& value = require(object, key, where);
  if (!value.is_string()) throw GraphError(where + ": field '" + key + "' must be a string");
  return value.get<std::string>();
}

std::uint64_t require_sequence(const json& object, const std::string& where) {
  const json& value = require(object, "created_at", where);
  if (!value.is_number_unsigned() && !(value.is_number_integer() && value.get<std::int64_t>() >= 0))
    throw GraphError(where + ": created_at must be a non-negative integer");
  return value.get<std::uint64_t>();
}

}  // namespace

OpinionGraph graph_from_json(const json& document) {
  if (!document.is_object()) throw GraphError("graph document: expected an object");
  for (const char* key : {"config", "opinions", "respondents", "edges"})
    if (!document.contains(key)) throw GraphError(std::string("graph document: missing '") + key + "'");
  for (const char* key : {"opinions", "respondents", "edges"})
    if (!document.at(key).is_array()) throw GraphError(std::string("graph document: '") + key + "' must be an array");

  OpinionGraph graph(config_from_json(document.at("config")));

  const json& opinions = document.at("opinions");
  for (std::size_t i = 0; i < opinions.size(); ++i) {
    std::string where = "opinions[" + std::to_string(i) + "]";
    const json& record = opinions[i];
    Opinion op;
    op.id = require_string(record, "id", where);
    op.text = require_string(record, "text", where);
    op.created_at = require_sequence(record, where);
    const json& origin = require(record, "origin", where);
    if (origin.is_string() && origin.get<std::string>() == "seed") {
      op.author.reset();
    } else if (origin.is_object() && origin.contains("respondent") && origin.at("respondent").is_string()) {
      op.author = origin.at("respondent").get<std::string>();
    } else {
      throw GraphError(where + ": origin must be \"seed\" or {\"respondent\": id}");
    }
    try {
      graph.insert_opinion(std::move(op));
    } catch (const GraphError& e) {
      throw GraphError(where + ": " + e.what());
    }
  }

  const json& respondents = document.at("respondents");
  for (std::size_t i = 0; i < respondents.size(); ++i) {
    std::string where = "respondents[" + std::to_string(i) + "]";
    const json& record = respondents[i];
    Respondent r;
    r.id = require_string(record, "id", where);
    r.created_at = require_sequence(record, where);
    const json& menu = require(record, "menu", where);
    if (!menu.is_array()) throw GraphError(where + ": menu must be an array");
    for (const json& id : menu) {
      if (!id.is_string()) throw GraphError(where + ": menu ids must be strings");
      r.menu.push_back(id.get<std::string>());
    }
    try {
      graph.insert_respondent(std::move(r));
    } catch (const GraphError& e) {
      throw GraphError(where + ": " + e.what());
    }
  }

  const json& edges = document.at("edges");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    std::string where = "edges[" + std::to_string(i) + "]";
    std::string opinion = require_string(edges[i], "opinion", where);
    std::string respondent = require_string(edges[i], "respondent", where);
    auto o = graph.opinion_index(opinion);
    auto r = graph.respondent_index(respondent);
    if (!o) {
      if (graph.respondent_index(opinion))
        throw GraphError(where + ": opinion endpoint '" + opinion + "' is a respondent (bipartiteness violation)");
      throw GraphError(where + ": unknown opinion '" + opinion + "'");
    }
    if (!r) {
      if (graph.opinion_index(respondent))
        throw GraphError(where + ": respondent endpoint '" + respondent + "' is an opinion (bipartiteness violation)");
      throw GraphError(where + ": unknown respondent '" + respondent + "'");
    }
    try {
      graph.insert_edge({*o, *r});
    } catch (const GraphError& e) {
      throw GraphError(where + ": " + e.what());
    }
  }

  auto problems = check_invariants(graph);
  if (!problems.empty()) throw GraphError("invalid graph: " + problems.front());
  return graph;
}

std::string export_graph(const OpinionGraph& graph) { return graph_to_json(graph).dump(2) + "\n"; }

OpinionGraph import_graph(std::string_view text) {
  json document = json::parse(text, nullptr, false);
  if (document.is_discarded()) throw GraphError("graph document: malformed JSON");
  return graph_from_json(document);
}

std::string export_edge_csv(const OpinionGraph& graph) {
  std::string out = "opinion_id,respondent_id\n";
  for (const Edge& e : graph.edges()) {
    out += csv_escape(graph.opinions()[e.opinion].id);
    out += ',';
    out += csv_escape(graph.respondents()[e.respondent].id);
    out += '\n';
  }
  return out;
}

}  // namespace gos
