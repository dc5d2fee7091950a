#include <gtest/gtest.h>

#include "gos/graph_io.hpp"
#include "gos/simulator.hpp"
#include "test_support.hpp"

namespace gos {
namespace {

using nlohmann::json;

OpinionGraph seeded_with_respondents() {
  auto g = new_survey(default_seed_opinions());
  for (int i = 0; i < 3; ++i) {
    auto menu = sample_menu(g, 8, i);
    g.submit_response(menu, std::vector<OpinionId>{menu[0], menu[3]},
                      i == 1 ? std::vector<std::string>{"new, with \"quotes\""} : std::vector<std::string>{});
  }
  return g;
}

void expect_structurally_equal(const OpinionGraph& a, const OpinionGraph& b) {
  ASSERT_EQ(a.num_opinions(), b.num_opinions());
  ASSERT_EQ(a.num_respondents(), b.num_respondents());
  ASSERT_EQ(a.num_edges(), b.num_edges());
  EXPECT_EQ(a.config(), b.config());
  for (std::size_t i = 0; i < a.num_opinions(); ++i) {
    EXPECT_EQ(a.opinions()[i].id, b.opinions()[i].id);
    EXPECT_EQ(a.opinions()[i].text, b.opinions()[i].text);
    EXPECT_EQ(a.opinions()[i].author, b.opinions()[i].author);
    EXPECT_EQ(a.opinions()[i].created_at, b.opinions()[i].created_at);
  }
  for (std::size_t i = 0; i < a.num_respondents(); ++i) {
    EXPECT_EQ(a.respondents()[i].id, b.respondents()[i].id);
    EXPECT_EQ(a.respondents()[i].menu, b.respondents()[i].menu);
    EXPECT_EQ(a.respondents()[i].created_at, b.respondents()[i].created_at);
  }
  for (std::size_t i = 0; i < a.num_edges(); ++i) EXPECT_EQ(a.edges()[i], b.edges()[i]);
}

TEST(GraphIo, EmptyGraphRoundTrip) {
  auto g = new_survey(std::vector<std::string>{});
  EXPECT_EQ(import_graph(export_graph(g)), g);
}

TEST(GraphIo, SeededGraphWithRespondentsRoundTrip) {
  auto g = seeded_with_respondents();
  auto back = import_graph(export_graph(g));
  expect_structurally_equal(g, back);
  EXPECT_EQ(back, g);
}

TEST(GraphIo, RoundTripKeepsGrowing) {
  auto g = import_graph(export_graph(seeded_with_respondents()));
  auto menu = sample_menu(g, 8, 11);
  auto r = g.submit_response(menu, std::vector<OpinionId>{menu[0]}, std::vector<std::string>{"later"});
  EXPECT_TRUE(check_invariants(g).empty());
  EXPECT_GT(g.respondents().back().created_at, g.respondents().front().created_at);
  EXPECT_EQ(g.respondents().back().id, r);
}

TEST(GraphIo, SimulatedGraphsRoundTrip) {
  testing::QuietLogs quiet;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    auto model = assortative_model(2, 3, 0.9, 0.05);
    model.rng_seed = seed;
    model.respondents = 80;
    auto sim = simulate(model, {4, 4, 4});
    expect_structurally_equal(sim.graph, import_graph(export_graph(sim.graph)));
  }
}

TEST(GraphIo, RejectsOpinionOpinionEdge) {
  json doc = graph_to_json(seeded_with_respondents());
  std::string first = doc["opinions"][0]["id"];
  std::string second = doc["opinions"][1]["id"];
  doc["edges"].push_back({{"opinion", first}, {"respondent", second}});
  try {
    graph_from_json(doc);
    FAIL() << "expected rejection";
  } catch (const GraphError& e) {
    std::string message = e.what();
    EXPECT_NE(message.find("edges["), std::string::npos) << message;
    EXPECT_NE(message.find("bipartite"), std::string::npos) << message;
  }
}

TEST(GraphIo, RejectsDuplicateEdge) {
  json doc = graph_to_json(seeded_with_respondents());
  doc["edges"].push_back(doc["edges"][0]);
  try {
    graph_from_json(doc);
    FAIL() << "expected rejection";
  } catch (const GraphError& e) {
    EXPECT_NE(std::string(e.what()).find("duplicate edge"), std::string::npos) << e.what();
  }
}

TEST(GraphIo, RejectsMalformedDocuments) {
  EXPECT_THROW(import_graph("{not json"), GraphError);
  EXPECT_THROW(import_graph("[]"), GraphError);
  EXPECT_THROW(import_graph(R"({"opinions":[],"respondents":[]})"), GraphError);
  json doc = graph_to_json(seeded_with_respondents());
  doc["opinions"][0].erase("text");
  EXPECT_THROW(graph_from_json(doc), GraphError);
}

TEST(GraphIo, RejectsRespondentWithoutEdges) {
  json doc = graph_to_json(seeded_with_respondents());
  json kept = json::array();
  std::string victim = doc["respondents"][0]["id"];
  for (const auto& e : doc["edges"])
    if (e["respondent"] != victim) kept.push_back(e);
  doc["edges"] = kept;
  EXPECT_THROW(graph_from_json(doc), GraphError);
}

TEST(GraphIo, EdgeCsvListsEveryEdge) {
  auto g = seeded_with_respondents();
  auto lines = split_lines(export_edge_csv(g));
  ASSERT_EQ(lines.size(), g.num_edges() + 1);
  EXPECT_EQ(lines[0], "opinion_id,respondent_id");
  const auto& e = g.edges()[0];
  EXPECT_EQ(lines[1], g.opinions()[e.opinion].id + "," + g.respondents()[e.respondent].id);
}

}  // namespace
}  // namespace gos
