#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "gos/analysis.hpp"
#include "gos/simulator.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

namespace gos {
namespace {

using EdgeList = std::vector<std::pair<std::uint32_t, std::uint32_t>>;

struct Case {
  BipartiteGraph graph;
  Partition partition;
};

// Random bipartite graph where every respondent has at least one edge, with
// random type-pure labels: opinions in [0, 4), respondents in [4, 7).
Case random_case(std::mt19937_64& rng) {
  std::size_t n_o = 1 + rng() % 12, n_r = 1 + rng() % 20;
  EdgeList e;
  for (std::uint32_t r = 0; r < n_r; ++r) {
    e.emplace_back(static_cast<std::uint32_t>(rng() % n_o), r);
    for (std::uint32_t o = 0; o < n_o; ++o)
      if (rng() % 4 == 0 && o != e.back().first) e.emplace_back(o, r);
  }
  BipartiteGraph g(n_o, n_r, e);
  std::vector<std::uint32_t> labels(n_o + n_r);
  for (std::size_t v = 0; v < labels.size(); ++v)
    labels[v] = static_cast<std::uint32_t>(v < n_o ? rng() % 4 : 4 + rng() % 3);
  Partition p(g, labels, 7);
  return {std::move(g), std::move(p)};
}

TEST(Popularity, ColumnsSumToOne) {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    auto c = random_case(rng);
    auto m = popularity_matrix(c.graph, c.partition);
    for (std::size_t j = 0; j < m.cols(); ++j) {
      double total = 0;
      for (std::size_t i = 0; i < m.rows(); ++i) {
        EXPECT_GE(m.at(i, j), 0.0);
        total += m.at(i, j);
      }
      EXPECT_NEAR(total, 1.0, 1e-12);
    }
  }
}

TEST(Popularity, KnownCountsAndPadding) {
  // Respondent group has edges 3 -> group 0, 1 -> group 1.
  BipartiteGraph g(3, 2, EdgeList{{0, 0}, {1, 0}, {0, 1}, {2, 1}});
  Partition p(g, {0, 0, 1, 2, 2}, 3);
  auto m = popularity_matrix(g, p, {{0, "a"}, {1, "b"}}, 5);
  ASSERT_EQ(m.rows(), 5u);
  ASSERT_EQ(m.cols(), 1u);
  EXPECT_DOUBLE_EQ(m.at(0, 0), 0.75);
  EXPECT_DOUBLE_EQ(m.at(1, 0), 0.25);
  EXPECT_EQ(m.opinion_groups[4], PopularityMatrix::kPaddingGroup);
  EXPECT_EQ(m.at(4, 0), 0.0);
  EXPECT_EQ(m.row_names[0], "a");
  auto json = popularity_to_json(m);
  EXPECT_TRUE(json["opinion_groups"][4].is_null());
  EXPECT_FALSE(popularity_csv(m).empty());
}

TEST(Popularity, RejectsMixedGroups) {
  BipartiteGraph g(1, 1, EdgeList{{0, 0}});
  Partition p(g, {0, 0}, 1);
  EXPECT_THROW(popularity_matrix(g, p), PartitionError);
}

TEST(Propensity, TwoToOneSplit) {
  BipartiteGraph g(3, 1, EdgeList{{0, 0}, {1, 0}, {2, 0}});
  Partition p(g, {0, 0, 1, 2}, 3);
  auto t = respondent_propensities(g, p);
  ASSERT_EQ(t.vectors.size(), 1u);
  ASSERT_EQ(t.opinion_groups, (std::vector<std::uint32_t>{0, 1}));
  EXPECT_NEAR(t.vectors[0][0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(t.vectors[0][1], 1.0 / 3.0, 1e-15);
}

TEST(Propensity, ExclusionDropsEdgesAndEmptyRespondents) {
  BipartiteGraph g(3, 2, EdgeList{{0, 0}, {2, 0}, {2, 1}});
  Partition p(g, {0, 0, 1, 2, 2}, 3);
  std::vector<std::uint32_t> exclude = {1};
  auto t = respondent_propensities(g, p, exclude);
  ASSERT_EQ(t.vectors.size(), 1u);
  EXPECT_EQ(t.respondents[0], 3u);
  EXPECT_EQ(t.vectors[0], std::vector<double>{1.0});
}

std::vector<std::vector<double>> random_vectors(std::mt19937_64& rng, std::size_t n, std::size_t k) {
  std::vector<std::vector<double>> v(n, std::vector<double>(k));
  for (auto& row : v) {
    double total = 0;
    for (auto& x : row) total += x = std::uniform_real_distribution<double>(0, 1)(rng);
    for (auto& x : row) x /= total;
  }
  return v;
}

TEST(PaletteOrder, ObjectiveMatchesChainCost) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 50; ++trial) {
    auto v = random_vectors(rng, 2 + rng() % 10, 3);
    auto order = palette_order(v);
    EXPECT_NEAR(order.objective, oracle::chain_cost(v, order.order), 1e-12);
    auto sorted = order.order;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < sorted.size(); ++i) EXPECT_EQ(sorted[i], i);
  }
}

TEST(PaletteOrder, NeverBeatsExhaustiveOptimum) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    auto v = random_vectors(rng, 1 + rng() % 8, 1 + rng() % 4);
    EXPECT_GE(palette_order(v).objective, oracle::best_chain_cost(v) - 1e-12);
  }
}

TEST(PaletteOrder, OptimalOnOneHotVectors) {
  std::mt19937_64 rng(6);
  for (int trial = 0; trial < 100; ++trial) {
    std::size_t k = 1 + rng() % 5;
    std::vector<std::vector<double>> v(1 + rng() % 8, std::vector<double>(k, 0.0));
    for (auto& row : v) row[rng() % k] = 1.0;
    EXPECT_NEAR(palette_order(v).objective, oracle::best_chain_cost(v), 1e-12);
  }
}

TEST(PaletteOrder, StartsAtLargestComponentWithLowIndexTies) {
  std::vector<std::vector<double>> v = {{0.5, 0.5}, {0.9, 0.1}, {0.1, 0.9}};
  EXPECT_EQ(palette_order(v).order[0], 1u);
  std::vector<std::vector<double>> tie = {{0.6, 0.4}, {0.4, 0.6}};
  EXPECT_EQ(palette_order(tie).order, (std::vector<std::size_t>{0, 1}));
}

// Exact minimum of the misalignment between two adjacent columns over the
// offset, searched at every breakpoint of the piecewise-linear objective.
double best_pair_misalignment(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> ba = {0}, bb = {0};
  for (double x : a) ba.push_back(ba.back() + x);
  for (double x : b) bb.push_back(bb.back() + x);
  double best = 1e300;
  for (std::size_t k = 0; k < ba.size(); ++k) {
    double shift = ba[k] - bb[k];
    best = std::min(best, oracle::misalignment({a, b}, {0.0, shift}));
  }
  return best;
}

TEST(PaletteOrigins, MinimiseAdjacentMisalignment) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    auto cols = random_vectors(rng, 2 + rng() % 6, 1 + rng() % 5);
    auto origins = palette_origins(cols);
    ASSERT_EQ(origins.size(), cols.size());
    EXPECT_EQ(origins[0], 0.0);
    double best = 0;
    for (std::size_t j = 1; j < cols.size(); ++j) best += best_pair_misalignment(cols[j - 1], cols[j]);
    EXPECT_NEAR(oracle::misalignment(cols, origins), best, 1e-9);
    // A coarse grid around the chosen offsets never does better.
    for (std::size_t j = 1; j < cols.size(); ++j) {
      for (double d = -1.0; d <= 1.0; d += 0.01) {
        auto shifted = origins;
        for (std::size_t i = j; i < shifted.size(); ++i) shifted[i] += d;
        EXPECT_GE(oracle::misalignment(cols, shifted), oracle::misalignment(cols, origins) - 1e-9);
      }
    }
  }
}

TEST(PaletteOrigins, IdenticalColumnsStayLevel) {
  std::vector<std::vector<double>> cols(4, std::vector<double>{0.2, 0.3, 0.5});
  for (double o : palette_origins(cols)) EXPECT_NEAR(o, 0.0, 1e-15);
}

struct Layout {
  OpinionGraph graph;
  BipartiteGraph bipartite;
  Partition partition;
};

Layout simulated_layout(std::uint64_t seed) {
  testing::QuietLogs quiet;
  auto m = assortative_model(2, 3, 0.8, 0.1);
  m.p_new = 0;
  m.respondents = 60;
  m.rng_seed = seed;
  auto sim = simulate(m, {4, 4, 4});
  Layout l{sim.graph, to_bipartite(sim.graph), {}};
  l.partition = Partition(l.bipartite, sim.planted_vertex_labels(3), 5);
  return l;
}

TEST(PaletteLayout, UnitThicknessColumnsAndStableSvg) {
  auto l = simulated_layout(3);
  auto layout = palette_layout(l.graph, l.bipartite, l.partition, {{0, "zero"}});
  ASSERT_EQ(layout.columns.size(), 60u);
  for (const auto& c : layout.columns) EXPECT_NEAR(std::accumulate(c.begin(), c.end(), 0.0), 1.0, 1e-12);
  EXPECT_EQ(layout.group_names[0], "zero");
  EXPECT_EQ(layout.colors.size(), layout.groups.size());
  auto svg = render_palette_svg(layout);
  EXPECT_EQ(svg, render_palette_svg(layout));
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_EQ(svg, render_palette_svg(palette_layout(l.graph, l.bipartite, l.partition, {{0, "zero"}})));
}

TEST(PaletteLayout, JsonRoundTrip) {
  auto l = simulated_layout(4);
  std::vector<std::uint32_t> exclude = {2};
  auto layout = palette_layout(l.graph, l.bipartite, l.partition, {}, exclude);
  EXPECT_EQ(std::count(layout.groups.begin(), layout.groups.end(), 2u), 0);
  auto back = palette_from_json(palette_to_json(layout));
  EXPECT_EQ(palette_to_json(back), palette_to_json(layout));
  EXPECT_EQ(render_palette_svg(back), render_palette_svg(layout));
  EXPECT_THROW(palette_from_json({{"groups", 1}}), std::invalid_argument);
}

TEST(GroupSizes, SeriesAndCsv) {
  auto a = simulated_layout(1), b = simulated_layout(2);
  std::vector<SurveyPartition> surveys = {{"s1", &a.bipartite, &a.partition, {}},
                                          {"s2", &b.bipartite, &b.partition, {{0, "x"}}}};
  auto rows = group_size_series(surveys);
  std::size_t total = 0;
  for (const auto& r : rows)
    if (r.survey_id == "s1") total += r.size;
  EXPECT_EQ(total, a.bipartite.num_vertices());
  EXPECT_EQ(rows.front().survey_id, "s1");
  EXPECT_FALSE(group_size_csv(rows).empty());
}

}  // namespace
}  // namespace gos
