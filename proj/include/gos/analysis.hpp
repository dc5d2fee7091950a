#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "gos/graph.hpp"
#include "gos/sbm.hpp"

namespace gos {

using GroupNames = std::map<std::uint32_t, std::string>;

/// Opinion-group x respondent-group edge fractions, normalised per column.
struct PopularityMatrix {
  std::vector<std::uint32_t> opinion_groups;     // row labels; padding rows use kPaddingGroup
  std::vector<std::uint32_t> respondent_groups;  // column labels
  std::vector<std::string> row_names;
  std::vector<std::string> column_names;
  std::vector<double> values;  // row-major

  static constexpr std::uint32_t kPaddingGroup = 0xFFFFFFFFu;

  std::size_t rows() const { return opinion_groups.size(); }
  std::size_t cols() const { return respondent_groups.size(); }
  double at(std::size_t row, std::size_t col) const { return values[row * cols() + col]; }
};

/// value(i, j) = e_ij / sum_i' e_i'j over occupied groups in label order.
/// `pad_rows_to` appends zero rows until the matrix has that many rows.
/// Throws PartitionError for mixed-type groups or a respondent group without
/// edges.
PopularityMatrix popularity_matrix(const BipartiteGraph& graph, const Partition& partition,
                                   const GroupNames& names = {}, std::size_t pad_rows_to = 0);

/// Per-respondent share of edges going to each opinion group.
struct PropensityTable {
  std::vector<std::uint32_t> opinion_groups;  // axis order
  std::vector<std::uint32_t> respondents;     // global vertex index
  std::vector<std::vector<double>> vectors;   // one per respondent, sums to 1
};

/// Edges into `excluded_groups` are dropped before normalising; respondents
/// left without edges are omitted.
PropensityTable respondent_propensities(const BipartiteGraph& graph, const Partition& partition,
                                        std::span<const std::uint32_t> excluded_groups = {});

/// Sum of L1 distances between consecutive columns.
double chain_objective(std::span<const std::vector<double>> vectors, std::span<const std::size_t> order);

struct PaletteOrder {
  std::vector<std::size_t> order;
  double objective = 0.0;
};

/// Greedy chain: start at the vector with the largest single component, then
/// repeatedly append the unplaced vector nearest (L1) to the last one. Ties
/// go to the lower input index.
PaletteOrder palette_order(std::span<const std::vector<double>> vectors);

/// Vertical offsets for already ordered columns. Each step shifts by the
/// median of the boundary differences b_{j,k} - b_{j+1,k} over the K+1
/// cumulative boundaries (including 0 and 1), which minimises the summed
/// absolute misalignment of adjacent boundaries. origins[0] = 0.
std::vector<double> palette_origins(std::span<const std::vector<double>> ordered_columns);

/// Replaceable ordering/alignment strategy for palette diagrams.
class PaletteStrategy {
 public:
  virtual ~PaletteStrategy() = default;
  virtual PaletteOrder order(std::span<const std::vector<double>> vectors) const = 0;
  virtual std::vector<double> origins(std::span<const std::vector<double>> ordered_columns) const = 0;
};

class GreedyMedianPalette final : public PaletteStrategy {
 public:
  PaletteOrder order(std::span<const std::vector<double>> vectors) const override { return palette_order(vectors); }
  std::vector<double> origins(std::span<const std::vector<double>> ordered_columns) const override {
    return palette_origins(ordered_columns);
  }
};

struct PaletteLayout {
  std::vector<std::uint32_t> groups;
  std::vector<std::string> group_names;
  std::vector<std::string> colors;
  std::vector<std::string> respondent_ids;   // in display order
  std::vector<std::vector<double>> columns;  // in display order
  std::vector<double> origins;
  double objective = 0.0;
};

PaletteLayout palette_layout(const OpinionGraph& graph, const BipartiteGraph& bipartite, const Partition& partition,
                             const GroupNames& names = {}, std::span<const std::uint32_t> excluded_groups = {},
                             const PaletteStrategy& strategy = GreedyMedianPalette{});

nlohmann::json popularity_to_json(const PopularityMatrix& matrix);
std::string popularity_csv(const PopularityMatrix& matrix);

nlohmann::json palette_to_json(const PaletteLayout& layout);
PaletteLayout palette_from_json(const nlohmann::json& document);
std::string palette_csv(const PaletteLayout& layout);

/// Static SVG stream plot of a palette layout. Output is byte-stable for a
/// given layout.
std::string render_palette_svg(const PaletteLayout& layout, int width = 960, int height = 480);

struct SurveyPartition {
  std::string survey_id;
  const BipartiteGraph* graph = nullptr;
  const Partition* partition = nullptr;
  GroupNames names;
};

struct GroupSizeRow {
  std::string survey_id;
  std::uint32_t group = 0;
  VertexType type = VertexType::opinion;
  std::string name;
  std::size_t size = 0;
};

/// Occupied group sizes per survey, in input order then label order.
std::vector<GroupSizeRow> group_size_series(std::span<const SurveyPartition> surveys);
std::string group_size_csv(std::span<const GroupSizeRow> rows);

/// Default colour for the i-th opinion group axis.
std::string palette_color(std::size_t index);

}  // namespace gos
