#include "gos/analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "gos/util.hpp"

namespace gos {

namespace {

std::string name_or(const GroupNames& names, std::uint32_t group, const std::string& fallback) {
  auto it = names.find(group);
  return it == names.end() ? fallback : it->second;
}

void require_type_pure(const Partition& partition) {
  if (!partition.type_pure()) throw PartitionError("analysis requires a type-pure partition");
}

std::vector<std::uint32_t> occupied_of_type(const Partition& partition, VertexType type) {
  std::vector<std::uint32_t> out;
  for (std::uint32_t r = 0; r < partition.label_space(); ++r)
    if (partition.type_count(r, type) > 0) out.push_back(r);
  return out;
}

double l1(const std::vector<double>& a, const std::vector<double>& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d += std::abs(a[k] - b[k]);
  return d;
}

}  // namespace

std::string palette_color(std::size_t index) {
  static constexpr std::array<const char*, 12> kColors{"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                                                       "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                                       "#bcbd22", "#17becf", "#aec7e8", "#ffbb78"};
  return kColors[index % kColors.size()];
}

PopularityMatrix popularity_matrix(const BipartiteGraph& graph, const Partition& partition, const GroupNames& names,
                                   std::size_t pad_rows_to) {
  require_type_pure(partition);
  if (partition.num_vertices() != graph.num_vertices())
    throw PartitionError("partition does not match the graph");
  PopularityMatrix m;
  m.opinion_groups = occupied_of_type(partition, VertexType::opinion);
  m.respondent_groups = occupied_of_type(partition, VertexType::respondent);
  for (std::size_t i = 0; i < m.opinion_groups.size(); ++i)
    m.row_names.push_back(name_or(names, m.opinion_groups[i], "opinion-group-" + std::to_string(m.opinion_groups[i])));
  for (std::uint32_t g : m.respondent_groups)
    m.column_names.push_back(name_or(names, g, "respondent-group-" + std::to_string(g)));
  while (m.opinion_groups.size() < pad_rows_to) {
    m.opinion_groups.push_back(PopularityMatrix::kPaddingGroup);
    m.row_names.push_back("empty-" + std::to_string(m.opinion_groups.size() - 1));
  }

  const std::size_t rows = m.rows(), cols = m.cols();
  m.values.assign(rows * cols, 0.0);
  for (std::size_t j = 0; j < cols; ++j) {
    double total = 0.0;
    for (std::size_t i = 0; i < rows; ++i)
      if (m.opinion_groups[i] != PopularityMatrix::kPaddingGroup)
        total += static_cast<double>(partition.edge_count(m.opinion_groups[i], m.respondent_groups[j]));
    if (total == 0.0)
      throw PartitionError("respondent group " + std::to_string(m.respondent_groups[j]) + " has no edges");
    for (std::size_t i = 0; i < rows; ++i)
      if (m.opinion_groups[i] != PopularityMatrix::kPaddingGroup)
        m.values[i * cols + j] =
            static_cast<double>(partition.edge_count(m.opinion_groups[i], m.respondent_groups[j])) / total;
  }
  return m;
}

PropensityTable respondent_propensities(const BipartiteGraph& graph, const Partition& partition,
                                        std::span<const std::uint32_t> excluded_groups) {
  require_type_pure(partition);
  std::unordered_set<std::uint32_t> excluded(excluded_groups.begin(), excluded_groups.end());
  PropensityTable table;
  for (std::uint32_t g : occupied_of_type(partition, VertexType::opinion))
    if (!excluded.contains(g)) table.opinion_groups.push_back(g);
  std::vector<std::int64_t> axis(partition.label_space(), -1);
  for (std::size_t i = 0; i < table.opinion_groups.size(); ++i) axis[table.opinion_groups[i]] = static_cast<std::int64_t>(i);

  for (std::size_t r = 0; r < graph.num_respondents(); ++r) {
    const std::uint32_t v = graph.respondent_vertex(r);
    std::vector<double> vec(table.opinion_groups.size(), 0.0);
    double degree = 0.0;
    for (std::uint32_t o : graph.neighbors(v)) {
      std::int64_t k = axis[partition.label(o)];
      if (k < 0) continue;
      vec[static_cast<std::size_t>(k)] += 1.0;
      degree += 1.0;
    }
    if (degree == 0.0) continue;
    for (double& x : vec) x /= degree;
    table.respondents.push_back(v);
    table.vectors.push_back(std::move(vec));
  }
  return table;
}

double chain_objective(std::span<const std::vector<double>> vectors, std::span<const std::size_t> order) {
  double total = 0.0;
  for (std::size_t j = 1; j < order.size(); ++j) total += l1(vectors[order[j - 1]], vectors[order[j]]);
  return total;
}

PaletteOrder palette_order(std::span<const std::vector<double>> vectors) {
  PaletteOrder out;
  const std::size_t n = vectors.size();
  if (n == 0) return out;
  std::size_t start = 0;
  double peak = -1.0;
  for (std::size_t i = 0; i < n; ++i) {
    double top = vectors[i].empty() ? 0.0 : *std::max_element(vectors[i].begin(), vectors[i].end());
    if (top > peak) {
      peak = top;
      start = i;
    }
  }
  std::vector<bool> placed(n, false);
  out.order.push_back(start);
  placed[start] = true;
  for (std::size_t step = 1; step < n; ++step) {
    const auto& last = vectors[out.order.back()];
    std::size_t best = n;
    double best_distance = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i) {
      if (placed[i]) continue;
      double d = l1(last, vectors[i]);
      if (d < best_distance) {
        best_distance = d;
        best = i;
      }
    }
    placed[best] = true;
    out.order.push_back(best);
  }
  out.objective = chain_objective(vectors, out.order);
  return out;
}

std::vector<double> palette_origins(std::span<const std::vector<double>> columns) {
  std::vector<double> origins;
  if (columns.empty()) return origins;
  origins.push_back(0.0);
  auto boundaries = [](const std::vector<double>& column) {
    std::vector<double> b{0.0};
    for (double x : column) b.push_back(b.back() + x);
    return b;
  };
  std::vector<double> previous = boundaries(columns[0]);
  for (std::size_t j = 1; j < columns.size(); ++j) {
    std::vector<double> current = boundaries(columns[j]);
    std::vector<double> diffs(previous.size());
    for (std::size_t k = 0; k < previous.size(); ++k) diffs[k] = previous[k] - current[k];
    std::sort(diffs.begin(), diffs.end());
    const std::size_t m = diffs.size();
    const double median = m % 2 == 1 ? diffs[m / 2] : 0.5 * (diffs[m / 2 - 1] + diffs[m / 2]);
    origins.push_back(origins.back() + median);
    previous = std::move(current);
  }
  return origins;
}

PaletteLayout palette_layout(const OpinionGraph& graph, const BipartiteGraph& bipartite, const Partition& partition,
                             const GroupNames& names, std::span<const std::uint32_t> excluded_groups,
                             const PaletteStrategy& strategy) {
  PropensityTable table = respondent_propensities(bipartite, partition, excluded_groups);
  PaletteLayout layout;
  layout.groups = table.opinion_groups;
  for (std::size_t i = 0; i < layout.groups.size(); ++i) {
    layout.group_names.push_back(name_or(names, layout.groups[i], "opinion-group-" + std::to_string(layout.groups[i])));
    layout.colors.push_back(palette_color(i));
  }
  PaletteOrder order = strategy.order(table.vectors);
  layout.objective = order.objective;
  for (std::size_t idx : order.order) {
    std::size_t r = table.respondents[idx] - bipartite.num_opinions();
    layout.respondent_ids.push_back(graph.respondents()[r].id);
    layout.columns.push_back(table.vectors[idx]);
  }
  layout.origins = strategy.origins(layout.columns);
  return layout;
}

nlohmann::json popularity_to_json(const PopularityMatrix& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t i = 0; i < m.rows(); ++i) {
    std::vector<double> row(m.values.begin() + static_cast<std::ptrdiff_t>(i * m.cols()),
                            m.values.begin() + static_cast<std::ptrdiff_t>((i + 1) * m.cols()));
    rows.push_back(row);
  }
  nlohmann::json opinion_groups = nlohmann::json::array();
  for (std::uint32_t g : m.opinion_groups)
    opinion_groups.push_back(g == PopularityMatrix::kPaddingGroup ? nlohmann::json(nullptr) : nlohmann::json(g));
  return {{"row_names", m.row_names},
          {"column_names", m.column_names},
          {"opinion_groups", opinion_groups},
          {"respondent_groups", m.respondent_groups},
          {"values", rows}};
}

std::string popularity_csv(const PopularityMatrix& m) {
  std::string out = "opinion_group";
  for (const auto& name : m.column_names) out += "," + csv_escape(name);
  out += '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    out += csv_escape(m.row_names[i]);
    for (std::size_t j = 0; j < m.cols(); ++j) out += "," + format_double(m.at(i, j));
    out += '\n';
  }
  return out;
}

nlohmann::json palette_to_json(const PaletteLayout& layout) {
  return {{"groups", layout.groups},       {"group_names", layout.group_names},
          {"colors", layout.colors},       {"respondents", layout.respondent_ids},
          {"columns", layout.columns},     {"origins", layout.origins},
          {"objective", layout.objective}};
}

PaletteLayout palette_from_json(const nlohmann::json& doc) {
  PaletteLayout layout;
  try {
    layout.groups = doc.at("groups").get<std::vector<std::uint32_t>>();
    layout.group_names = doc.at("group_names").get<std::vector<std::string>>();
    layout.colors = doc.at("colors").get<std::vector<std::string>>();
    layout.respondent_ids = doc.at("respondents").get<std::vector<std::string>>();
    layout.columns = doc.at("columns").get<std::vector<std::vector<double>>>();
    layout.origins = doc.at("origins").get<std::vector<double>>();
    layout.objective = doc.value("objective", 0.0);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("palette document: ") + e.what());
  }
  const std::size_t k = layout.groups.size();
  if (layout.group_names.size() != k || layout.colors.size() != k)
    throw std::invalid_argument("palette document: group arrays differ in length");
  if (layout.columns.size() != layout.origins.size() || layout.columns.size() != layout.respondent_ids.size())
    throw std::invalid_argument("palette document: column arrays differ in length");
  for (const auto& column : layout.columns)
    if (column.size() != k) throw std::invalid_argument("palette document: column length != group count");
  return layout;
}

std::string palette_csv(const PaletteLayout& layout) {
  std::string out = "respondent_id,position,origin";
  for (const auto& name : layout.group_names) out += "," + csv_escape(name);
  out += '\n';
  for (std::size_t j = 0; j < layout.columns.size(); ++j) {
    out += csv_escape(layout.respondent_ids[j]) + "," + std::to_string(j) + "," + format_double(layout.origins[j]);
    for (double x : layout.columns[j]) out += "," + format_double(x);
    out += '\n';
  }
  return out;
}

std::vector<GroupSizeRow> group_size_series(std::span<const SurveyPartition> surveys) {
  std::vector<GroupSizeRow> rows;
  for (const auto& survey : surveys) {
    if (!survey.partition) throw std::invalid_argument("group_size_series: missing partition");
    const Partition& p = *survey.partition;
    require_type_pure(p);
    for (std::uint32_t r = 0; r < p.label_space(); ++r) {
      if (!p.is_occupied(r)) continue;
      GroupSizeRow row;
      row.survey_id = survey.survey_id;
      row.group = r;
      row.type = p.type_count(r, VertexType::opinion) > 0 ? VertexType::opinion : VertexType::respondent;
      row.name = name_or(survey.names, r, "");
      row.size = p.group_size(r);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

std::string group_size_csv(std::span<const GroupSizeRow> rows) {
  std::string out = "survey_id,group_index,group_type,group_name,size\n";
  for (const auto& row : rows)
    out += csv_escape(row.survey_id) + "," + std::to_string(row.group) + "," +
           (row.type == VertexType::opinion ? "opinion" : "respondent") + "," + csv_escape(row.name) + "," +
           std::to_string(row.size) + "\n";
  return out;
}

}  // namespace gos
