#include "gos/annotation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "gos/util.hpp"

namespace gos {

namespace {

struct GroupNames {
  std::string_view code;
  std::string_view display;
};

constexpr std::array<GroupNames, kSemanticGroupCount> kGroupNames{{
    {"infection_risk", "infection risk"},
    {"social_pressure_future", "social pressure & future prospect"},
    {"financial", "financial issues"},
    {"travel", "travel"},
    {"government_policies", "government policies"},
    {"mask_shortage", "mask (shortage)"},
    {"mask_discomfort", "mask (discomfort)"},
    {"other_issues", "other issues"},
    {"no_concerns", "no concerns"},
    {"invalid", "invalid responses"},
}};

std::string trim(std::string_view s) {
  auto begin = s.find_first_not_of(" \t");
  if (begin == std::string_view::npos) return {};
  auto end = s.find_last_not_of(" \t");
  return std::string(s.substr(begin, end - begin + 1));
}

}  // namespace

std::string_view group_code(SemanticGroup group) { return kGroupNames[group_position(group)].code; }
std::string_view group_display_name(SemanticGroup group) { return kGroupNames[group_position(group)].display; }

std::optional<SemanticGroup> parse_group_code(std::string_view code) {
  for (std::size_t i = 0; i < kSemanticGroupCount; ++i)
    if (kGroupNames[i].code == code) return static_cast<SemanticGroup>(i);
  return std::nullopt;
}

bool AnnotationSet::set(const std::string& opinion, const std::string& annotator, SemanticGroup group) {
  if (!has_annotator(annotator)) annotators_.push_back(annotator);
  auto [it, inserted] = entries_.insert_or_assign({opinion, annotator}, group);
  return !inserted;
}

std::optional<SemanticGroup> AnnotationSet::label(const std::string& opinion, const std::string& annotator) const {
  auto it = entries_.find({opinion, annotator});
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::pair<std::string, SemanticGroup>> AnnotationSet::labels_of(const std::string& opinion) const {
  std::vector<std::pair<std::string, SemanticGroup>> out;
  for (const auto& annotator : annotators_)
    if (auto g = label(opinion, annotator)) out.emplace_back(annotator, *g);
  return out;
}

bool AnnotationSet::has_annotator(std::string_view annotator) const {
  return std::find(annotators_.begin(), annotators_.end(), annotator) != annotators_.end();
}

AnnotationImport import_annotations(std::string_view csv, const OpinionGraph* graph) {
  AnnotationImport result;
  auto lines = split_lines(csv);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::size_t line_no = i + 1;
    if (trim(lines[i]).empty()) continue;
    auto fields = split_csv_record(lines[i]);
    for (auto& f : fields) f = trim(f);
    if (i == 0 && fields.size() == 3 && fields[0] == "opinion_id" && fields[1] == "annotator_id" &&
        fields[2] == "group_code")
      continue;
    if (fields.size() != 3) {
      result.rejected.push_back({line_no, "expected 3 fields, got " + std::to_string(fields.size())});
      continue;
    }
    if (fields[0].empty() || fields[1].empty()) {
      result.rejected.push_back({line_no, "empty opinion or annotator id"});
      continue;
    }
    auto group = parse_group_code(fields[2]);
    if (!group) {
      result.rejected.push_back({line_no, "unknown group code '" + fields[2] + "'"});
      continue;
    }
    if (graph && !graph->opinion_index(fields[0])) {
      result.rejected.push_back({line_no, "unknown opinion id '" + fields[0] + "'"});
      continue;
    }
    if (result.annotations.set(fields[0], fields[1], *group))
      result.warnings.push_back({line_no, "duplicate label for (" + fields[0] + ", " + fields[1] +
                                              "); keeping the later row"});
  }
  for (const auto& w : result.warnings) log_warn("annotations line " + std::to_string(w.line) + ": " + w.message);
  return result;
}

void merge_annotations(AnnotationSet& into, const AnnotationSet& from) {
  for (const auto& [key, group] : from.entries()) into.set(key.first, key.second, group);
}

PriorField::PriorField(std::vector<PriorLabel> labels, std::vector<std::string> vertex_ids, std::vector<double> rows,
                       double epsilon)
    : labels_(std::move(labels)), vertex_ids_(std::move(vertex_ids)), rows_(std::move(rows)), epsilon_(epsilon) {
  if (rows_.size() != labels_.size() * vertex_ids_.size())
    throw AnnotationError("prior field: row data does not match K x N");
}

std::optional<std::size_t> PriorField::label_index(std::string_view annotator, SemanticGroup group) const {
  for (std::size_t k = 0; k < labels_.size(); ++k)
    if (labels_[k].annotator == annotator && labels_[k].group == group) return k;
  return std::nullopt;
}

PriorField build_prior_field(const AnnotationSet& annotations, const OpinionGraph& graph, double epsilon) {
  std::set<std::pair<std::size_t, std::size_t>> used;  // (annotator position, group position)
  const auto& annotators = annotations.annotators();
  for (const auto& [key, group] : annotations.entries()) {
    if (!graph.opinion_index(key.first))
      throw AnnotationError("annotation for unknown opinion '" + key.first + "'");
    auto pos = static_cast<std::size_t>(std::find(annotators.begin(), annotators.end(), key.second) -
                                        annotators.begin());
    used.emplace(pos, group_position(group));
  }
  std::vector<PriorLabel> labels;
  for (const auto& [a, g] : used) labels.push_back({annotators[a], static_cast<SemanticGroup>(g)});

  const std::size_t K = labels.size();
  if (K > 0 && !(epsilon > 0.0 && epsilon * static_cast<double>(K) < 1.0))
    throw AnnotationError("prior field: epsilon must satisfy 0 < epsilon < 1/K (K = " + std::to_string(K) + ")");

  std::vector<std::string> ids;
  ids.reserve(graph.num_opinions() + graph.num_respondents());
  for (const auto& op : graph.opinions()) ids.push_back(op.id);
  for (const auto& r : graph.respondents()) ids.push_back(r.id);

  std::vector<double> rows(ids.size() * K, K > 0 ? 1.0 / static_cast<double>(K) : 0.0);
  for (std::size_t v = 0; v < graph.num_opinions(); ++v) {
    auto assigned = annotations.labels_of(ids[v]);
    if (assigned.empty()) continue;
    std::vector<std::size_t> hot;
    for (const auto& [annotator, group] : assigned)
      for (std::size_t k = 0; k < K; ++k)
        if (labels[k].annotator == annotator && labels[k].group == group) hot.push_back(k);
    const auto m = static_cast<double>(hot.size());
    const double eta = (1.0 - (static_cast<double>(K) - m) * epsilon) / m;
    double* row = rows.data() + v * K;
    std::fill(row, row + K, epsilon);
    for (std::size_t k : hot) row[k] = eta;
  }
  return PriorField(std::move(labels), std::move(ids), std::move(rows), epsilon);
}

std::string export_prior_csv(const PriorField& field) {
  std::string out = "vertex_id";
  for (const auto& label : field.labels()) {
    out += ',';
    out += csv_escape(label.annotator + ":" + std::string(group_code(label.group)));
  }
  out += '\n';
  for (std::size_t v = 0; v < field.num_vertices(); ++v) {
    out += csv_escape(field.vertex_ids()[v]);
    for (double p : field.row(v)) {
      out += ',';
      out += format_double(p);
    }
    out += '\n';
  }
  return out;
}

AgreementMatrix agreement_matrix(const AnnotationSet& annotations, std::string_view a, std::string_view b) {
  if (!annotations.has_annotator(a)) throw AnnotationError("unknown annotator '" + std::string(a) + "'");
  if (!annotations.has_annotator(b)) throw AnnotationError("unknown annotator '" + std::string(b) + "'");
  AgreementMatrix matrix{};
  for (const auto& [key, group] : annotations.entries()) {
    if (key.second != a) continue;
    if (auto other = annotations.label(key.first, std::string(b)))
      ++matrix[group_position(group)][group_position(*other)];
  }
  return matrix;
}

}  // namespace gos
