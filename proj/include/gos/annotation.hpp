#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "gos/graph.hpp"

namespace gos {

/// The ten opinion categories annotators choose from. Enum order is the
/// canonical order used for label indices and tie-breaks.
enum class SemanticGroup : std::uint8_t {
  infection_risk,
  social_pressure_future,
  financial,
  travel,
  government_policies,
  mask_shortage,
  mask_discomfort,
  other_issues,
  no_concerns,
  invalid,
};

inline constexpr std::size_t kSemanticGroupCount = 10;

std::string_view group_code(SemanticGroup group);
std::string_view group_display_name(SemanticGroup group);
std::optional<SemanticGroup> parse_group_code(std::string_view code);
inline std::size_t group_position(SemanticGroup group) { return static_cast<std::size_t>(group); }

class AnnotationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Labels assigned independently by several annotators. At most one label per
/// (opinion, annotator); opinions without entries are unannotated.
class AnnotationSet {
 public:
  /// Returns true when an existing label was replaced.
  bool set(const std::string& opinion, const std::string& annotator, SemanticGroup group);

  std::optional<SemanticGroup> label(const std::string& opinion, const std::string& annotator) const;
  /// (annotator, group) pairs for one opinion, in annotator order.
  std::vector<std::pair<std::string, SemanticGroup>> labels_of(const std::string& opinion) const;

  /// Annotators in order of first appearance.
  const std::vector<std::string>& annotators() const { return annotators_; }
  bool has_annotator(std::string_view annotator) const;
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }

  /// Entries keyed by (opinion, annotator).
  const std::map<std::pair<std::string, std::string>, SemanticGroup>& entries() const { return entries_; }

 private:
  std::map<std::pair<std::string, std::string>, SemanticGroup> entries_;
  std::vector<std::string> annotators_;
};

struct RowIssue {
  std::size_t line = 0;  // 1-based
  std::string message;
};

struct AnnotationImport {
  AnnotationSet annotations;
  std::vector<RowIssue> rejected;
  std::vector<RowIssue> warnings;
};

/// Parses `opinion_id,annotator_id,group_code` rows (optional header).
/// Unknown group codes and, when `graph` is given, unknown opinion ids are
/// rejected per row; duplicate (opinion, annotator) rows keep the last one.
AnnotationImport import_annotations(std::string_view csv, const OpinionGraph* graph = nullptr);

/// Same as import_annotations but merges into an existing set.
void merge_annotations(AnnotationSet& into, const AnnotationSet& from);

struct PriorLabel {
  std::string annotator;
  SemanticGroup group;
  friend bool operator==(const PriorLabel&, const PriorLabel&) = default;
};

/// Per-vertex prior distributions over the K annotation labels. Rows follow
/// the vertex order opinions-then-respondents.
class PriorField {
 public:
  PriorField() = default;
  PriorField(std::vector<PriorLabel> labels, std::vector<std::string> vertex_ids, std::vector<double> rows,
             double epsilon);

  std::size_t num_labels() const { return labels_.size(); }
  std::size_t num_vertices() const { return vertex_ids_.size(); }
  std::span<const double> row(std::size_t vertex) const {
    return {rows_.data() + vertex * labels_.size(), labels_.size()};
  }
  const std::vector<PriorLabel>& labels() const { return labels_; }
  const std::vector<std::string>& vertex_ids() const { return vertex_ids_; }
  double epsilon() const { return epsilon_; }
  std::optional<std::size_t> label_index(std::string_view annotator, SemanticGroup group) const;

 private:
  std::vector<PriorLabel> labels_;
  std::vector<std::string> vertex_ids_;
  std::vector<double> rows_;
  double epsilon_ = 0.0;
};

inline constexpr double kDefaultPriorEpsilon = 1e-6;

/// One label per (annotator, group) pair actually used. A vertex with m labels
/// gets eta = (1 - (K - m) * epsilon) / m on its labels and epsilon elsewhere;
/// unannotated opinions and all respondents get 1/K. Requires
/// 0 < epsilon < 1/K (equivalently eta > epsilon).
PriorField build_prior_field(const AnnotationSet& annotations, const OpinionGraph& graph,
                             double epsilon = kDefaultPriorEpsilon);

/// Dense CSV: `vertex_id,<annotator>:<group>,...` then one row per vertex.
std::string export_prior_csv(const PriorField& field);

using AgreementMatrix = std::array<std::array<std::size_t, kSemanticGroupCount>, kSemanticGroupCount>;

/// Entry (g, h) counts opinions labelled g by `a` and h by `b`.
AgreementMatrix agreement_matrix(const AnnotationSet& annotations, std::string_view a, std::string_view b);

}  // namespace gos
