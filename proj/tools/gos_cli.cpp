#include <csignal>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "gos/analysis.hpp"
#include "gos/annotation.hpp"
#include "gos/graph_io.hpp"
#include "gos/http_server.hpp"
#include "gos/inference.hpp"
#include "gos/metrics.hpp"
#include "gos/service.hpp"
#include "gos/simulator.hpp"
#include "gos/util.hpp"

using nlohmann::json;
using namespace gos;

namespace {

constexpr int kOk = 0;
constexpr int kInvalid = 1;
constexpr int kUsage = 2;

bool json_output = false;

// Human-readable lines go to stdout unless --json is set, in which case one
// JSON document is printed at the end.
void say(const std::string& line) {
  if (!json_output) std::cout << line << '\n';
}

void finish(const json& summary) {
  if (json_output) std::cout << summary.dump(2) << '\n';
}

struct Loaded {
  OpinionGraph graph;
  BipartiteGraph bipartite;
};

Loaded load_graph(const std::string& path) {
  Loaded l{import_graph(read_file(path)), {}};
  l.bipartite = to_bipartite(l.graph);
  return l;
}

AnnotationSet load_annotations(const std::string& path, const OpinionGraph* graph) {
  AnnotationImport imported = import_annotations(read_file(path), graph);
  for (const auto& r : imported.rejected) log_warn(path + ":" + std::to_string(r.line) + ": rejected: " + r.message);
  return std::move(imported.annotations);
}

std::vector<std::uint32_t> read_planted(const std::string& path, const OpinionGraph& graph) {
  std::vector<std::uint32_t> labels(graph.num_opinions() + graph.num_respondents());
  std::vector<bool> seen(labels.size(), false);
  std::map<std::pair<std::string, std::uint32_t>, std::uint32_t> relabel;
  auto lines = split_lines(read_file(path));
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto fields = split_csv_record(lines[i]);
    if (fields.size() != 3) throw std::runtime_error(path + ":" + std::to_string(i + 1) + ": expected 3 fields");
    std::size_t vertex;
    if (fields[1] == "opinion") {
      auto idx = graph.opinion_index(fields[0]);
      if (!idx) throw std::runtime_error(path + ": unknown opinion " + fields[0]);
      vertex = *idx;
    } else {
      auto idx = graph.respondent_index(fields[0]);
      if (!idx) throw std::runtime_error(path + ": unknown respondent " + fields[0]);
      vertex = graph.num_opinions() + *idx;
    }
    // Keep opinion and respondent groups apart even when their indices coincide.
    auto key = std::make_pair(fields[1], static_cast<std::uint32_t>(std::stoul(fields[2])));
    auto [it, inserted] = relabel.emplace(key, static_cast<std::uint32_t>(relabel.size()));
    labels[vertex] = it->second;
    seen[vertex] = true;
  }
  for (bool s : seen)
    if (!s) throw std::runtime_error(path + ": planted labels do not cover every vertex");
  return labels;
}

int cmd_validate(const std::string& graph_path) {
  OpinionGraph graph;
  try {
    graph = import_graph(read_file(graph_path));
  } catch (const std::exception& e) {
    say(std::string("invalid: ") + e.what());
    finish({{"valid", false}, {"errors", {e.what()}}});
    return kInvalid;
  }
  say("valid: " + std::to_string(graph.num_opinions()) + " opinions, " + std::to_string(graph.num_respondents()) +
      " respondents, " + std::to_string(graph.num_edges()) + " edges");
  finish({{"valid", true},
          {"opinions", graph.num_opinions()},
          {"respondents", graph.num_respondents()},
          {"edges", graph.num_edges()}});
  return kOk;
}

int cmd_simulate(const std::string& config_path, const std::string& out, const std::string& planted_out,
                 std::optional<std::uint64_t> seed) {
  SimulationSpec spec = simulation_spec_from_json(json::parse(read_file(config_path)));
  if (seed) spec.model.rng_seed = *seed;
  SimulationResult result = simulate(spec.model, spec.seed_opinions_per_group);
  write_file(out, export_graph(result.graph));
  std::string planted = planted_out.empty() ? out + ".planted.csv" : planted_out;
  write_file(planted, export_planted_csv(result));
  say("wrote " + out + " (" + std::to_string(result.graph.num_opinions()) + " opinions, " +
      std::to_string(result.graph.num_respondents()) + " respondents, " + std::to_string(result.graph.num_edges()) +
      " edges) and planted labels to " + planted);
  finish({{"graph", out},
          {"planted", planted},
          {"opinions", result.graph.num_opinions()},
          {"respondents", result.graph.num_respondents()},
          {"edges", result.graph.num_edges()},
          {"posting_rate", posting_rate(result.graph)},
          {"resampled_responses", result.report.resampled_responses},
          {"forced_responses", result.report.forced_responses}});
  return kOk;
}

struct ClusterOptions {
  std::string graph, annotations, out, report, planted;
  InferenceConfig inference;
  double epsilon = kDefaultPriorEpsilon;
};

int cmd_cluster(const ClusterOptions& o) {
  try {
    o.inference.validate();
  } catch (const std::exception& e) {
    throw CLI::ValidationError(e.what());
  }
  Loaded g = load_graph(o.graph);
  AnnotationSet annotations;
  std::optional<PriorField> field;
  if (!o.annotations.empty()) {
    annotations = load_annotations(o.annotations, &g.graph);
    if (!annotations.empty()) field = build_prior_field(annotations, g.graph, o.epsilon);
  }
  InferenceResult result = infer(g.bipartite, field ? &*field : nullptr, o.inference);
  auto names = name_groups(g.graph, result.partition, annotations);
  write_file(o.out, export_partition_csv(g.graph, result.partition, names));
  if (!o.report.empty()) write_file(o.report, inference_report(result).dump(2) + "\n");

  json summary = {{"partition", o.out},
                  {"score", result.score},
                  {"label_space", result.label_space},
                  {"occupied_groups", result.partition.occupied()},
                  {"best_restart", result.best_restart}};
  say("wrote " + o.out + ": " + std::to_string(result.partition.occupied()) + " groups, score " +
      format_double(result.score) + " (best of " + std::to_string(result.restarts.size()) + " restarts)");
  if (!o.planted.empty()) {
    auto planted = read_planted(o.planted, g.graph);
    double nmi = normalized_mutual_information(planted, result.partition.labels());
    summary["nmi"] = nmi;
    say("NMI vs planted: " + format_double(nmi));
  }
  finish(summary);
  return kOk;
}

int cmd_analyze(const std::string& what, const std::string& graph_path, const std::string& partition_path,
                const std::string& annotations_path, const std::string& out, std::size_t pad,
                const std::vector<std::uint32_t>& excluded, const std::string& a, const std::string& b) {
  json doc;
  std::string csv;
  if (what == "agreement") {
    if (annotations_path.empty()) throw CLI::ValidationError("agreement requires --annotations");
    std::optional<OpinionGraph> graph;
    if (!graph_path.empty()) graph = import_graph(read_file(graph_path));
    AnnotationSet set = load_annotations(annotations_path, graph ? &*graph : nullptr);
    std::vector<std::pair<std::string, std::string>> pairs;
    if (!a.empty() || !b.empty()) {
      pairs.emplace_back(a, b);
    } else {
      const auto& names = set.annotators();
      for (std::size_t i = 0; i < names.size(); ++i)
        for (std::size_t j = i + 1; j < names.size(); ++j) pairs.emplace_back(names[i], names[j]);
    }
    json list = json::array();
    csv = "annotator_a,annotator_b,group_a,group_b,count\n";
    for (const auto& [x, y] : pairs) {
      AgreementMatrix m = agreement_matrix(set, x, y);
      json rows = json::array();
      for (std::size_t i = 0; i < kSemanticGroupCount; ++i) {
        rows.push_back(m[i]);
        for (std::size_t j = 0; j < kSemanticGroupCount; ++j)
          csv += csv_escape(x) + "," + csv_escape(y) + "," +
                 std::string(group_code(static_cast<SemanticGroup>(i))) + "," +
                 std::string(group_code(static_cast<SemanticGroup>(j))) + "," + std::to_string(m[i][j]) + "\n";
      }
      list.push_back({{"a", x}, {"b", y}, {"matrix", rows}});
    }
    doc = {{"pairs", list}};
  } else {
    if (graph_path.empty() || partition_path.empty())
      throw CLI::ValidationError(what + " requires --graph and --partition");
    Loaded g = load_graph(graph_path);
    ImportedPartition p = import_partition_csv(read_file(partition_path), g.graph, g.bipartite);
    if (what == "popularity") {
      PopularityMatrix m = popularity_matrix(g.bipartite, p.partition, p.names, pad);
      doc = popularity_to_json(m);
      csv = popularity_csv(m);
    } else {
      PaletteLayout layout = palette_layout(g.graph, g.bipartite, p.partition, p.names, excluded);
      doc = palette_to_json(layout);
      csv = palette_csv(layout);
    }
  }
  bool as_csv = out.size() >= 4 && out.compare(out.size() - 4, 4, ".csv") == 0;
  write_file(out, as_csv ? csv : doc.dump(2) + "\n");
  say("wrote " + what + " to " + out);
  finish({{"analysis", what}, {"out", out}});
  return kOk;
}

int cmd_render(const std::string& layout_path, const std::string& out, int width, int height) {
  PaletteLayout layout = palette_from_json(json::parse(read_file(layout_path)));
  write_file(out, render_palette_svg(layout, width, height));
  say("wrote " + out);
  finish({{"out", out}, {"columns", layout.columns.size()}});
  return kOk;
}

HttpServer* active_server = nullptr;

int cmd_serve(const std::string& config_path, std::optional<int> port, const std::string& data_dir) {
  std::optional<std::filesystem::path> file;
  if (!config_path.empty()) file = config_path;
  ServiceConfig config = ServiceConfig::load(file);
  if (port) config.port = *port;
  if (!data_dir.empty()) config.data_dir = data_dir;
  SurveyService service(config);
  HttpServer server(service);
  int bound = server.bind(config.host, config.port);
  if (bound < 0) {
    log(LogLevel::error, "cannot bind " + config.host + ":" + std::to_string(config.port));
    return kInvalid;
  }
  active_server = &server;
  std::signal(SIGINT, [](int) {
    if (active_server) active_server->stop();
  });
  std::signal(SIGTERM, [](int) {
    if (active_server) active_server->stop();
  });
  log_info("listening on http://" + config.host + ":" + std::to_string(bound) + " (data in " +
           config.data_dir.string() + ")");
  server.listen();
  active_server = nullptr;
  service.wait_for_jobs();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Opinion-graph survey toolkit"};
  app.require_subcommand(1);
  app.add_flag("--json", json_output, "Print a machine-readable JSON summary");
  bool quiet = false;
  app.add_flag("-q,--quiet", quiet, "Only log errors");

  std::string config_path, data_dir;
  std::optional<int> port;
  auto* serve = app.add_subcommand("serve", "Run the HTTP survey service");
  serve->add_option("--config", config_path, "JSON service config file");
  serve->add_option("--port", port, "Listen port (overrides config)");
  serve->add_option("--data-dir", data_dir, "Event log directory (overrides config)");

  std::string sim_config, sim_out, sim_planted;
  std::optional<std::uint64_t> sim_seed;
  auto* sim = app.add_subcommand("simulate", "Generate a planted-partition survey graph");
  sim->add_option("--config", sim_config, "Simulation config (JSON)")->required();
  sim->add_option("--out", sim_out, "Output graph JSON")->required();
  sim->add_option("--planted", sim_planted, "Planted labels CSV (default <out>.planted.csv)");
  sim->add_option("--seed", sim_seed, "Override the config rng_seed");

  ClusterOptions co;
  auto* cluster = app.add_subcommand("cluster", "Infer a partition of a survey graph");
  cluster->add_option("--graph", co.graph, "Graph JSON")->required();
  cluster->add_option("--annotations", co.annotations, "Annotation CSV (opinion_id,annotator_id,group_code)");
  cluster->add_option("--out", co.out, "Partition CSV")->required();
  cluster->add_option("--seed", co.inference.rng_seed, "Random seed");
  cluster->add_option("--sweeps", co.inference.sweeps, "Sweeps per restart");
  cluster->add_option("--restarts", co.inference.restarts, "Independent restarts");
  cluster->add_option("--threads", co.inference.threads, "Worker threads for restarts");
  cluster->add_option("--label-space", co.inference.label_space, "Label space size (0 = automatic)");
  cluster->add_option("--p-new", co.inference.p_new_group, "Probability of proposing an empty group");
  cluster->add_option("--greedy-sweeps", co.inference.greedy_sweeps, "Cap on final greedy sweeps");
  cluster->add_option("--epsilon", co.epsilon, "Prior floor for non-annotated labels");
  cluster->add_option("--report", co.report, "Write the restart trace report (JSON)");
  cluster->add_option("--planted", co.planted, "Planted labels CSV; reports NMI");

  std::string an_what, an_graph, an_partition, an_annotations, an_out, an_a, an_b;
  std::size_t an_pad = 0;
  std::vector<std::uint32_t> an_exclude;
  auto* analyze = app.add_subcommand("analyze", "Popularity matrix, palette layout or annotator agreement");
  analyze->add_option("kind", an_what, "popularity | palette | agreement")
      ->required()
      ->check(CLI::IsMember({"popularity", "palette", "agreement"}));
  analyze->add_option("--graph", an_graph, "Graph JSON");
  analyze->add_option("--partition", an_partition, "Partition CSV");
  analyze->add_option("--annotations", an_annotations, "Annotation CSV (agreement)");
  analyze->add_option("--out", an_out, "Output file (.csv for CSV, otherwise JSON)")->required();
  analyze->add_option("--pad", an_pad, "Pad the popularity matrix to this many rows");
  analyze->add_option("--exclude", an_exclude, "Opinion group indices to drop from the palette")->delimiter(',');
  analyze->add_option("--a", an_a, "First annotator (agreement)");
  analyze->add_option("--b", an_b, "Second annotator (agreement)");

  std::string layout_path, svg_out;
  int width = 960, height = 480;
  auto* render = app.add_subcommand("render-palette", "Render a palette layout JSON as SVG");
  render->add_option("--layout", layout_path, "Palette layout JSON")->required();
  render->add_option("--out", svg_out, "Output SVG")->required();
  render->add_option("--width", width, "Width in pixels");
  render->add_option("--height", height, "Height in pixels");

  std::string validate_graph;
  auto* validate = app.add_subcommand("validate", "Check a graph file for structural invariant violations");
  validate->add_option("--graph", validate_graph, "Graph JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  set_log_level(quiet ? LogLevel::error : LogLevel::info);

  try {
    if (*serve) return cmd_serve(config_path, port, data_dir);
    if (*sim) return cmd_simulate(sim_config, sim_out, sim_planted, sim_seed);
    if (*cluster) return cmd_cluster(co);
    if (*analyze)
      return cmd_analyze(an_what, an_graph, an_partition, an_annotations, an_out, an_pad, an_exclude, an_a, an_b);
    if (*render) return cmd_render(layout_path, svg_out, width, height);
    if (*validate) return cmd_validate(validate_graph);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalid;
  }
  return kUsage;
}
