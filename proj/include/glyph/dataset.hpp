#pragma once

// Precomputed per-level datasets: the ingest -> state graph -> distance ->
// layout pipeline, its on-disk JSON exports, and loading them back.
//
// Layout of a dataset directory:
//   index.json               levels with trace / sequence counts
//   ingest-report.json       warnings from parsing the trace log
//   <level_id>/level.json
//   <level_id>/sequences.json
//   <level_id>/state-graph.json
//   <level_id>/sequence-graph.json
//   <level_id>/meta.json

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "glyph/distance.hpp"
#include "glyph/errors.hpp"
#include "glyph/game.hpp"
#include "glyph/ingest.hpp"
#include "glyph/layout.hpp"
#include "glyph/query.hpp"
#include "glyph/state_graph.hpp"

namespace glyph {

inline constexpr const char* tool_version = "0.1.0";

using ojson = nlohmann::ordered_json;

struct PrecomputeConfig {
  DistanceConfig distance;
  LayoutConfig state_layout{};
  LayoutConfig sequence_layout{.algorithm = LayoutAlgorithm::stress_mds};
  unsigned jobs = 1;
};

struct LevelDataset {
  Level level;
  std::vector<UniqueSequence> sequences;
  StateGraph graph;
  DistanceMatrix matrix;
  LayoutResult state_layout;
  LayoutResult sequence_layout;
  std::size_t trace_count = 0;
};

inline ojson to_json(const DistanceConfig& c) {
  return ojson{{"big", c.big}, {"bfs_depth_cap", c.bfs_depth_cap}, {"cache_capacity", c.cache_capacity},
               {"prune", c.prune}};
}

inline ojson to_json(const LayoutConfig& c) {
  return ojson{{"seed", c.seed},
               {"iterations", c.iterations},
               {"width", c.width},
               {"height", c.height},
               {"initial_step", c.initial_step},
               {"cooling", c.cooling},
               {"algorithm", algorithm_name(c.algorithm)},
               {"convergence_epsilon", c.convergence_epsilon}};
}

// 64-bit FNV-1a, hex. Stable across platforms, unlike std::hash.
inline std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

inline LayoutGraph layout_graph_of(const StateGraph& g) {
  LayoutGraph lg;
  lg.node_count = g.nodes.size();
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (const auto& e : g.edges) {
    if (e.from_node == e.to_node) continue;
    auto key = std::minmax(e.from_node, e.to_node);
    if (seen.insert(key).second) lg.edges.push_back(key);
  }
  return lg;
}

inline LayoutResult layout_state_graph(const StateGraph& g, const LayoutConfig& cfg, const Pins& pins = {}) {
  return force_directed_layout(layout_graph_of(g), cfg, pins);
}

inline LayoutResult layout_sequence_graph(const DistanceMatrix& m, const LayoutConfig& cfg, const Pins& pins = {}) {
  if (cfg.algorithm == LayoutAlgorithm::stress_mds) return stress_mds_layout(m.values, m.size(), cfg, pins);
  LayoutGraph lg;
  lg.node_count = m.size();
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = i + 1; j < m.size(); ++j) {
      lg.edges.emplace_back(i, j);
      lg.edge_lengths.push_back(m.at(i, j));
    }
  return force_directed_layout(lg, cfg, pins);
}

// Runs dedup, state graph, distance matrix and both layouts for one level.
inline LevelDataset build_level_dataset(const Level& level, std::span<const PlayTrace> traces,
                                        const PrecomputeConfig& cfg) {
  if (traces.empty()) throw InvalidInput("level '" + level.id() + "': no traces");
  LevelDataset ds{level, {}, {}, {}, {}, {}, traces.size()};
  ds.sequences = dedup_sequences(traces);
  ds.graph = build_state_graph(level, ds.sequences);
  ds.matrix = build_distance_matrix(ds.sequences, level, cfg.distance, cfg.jobs);
  ds.state_layout = layout_state_graph(ds.graph, cfg.state_layout);
  ds.sequence_layout = layout_sequence_graph(ds.matrix, cfg.sequence_layout);
  return ds;
}

// ---------------------------------------------------------------------------
// JSON exports

inline ojson state_to_json(const Level& level, const GameState& s) {
  return ojson{{"marker", s.marker}, {"collected", level.collected_ids(s.collected)}};
}

inline ojson sequences_to_json(const std::vector<UniqueSequence>& seqs) {
  auto arr = ojson::array();
  for (const auto& s : seqs) {
    ojson j;
    j["sequence_id"] = s.sequence_id;
    j["key"] = s.key;
    auto moves = ojson::array();
    for (const auto& m : s.moves) moves.push_back(move_to_json(m));
    j["moves"] = moves;
    j["popularity"] = s.popularity;
    j["completed"] = s.completed;
    j["member_player_ids"] = s.member_player_ids;
    j["member_trace_ids"] = s.member_trace_ids;
    arr.push_back(std::move(j));
  }
  return arr;
}

inline std::vector<UniqueSequence> sequences_from_json(const Level& level, const nlohmann::json& arr) {
  std::vector<UniqueSequence> out;
  for (const auto& j : arr) {
    UniqueSequence s;
    s.sequence_id = j.at("sequence_id").get<int>();
    s.level_id = level.id();
    s.key = j.at("key").get<std::string>();
    for (const auto& m : j.at("moves")) s.moves.push_back(move_from_json(m));
    s.states = replay(level, s.moves);
    s.popularity = j.at("popularity").get<std::size_t>();
    s.completed = j.at("completed").get<bool>();
    s.member_player_ids = j.at("member_player_ids").get<std::vector<std::string>>();
    s.member_trace_ids = j.at("member_trace_ids").get<std::vector<std::string>>();
    if (s.completed != is_end_state(level, s.states.back()))
      throw InvalidInput("sequence " + std::to_string(s.sequence_id) + " completion flag disagrees with replay");
    out.push_back(std::move(s));
  }
  return out;
}

// Node-link document consumed by the UI. Positions come from `layout`.
inline ojson state_graph_to_json(const Level& level, const StateGraph& g, const std::vector<Point>& positions) {
  std::uint64_t max_visits = 1;
  for (const auto& n : g.nodes) max_visits = std::max(max_visits, n.visits);
  ojson doc;
  doc["level_id"] = g.level_id;
  auto nodes = ojson::array();
  for (const auto& n : g.nodes) {
    ojson j;
    j["id"] = n.node_id;
    j["class"] = node_class_name(n.node_class);
    j["visits"] = n.visits;
    j["starts"] = n.starts;
    j["terminations"] = n.terminations;
    j["state"] = state_to_json(level, n.state);
    j["x"] = positions.at(n.node_id).x;
    j["y"] = positions.at(n.node_id).y;
    j["radius"] = node_radius(static_cast<double>(n.visits), static_cast<double>(max_visits));
    nodes.push_back(std::move(j));
  }
  doc["nodes"] = nodes;
  auto edges = ojson::array();
  for (const auto& e : g.edges) {
    edges.push_back(ojson{{"id", e.edge_id},
                          {"from", e.from_node},
                          {"to", e.to_node},
                          {"action", e.action_label},
                          {"text", render_event(MoveEvent{e.action.cog_index, e.action.direction, e.action.turns})},
                          {"traversals", e.traversals}});
  }
  doc["edges"] = edges;
  ojson paths = ojson::object(), path_edges = ojson::object();
  for (const auto& [id, p] : g.paths) {
    paths[std::to_string(id)] = p.node_ids;
    path_edges[std::to_string(id)] = p.edge_ids;
  }
  doc["paths"] = paths;
  doc["path_edges"] = path_edges;
  return doc;
}

inline ojson matrix_to_json(const DistanceMatrix& m) {
  auto rows = ojson::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    auto row = ojson::array();
    for (std::size_t j = 0; j < m.size(); ++j) row.push_back(m.at(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline ojson sequence_graph_to_json(const std::string& level_id, const std::vector<UniqueSequence>& seqs,
                                    const DistanceMatrix& m, const LayoutResult& layout) {
  std::size_t max_pop = 1;
  for (const auto& s : seqs) max_pop = std::max(max_pop, s.popularity);
  ojson doc;
  doc["level_id"] = level_id;
  auto nodes = ojson::array();
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const auto& s = seqs[i];
    nodes.push_back(ojson{{"sequence_id", s.sequence_id},
                          {"popularity", s.popularity},
                          {"completed", s.completed},
                          {"x", layout.positions.at(i).x},
                          {"y", layout.positions.at(i).y},
                          {"radius", node_radius(static_cast<double>(s.popularity), static_cast<double>(max_pop))},
                          {"length", s.moves.size()}});
  }
  doc["nodes"] = nodes;
  doc["order"] = m.order;
  doc["big"] = m.big;
  doc["final_stress"] = layout.final_stress;
  doc["matrix"] = matrix_to_json(m);
  return doc;
}

inline DistanceMatrix matrix_from_json(const nlohmann::json& doc) {
  DistanceMatrix m;
  m.order = doc.at("order").get<std::vector<int>>();
  m.big = doc.at("big").get<double>();
  const auto& rows = doc.at("matrix");
  if (rows.size() != m.order.size()) throw InvalidInput("matrix size does not match order");
  for (const auto& row : rows) {
    if (row.size() != m.order.size()) throw InvalidInput("matrix is not square");
    for (const auto& v : row) m.values.push_back(v.get<double>());
  }
  return m;
}

inline std::string format_number(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, p);
}

// Header row is "sequence_id" followed by the ids; each row leads with its id.
inline std::string matrix_csv(const DistanceMatrix& m) {
  std::string out = "sequence_id";
  for (int id : m.order) out += "," + std::to_string(id);
  out += "\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    out += std::to_string(m.order[i]);
    for (std::size_t j = 0; j < m.size(); ++j) out += "," + format_number(m.at(i, j));
    out += "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// SVG snapshots

namespace detail {

struct Frame {
  double min_x = 0, min_y = 0, scale = 1, margin = 40;
  double x(double v) const { return margin + (v - min_x) * scale; }
  double y(double v) const { return margin + (v - min_y) * scale; }
};

inline Frame fit(const nlohmann::json& nodes, double size) {
  Frame f;
  if (nodes.empty()) return f;
  double max_x = -1e300, max_y = -1e300;
  f.min_x = f.min_y = 1e300;
  for (const auto& n : nodes) {
    const double x = n.at("x").get<double>(), y = n.at("y").get<double>();
    f.min_x = std::min(f.min_x, x);
    f.min_y = std::min(f.min_y, y);
    max_x = std::max(max_x, x);
    max_y = std::max(max_y, y);
  }
  const double span = std::max({max_x - f.min_x, max_y - f.min_y, 1e-9});
  f.scale = (size - 2 * f.margin) / span;
  return f;
}

inline std::string num(double v) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

}  // namespace detail

// Static picture of the state view: start blue, end red, mid yellow.
inline std::string state_graph_svg(const nlohmann::json& doc, double size = 800) {
  const auto& nodes = doc.at("nodes");
  const auto f = detail::fit(nodes, size);
  std::uint64_t max_trav = 1;
  for (const auto& e : doc.at("edges")) max_trav = std::max(max_trav, e.at("traversals").get<std::uint64_t>());
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& e : doc.at("edges")) {
    const auto& a = nodes.at(e.at("from").get<std::size_t>());
    const auto& b = nodes.at(e.at("to").get<std::size_t>());
    const double w = 1 + 5 * std::sqrt(static_cast<double>(e.at("traversals").get<std::uint64_t>()) / max_trav);
    os << "<line x1=\"" << detail::num(f.x(a.at("x"))) << "\" y1=\"" << detail::num(f.y(a.at("y"))) << "\" x2=\""
       << detail::num(f.x(b.at("x"))) << "\" y2=\"" << detail::num(f.y(b.at("y")))
       << "\" stroke=\"#999\" stroke-width=\"" << detail::num(w) << "\"/>\n";
  }
  for (const auto& n : nodes) {
    const std::string cls = n.at("class");
    const char* fill = cls == "start" ? "#1f77b4" : cls == "end" ? "#d62728" : "#f2c94c";
    os << "<circle cx=\"" << detail::num(f.x(n.at("x"))) << "\" cy=\"" << detail::num(f.y(n.at("y"))) << "\" r=\""
       << detail::num(n.at("radius").get<double>() / 2) << "\" fill=\"" << fill << "\" stroke=\"#333\"/>\n";
  }
  os << "</svg>\n";
  return os.str();
}

// Static picture of the sequence view: completed green, quit pink, rank labels.
inline std::string sequence_graph_svg(const nlohmann::json& doc, double size = 800) {
  const auto& nodes = doc.at("nodes");
  const auto f = detail::fit(nodes, size);
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (const auto& n : nodes) {
    const char* fill = n.at("completed").get<bool>() ? "#2ca02c" : "#f7a1c4";
    const std::string cx = detail::num(f.x(n.at("x"))), cy = detail::num(f.y(n.at("y")));
    os << "<circle cx=\"" << cx << "\" cy=\"" << cy << "\" r=\"" << detail::num(n.at("radius").get<double>())
       << "\" fill=\"" << fill << "\" stroke=\"#333\"/>\n";
    os << "<text x=\"" << cx << "\" y=\"" << cy
       << "\" font-size=\"11\" text-anchor=\"middle\" dominant-baseline=\"central\">"
       << n.at("sequence_id").get<int>() << "</text>\n";
  }
  os << "</svg>\n";
  return os.str();
}

// ---------------------------------------------------------------------------
// Precompute

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

inline void write_json(const std::filesystem::path& path, const ojson& j) { write_text(path, j.dump(2) + "\n"); }

struct PrecomputeReport {
  std::vector<std::string> level_ids;
  std::size_t accepted_traces = 0;
  std::size_t excluded_traces = 0;
  std::vector<IngestWarning> warnings;
};

inline ojson warnings_to_json(const std::vector<IngestWarning>& ws) {
  auto arr = ojson::array();
  for (const auto& w : ws) arr.push_back(ojson{{"line", w.line}, {"trace_id", w.trace_id}, {"message", w.message}});
  return arr;
}

inline void write_level_dataset(const std::filesystem::path& dir, const LevelDataset& ds, const PrecomputeConfig& cfg,
                                std::optional<std::int64_t> build_ts) {
  std::filesystem::create_directories(dir);
  write_json(dir / "level.json", to_json(ds.level.config()));
  write_json(dir / "sequences.json", sequences_to_json(ds.sequences));
  write_json(dir / "state-graph.json", state_graph_to_json(ds.level, ds.graph, ds.state_layout.positions));
  write_json(dir / "sequence-graph.json",
             sequence_graph_to_json(ds.level.id(), ds.sequences, ds.matrix, ds.sequence_layout));

  const ojson config{{"distance", to_json(cfg.distance)},
                     {"state_layout", to_json(cfg.state_layout)},
                     {"sequence_layout", to_json(cfg.sequence_layout)}};
  ojson meta;
  meta["tool"] = "glyph-workbench";
  meta["tool_version"] = tool_version;
  meta["level_id"] = ds.level.id();
  meta["trace_count"] = ds.trace_count;
  meta["sequence_count"] = ds.sequences.size();
  meta["node_count"] = ds.graph.nodes.size();
  meta["edge_count"] = ds.graph.edges.size();
  meta["config"] = config;
  meta["config_hash"] = fnv1a_hex(config.dump());
  meta["level_hash"] = fnv1a_hex(to_json(ds.level.config()).dump());
  meta["build_timestamp"] = build_ts ? ojson(*build_ts) : ojson(nullptr);
  write_json(dir / "meta.json", meta);
}

// Full pipeline from a trace log and a directory of level files into
// `out_dir`. Output is written to a sibling temporary directory and moved
// into place only when every level succeeded.
inline PrecomputeReport precompute(const std::filesystem::path& trace_log, const std::filesystem::path& levels_dir,
                                   const std::filesystem::path& out_dir, const PrecomputeConfig& cfg) {
  namespace fs = std::filesystem;
  const auto levels = make_level_map(load_levels_dir(levels_dir));
  std::ifstream in(trace_log);
  if (!in) throw InvalidInput("cannot open trace log " + trace_log.string());
  IngestResult ingest = parse_trace_log(in, levels);

  PrecomputeReport report;
  report.accepted_traces = ingest.traces.size();
  report.excluded_traces = ingest.traces_excluded;
  report.warnings = ingest.warnings;

  fs::path target = out_dir;
  if (target.filename().empty()) target = target.parent_path();
  const fs::path tmp = target.parent_path() / (target.filename().string() + ".partial");
  fs::remove_all(tmp);
  try {
    fs::create_directories(tmp);
    auto buckets = segment_by_level(std::move(ingest.traces));
    auto index = ojson::array();
    for (const auto& [level_id, traces] : buckets) {
      const Level& level = levels.at(level_id);
      LevelDataset ds = [&] {
        try {
          return build_level_dataset(level, traces, cfg);
        } catch (const std::exception& e) {
          throw Error("level '" + level_id + "': " + e.what());
        }
      }();
      write_level_dataset(tmp / level_id, ds, cfg, ingest.latest_ts);
      index.push_back(ojson{{"level_id", level_id},
                            {"trace_count", ds.trace_count},
                            {"sequence_count", ds.sequences.size()}});
      report.level_ids.push_back(level_id);
    }
    write_json(tmp / "index.json", ojson{{"tool_version", tool_version}, {"levels", index}});
    write_json(tmp / "ingest-report.json", ojson{{"lines_read", ingest.lines_read},
                                                 {"traces_seen", ingest.traces_seen},
                                                 {"traces_accepted", report.accepted_traces},
                                                 {"traces_excluded", report.excluded_traces},
                                                 {"warnings", warnings_to_json(report.warnings)}});
    fs::remove_all(target);
    fs::rename(tmp, target);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(tmp, ec);
    throw;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Loading

struct LoadedLevel {
  Level level;
  std::vector<UniqueSequence> sequences;
  StateGraph graph;  // rebuilt from sequences; ids match the stored document
  nlohmann::json state_graph_doc;
  nlohmann::json sequence_graph_doc;
  nlohmann::json meta;
  std::size_t trace_count = 0;
};

inline nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw InvalidInput(path.string() + " is not valid JSON");
  return j;
}

inline LoadedLevel load_level_dataset(const std::filesystem::path& dir) {
  Level level = load_level(dir / "level.json");
  auto sequences = sequences_from_json(level, read_json(dir / "sequences.json"));
  StateGraph graph = build_state_graph(level, sequences);
  auto sg = read_json(dir / "state-graph.json");
  if (sg.at("nodes").size() != graph.nodes.size() || sg.at("edges").size() != graph.edges.size())
    throw InvalidInput(dir.string() + ": state graph does not match sequences");
  auto meta = read_json(dir / "meta.json");
  const std::size_t traces = meta.at("trace_count").get<std::size_t>();
  return LoadedLevel{std::move(level), std::move(sequences), std::move(graph), std::move(sg),
                     read_json(dir / "sequence-graph.json"), std::move(meta), traces};
}

inline std::map<std::string, LoadedLevel> load_dataset(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw NotFound("dataset directory not found: " + dir.string());
  if (!std::filesystem::exists(dir / "index.json")) throw NotFound("dataset index missing: " + (dir / "index.json").string());
  const auto index = read_json(dir / "index.json");
  std::map<std::string, LoadedLevel> out;
  for (const auto& entry : index.at("levels")) {
    const auto id = entry.at("level_id").get<std::string>();
    out.emplace(id, load_level_dataset(dir / id));
  }
  return out;
}

}  // namespace glyph
