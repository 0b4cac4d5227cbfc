#pragma once

// HTTP API over a precomputed dataset directory.
//
//   GET  /api/levels
//   GET  /api/levels/{id}/state-graph
//   GET  /api/levels/{id}/sequence-graph[?matrix=1]
//   GET  /api/levels/{id}/sequences?top=K | kth=K | users=a,b | seqs=1,2
//   GET  /api/levels/{id}/info
//   POST /api/levels/{id}/pins      {"node_id", "x", "y", "view"}
//   POST /api/levels/{id}/relayout  {"view"}
//
// Pins and re-layouts live in a per-client session keyed by the
// X-Glyph-Session header (or ?session=). The dataset itself is read-only.

#include <chrono>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <httplib.h>
#include <json.hpp>

#include "glyph/dataset.hpp"
#include "glyph/errors.hpp"
#include "glyph/layout.hpp"
#include "glyph/query.hpp"

namespace glyph {

struct ServiceOptions {
  std::chrono::seconds session_ttl{3600};
  std::filesystem::path static_dir;  // optional UI bundle served at /
};

inline constexpr const char* session_header = "X-Glyph-Session";

inline nlohmann::json query_result_to_json(const QueryResult& r) {
  nlohmann::json j;
  auto sels = nlohmann::json::array();
  for (const auto& s : r.selections) {
    sels.push_back({{"sequence_id", s.sequence_id},
                    {"color_index", s.color_index},
                    {"popularity", s.popularity},
                    {"completed", s.completed},
                    {"raw_text", s.raw_text},
                    {"condensed_text", s.condensed_text},
                    {"highlight", {{"node_ids", s.highlight.node_ids}, {"edge_ids", s.highlight.edge_ids}}},
                    {"member_player_ids", s.member_player_ids}});
  }
  j["selections"] = sels;
  j["users"] = r.users;
  j["notes"] = r.notes;
  return j;
}

class Service {
 public:
  explicit Service(const std::filesystem::path& dataset_dir, ServiceOptions opts = {})
      : levels_(load_dataset(dataset_dir)), opts_(std::move(opts)) {
    if (!opts_.static_dir.empty() && !server_.set_mount_point("/", opts_.static_dir.string()))
      throw NotFound("static directory not found: " + opts_.static_dir.string());
    routes();
  }

  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  httplib::Server& server() { return server_; }

  // Binds to an ephemeral port and returns it; follow with listen_after_bind().
  int bind_any_port(const std::string& host) { return server_.bind_to_any_port(host); }
  bool bind(const std::string& host, int port) { return server_.bind_to_port(host, port); }
  bool listen_after_bind() { return server_.listen_after_bind(); }
  void stop() { server_.stop(); }
  void wait_until_ready() { server_.wait_until_ready(); }

  std::size_t session_count() {
    std::lock_guard lock(sessions_mu_);
    return sessions_.size();
  }

 private:
  using Clock = std::chrono::steady_clock;

  struct ViewOverrides {
    Pins pins;
    std::optional<std::vector<Point>> positions;
  };
  struct Session {
    std::map<std::string, std::map<std::string, ViewOverrides>> views;  // level -> view -> overrides
    Clock::time_point last_seen;
  };

  static void send_json(httplib::Response& res, const nlohmann::json& j, int status = 200) {
    res.status = status;
    res.set_content(j.dump(), "application/json");
  }

  static void send_error(httplib::Response& res, int status, const std::string& msg) {
    send_json(res, nlohmann::json{{"error", msg}}, status);
  }

  const LoadedLevel* find_level(const httplib::Request& req, httplib::Response& res) const {
    const auto& id = req.path_params.at("id");
    auto it = levels_.find(id);
    if (it == levels_.end()) {
      send_error(res, 404, "unknown level '" + id + "'");
      return nullptr;
    }
    return &it->second;
  }

  static std::string session_token(const httplib::Request& req) {
    if (req.has_header(session_header)) return req.get_header_value(session_header);
    if (req.has_param("session")) return req.get_param_value("session");
    return {};
  }

  static bool valid_view(const std::string& v) { return v == "state" || v == "sequence"; }

  void expire_sessions_locked(Clock::time_point now) {
    for (auto it = sessions_.begin(); it != sessions_.end();)
      it = now - it->second.last_seen > opts_.session_ttl ? sessions_.erase(it) : std::next(it);
  }

  // Copy of the session's overrides for one level view, if any.
  std::optional<ViewOverrides> overrides(const std::string& token, const std::string& level, const std::string& view) {
    if (token.empty()) return std::nullopt;
    std::lock_guard lock(sessions_mu_);
    const auto now = Clock::now();
    expire_sessions_locked(now);
    auto it = sessions_.find(token);
    if (it == sessions_.end()) return std::nullopt;
    it->second.last_seen = now;
    auto l = it->second.views.find(level);
    if (l == it->second.views.end()) return std::nullopt;
    auto v = l->second.find(view);
    if (v == l->second.end()) return std::nullopt;
    return v->second;
  }

  static void apply_overrides(nlohmann::json& nodes, const ViewOverrides& ov) {
    if (ov.positions)
      for (std::size_t i = 0; i < nodes.size() && i < ov.positions->size(); ++i) {
        nodes[i]["x"] = (*ov.positions)[i].x;
        nodes[i]["y"] = (*ov.positions)[i].y;
      }
    for (const auto& [id, p] : ov.pins) {
      if (id >= nodes.size()) continue;
      nodes[id]["x"] = p.x;
      nodes[id]["y"] = p.y;
      nodes[id]["pinned"] = true;
    }
  }

  nlohmann::json state_view(const LoadedLevel& lvl, const std::string& token) {
    nlohmann::json doc = lvl.state_graph_doc;
    if (auto ov = overrides(token, lvl.level.id(), "state")) apply_overrides(doc["nodes"], *ov);
    return doc;
  }

  nlohmann::json sequence_view(const LoadedLevel& lvl, const std::string& token, bool with_matrix) {
    nlohmann::json doc = lvl.sequence_graph_doc;
    if (!with_matrix) {
      doc.erase("matrix");
      doc.erase("big");
    }
    if (auto ov = overrides(token, lvl.level.id(), "sequence")) apply_overrides(doc["nodes"], *ov);
    return doc;
  }

  static LayoutConfig layout_config_from_meta(const nlohmann::json& meta, const char* which) {
    const auto& j = meta.at("config").at(which);
    LayoutConfig c;
    c.seed = j.at("seed").get<std::uint64_t>();
    c.iterations = j.at("iterations").get<int>();
    c.width = j.at("width").get<double>();
    c.height = j.at("height").get<double>();
    c.initial_step = j.at("initial_step").get<double>();
    c.cooling = j.at("cooling").get<double>();
    c.algorithm = j.at("algorithm").get<std::string>() == "stress_mds" ? LayoutAlgorithm::stress_mds
                                                                          : LayoutAlgorithm::force_directed;
    c.convergence_epsilon = j.at("convergence_epsilon").get<double>();
    return c;
  }

  void routes() {
    server_.Get("/api/levels", [this](const httplib::Request&, httplib::Response& res) {
      auto arr = nlohmann::json::array();
      for (const auto& [id, lvl] : levels_)
        arr.push_back({{"level_id", id}, {"trace_count", lvl.trace_count}, {"sequence_count", lvl.sequences.size()}});
      send_json(res, {{"levels", arr}});
    });

    server_.Get("/api/levels/:id/state-graph", [this](const httplib::Request& req, httplib::Response& res) {
      if (const auto* lvl = find_level(req, res)) send_json(res, state_view(*lvl, session_token(req)));
    });

    server_.Get("/api/levels/:id/sequence-graph", [this](const httplib::Request& req, httplib::Response& res) {
      if (const auto* lvl = find_level(req, res))
        send_json(res, sequence_view(*lvl, session_token(req), req.get_param_value("matrix") == "1"));
    });

    server_.Get("/api/levels/:id/info", [this](const httplib::Request& req, httplib::Response& res) {
      if (const auto* lvl = find_level(req, res))
        send_json(res, {{"level_id", lvl->level.id()}, {"text", level_info_text(lvl->level)}});
    });

    server_.Get("/api/levels/:id/sequences", [this](const httplib::Request& req, httplib::Response& res) {
      const auto* lvl = find_level(req, res);
      if (!lvl) return;
      std::optional<std::string> text;
      for (const char* name : {"top", "kth", "users", "seqs"}) {
        if (!req.has_param(name)) continue;
        if (text) return send_error(res, 400, "give exactly one of top, kth, users, seqs");
        text = std::string(name) + "=" + req.get_param_value(name);
      }
      if (!text) return send_error(res, 400, "give exactly one of top, kth, users, seqs");
      try {
        auto result = run_query(lvl->level, lvl->sequences, lvl->graph, parse_query(*text));
        auto j = query_result_to_json(result);
        j["level_id"] = lvl->level.id();
        j["query"] = *text;
        send_json(res, j);
      } catch (const NotFound& e) {
        send_error(res, 404, e.what());
      } catch (const InvalidInput& e) {
        send_error(res, 400, e.what());
      }
    });

    server_.Post("/api/levels/:id/pins", [this](const httplib::Request& req, httplib::Response& res) {
      const auto* lvl = find_level(req, res);
      if (!lvl) return;
      const auto token = session_token(req);
      if (token.empty()) return send_error(res, 400, std::string("missing session token (") + session_header + ")");
      auto body = nlohmann::json::parse(req.body, nullptr, false);
      if (body.is_discarded() || !body.is_object() || !body.contains("node_id") || !body.contains("x") ||
          !body.contains("y") || !body["node_id"].is_number_unsigned() || !body["x"].is_number() ||
          !body["y"].is_number())
        return send_error(res, 400, "pin body must be {\"node_id\", \"x\", \"y\", \"view\"}");
      const std::string view = body.value("view", "state");
      if (!valid_view(view)) return send_error(res, 400, "view must be \"state\" or \"sequence\"");
      const auto node = body["node_id"].get<std::size_t>();
      const std::size_t count =
          view == "state" ? lvl->graph.nodes.size() : lvl->sequences.size();
      if (node >= count) return send_error(res, 404, "no node " + std::to_string(node) + " in " + view + " view");
      const Point p{body["x"].get<double>(), body["y"].get<double>()};
      nlohmann::json pins = nlohmann::json::array();
      {
        std::lock_guard lock(sessions_mu_);
        const auto now = Clock::now();
        expire_sessions_locked(now);
        auto& session = sessions_[token];
        session.last_seen = now;
        auto& ov = session.views[lvl->level.id()][view];
        ov.pins[node] = p;
        for (const auto& [id, at] : ov.pins) pins.push_back({{"node_id", id}, {"x", at.x}, {"y", at.y}});
      }
      send_json(res, {{"level_id", lvl->level.id()}, {"view", view}, {"pins", pins}});
    });

    server_.Post("/api/levels/:id/relayout", [this](const httplib::Request& req, httplib::Response& res) {
      const auto* lvl = find_level(req, res);
      if (!lvl) return;
      const auto token = session_token(req);
      if (token.empty()) return send_error(res, 400, std::string("missing session token (") + session_header + ")");
      auto body = nlohmann::json::parse(req.body.empty() ? "{}" : req.body, nullptr, false);
      const std::string view = body.is_object() ? body.value("view", "state") : "";
      if (!valid_view(view)) return send_error(res, 400, "view must be \"state\" or \"sequence\"");
      Pins pins;
      if (auto ov = overrides(token, lvl->level.id(), view)) pins = ov->pins;
      LayoutResult layout;
      if (view == "state") {
        layout = layout_state_graph(lvl->graph, layout_config_from_meta(lvl->meta, "state_layout"), pins);
      } else {
        layout = layout_sequence_graph(matrix_from_json(lvl->sequence_graph_doc),
                                       layout_config_from_meta(lvl->meta, "sequence_layout"), pins);
      }
      {
        std::lock_guard lock(sessions_mu_);
        auto& session = sessions_[token];
        session.last_seen = Clock::now();
        session.views[lvl->level.id()][view].positions = layout.positions;
      }
      send_json(res, view == "state" ? state_view(*lvl, token) : sequence_view(*lvl, token, false));
    });
  }

  const std::map<std::string, LoadedLevel> levels_;
  ServiceOptions opts_;
  httplib::Server server_;
  std::mutex sessions_mu_;
  std::map<std::string, Session> sessions_;
};

}  // namespace glyph
