#pragma once

// Population state graph: one node per game state, one edge per distinct
// (from, to, action), counts weighted by sequence popularity.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "glyph/errors.hpp"
#include "glyph/game.hpp"
#include "glyph/ingest.hpp"

namespace glyph {

enum class NodeClass { start, end, mid };

inline std::string_view node_class_name(NodeClass c) {
  switch (c) {
    case NodeClass::start: return "start";
    case NodeClass::end: return "end";
    case NodeClass::mid: return "mid";
  }
  return "?";
}

struct StateNode {
  std::size_t node_id = 0;
  GameState state;
  std::uint64_t visits = 0;
  std::uint64_t starts = 0;
  std::uint64_t terminations = 0;
  NodeClass node_class = NodeClass::mid;
};

struct ActionEdge {
  std::size_t edge_id = 0;
  std::size_t from_node = 0;
  std::size_t to_node = 0;
  MoveAction action;
  std::string action_label;
  std::uint64_t traversals = 0;
};

struct SequencePath {
  int sequence_id = 0;
  std::vector<std::size_t> node_ids;
  std::vector<std::size_t> edge_ids;  // node_ids.size() - 1 entries
};

struct StateGraph {
  std::string level_id;
  std::vector<StateNode> nodes;  // indexed by node_id
  std::vector<ActionEdge> edges;  // indexed by edge_id
  std::map<int, SequencePath> paths;  // keyed by sequence_id
};

inline NodeClass classify(const Level& level, const GameState& s) {
  if (s == level.initial_state()) return NodeClass::start;
  if (is_end_state(level, s)) return NodeClass::end;
  return NodeClass::mid;
}

// Node and edge ids follow first appearance when walking sequences in rank
// order, so the numbering is stable for a given sequence list.
inline StateGraph build_state_graph(const Level& level, std::span<const UniqueSequence> sequences) {
  StateGraph g;
  g.level_id = level.id();
  std::unordered_map<std::uint64_t, std::size_t> node_of;
  std::map<std::tuple<std::size_t, std::size_t, std::string>, std::size_t> edge_of;

  auto node_for = [&](const GameState& s) {
    auto [it, fresh] = node_of.try_emplace(level.state_index(s), g.nodes.size());
    if (fresh) g.nodes.push_back(StateNode{g.nodes.size(), s, 0, 0, 0, classify(level, s)});
    return it->second;
  };

  for (const auto& seq : sequences) {
    if (seq.level_id != level.id())
      throw InvalidInput("sequence " + std::to_string(seq.sequence_id) + " belongs to level '" + seq.level_id +
                         "', not '" + level.id() + "'");
    if (seq.states.size() != seq.moves.size() + 1)
      throw InvalidInput("sequence " + std::to_string(seq.sequence_id) + " has inconsistent state list");
    const std::uint64_t p = seq.popularity;
    SequencePath path{seq.sequence_id, {}, {}};
    for (std::size_t i = 0; i < seq.states.size(); ++i) {
      const std::size_t n = node_for(seq.states[i]);
      g.nodes[n].visits += p;
      if (i == 0) g.nodes[n].starts += p;
      if (i + 1 == seq.states.size()) g.nodes[n].terminations += p;
      if (i > 0) {
        const std::size_t from = path.node_ids.back();
        std::string label = action_label(seq.moves[i - 1]);
        auto [it, fresh] = edge_of.try_emplace(std::make_tuple(from, n, label), g.edges.size());
        if (fresh) g.edges.push_back(ActionEdge{g.edges.size(), from, n, seq.moves[i - 1], label, 0});
        g.edges[it->second].traversals += p;
        path.edge_ids.push_back(it->second);
      }
      path.node_ids.push_back(n);
    }
    g.paths[seq.sequence_id] = std::move(path);
  }

  for (const auto& e : g.edges)
    if (g.nodes[e.from_node].node_class == NodeClass::end)
      throw InvalidInput("state graph for level '" + level.id() + "' has a move leaving end state " +
                         level.encode(g.nodes[e.from_node].state));
  return g;
}

struct FlowViolation {
  std::size_t node_id = 0;
  std::uint64_t inflow = 0;   // starts + incoming traversals
  std::uint64_t outflow = 0;  // terminations + outgoing traversals
};

inline std::vector<FlowViolation> node_flow_check(const StateGraph& g) {
  std::vector<std::uint64_t> in(g.nodes.size()), out(g.nodes.size());
  for (const auto& n : g.nodes) {
    in[n.node_id] += n.starts;
    out[n.node_id] += n.terminations;
  }
  for (const auto& e : g.edges) {
    in[e.to_node] += e.traversals;
    out[e.from_node] += e.traversals;
  }
  std::vector<FlowViolation> bad;
  for (std::size_t i = 0; i < g.nodes.size(); ++i)
    if (in[i] != out[i]) bad.push_back(FlowViolation{i, in[i], out[i]});
  return bad;
}

}  // namespace glyph
