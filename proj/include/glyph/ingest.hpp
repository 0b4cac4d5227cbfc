#pragma once

// Telemetry log ingestion: parse, group into per-session traces, validate by
// replay, segment by level and deduplicate into popularity-ranked sequences.

#include <algorithm>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "glyph/errors.hpp"
#include "glyph/game.hpp"
#include "glyph/trace.hpp"

namespace glyph {

struct IngestWarning {
  std::size_t line = 0;  // 1-based; 0 when the warning concerns a whole trace
  std::string trace_id;  // empty when the line could not be attributed
  std::string message;
};

struct IngestResult {
  std::vector<PlayTrace> traces;  // sorted by trace_id
  std::vector<IngestWarning> warnings;
  std::size_t lines_read = 0;
  std::size_t traces_seen = 0;      // distinct (player, session, level) groups
  std::size_t traces_excluded = 0;  // traces_seen - traces.size()
  std::optional<std::int64_t> latest_ts;  // largest "ts" on any well-formed line
};

struct UniqueSequence {
  int sequence_id = 0;  // popularity rank, 0 = most popular
  std::string level_id;
  std::string key;
  std::vector<MoveAction> moves;
  std::vector<GameState> states;
  std::size_t popularity = 0;
  std::vector<std::string> member_player_ids;  // distinct, in trace order
  std::vector<std::string> member_trace_ids;
  bool completed = false;
};

using LevelMap = std::map<std::string, Level, std::less<>>;

inline LevelMap make_level_map(const std::vector<Level>& levels) {
  LevelMap map;
  for (const auto& l : levels) map.emplace(l.id(), l);
  return map;
}

namespace detail {

struct RawEvent {
  std::size_t line;
  std::int64_t seq_no;
  MoveAction move;
  std::optional<bool> completed;
  std::optional<int> marker;
};

struct RawTrace {
  std::string player_id, session_id, level_id;
  std::vector<RawEvent> events;
  bool unknown_level = false;
};

inline const nlohmann::json* field(const nlohmann::json& j, const char* name) {
  auto it = j.find(name);
  return it == j.end() ? nullptr : &*it;
}

}  // namespace detail

// Streams line-delimited JSON events from `in`. Malformed lines, unknown
// levels and traces that fail replay validation are reported as warnings and
// excluded; nothing is dropped silently.
inline IngestResult parse_trace_log(std::istream& in, const LevelMap& levels) {
  IngestResult result;
  std::map<std::tuple<std::string, std::string, std::string>, detail::RawTrace> groups;
  std::string line;
  std::size_t line_no = 0;
  auto warn = [&](std::size_t at, std::string trace, std::string msg) {
    result.warnings.push_back(IngestWarning{at, std::move(trace), std::move(msg)});
  };

  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++result.lines_read;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      warn(line_no, "", "malformed line: not a JSON object");
      continue;
    }
    const auto* player = detail::field(j, "player_id");
    const auto* session = detail::field(j, "session_id");
    const auto* level = detail::field(j, "level_id");
    const auto* seq = detail::field(j, "seq_no");
    const auto* move = detail::field(j, "move");
    if (!player || !player->is_string() || !session || !session->is_string() || !level || !level->is_string() ||
        !seq || !seq->is_number_integer() || !move) {
      warn(line_no, "", "malformed line: missing or mistyped header field");
      continue;
    }
    const auto* ts = detail::field(j, "ts");
    if (ts && !ts->is_number_integer()) {
      warn(line_no, "", "malformed line: ts must be an integer");
      continue;
    }
    detail::RawEvent ev{line_no, seq->get<std::int64_t>(), {}, std::nullopt, std::nullopt};
    try {
      ev.move = move_from_json(*move);
    } catch (const std::exception& e) {
      warn(line_no, "", std::string("malformed line: ") + e.what());
      continue;
    }
    if (const auto* c = detail::field(j, "completed")) {
      if (!c->is_boolean()) {
        warn(line_no, "", "malformed line: completed must be a boolean");
        continue;
      }
      ev.completed = c->get<bool>();
    }
    if (const auto* m = detail::field(j, "marker")) {
      if (!m->is_number_integer()) {
        warn(line_no, "", "malformed line: marker must be an integer");
        continue;
      }
      ev.marker = m->get<int>();
    }
    auto gkey = std::make_tuple(player->get<std::string>(), session->get<std::string>(), level->get<std::string>());
    auto [it, fresh] = groups.try_emplace(gkey);
    auto& raw = it->second;
    if (fresh) {
      raw.player_id = std::get<0>(gkey);
      raw.session_id = std::get<1>(gkey);
      raw.level_id = std::get<2>(gkey);
      raw.unknown_level = levels.find(raw.level_id) == levels.end();
    }
    if (raw.unknown_level) {
      warn(line_no, make_trace_id(raw.level_id, raw.player_id, raw.session_id),
           "unknown level '" + raw.level_id + "'");
      continue;
    }
    raw.events.push_back(ev);
    if (ts) result.latest_ts = std::max(result.latest_ts.value_or(ts->get<std::int64_t>()), ts->get<std::int64_t>());
  }

  result.traces_seen = groups.size();
  for (auto& [gkey, raw] : groups) {
    const std::string trace_id = make_trace_id(raw.level_id, raw.player_id, raw.session_id);
    if (raw.unknown_level) continue;
    const Level& level = levels.find(raw.level_id)->second;
    auto& evs = raw.events;
    std::stable_sort(evs.begin(), evs.end(), [](const auto& a, const auto& b) { return a.seq_no < b.seq_no; });
    auto reject = [&](std::size_t at, std::string msg) { warn(at, trace_id, std::move(msg)); };

    bool ok = true;
    for (std::size_t i = 1; i < evs.size() && ok; ++i)
      if (evs[i].seq_no == evs[i - 1].seq_no) {
        reject(evs[i].line, "duplicate seq_no " + std::to_string(evs[i].seq_no));
        ok = false;
      }
    PlayTrace trace;
    trace.trace_id = trace_id;
    trace.player_id = raw.player_id;
    trace.session_id = raw.session_id;
    trace.level_id = raw.level_id;
    trace.states.push_back(level.initial_state());
    for (std::size_t i = 0; i < evs.size() && ok; ++i) {
      const auto& ev = evs[i];
      if (!level.is_valid(ev.move)) {
        reject(ev.line, "invalid move " + action_label(ev.move) + " for level '" + level.id() + "'");
        ok = false;
        break;
      }
      if (is_end_state(level, trace.states.back())) {
        reject(ev.line, "move after level completion");
        ok = false;
        break;
      }
      GameState next = advance(level, trace.states.back(), ev.move);
      if (ev.marker && *ev.marker != next.marker) {
        reject(ev.line, "replay mismatch: recorded marker " + std::to_string(*ev.marker) + ", replay gives " +
                            std::to_string(next.marker));
        ok = false;
        break;
      }
      trace.moves.push_back(ev.move);
      trace.states.push_back(next);
    }
    if (!ok) continue;
    trace.completed = is_end_state(level, trace.states.back());
    if (evs.back().completed && *evs.back().completed != trace.completed) {
      reject(evs.back().line, std::string("replay mismatch: recorded completed=") +
                                  (*evs.back().completed ? "true" : "false") + ", replay gives " +
                                  (trace.completed ? "true" : "false"));
      continue;
    }
    result.traces.push_back(std::move(trace));
  }
  std::sort(result.traces.begin(), result.traces.end(),
            [](const PlayTrace& a, const PlayTrace& b) { return a.trace_id < b.trace_id; });
  result.traces_excluded = result.traces_seen - result.traces.size();
  return result;
}

inline std::map<std::string, std::vector<PlayTrace>> segment_by_level(std::vector<PlayTrace> traces) {
  std::map<std::string, std::vector<PlayTrace>> buckets;
  for (auto& t : traces) buckets[t.level_id].push_back(std::move(t));
  return buckets;
}

// Groups traces by identical move lists and ranks the groups by popularity
// (descending), ties broken by the smallest member trace_id.
inline std::vector<UniqueSequence> dedup_sequences(std::span<const PlayTrace> traces) {
  if (traces.empty()) return {};
  for (const auto& t : traces)
    if (t.level_id != traces.front().level_id)
      throw InvalidInput("dedup_sequences: traces from levels '" + traces.front().level_id + "' and '" + t.level_id +
                         "' mixed");

  std::vector<const PlayTrace*> ordered;
  ordered.reserve(traces.size());
  for (const auto& t : traces) ordered.push_back(&t);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const PlayTrace* a, const PlayTrace* b) { return a->trace_id < b->trace_id; });

  std::vector<UniqueSequence> groups;
  std::unordered_map<std::string, std::size_t> index;
  for (const PlayTrace* t : ordered) {
    std::string key = move_list_key(t->moves);
    auto [it, fresh] = index.try_emplace(key, groups.size());
    if (fresh) {
      UniqueSequence u;
      u.level_id = t->level_id;
      u.key = std::move(key);
      u.moves = t->moves;
      u.states = t->states;
      u.completed = t->completed;
      groups.push_back(std::move(u));
    }
    auto& g = groups[it->second];
    ++g.popularity;
    g.member_trace_ids.push_back(t->trace_id);
    if (std::find(g.member_player_ids.begin(), g.member_player_ids.end(), t->player_id) == g.member_player_ids.end())
      g.member_player_ids.push_back(t->player_id);
  }
  // groups are already in first-seen order, so a stable sort on popularity
  // leaves ties in first-seen order.
  std::stable_sort(groups.begin(), groups.end(),
                   [](const UniqueSequence& a, const UniqueSequence& b) { return a.popularity > b.popularity; });
  for (std::size_t i = 0; i < groups.size(); ++i) groups[i].sequence_id = static_cast<int>(i);
  return groups;
}

}  // namespace glyph
