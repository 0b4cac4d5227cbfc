#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "glyph/game.hpp"

namespace glyph {

// One play session of one level, with states derived by replay.
struct PlayTrace {
  std::string trace_id;
  std::string player_id;
  std::string session_id;
  std::string level_id;
  std::vector<MoveAction> moves;
  std::vector<GameState> states;  // moves.size() + 1 entries
  bool completed = false;
};

inline std::string make_trace_id(const std::string& level_id, const std::string& player_id,
                                 const std::string& session_id) {
  return level_id + "/" + player_id + "/" + session_id;
}

inline PlayTrace make_trace(const Level& level, std::string player_id, std::string session_id,
                            std::vector<MoveAction> moves) {
  PlayTrace t;
  t.trace_id = make_trace_id(level.id(), player_id, session_id);
  t.player_id = std::move(player_id);
  t.session_id = std::move(session_id);
  t.level_id = level.id();
  t.states = replay(level, moves);
  t.moves = std::move(moves);
  t.completed = is_end_state(level, t.states.back());
  return t;
}

// Canonical move-list encoding; the deduplication key.
inline std::string move_list_key(const std::vector<MoveAction>& moves) {
  std::string key;
  for (std::size_t i = 0; i < moves.size(); ++i) {
    if (i) key += ',';
    key += action_label(moves[i]);
  }
  return key;
}

inline nlohmann::ordered_json move_to_json(const MoveAction& m) {
  nlohmann::ordered_json j;
  j["cog"] = m.cog_index;
  j["dir"] = direction_code(m.direction);
  j["turns"] = m.turns;
  return j;
}

template <class Json>
MoveAction move_from_json(const Json& j) {
  if (!j.is_object()) throw InvalidInput("move must be an object");
  const auto& cog = j.at("cog");
  const auto& turns = j.at("turns");
  if (!cog.is_number_integer() || cog.template get<long long>() < 0) throw InvalidInput("move.cog must be a non-negative integer");
  if (!turns.is_number_integer()) throw InvalidInput("move.turns must be an integer");
  if (!j.at("dir").is_string()) throw InvalidInput("move.dir must be a string");
  return MoveAction{cog.template get<std::size_t>(), parse_direction_code(j.at("dir").template get<std::string>()),
                    turns.template get<int>()};
}

// Writes `traces` in the line-delimited telemetry format, one event per line.
// The last event of each trace carries the client-recorded "completed" flag.
// `base_ts` is the timestamp of the first event; events are 1.5 s apart and
// traces start a minute apart.
inline void write_trace_log(std::ostream& out, const std::vector<PlayTrace>& traces,
                            std::int64_t base_ts = 1'700'000'000'000) {
  for (std::size_t t = 0; t < traces.size(); ++t) {
    const auto& trace = traces[t];
    for (std::size_t i = 0; i < trace.moves.size(); ++i) {
      nlohmann::ordered_json j;
      j["player_id"] = trace.player_id;
      j["session_id"] = trace.session_id;
      j["level_id"] = trace.level_id;
      j["seq_no"] = i;
      j["ts"] = base_ts + static_cast<std::int64_t>(t) * 60'000 + static_cast<std::int64_t>(i) * 1'500;
      j["move"] = move_to_json(trace.moves[i]);
      if (i + 1 == trace.moves.size()) j["completed"] = trace.completed;
      out << j.dump() << '\n';
    }
  }
}

}  // namespace glyph
