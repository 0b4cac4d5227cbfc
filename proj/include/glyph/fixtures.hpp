#pragma once

// Built-in levels and a hand-authored strategy corpus used by tests, demos
// and the shipped data/ directory.

#include <string>
#include <vector>

#include "glyph/game.hpp"
#include "glyph/trace.hpp"

namespace glyph::fixtures {

// Stage 2 / level 3 demo: cogs 3, 8, 13 and keys at pegs 19 and 51.
// wheel_size and the gem (peg 27, +5) are stand-ins; adjust per deployment.
inline LevelConfig demo_level_config() {
  LevelConfig c;
  c.level_id = "fig3";
  c.wheel_size = 65;
  c.cogs = {3, 8, 13};
  c.keys = {19, 51};
  c.bonuses = {Bonus{27, 5}};
  c.start_position = 0;
  return c;
}

// 12-peg wheel, one single-tooth cog, one key on peg 3.
inline LevelConfig tiny_level_config() {
  LevelConfig c;
  c.level_id = "T1";
  c.wheel_size = 12;
  c.cogs = {1};
  c.keys = {3};
  return c;
}

// 24-peg wheel with one key at 19 and two bonuses just clockwise of start.
inline LevelConfig strategy_level_config() {
  LevelConfig c;
  c.level_id = "strategies";
  c.wheel_size = 24;
  c.cogs = {1};
  c.keys = {19};
  c.bonuses = {Bonus{1, 2}, Bonus{2, 2}};
  return c;
}

inline MoveAction cw(int turns, std::size_t cog = 0) { return MoveAction{cog, Direction::clockwise, turns}; }
inline MoveAction ccw(int turns, std::size_t cog = 0) { return MoveAction{cog, Direction::counter_clockwise, turns}; }

// The four strategies on strategy_level_config(), in popularity order.
inline std::vector<std::vector<MoveAction>> strategy_move_lists() {
  return {
      {ccw(5)},                                  // straight to the key
      {ccw(1), ccw(1), ccw(1), ccw(1), ccw(1)},  // same path, one step at a time
      {cw(1), ccw(5), ccw(1)},                   // one bonus, then the key
      {cw(2), ccw(5), ccw(2)},                   // both bonuses, then the key
  };
}

// 50 / 20 / 5 / 2 traces of the four strategies. The first trace of
// strategy 0 belongs to player 9882, strategy 1 to 3173, strategy 3 to 3794.
inline std::vector<PlayTrace> strategy_corpus(const Level& level) {
  const std::vector<std::size_t> freq{50, 20, 5, 2};
  const std::vector<std::string> named{"9882", "3173", "", "3794"};
  const auto lists = strategy_move_lists();
  std::vector<PlayTrace> traces;
  int next_player = 5000;
  int session = 0;
  for (std::size_t s = 0; s < lists.size(); ++s) {
    for (std::size_t i = 0; i < freq[s]; ++i) {
      std::string player = (i == 0 && !named[s].empty()) ? named[s] : std::to_string(next_player++);
      traces.push_back(make_trace(level, player, "s" + std::to_string(session++), lists[s]));
    }
  }
  return traces;
}

}  // namespace glyph::fixtures
