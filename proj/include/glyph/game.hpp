#pragma once

// Wheel-and-cog puzzle mechanics: levels, states, moves and the successor
// function. Everything here is a pure function of its arguments.

#include <algorithm>
#include <bit>
#include <cctype>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include <json.hpp>

#include "glyph/errors.hpp"

namespace glyph {

inline int wrap_peg(long long peg, int wheel_size) {
  long long r = peg % wheel_size;
  return static_cast<int>(r < 0 ? r + wheel_size : r);
}

struct Bonus {
  int position = 0;
  int points = 0;
  friend bool operator==(const Bonus&, const Bonus&) = default;
};

// Raw level description, as read from a level file. Use Level for anything
// that needs the invariants to hold.
struct LevelConfig {
  std::string level_id;
  int wheel_size = 0;
  std::vector<int> cogs;
  std::vector<int> keys;
  std::vector<Bonus> bonuses;
  int start_position = 0;
  int max_turns_per_move = 5;
  int key_points = 1;
  friend bool operator==(const LevelConfig&, const LevelConfig&) = default;
};

enum class ItemKind { key, bonus };

struct Item {
  std::string id;  // "key@<pos>" or "bonus@<pos>"
  ItemKind kind = ItemKind::key;
  int position = 0;
  int points = 0;
};

// Set of collected items, one bit per level item index.
class ItemSet {
 public:
  constexpr ItemSet() = default;
  constexpr explicit ItemSet(std::uint64_t bits) : bits_(bits) {}

  constexpr bool contains(std::size_t item) const { return (bits_ >> item) & 1u; }
  constexpr void insert(std::size_t item) { bits_ |= std::uint64_t{1} << item; }
  constexpr bool is_subset_of(ItemSet other) const { return (bits_ & ~other.bits_) == 0; }
  constexpr bool empty() const { return bits_ == 0; }
  constexpr std::size_t size() const { return static_cast<std::size_t>(std::popcount(bits_)); }
  constexpr std::uint64_t bits() const { return bits_; }

  friend constexpr bool operator==(ItemSet, ItemSet) = default;

 private:
  std::uint64_t bits_ = 0;
};

struct GameState {
  int marker = 0;
  ItemSet collected;
  friend constexpr bool operator==(const GameState&, const GameState&) = default;
};

enum class Direction { clockwise, counter_clockwise };

struct MoveAction {
  std::size_t cog_index = 0;
  Direction direction = Direction::clockwise;
  int turns = 1;
  friend bool operator==(const MoveAction&, const MoveAction&) = default;
};

inline std::string_view direction_code(Direction d) {
  return d == Direction::clockwise ? "cw" : "ccw";
}

inline std::string_view direction_name(Direction d) {
  return d == Direction::clockwise ? "clockwise" : "counter-clockwise";
}

inline Direction parse_direction_code(std::string_view code) {
  if (code == "cw") return Direction::clockwise;
  if (code == "ccw") return Direction::counter_clockwise;
  throw InvalidInput("direction must be \"cw\" or \"ccw\", got \"" + std::string(code) + "\"");
}

// Canonical action label, e.g. "cog0:cw:3". Used as edge label and dedup key.
inline std::string action_label(const MoveAction& a) {
  return "cog" + std::to_string(a.cog_index) + ":" + std::string(direction_code(a.direction)) +
         ":" + std::to_string(a.turns);
}

// A validated level with precomputed item lookup tables.
class Level {
 public:
  static constexpr std::size_t max_items = 32;

  explicit Level(LevelConfig config) : config_(std::move(config)) {
    const auto& c = config_;
    if (c.level_id.empty()) throw InvalidInput("level_id must not be empty");
    for (char ch : c.level_id)
      if (!(std::isalnum(static_cast<unsigned char>(ch)) || ch == '_' || ch == '-' || ch == '.'))
        throw InvalidInput("level_id '" + c.level_id + "' may only use letters, digits, '_', '-' and '.'");
    auto fail = [&](const std::string& what) {
      throw InvalidInput("level '" + c.level_id + "': " + what);
    };
    if (c.wheel_size <= 0) fail("wheel_size must be positive");
    if (c.cogs.empty()) fail("cogs must not be empty");
    for (int teeth : c.cogs)
      if (teeth < 1) fail("every cog needs at least one tooth");
    if (c.keys.empty()) fail("a level needs at least one key");
    if (c.max_turns_per_move < 1) fail("max_turns_per_move must be positive");
    if (c.start_position < 0 || c.start_position >= c.wheel_size) fail("start_position out of range");
    if (c.keys.size() + c.bonuses.size() > max_items) fail("too many items (limit 32)");

    peg_item_.assign(static_cast<std::size_t>(c.wheel_size), -1);
    auto add = [&](ItemKind kind, int pos, int points) {
      if (pos < 0 || pos >= c.wheel_size) fail("item position " + std::to_string(pos) + " out of range");
      auto& slot = peg_item_[static_cast<std::size_t>(pos)];
      if (slot != -1) fail("two items share peg " + std::to_string(pos));
      slot = static_cast<int>(items_.size());
      std::string prefix = kind == ItemKind::key ? "key@" : "bonus@";
      items_.push_back(Item{prefix + std::to_string(pos), kind, pos, points});
    };
    for (int k : c.keys) {
      key_mask_.insert(items_.size());
      add(ItemKind::key, k, c.key_points);
    }
    for (const auto& b : c.bonuses) add(ItemKind::bonus, b.position, b.points);
  }

  const LevelConfig& config() const { return config_; }
  const std::string& id() const { return config_.level_id; }
  int wheel_size() const { return config_.wheel_size; }
  const std::vector<int>& cogs() const { return config_.cogs; }
  int max_turns() const { return config_.max_turns_per_move; }

  std::size_t item_count() const { return items_.size(); }
  const std::vector<Item>& items() const { return items_; }
  const Item& item(std::size_t i) const { return items_.at(i); }
  ItemSet key_mask() const { return key_mask_; }
  ItemSet all_items() const {
    return ItemSet((std::uint64_t{1} << items_.size()) - 1);
  }

  // Index of the item on `peg`, or -1.
  int item_at(int peg) const { return peg_item_[static_cast<std::size_t>(peg)]; }

  std::optional<std::size_t> find_item(std::string_view id) const {
    for (std::size_t i = 0; i < items_.size(); ++i)
      if (items_[i].id == id) return i;
    return std::nullopt;
  }

  GameState initial_state() const { return GameState{config_.start_position, ItemSet{}}; }

  bool is_valid(const GameState& s) const {
    return s.marker >= 0 && s.marker < config_.wheel_size && s.collected.is_subset_of(all_items());
  }

  bool is_valid(const MoveAction& a) const {
    return a.cog_index < config_.cogs.size() && a.turns >= 1 && a.turns <= config_.max_turns_per_move;
  }

  // Dense index over marker x item subsets; unique per state within a level.
  std::uint64_t state_index(const GameState& s) const {
    return s.collected.bits() * static_cast<std::uint64_t>(config_.wheel_size) +
           static_cast<std::uint64_t>(s.marker);
  }

  std::vector<std::string> collected_ids(ItemSet set) const {
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < items_.size(); ++i)
      if (set.contains(i)) ids.push_back(items_[i].id);
    std::sort(ids.begin(), ids.end());
    return ids;
  }

  // Canonical encoding: marker plus sorted item identifiers, e.g. "19|bonus@27,key@19".
  std::string encode(const GameState& s) const {
    std::string out = std::to_string(s.marker) + "|";
    bool first = true;
    for (const auto& id : collected_ids(s.collected)) {
      if (!first) out += ',';
      out += id;
      first = false;
    }
    return out;
  }

 private:
  LevelConfig config_;
  std::vector<Item> items_;
  std::vector<int> peg_item_;
  ItemSet key_mask_;
};

struct MoveOutcome {
  GameState state;
  std::vector<std::size_t> collected;  // item indices in stop order
};

inline void require_valid(const Level& level, const GameState& s) {
  if (!level.is_valid(s))
    throw InvalidInput("state (marker " + std::to_string(s.marker) + ") is not valid for level '" +
                       level.id() + "'");
}

inline void require_valid(const Level& level, const MoveAction& a) {
  if (a.cog_index >= level.cogs().size())
    throw InvalidInput("cog index " + std::to_string(a.cog_index) + " out of range for level '" +
                       level.id() + "'");
  if (a.turns < 1 || a.turns > level.max_turns())
    throw InvalidInput("turns " + std::to_string(a.turns) + " outside [1, " +
                       std::to_string(level.max_turns()) + "]");
}

// Successor without validation or item reporting; the hot path for searches.
// Items are picked up where the marker stops after each single cog rotation.
inline GameState advance(const Level& level, GameState s, const MoveAction& a) {
  const int teeth = level.cogs()[a.cog_index];
  const int step = a.direction == Direction::clockwise ? teeth : -teeth;
  for (int t = 0; t < a.turns; ++t) {
    s.marker = wrap_peg(static_cast<long long>(s.marker) + step, level.wheel_size());
    if (int item = level.item_at(s.marker); item >= 0) s.collected.insert(static_cast<std::size_t>(item));
  }
  return s;
}

inline MoveOutcome apply_move(const Level& level, const GameState& s, const MoveAction& a) {
  require_valid(level, s);
  require_valid(level, a);
  MoveOutcome out{s, {}};
  const int teeth = level.cogs()[a.cog_index];
  const int step = a.direction == Direction::clockwise ? teeth : -teeth;
  for (int t = 0; t < a.turns; ++t) {
    out.state.marker = wrap_peg(static_cast<long long>(out.state.marker) + step, level.wheel_size());
    int item = level.item_at(out.state.marker);
    if (item >= 0 && !out.state.collected.contains(static_cast<std::size_t>(item))) {
      out.state.collected.insert(static_cast<std::size_t>(item));
      out.collected.push_back(static_cast<std::size_t>(item));
    }
  }
  return out;
}

// Ordered by (cog index, direction, turns).
inline std::vector<MoveAction> enumerate_moves(const Level& level) {
  std::vector<MoveAction> moves;
  moves.reserve(level.cogs().size() * 2 * static_cast<std::size_t>(level.max_turns()));
  for (std::size_t c = 0; c < level.cogs().size(); ++c)
    for (Direction d : {Direction::clockwise, Direction::counter_clockwise})
      for (int t = 1; t <= level.max_turns(); ++t) moves.push_back(MoveAction{c, d, t});
  return moves;
}

inline bool is_end_state(const Level& level, const GameState& s) {
  return level.key_mask().is_subset_of(s.collected);
}

inline int score(const Level& level, const GameState& s) {
  int total = 0;
  for (std::size_t i = 0; i < level.item_count(); ++i)
    if (s.collected.contains(i)) total += level.item(i).points;
  return total;
}

inline std::vector<GameState> replay(const Level& level, const std::vector<MoveAction>& moves) {
  std::vector<GameState> states{level.initial_state()};
  states.reserve(moves.size() + 1);
  for (const auto& m : moves) states.push_back(apply_move(level, states.back(), m).state);
  return states;
}

// Fewest-move path from `from` to any state satisfying `goal`, restricted to
// `moves`. Ties resolve to the first path in move-enumeration order. Searches
// the full (finite) state space; nullopt when no goal state is reachable.
template <class Goal>
std::optional<std::vector<MoveAction>> shortest_moves(const Level& level, const GameState& from, Goal&& goal,
                                                      const std::vector<MoveAction>& moves) {
  if (goal(from)) return std::vector<MoveAction>{};
  struct Parent {
    std::uint64_t prev;
    std::size_t move;
  };
  std::unordered_map<std::uint64_t, Parent> parents;
  const std::uint64_t root = level.state_index(from);
  parents.emplace(root, Parent{root, 0});
  std::deque<GameState> frontier{from};
  while (!frontier.empty()) {
    GameState cur = frontier.front();
    frontier.pop_front();
    const std::uint64_t cur_idx = level.state_index(cur);
    for (std::size_t m = 0; m < moves.size(); ++m) {
      GameState next = advance(level, cur, moves[m]);
      const std::uint64_t idx = level.state_index(next);
      if (!parents.emplace(idx, Parent{cur_idx, m}).second) continue;
      if (goal(next)) {
        std::vector<MoveAction> path;
        for (std::uint64_t at = idx; at != root; at = parents.at(at).prev) path.push_back(moves[parents.at(at).move]);
        std::reverse(path.begin(), path.end());
        return path;
      }
      frontier.push_back(next);
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Level files

inline nlohmann::ordered_json to_json(const LevelConfig& c) {
  nlohmann::ordered_json j;
  j["level_id"] = c.level_id;
  j["wheel_size"] = c.wheel_size;
  j["cogs"] = c.cogs;
  j["keys"] = c.keys;
  auto bonuses = nlohmann::ordered_json::array();
  for (const auto& b : c.bonuses) bonuses.push_back({b.position, b.points});
  j["bonuses"] = bonuses;
  j["start_position"] = c.start_position;
  j["max_turns_per_move"] = c.max_turns_per_move;
  j["key_points"] = c.key_points;
  return j;
}

template <class Json>
LevelConfig level_config_from_json(const Json& j) {
  try {
    LevelConfig c;
    c.level_id = j.at("level_id").template get<std::string>();
    c.wheel_size = j.at("wheel_size").template get<int>();
    c.cogs = j.at("cogs").template get<std::vector<int>>();
    c.keys = j.at("keys").template get<std::vector<int>>();
    if (j.contains("bonuses")) {
      for (const auto& b : j.at("bonuses")) {
        if (b.is_array())
          c.bonuses.push_back(Bonus{b.at(0).template get<int>(), b.at(1).template get<int>()});
        else
          c.bonuses.push_back(Bonus{b.at("position").template get<int>(), b.at("points").template get<int>()});
      }
    }
    c.start_position = j.value("start_position", 0);
    c.max_turns_per_move = j.value("max_turns_per_move", 5);
    c.key_points = j.value("key_points", 1);
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw InvalidInput(std::string("malformed level config: ") + e.what());
  }
}

inline Level load_level(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open level file " + path.string());
  auto j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded()) throw InvalidInput("level file " + path.string() + " is not valid JSON");
  return Level(level_config_from_json(j));
}

// Loads every *.json level file in `dir`, ordered by file name.
inline std::vector<Level> load_levels_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) throw InvalidInput("levels directory not found: " + dir.string());
  std::vector<std::filesystem::path> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<Level> levels;
  for (const auto& f : files) {
    Level lvl = load_level(f);
    for (const auto& other : levels)
      if (other.id() == lvl.id()) throw InvalidInput("duplicate level_id '" + lvl.id() + "' in " + f.string());
    levels.push_back(std::move(lvl));
  }
  return levels;
}

}  // namespace glyph
