#pragma once

// Trace events as shown to analysts: moves plus the item pickups they cause.
// Pickups are derived by replay; logs only ever record moves.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "glyph/errors.hpp"
#include "glyph/game.hpp"

namespace glyph {

struct MoveEvent {
  std::optional<std::size_t> cog;  // unknown when parsed from display text
  Direction direction = Direction::clockwise;
  int turns = 1;
  friend bool operator==(const MoveEvent&, const MoveEvent&) = default;
};

// One or more pickups of a single item class.
struct CollectEvent {
  ItemKind item_class = ItemKind::key;
  int count = 1;
  std::vector<std::string> items;  // empty when parsed from display text
  friend bool operator==(const CollectEvent&, const CollectEvent&) = default;
};

using TraceEventKind = std::variant<MoveEvent, CollectEvent>;

inline bool is_collect(const TraceEventKind& e) { return std::holds_alternative<CollectEvent>(e); }

// Replays `moves` and emits each move followed by its pickups. Pickups of one
// move are split into runs of the same item class, in stop order.
inline std::vector<TraceEventKind> derive_events(const Level& level, const std::vector<MoveAction>& moves) {
  std::vector<TraceEventKind> events;
  GameState s = level.initial_state();
  for (const auto& m : moves) {
    auto outcome = apply_move(level, s, m);
    events.emplace_back(MoveEvent{m.cog_index, m.direction, m.turns});
    for (std::size_t item : outcome.collected) {
      const Item& it = level.item(item);
      auto* last = events.empty() ? nullptr : std::get_if<CollectEvent>(&events.back());
      if (last && last->item_class == it.kind) {
        ++last->count;
        last->items.push_back(it.id);
      } else {
        events.emplace_back(CollectEvent{it.kind, 1, {it.id}});
      }
    }
    s = outcome.state;
  }
  return events;
}

inline std::string render_event(const TraceEventKind& e) {
  if (const auto* m = std::get_if<MoveEvent>(&e)) {
    return "Move " + std::string(direction_name(m->direction)) + " " + std::to_string(m->turns) +
           (m->turns == 1 ? " step" : " steps");
  }
  const auto& c = std::get<CollectEvent>(e);
  std::string noun;
  if (c.item_class == ItemKind::key)
    noun = c.count == 1 ? "key" : "keys";
  else
    noun = c.count == 1 ? "bonus item" : "bonus items";
  return "Collect " + std::to_string(c.count) + " " + noun;
}

inline std::vector<std::string> render_events(const std::vector<TraceEventKind>& events) {
  std::vector<std::string> out;
  out.reserve(events.size());
  for (const auto& e : events) out.push_back(render_event(e));
  return out;
}

namespace detail {

inline std::string lower_trimmed(std::string_view text) {
  std::size_t b = 0, e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  std::string out;
  out.reserve(e - b);
  for (std::size_t i = b; i < e; ++i) out += static_cast<char>(std::tolower(static_cast<unsigned char>(text[i])));
  return out;
}

inline std::vector<std::string> split_words(const std::string& s) {
  std::vector<std::string> words;
  std::string cur;
  for (char ch : s) {
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!cur.empty()) words.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  if (!cur.empty()) words.push_back(std::move(cur));
  return words;
}

inline std::optional<int> parse_count(const std::string& s) {
  int v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || v < 1) return std::nullopt;
  return v;
}

}  // namespace detail

// Parses display text such as "Move counter-clockwise 5 step" or
// "collect 2 bonus items". Case-insensitive; singular/plural both accepted.
inline TraceEventKind parse_event_text(std::string_view text) {
  const auto words = detail::split_words(detail::lower_trimmed(text));
  auto bad = [&]() { return InvalidInput("unrecognized event text: \"" + std::string(text) + "\""); };
  if (words.size() == 4 && words[0] == "move") {
    Direction dir;
    if (words[1] == "clockwise")
      dir = Direction::clockwise;
    else if (words[1] == "counter-clockwise" || words[1] == "anti-clockwise")
      dir = Direction::counter_clockwise;
    else
      throw bad();
    auto n = detail::parse_count(words[2]);
    if (!n || (words[3] != "step" && words[3] != "steps")) throw bad();
    return MoveEvent{std::nullopt, dir, *n};
  }
  if (words.size() >= 3 && words[0] == "collect") {
    auto n = detail::parse_count(words[1]);
    if (!n) throw bad();
    if (words.size() == 3 && (words[2] == "key" || words[2] == "keys")) return CollectEvent{ItemKind::key, *n, {}};
    if (words.size() == 4 && words[2] == "bonus" && (words[3] == "item" || words[3] == "items"))
      return CollectEvent{ItemKind::bonus, *n, {}};
  }
  throw bad();
}

}  // namespace glyph
