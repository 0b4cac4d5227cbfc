#pragma once

// Interactive query surface: top-K / K-th popular, by user id, by sequence
// id; raw and condensed sequence text; level description.

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "glyph/errors.hpp"
#include "glyph/events.hpp"
#include "glyph/game.hpp"
#include "glyph/ingest.hpp"
#include "glyph/state_graph.hpp"

namespace glyph {

// Smallest min(k, U) rank labels in ascending order.
inline std::vector<int> top_k(std::span<const UniqueSequence> sequences, std::size_t k) {
  if (k < 1) throw InvalidInput("top_k: k must be >= 1");
  std::vector<int> ids;
  for (const auto& s : sequences) ids.push_back(s.sequence_id);
  std::sort(ids.begin(), ids.end());
  ids.resize(std::min(k, ids.size()));
  return ids;
}

inline int kth(std::span<const UniqueSequence> sequences, std::size_t k) {
  if (k < 1 || k > sequences.size())
    throw NotFound("no " + std::to_string(k) + "-th most popular sequence (have " +
                   std::to_string(sequences.size()) + ")");
  return static_cast<int>(k - 1);
}

struct UserMatch {
  std::vector<int> selected;  // distinct, in order of first match
  std::map<std::string, std::vector<int>> by_user;
  std::vector<std::string> notes;
};

inline UserMatch by_user_ids(std::span<const UniqueSequence> sequences, std::span<const std::string> user_ids) {
  UserMatch out;
  std::vector<const UniqueSequence*> ranked;
  for (const auto& s : sequences) ranked.push_back(&s);
  std::sort(ranked.begin(), ranked.end(),
            [](const UniqueSequence* a, const UniqueSequence* b) { return a->sequence_id < b->sequence_id; });
  for (const auto& user : user_ids) {
    auto& hits = out.by_user[user];
    for (const auto* s : ranked) {
      const auto& m = s->member_player_ids;
      if (std::find(m.begin(), m.end(), user) == m.end()) continue;
      hits.push_back(s->sequence_id);
      if (std::find(out.selected.begin(), out.selected.end(), s->sequence_id) == out.selected.end())
        out.selected.push_back(s->sequence_id);
    }
    if (hits.empty()) out.notes.push_back("unknown user " + user);
  }
  return out;
}

using EventPredicate = std::function<bool(const TraceEventKind&)>;

// Keeps events matching `meaningful` (default: pickups) and merges adjacent
// pickups of the same item class into one counted event.
inline std::vector<TraceEventKind> condense(const std::vector<TraceEventKind>& raw,
                                            const EventPredicate& meaningful = is_collect) {
  std::vector<TraceEventKind> out;
  for (const auto& e : raw) {
    if (!meaningful(e)) continue;
    if (const auto* c = std::get_if<CollectEvent>(&e); c && !out.empty()) {
      if (auto* last = std::get_if<CollectEvent>(&out.back()); last && last->item_class == c->item_class) {
        last->count += c->count;
        last->items.insert(last->items.end(), c->items.begin(), c->items.end());
        continue;
      }
    }
    out.push_back(e);
  }
  return out;
}

// Condenses display text, e.g. the four-line raw form of a trace.
inline std::vector<std::string> condense_text(std::span<const std::string> raw) {
  std::vector<TraceEventKind> events;
  for (const auto& line : raw) events.push_back(parse_event_text(line));
  return render_events(condense(events));
}

inline std::vector<std::string> render_sequence_text(const Level& level, const UniqueSequence& seq) {
  return render_events(derive_events(level, seq.moves));
}

inline std::string level_info_text(const Level& level) {
  const auto& c = level.config();
  std::ostringstream os;
  auto join = [&](const std::vector<int>& v) {
    for (std::size_t i = 0; i < v.size(); ++i) os << (i ? ", " : "") << v[i];
  };
  os << "Level " << c.level_id << ": wheel of " << c.wheel_size << " pegs, marker starts at peg "
     << c.start_position << ". Cogs: ";
  join(c.cogs);
  os << " teeth, each turned up to " << c.max_turns_per_move << " times per move. Keys: " << c.keys.size()
     << " at peg" << (c.keys.size() == 1 ? " " : "s ");
  join(c.keys);
  os << ".";
  if (!c.bonuses.empty()) {
    os << " Bonus items: " << c.bonuses.size() << " (";
    for (std::size_t i = 0; i < c.bonuses.size(); ++i) {
      const auto& b = c.bonuses[i];
      os << (i ? ", " : "") << "peg " << b.position << ": " << (b.points >= 0 ? "+" : "") << b.points
         << (std::abs(b.points) == 1 ? " point" : " points");
    }
    os << ").";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Query grammar: top=K | kth=K | users=id1,id2 | seqs=3,9,10

struct TopQuery {
  std::size_t k;
};
struct KthQuery {
  std::size_t k;
};
struct UsersQuery {
  std::vector<std::string> user_ids;
};
struct SeqsQuery {
  std::vector<int> sequence_ids;
};
using Query = std::variant<TopQuery, KthQuery, UsersQuery, SeqsQuery>;

namespace detail {

inline std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t b = 0;
  while (b <= s.size()) {
    std::size_t e = s.find(',', b);
    if (e == std::string_view::npos) e = s.size();
    std::string_view part = s.substr(b, e - b);
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
    if (!part.empty()) out.emplace_back(part);
    b = e + 1;
  }
  return out;
}

inline std::size_t parse_positive(std::string_view s, std::string_view what) {
  std::size_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size() || v < 1)
    throw InvalidInput(std::string(what) + " must be a positive integer, got \"" + std::string(s) + "\"");
  return v;
}

}  // namespace detail

inline Query parse_query(std::string_view text) {
  const auto eq = text.find('=');
  if (eq == std::string_view::npos) throw InvalidInput("query must look like top=K, kth=K, users=... or seqs=...");
  const std::string_view name = text.substr(0, eq), value = text.substr(eq + 1);
  if (name == "top") return TopQuery{detail::parse_positive(value, "top")};
  if (name == "kth") return KthQuery{detail::parse_positive(value, "kth")};
  if (name == "users") {
    auto ids = detail::split_list(value);
    if (ids.empty()) throw InvalidInput("users= needs at least one id");
    return UsersQuery{std::move(ids)};
  }
  if (name == "seqs") {
    std::vector<int> ids;
    for (const auto& part : detail::split_list(value)) {
      int v = 0;
      auto [p, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
      if (ec != std::errc{} || p != part.data() + part.size() || v < 0)
        throw InvalidInput("seqs= takes non-negative sequence ids, got \"" + part + "\"");
      ids.push_back(v);
    }
    if (ids.empty()) throw InvalidInput("seqs= needs at least one id");
    return SeqsQuery{std::move(ids)};
  }
  throw InvalidInput("unknown query field '" + std::string(name) + "'");
}

struct SelectedSequence {
  int sequence_id = 0;
  std::size_t color_index = 0;  // position in the selection list
  std::size_t popularity = 0;
  bool completed = false;
  std::vector<std::string> raw_text;
  std::vector<std::string> condensed_text;
  SequencePath highlight;
  std::vector<std::string> member_player_ids;
};

struct QueryResult {
  std::vector<SelectedSequence> selections;
  std::map<std::string, std::vector<int>> users;  // users= queries only
  std::vector<std::string> notes;
};

// Runs `query` over one level's sequences and state graph. Color indices
// follow selection order so both views agree.
inline QueryResult run_query(const Level& level, std::span<const UniqueSequence> sequences, const StateGraph& graph,
                             const Query& query) {
  QueryResult result;
  std::vector<int> ids;
  if (const auto* q = std::get_if<TopQuery>(&query)) {
    ids = top_k(sequences, q->k);
  } else if (const auto* q = std::get_if<KthQuery>(&query)) {
    ids = {kth(sequences, q->k)};
  } else if (const auto* q = std::get_if<UsersQuery>(&query)) {
    auto m = by_user_ids(sequences, q->user_ids);
    ids = std::move(m.selected);
    result.users = std::move(m.by_user);
    result.notes = std::move(m.notes);
  } else {
    for (int id : std::get<SeqsQuery>(query).sequence_ids)
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
  }

  for (int id : ids) {
    auto it = std::find_if(sequences.begin(), sequences.end(),
                           [&](const UniqueSequence& s) { return s.sequence_id == id; });
    if (it == sequences.end()) {
      result.notes.push_back("unknown sequence " + std::to_string(id));
      continue;
    }
    SelectedSequence sel;
    sel.sequence_id = id;
    sel.color_index = result.selections.size();
    sel.popularity = it->popularity;
    sel.completed = it->completed;
    const auto events = derive_events(level, it->moves);
    sel.raw_text = render_events(events);
    sel.condensed_text = render_events(condense(events));
    if (auto p = graph.paths.find(id); p != graph.paths.end()) sel.highlight = p->second;
    sel.member_player_ids = it->member_player_ids;
    result.selections.push_back(std::move(sel));
  }
  return result;
}

}  // namespace glyph
