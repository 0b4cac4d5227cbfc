#pragma once

// Synthetic play-trace generation for fixtures and demos.

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "glyph/errors.hpp"
#include "glyph/game.hpp"
#include "glyph/trace.hpp"

namespace glyph {

enum class Policy { optimal, greedy_key, one_step, random, mixed };

inline Policy parse_policy(std::string_view name) {
  if (name == "optimal") return Policy::optimal;
  if (name == "greedy-key") return Policy::greedy_key;
  if (name == "one-step") return Policy::one_step;
  if (name == "random") return Policy::random;
  if (name == "mixed") return Policy::mixed;
  throw InvalidInput("unknown policy '" + std::string(name) + "'");
}

inline std::string_view policy_name(Policy p) {
  switch (p) {
    case Policy::optimal: return "optimal";
    case Policy::greedy_key: return "greedy-key";
    case Policy::one_step: return "one-step";
    case Policy::random: return "random";
    case Policy::mixed: return "mixed";
  }
  return "?";
}

namespace detail {

// Uniform draw in [0, n). mt19937_64's output sequence is fixed by the
// standard; distribution objects are not, so draws are done by hand.
inline std::uint64_t draw(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = std::mt19937_64::max() - std::mt19937_64::max() % n;
  std::uint64_t v;
  do v = rng(); while (v >= limit);
  return v % n;
}

inline double draw_unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

class TraceGenerator {
 public:
  TraceGenerator(const Level& level, std::uint64_t seed) : level_(level), rng_(seed), moves_(enumerate_moves(level)) {
    for (const auto& m : moves_)
      if (m.turns == 1) single_turn_.push_back(m);
    auto path = shortest_moves(level_, level_.initial_state(), [&](const GameState& s) { return is_end_state(level_, s); }, moves_);
    if (!path) throw GenerationError("level '" + level_.id() + "' cannot be completed");
    optimal_ = *path;
  }

  std::vector<MoveAction> moves_for(Policy p) {
    switch (p) {
      case Policy::optimal: return optimal_;
      case Policy::greedy_key: return greedy_key();
      case Policy::one_step: return one_step();
      case Policy::random: return random_walk();
      case Policy::mixed: return moves_for(pick_mixed());
    }
    return {};
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  Policy pick_mixed() {
    const double u = draw_unit(rng_);
    if (u < 0.45) return Policy::optimal;
    if (u < 0.65) return Policy::greedy_key;
    if (u < 0.80) return Policy::one_step;
    return Policy::random;
  }

  // Repeatedly heads for whichever new key is fewest moves away.
  std::vector<MoveAction> greedy_key() {
    std::vector<MoveAction> out;
    GameState s = level_.initial_state();
    while (!is_end_state(level_, s)) {
      const std::size_t have = ItemSet(s.collected.bits() & level_.key_mask().bits()).size();
      auto leg = shortest_moves(level_, s, [&](const GameState& t) {
        return ItemSet(t.collected.bits() & level_.key_mask().bits()).size() > have;
      }, moves_);
      if (!leg) throw GenerationError("greedy-key policy got stuck on level '" + level_.id() + "'");
      for (const auto& m : *leg) {
        s = advance(level_, s, m);
        out.push_back(m);
      }
    }
    return out;
  }

  // Reaches the optimal end state using single-turn moves only; falls back to
  // any end state when that exact state is out of reach.
  std::vector<MoveAction> one_step() {
    const GameState target = replay(level_, optimal_).back();
    auto path = shortest_moves(level_, level_.initial_state(), [&](const GameState& s) { return s == target; }, single_turn_);
    if (!path)
      path = shortest_moves(level_, level_.initial_state(), [&](const GameState& s) { return is_end_state(level_, s); }, single_turn_);
    if (!path) throw GenerationError("one-step policy cannot complete level '" + level_.id() + "'");
    return *path;
  }

  // Uniform random moves; quits with probability 0.08 after each move.
  std::vector<MoveAction> random_walk() {
    const std::size_t limit = 2 * static_cast<std::size_t>(level_.wheel_size());
    std::vector<MoveAction> out;
    GameState s = level_.initial_state();
    while (out.size() < limit) {
      const auto& m = moves_[draw(rng_, moves_.size())];
      s = advance(level_, s, m);
      out.push_back(m);
      if (is_end_state(level_, s) || draw_unit(rng_) < 0.08) break;
    }
    return out;
  }

  const Level& level_;
  std::mt19937_64 rng_;
  std::vector<MoveAction> moves_;
  std::vector<MoveAction> single_turn_;
  std::vector<MoveAction> optimal_;
};

}  // namespace detail

// `count` traces for `level` under `policy`, deterministic in `seed`.
// Player ids are four-digit numbers (repeats model players replaying a level);
// session ids are unique per trace.
inline std::vector<PlayTrace> generate_synthetic_traces(const Level& level, Policy policy, std::size_t count,
                                                        std::uint64_t seed) {
  if (count == 0) return {};
  detail::TraceGenerator gen(level, seed);
  std::vector<PlayTrace> traces;
  traces.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::string player = std::to_string(1000 + detail::draw(gen.rng(), 9000));
    std::string session = "s" + std::to_string(i);
    traces.push_back(make_trace(level, std::move(player), std::move(session), gen.moves_for(policy)));
  }
  return traces;
}

}  // namespace glyph
