#pragma once

// Action-count state difference, dynamic time warping over state sequences,
// and the pairwise sequence distance matrix.
//
// d(s1, s2) is the length of the shortest move sequence turning one state
// into the other, taking the cheaper direction when both work. Pickups are
// monotone, so a direction whose source holds an item the target lacks can
// never succeed. When neither direction succeeds within the depth cap the
// distance is `big`, a finite stand-in for infinity.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <thread>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "glyph/errors.hpp"
#include "glyph/game.hpp"
#include "glyph/ingest.hpp"

namespace glyph {

struct DistanceConfig {
  double big = 0;         // 0 = derive from the depth cap and longest sequence
  int bfs_depth_cap = 0;  // 0 = wheel_size + number of items
  std::size_t cache_capacity = std::size_t{1} << 20;  // memoized state pairs
  bool prune = true;  // skip directions/branches that would need to drop an item

  // Fills in defaulted fields. `longest_sequence` counts states.
  DistanceConfig resolved(const Level& level, std::size_t longest_sequence) const {
    DistanceConfig r = *this;
    if (r.bfs_depth_cap <= 0) r.bfs_depth_cap = level.wheel_size() + static_cast<int>(level.item_count());
    if (r.big <= 0)
      r.big = (static_cast<double>(r.bfs_depth_cap) + 1.0) * (static_cast<double>(longest_sequence) + 1.0);
    return r;
  }
};

// Shortest number of moves from `from` to `to`, or nullopt when there is no
// such path of length <= cap.
inline std::optional<int> shortest_transform(const Level& level, const GameState& from, const GameState& to, int cap,
                                             bool prune = true) {
  if (from == to) return 0;
  if (prune && !from.collected.is_subset_of(to.collected)) return std::nullopt;
  const auto moves = enumerate_moves(level);
  std::unordered_set<std::uint64_t> seen{level.state_index(from)};
  std::vector<GameState> frontier{from}, next;
  for (int depth = 1; depth <= cap && !frontier.empty(); ++depth) {
    next.clear();
    for (const auto& s : frontier) {
      for (const auto& m : moves) {
        GameState t = advance(level, s, m);
        if (t == to) return depth;
        if (prune && !t.collected.is_subset_of(to.collected)) continue;
        if (seen.insert(level.state_index(t)).second) next.push_back(t);
      }
    }
    std::swap(frontier, next);
  }
  return std::nullopt;
}

// Direct two-search evaluation of d(s1, s2). Use StateMetric when evaluating
// many pairs on one level.
inline double state_distance(const Level& level, const GameState& s1, const GameState& s2,
                             const DistanceConfig& cfg = {}) {
  require_valid(level, s1);
  require_valid(level, s2);
  const DistanceConfig c = cfg.resolved(level, 1);
  auto forward = shortest_transform(level, s1, s2, c.bfs_depth_cap, c.prune);
  auto backward = shortest_transform(level, s2, s1, c.bfs_depth_cap, c.prune);
  if (forward && backward) return std::min(*forward, *backward);
  if (forward) return *forward;
  if (backward) return *backward;
  return c.big;
}

// Memoizing state metric for one level. Small levels get a full single-source
// distance table per source state; larger ones fall back to per-pair search.
// Not thread-safe; give each worker its own instance.
class StateMetric {
 public:
  static constexpr std::uint64_t dense_limit = std::uint64_t{1} << 16;
  static constexpr std::uint64_t table_budget = std::uint64_t{1} << 24;

  StateMetric(const Level& level, const DistanceConfig& resolved_cfg)
      : level_(level), cfg_(resolved_cfg), moves_(enumerate_moves(level)) {
    if (cfg_.big <= 0 || cfg_.bfs_depth_cap <= 0) throw ConfigError("StateMetric needs a resolved DistanceConfig");
    space_ = static_cast<std::uint64_t>(level.wheel_size()) << level.item_count();
  }

  double operator()(const GameState& a, const GameState& b) {
    if (a == b) return 0;
    std::uint64_t ia = level_.state_index(a), ib = level_.state_index(b);
    if (ia > ib) std::swap(ia, ib);
    const PairKey key{ia, ib};
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    auto forward = directed(a, b);
    auto backward = directed(b, a);
    double d = cfg_.big;
    if (forward && backward)
      d = std::min(*forward, *backward);
    else if (forward)
      d = *forward;
    else if (backward)
      d = *backward;
    if (memo_.size() < cfg_.cache_capacity) memo_.emplace(key, d);
    return d;
  }

  const DistanceConfig& config() const { return cfg_; }
  std::size_t memo_size() const { return memo_.size(); }

 private:
  struct PairKey {
    std::uint64_t lo, hi;
    friend bool operator==(const PairKey&, const PairKey&) = default;
  };
  struct PairHash {
    std::size_t operator()(const PairKey& k) const noexcept {
      return std::hash<std::uint64_t>{}(k.lo * 0x9E3779B97F4A7C15ull ^ (k.hi + 0x632BE59BD9B4E019ull));
    }
  };
  static constexpr std::uint16_t unreached = std::numeric_limits<std::uint16_t>::max();

  std::optional<int> directed(const GameState& from, const GameState& to) {
    if (cfg_.prune && !from.collected.is_subset_of(to.collected)) return std::nullopt;
    if (space_ > dense_limit || cfg_.bfs_depth_cap >= unreached)
      return shortest_transform(level_, from, to, cfg_.bfs_depth_cap, cfg_.prune);
    const auto& dist = table(from);
    const std::uint16_t d = dist[level_.state_index(to)];
    if (d == unreached) return std::nullopt;
    return static_cast<int>(d);
  }

  const std::vector<std::uint16_t>& table(const GameState& source) {
    const std::uint64_t src = level_.state_index(source);
    if (auto it = tables_.find(src); it != tables_.end()) return it->second;
    if ((tables_.size() + 1) * space_ > table_budget) tables_.clear();
    std::vector<std::uint16_t> dist(space_, unreached);
    const auto wheel = static_cast<std::uint64_t>(level_.wheel_size());
    std::vector<std::uint64_t> frontier{src}, next;
    dist[src] = 0;
    for (int depth = 1; depth <= cfg_.bfs_depth_cap && !frontier.empty(); ++depth) {
      next.clear();
      for (std::uint64_t idx : frontier) {
        const GameState s{static_cast<int>(idx % wheel), ItemSet(idx / wheel)};
        for (const auto& m : moves_) {
          const std::uint64_t t = level_.state_index(advance(level_, s, m));
          if (dist[t] != unreached) continue;
          dist[t] = static_cast<std::uint16_t>(depth);
          next.push_back(t);
        }
      }
      std::swap(frontier, next);
    }
    return tables_.emplace(src, std::move(dist)).first->second;
  }

  const Level& level_;
  DistanceConfig cfg_;
  std::vector<MoveAction> moves_;
  std::uint64_t space_ = 0;
  std::unordered_map<PairKey, double, PairHash> memo_;
  std::unordered_map<std::uint64_t, std::vector<std::uint16_t>> tables_;
};

// D(n, m) of the warping recursion
//   D(0,0) = 0, D(i,0) = D(0,j) = big,
//   D(i,j) = d(a_i, b_j) + min(D(i-1,j), D(i,j-1), D(i-1,j-1)).
template <class T, class Metric>
double dtw(std::span<const T> a, std::span<const T> b, Metric&& d, double big) {
  if (a.empty() || b.empty()) throw InvalidInput("dtw: sequences must be non-empty");
  std::vector<double> prev(b.size() + 1, big), cur(b.size() + 1);
  prev[0] = 0;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = big;
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = d(a[i - 1], b[j - 1]) + std::min({prev[j], cur[j - 1], prev[j - 1]});
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

inline double dtw_distance(std::span<const GameState> a, std::span<const GameState> b, const Level& level,
                           const DistanceConfig& cfg = {}) {
  if (a.empty() || b.empty()) throw InvalidInput("dtw_distance: state sequences must be non-empty");
  StateMetric metric(level, cfg.resolved(level, std::max(a.size(), b.size())));
  return dtw(a, b, metric, metric.config().big);
}

struct DistanceMatrix {
  std::vector<int> order;  // sequence_id of each row/column
  std::vector<double> values;  // row-major, order.size()^2
  double big = 0;

  std::size_t size() const { return order.size(); }
  double at(std::size_t i, std::size_t j) const { return values[i * order.size() + j]; }
};

// All-pairs DTW between sequences of one level. Pairs are split across
// `jobs` workers, each with its own metric cache; the result does not depend
// on `jobs`.
inline DistanceMatrix build_distance_matrix(std::span<const UniqueSequence> sequences, const Level& level,
                                            const DistanceConfig& cfg = {}, unsigned jobs = 1) {
  if (sequences.empty()) throw InvalidInput("build_distance_matrix: no sequences");
  std::size_t longest = 0;
  for (const auto& s : sequences) {
    if (s.states.empty()) throw InvalidInput("sequence " + std::to_string(s.sequence_id) + " has no states");
    longest = std::max(longest, s.states.size());
  }
  const DistanceConfig c = cfg.resolved(level, longest);
  if (!(c.big > static_cast<double>(c.bfs_depth_cap) * static_cast<double>(longest)))
    throw ConfigError("distance config: big (" + std::to_string(c.big) + ") must exceed bfs_depth_cap x longest "
                      "sequence (" + std::to_string(c.bfs_depth_cap) + " x " + std::to_string(longest) + ")");

  const std::size_t n = sequences.size();
  DistanceMatrix m;
  m.big = c.big;
  m.values.assign(n * n, 0.0);
  for (const auto& s : sequences) m.order.push_back(s.sequence_id);

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

  auto work = [&](std::size_t worker, std::size_t stride) {
    StateMetric metric(level, c);
    for (std::size_t k = worker; k < pairs.size(); k += stride) {
      const auto [i, j] = pairs[k];
      const double d = dtw(std::span<const GameState>(sequences[i].states),
                           std::span<const GameState>(sequences[j].states), metric, c.big);
      m.values[i * n + j] = d;
      m.values[j * n + i] = d;
    }
  };
  const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(jobs, pairs.size()));
  if (workers <= 1) {
    work(0, 1);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work, w, workers);
  }
  return m;
}

}  // namespace glyph
