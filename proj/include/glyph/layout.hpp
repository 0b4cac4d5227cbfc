#pragma once

// 2D placement: Fruchterman-Reingold force-directed layout for node-link
// graphs, and SMACOF stress majorization for distance matrices. Both are
// deterministic in the seed and hold pinned nodes fixed.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "glyph/errors.hpp"

namespace glyph {

struct Point {
  double x = 0;
  double y = 0;
  friend bool operator==(const Point&, const Point&) = default;
};

inline double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

enum class LayoutAlgorithm { force_directed, stress_mds };

inline std::string_view algorithm_name(LayoutAlgorithm a) {
  return a == LayoutAlgorithm::force_directed ? "force_directed" : "stress_mds";
}

struct LayoutConfig {
  std::uint64_t seed = 1;
  int iterations = 300;
  double width = 1000;
  double height = 1000;
  double initial_step = 0;  // 0 = width / 10
  double cooling = 0.97;    // temperature multiplier per iteration
  LayoutAlgorithm algorithm = LayoutAlgorithm::force_directed;
  double convergence_epsilon = 1e-9;

  void validate() const {
    if (iterations < 1) throw ConfigError("layout: iterations must be >= 1");
    if (!(convergence_epsilon > 0)) throw ConfigError("layout: convergence_epsilon must be > 0");
    if (!(width > 0) || !(height > 0)) throw ConfigError("layout: area must be positive");
    if (!(cooling > 0) || cooling > 1) throw ConfigError("layout: cooling must be in (0, 1]");
  }
};

using Pins = std::map<std::size_t, Point>;

struct LayoutResult {
  std::vector<Point> positions;  // indexed by node id
  Pins pinned;
  double final_stress = 0;            // stress_mds only
  std::vector<double> stress_history;  // stress_mds only; entry 0 is the initial layout
  int iterations_run = 0;
};

// Undirected view of a graph for layout. With `edge_lengths` set (one per
// edge), each edge is a spring with its own natural length and there is no
// global repulsion; otherwise classic FR with natural length sqrt(area / n).
struct LayoutGraph {
  std::size_t node_count = 0;
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::vector<double> edge_lengths;
};

namespace detail {

inline std::vector<Point> seeded_positions(std::size_t n, const LayoutConfig& cfg) {
  std::mt19937_64 rng(cfg.seed);
  auto unit = [&]() { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
  std::vector<Point> pos(n);
  for (auto& p : pos) {
    p.x = unit() * cfg.width;
    p.y = unit() * cfg.height;
  }
  return pos;
}

inline void check_pins(const Pins& pins, std::size_t n) {
  for (const auto& [id, p] : pins)
    if (id >= n) throw InvalidInput("pin refers to node " + std::to_string(id) + " outside the graph");
}

}  // namespace detail

inline LayoutResult force_directed_layout(const LayoutGraph& graph, const LayoutConfig& cfg, const Pins& pins = {}) {
  cfg.validate();
  const std::size_t n = graph.node_count;
  if (n == 0) throw InvalidInput("force_directed_layout: empty graph");
  if (!graph.edge_lengths.empty() && graph.edge_lengths.size() != graph.edges.size())
    throw InvalidInput("force_directed_layout: edge_lengths must match edges");
  for (const auto& [u, v] : graph.edges)
    if (u >= n || v >= n) throw InvalidInput("force_directed_layout: edge endpoint out of range");
  detail::check_pins(pins, n);

  LayoutResult result;
  result.pinned = pins;
  auto& pos = result.positions;
  pos = detail::seeded_positions(n, cfg);
  std::vector<char> fixed(n, 0);
  for (const auto& [id, p] : pins) {
    pos[id] = p;
    fixed[id] = 1;
  }
  if (n == 1) {
    if (!fixed[0]) pos[0] = Point{cfg.width / 2, cfg.height / 2};
    return result;
  }

  const bool springs = !graph.edge_lengths.empty();
  const double k = std::sqrt(cfg.width * cfg.height / static_cast<double>(n));
  const double k2 = k * k;
  double temperature = cfg.initial_step > 0 ? cfg.initial_step : cfg.width / 10;
  std::vector<double> dx(n), dy(n);

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    std::fill(dx.begin(), dx.end(), 0.0);
    std::fill(dy.begin(), dy.end(), 0.0);
    if (!springs) {
      // repulsion k^2 / d along the unit vector = delta * k^2 / d^2
      for (std::size_t i = 0; i < n; ++i) {
        const double xi = pos[i].x, yi = pos[i].y;
        double fx = 0, fy = 0;
        for (std::size_t j = i + 1; j < n; ++j) {
          double ex = xi - pos[j].x, ey = yi - pos[j].y;
          double d2 = ex * ex + ey * ey;
          if (d2 < 1e-18) {
            ex = 1e-3 * static_cast<double>(j - i);
            ey = 1e-3;
            d2 = ex * ex + ey * ey;
          }
          const double s = k2 / d2;
          fx += ex * s;
          fy += ey * s;
          dx[j] -= ex * s;
          dy[j] -= ey * s;
        }
        dx[i] += fx;
        dy[i] += fy;
      }
    }
    for (std::size_t e = 0; e < graph.edges.size(); ++e) {
      const auto [u, v] = graph.edges[e];
      if (u == v) continue;
      double ex = pos[u].x - pos[v].x, ey = pos[u].y - pos[v].y;
      double d = std::hypot(ex, ey);
      if (d < 1e-9) {
        ex = 1e-3;
        ey = 1e-3 * static_cast<double>(u < v ? 1 : -1);
        d = std::hypot(ex, ey);
      }
      // magnitude pulling u towards v
      double f;
      if (springs) {
        const double len = std::max(graph.edge_lengths[e], 1e-9);
        f = d * d / len - len * len / d;
      } else {
        f = d * d / k;
      }
      const double s = f / d;
      dx[u] -= ex * s;
      dy[u] -= ey * s;
      dx[v] += ex * s;
      dy[v] += ey * s;
    }
    double max_move = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (fixed[i]) continue;
      const double len = std::hypot(dx[i], dy[i]);
      if (len <= 0) continue;
      const double step = std::min(len, temperature);
      pos[i].x += dx[i] / len * step;
      pos[i].y += dy[i] / len * step;
      max_move = std::max(max_move, step);
    }
    temperature *= cfg.cooling;
    result.iterations_run = iter + 1;
    if (max_move < cfg.convergence_epsilon * k) break;
  }
  return result;
}

// Raw stress sum over i < j of (|x_i - x_j| - D_ij)^2.
inline double layout_stress(std::span<const Point> pos, std::span<const double> dissimilarity) {
  const std::size_t n = pos.size();
  double s = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double r = distance(pos[i], pos[j]) - dissimilarity[i * n + j];
      s += r * r;
    }
  return s;
}

// SMACOF majorization of raw stress over a row-major n x n dissimilarity
// matrix. Each step applies the Guttman transform (restricted to free points
// when some are pinned), so stress never increases.
inline LayoutResult stress_mds_layout(std::span<const double> dissimilarity, std::size_t n, const LayoutConfig& cfg,
                                      const Pins& pins = {}) {
  cfg.validate();
  if (n == 0) throw InvalidInput("stress_mds_layout: empty matrix");
  if (dissimilarity.size() != n * n) throw InvalidInput("stress_mds_layout: matrix is not n x n");
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double v = dissimilarity[i * n + j];
      if (!(v >= 0) || !std::isfinite(v)) throw InvalidInput("stress_mds_layout: entries must be finite and >= 0");
      if (v != dissimilarity[j * n + i]) throw InvalidInput("stress_mds_layout: matrix must be symmetric");
    }
  detail::check_pins(pins, n);

  LayoutResult result;
  result.pinned = pins;
  auto& pos = result.positions;
  pos = detail::seeded_positions(n, cfg);
  std::vector<char> fixed(n, 0);
  Point pinned_sum;
  for (const auto& [id, p] : pins) {
    pos[id] = p;
    fixed[id] = 1;
    pinned_sum.x += p.x;
    pinned_sum.y += p.y;
  }
  const std::size_t n_pinned = pins.size();
  const double nd = static_cast<double>(n);

  double stress = layout_stress(pos, dissimilarity);
  result.stress_history.push_back(stress);
  std::vector<Point> bz(n);
  for (int iter = 0; iter < cfg.iterations && n_pinned < n; ++iter) {
    // (B(Z) Z)_i = sum_j D_ij / d_ij (z_i - z_j) over j with d_ij > 0
    for (std::size_t i = 0; i < n; ++i) {
      Point acc;
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double d = distance(pos[i], pos[j]);
        if (d <= 0) continue;
        const double w = dissimilarity[i * n + j] / d;
        acc.x += w * (pos[i].x - pos[j].x);
        acc.y += w * (pos[i].y - pos[j].y);
      }
      bz[i] = acc;
    }
    if (n_pinned == 0) {
      for (std::size_t i = 0; i < n; ++i) pos[i] = Point{bz[i].x / nd, bz[i].y / nd};
    } else {
      Point free_sum;
      for (std::size_t i = 0; i < n; ++i)
        if (!fixed[i]) {
          free_sum.x += bz[i].x;
          free_sum.y += bz[i].y;
        }
      const double f = static_cast<double>(n - n_pinned);
      const double p = static_cast<double>(n_pinned);
      const Point s_free{(free_sum.x + f * pinned_sum.x) / p, (free_sum.y + f * pinned_sum.y) / p};
      for (std::size_t i = 0; i < n; ++i)
        if (!fixed[i])
          pos[i] = Point{(bz[i].x + s_free.x + pinned_sum.x) / nd, (bz[i].y + s_free.y + pinned_sum.y) / nd};
    }
    const double next = layout_stress(pos, dissimilarity);
    result.stress_history.push_back(next);
    result.iterations_run = iter + 1;
    const bool converged = next == 0 || (stress - next) < cfg.convergence_epsilon * stress;
    stress = next;
    if (converged) break;
  }
  result.final_stress = stress;

  if (n_pinned == 0) {
    Point c;
    for (const auto& p : pos) {
      c.x += p.x;
      c.y += p.y;
    }
    const double sx = cfg.width / 2 - c.x / nd, sy = cfg.height / 2 - c.y / nd;
    for (auto& p : pos) {
      p.x += sx;
      p.y += sy;
    }
  }
  return result;
}

// Display radius proportional to sqrt(count), scaled so max_count maps to
// r_max and clamped below at r_min.
inline double node_radius(double count, double max_count, double r_min = 4.0, double r_max = 24.0) {
  if (!(max_count > 0) || count < 0) throw InvalidInput("node_radius: counts must be positive");
  const double r = r_max * std::sqrt(std::min(count, max_count) / max_count);
  return std::clamp(r, r_min, r_max);
}

}  // namespace glyph
