// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Runs against the library, the glyph binary and the HTTP service.

#include <httplib.h>

#include <chrono>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <thread>

#include "glyph/dataset.hpp"
#include "glyph/fixtures.hpp"
#include "glyph/service.hpp"
#include "glyph/synth.hpp"
#include "support/oracles.hpp"
#include "support/workspace.hpp"

using namespace glyph;
using Clock = std::chrono::steady_clock;

namespace {

const std::filesystem::path levels_dir = GLYPH_DATA_DIR "/levels";
const std::string cli = GLYPH_CLI_PATH;

struct Outcome {
  bool pass = false;
  std::string detail;
};

Outcome pass(std::string detail) { return {true, std::move(detail)}; }
Outcome fail(std::string detail) { return {false, std::move(detail)}; }

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << std::fixed << v;
  return os.str();
}

// ---------------------------------------------------------------------------

Outcome condensation_example() {
  const std::vector<std::string> raw{"Move counter-clockwise 5 step", "move counter-clockwise 2 step",
                                     "move counter-clockwise 1 step", "collect 1 key"};
  const auto out = condense_text(raw);
  if (out.size() != 1 || out[0] != "Collect 1 key")
    return fail("got " + std::to_string(out.size()) + " line(s), first \"" + (out.empty() ? "" : out[0]) + "\"");
  return pass("\"Collect 1 key\"");
}

Outcome mechanics_arithmetic() {
  Level fig(fixtures::demo_level_config());
  const auto s0 = fig.initial_state();
  const int plus = apply_move(fig, s0, fixtures::cw(2, 0)).state.marker - s0.marker;
  const int back = apply_move(fig, s0, fixtures::ccw(1, 2)).state.marker;
  const int minus = wrap_peg(back - s0.marker, fig.wheel_size()) - fig.wheel_size();
  if (fig.cogs()[0] != 3 || fig.cogs()[2] != 13) return fail("fixture cogs changed");
  if (plus != 6 || minus != -13)
    return fail("cog 3 cw x2 moved " + std::to_string(plus) + ", cog 13 ccw x1 moved " + std::to_string(minus));
  return pass("cog 3 cw x2 = +6, cog 13 ccw x1 = -13 (marker 0 -> 52 on 65 pegs)");
}

Outcome state_metric_oracle() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::size_t pairs = 0, literal = 0, levels = 0;
  for (const auto& cfg : oracle::tiny_levels()) {
    Level level(cfg);
    if (level.wheel_size() * (1 << level.item_count()) > 200) return fail(cfg.level_id + " exceeds 200 states");
    ++levels;
    oracle::AllPairs ap(level);
    const auto dc = DistanceConfig{}.resolved(level, 1);
    for (int i = 0; i < 100; ++i, ++pairs) {
      const auto a = oracle::random_state(level, rng), b = oracle::random_state(level, rng);
      const double expected = ap.distance(a, b, dc.bfs_depth_cap, dc.big);
      const double got = state_distance(level, a, b);
      if (got != expected)
        return fail(cfg.level_id + " " + level.encode(a) + " vs " + level.encode(b) + ": " + fmt(got) +
                    " != " + fmt(expected));
      if (expected <= 3) {
        // cross-check the all-pairs table by trying every move sequence
        const auto fw = oracle::enumerate_shortest(level, a, b, 3);
        const auto bw = oracle::enumerate_shortest(level, b, a, 3);
        const int lit = std::min(fw.value_or(99), bw.value_or(99));
        if (lit != expected) return fail(cfg.level_id + " enumeration disagrees with all-pairs table");
        ++literal;
      }
    }
  }
  const double secs = seconds_since(t0);
  if (levels < 3 || secs >= 60) return fail("levels " + std::to_string(levels) + ", " + fmt(secs) + " s");
  return pass(std::to_string(pairs) + " pairs on " + std::to_string(levels) + " levels exact (" +
              std::to_string(literal) + " also by literal enumeration), " + fmt(secs) + " s");
}

Outcome metric_axioms() {
  std::mt19937_64 rng(99);
  std::vector<Level> levels;
  for (const auto& c : oracle::tiny_levels()) levels.emplace_back(c);
  levels.emplace_back(fixtures::demo_level_config());
  levels.emplace_back(fixtures::strategy_level_config());
  for (int i = 0; i < 1000; ++i) {
    const Level& level = levels[static_cast<std::size_t>(i) % levels.size()];
    const auto a = oracle::random_state(level, rng), b = oracle::random_state(level, rng);
    const double ab = state_distance(level, a, b), ba = state_distance(level, b, a);
    if (state_distance(level, a, a) != 0) return fail("d(s,s) != 0 for " + level.encode(a));
    if (ab != ba) return fail("asymmetric on " + level.id());
    if (ab < 0) return fail("negative distance on " + level.id());
  }
  return pass("1000 pairs: identity, symmetry, non-negativity");
}

Outcome dtw_oracle() {
  std::mt19937_64 rng(7);
  const auto cfgs = oracle::tiny_levels();
  std::vector<Level> levels(cfgs.begin(), cfgs.end());
  std::vector<oracle::AllPairs> tables;
  for (const auto& l : levels) tables.emplace_back(l);
  for (int i = 0; i < 200; ++i) {
    const std::size_t li = static_cast<std::size_t>(i) % levels.size();
    const Level& level = levels[li];
    const auto a = oracle::random_walk_states(level, rng, 6), b = oracle::random_walk_states(level, rng, 6);
    const auto dc = DistanceConfig{}.resolved(level, 6);
    const double expected = oracle::reference_dtw(
        a, b, [&](const GameState& x, const GameState& y) { return tables[li].distance(x, y, dc.bfs_depth_cap, dc.big); },
        dc.big);
    const double got = dtw_distance(a, b, level, dc);
    if (got != expected) return fail("pair " + std::to_string(i) + ": " + fmt(got) + " != " + fmt(expected));
  }
  return pass("200 pairs (lengths <= 6) equal to the reference recursion");
}

Outcome dtw_structure() {
  std::size_t matrices = 0, cells = 0;
  auto check = [&](const Level& level, const std::vector<UniqueSequence>& seqs) -> std::optional<std::string> {
    const auto m = build_distance_matrix(seqs, level, {}, 2);
    ++matrices;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (m.at(i, i) != 0) return level.id() + " diagonal";
      for (std::size_t j = 0; j < m.size(); ++j, ++cells)
        if (m.at(i, j) != m.at(j, i)) return level.id() + " asymmetric";
    }
    return std::nullopt;
  };
  for (std::uint64_t seed = 1; seed <= 4; ++seed)
    for (auto cfg : {fixtures::demo_level_config(), fixtures::tiny_level_config(), fixtures::strategy_level_config()}) {
      Level level(cfg);
      if (auto err = check(level, dedup_sequences(generate_synthetic_traces(level, Policy::mixed, 60, seed))))
        return fail(*err);
    }
  Level strat(fixtures::strategy_level_config());
  if (auto err = check(strat, dedup_sequences(fixtures::strategy_corpus(strat)))) return fail(*err);
  return pass(std::to_string(matrices) + " matrices, " + std::to_string(cells) + " cells");
}

Outcome strategy_ordering() {
  Level level(fixtures::strategy_level_config());
  const auto seqs = dedup_sequences(fixtures::strategy_corpus(level));
  if (seqs.size() != 4) return fail("expected 4 sequences");
  oracle::AllPairs ap(level);
  std::size_t longest = 0;
  for (const auto& s : seqs) longest = std::max(longest, s.states.size());
  const auto dc = DistanceConfig{}.resolved(level, longest);
  auto D = [&](std::size_t i, std::size_t j) {
    return oracle::reference_dtw(
        seqs[i].states, seqs[j].states,
        [&](const GameState& x, const GameState& y) { return ap.distance(x, y, dc.bfs_depth_cap, dc.big); }, dc.big);
  };
  // ranks: 0 collect-key, 1 one-step, 2 one-bonus, 3 two-bonus
  const double near = D(0, 1), far = D(0, 3);
  const auto m = build_distance_matrix(seqs, level, {});
  if (m.at(0, 1) != near || m.at(0, 3) != far) return fail("library matrix disagrees with oracle");
  if (!(near < far)) return fail("D(key, one-step) = " + fmt(near) + " not < D(key, two-bonus) = " + fmt(far));
  return pass("D(collect-key, one-step) = " + fmt(near) + " < D(collect-key, two-bonus) = " + fmt(far));
}

Outcome popularity_accounting() {
  std::size_t corpora = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    std::ostringstream log;
    std::vector<Level> lv;
    for (auto cfg : {fixtures::demo_level_config(), fixtures::tiny_level_config(), fixtures::strategy_level_config()}) {
      Level level(cfg);
      write_trace_log(log, generate_synthetic_traces(level, Policy::mixed, 30 + seed * 7, seed));
      lv.push_back(level);
    }
    std::istringstream in(log.str());
    const auto result = parse_trace_log(in, make_level_map(lv));
    std::size_t total = 0;
    for (const auto& [id, traces] : segment_by_level(result.traces)) {
      const auto seqs = dedup_sequences(traces);
      std::size_t sum = 0;
      for (std::size_t i = 0; i < seqs.size(); ++i) {
        sum += seqs[i].popularity;
        if (seqs[i].sequence_id != static_cast<int>(i)) return fail("rank labels not 0..U-1 on " + id);
        if (i && seqs[i - 1].popularity < seqs[i].popularity) return fail("rank 0 not most popular on " + id);
      }
      if (sum != traces.size()) return fail("popularity sum mismatch on " + id);
      total += sum;
      ++corpora;
    }
    if (total != result.traces.size()) return fail("total popularity != accepted traces");
  }
  return pass(std::to_string(corpora) + " level corpora: sum of popularity = accepted traces, ranks 0..U-1");
}

Outcome flow_conservation() {
  std::size_t nodes = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const auto cfgs = std::vector{fixtures::demo_level_config(), fixtures::tiny_level_config(),
                                  fixtures::strategy_level_config()};
    Level level(cfgs[seed % 3]);
    const auto policy = static_cast<Policy>(seed % 5);
    const auto g = build_state_graph(level, dedup_sequences(generate_synthetic_traces(level, policy, 40, seed)));
    const auto bad = node_flow_check(g);
    if (!bad.empty())
      return fail("seed " + std::to_string(seed) + " node " + std::to_string(bad[0].node_id) + " in " +
                  std::to_string(bad[0].inflow) + " out " + std::to_string(bad[0].outflow));
    nodes += g.nodes.size();
  }
  return pass("30 random corpora, " + std::to_string(nodes) + " nodes balanced");
}

Outcome smacof() {
  std::mt19937_64 rng(5);
  std::size_t steps = 0;
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 3 + rng() % 20;
    std::uniform_real_distribution<double> u(0.1, 20.0);
    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) d[i * n + j] = d[j * n + i] = u(rng);
    LayoutConfig cfg;
    cfg.seed = rng();
    const auto r = stress_mds_layout(d, n, cfg);
    for (std::size_t i = 1; i < r.stress_history.size(); ++i, ++steps)
      if (r.stress_history[i] > r.stress_history[i - 1] + 1e-12)
        return fail("matrix " + std::to_string(t) + " iteration " + std::to_string(i) + " stress rose");
  }
  const std::vector<double> tri{0, 3, 3, 3, 0, 3, 3, 3, 0};
  LayoutConfig cfg;
  cfg.iterations = 1000;
  cfg.convergence_epsilon = 1e-15;
  const auto r = stress_mds_layout(tri, 3, cfg);
  double worst = 0;
  for (auto [i, j] : {std::pair{0, 1}, {1, 2}, {0, 2}})
    worst = std::max(worst, std::abs(distance(r.positions[i], r.positions[j]) - 3));
  if (!(worst < 1e-6)) return fail("equilateral error " + std::to_string(worst));
  std::ostringstream os;
  os << "50 matrices, " << steps << " iterations non-increasing; equilateral error " << worst;
  return pass(os.str());
}

Outcome layout_performance() {
  std::mt19937_64 rng(11);
  LayoutGraph g{2000, {}, {}};
  for (int e = 0; e < 4000; ++e) g.edges.emplace_back(rng() % 2000, rng() % 2000);
  const auto t0 = Clock::now();
  const auto r = force_directed_layout(g, LayoutConfig{});
  const double secs = seconds_since(t0);
  if (secs >= 5) return fail(fmt(secs) + " s for " + std::to_string(r.iterations_run) + " iterations");
  return pass("2000 nodes, 4000 edges, " + std::to_string(r.iterations_run) + " iterations in " + fmt(secs) + " s");
}

Outcome end_to_end_determinism(const std::filesystem::path& work) {
  using glyph::testing::quoted;
  using glyph::testing::run;
  for (const char* tag : {"a", "b"}) {
    const auto dir = work / tag;
    std::filesystem::create_directories(dir);
    auto r = run(cli + " gen --level " + quoted(levels_dir / "fig3.json") + " --level " +
                 quoted(levels_dir / "t1.json") + " --level " + quoted(levels_dir / "strategies.json") +
                 " --policy mixed --count 100 --seed 7 --out " + quoted(dir / "log.jsonl"));
    if (r.exit_code != 0) return fail("gen: " + r.output);
    r = run(cli + " precompute --log " + quoted(dir / "log.jsonl") + " --levels " + quoted(levels_dir) +
            " --out " + quoted(dir / "ds") + " --seed 3 --jobs 2");
    if (r.exit_code != 0) return fail("precompute: " + r.output);
  }
  const auto a = glyph::testing::snapshot(work / "a" / "ds"), b = glyph::testing::snapshot(work / "b" / "ds");
  if (a.empty()) return fail("empty dataset");
  if (a != b) return fail("dataset directories differ");
  if (glyph::testing::read_file(work / "a" / "log.jsonl") != glyph::testing::read_file(work / "b" / "log.jsonl"))
    return fail("trace logs differ");
  return pass(std::to_string(a.size()) + " files byte-identical across two runs");
}

Outcome service_over_http(const std::filesystem::path& dataset) {
  Service service(dataset);
  const int port = service.bind_any_port("127.0.0.1");
  if (port <= 0) return fail("could not bind");
  std::thread t([&] { service.listen_after_bind(); });
  service.wait_until_ready();
  std::string err;
  std::size_t requests = 0;
  {
    httplib::Client c("127.0.0.1", port);
    auto get = [&](const std::string& path, int status) -> nlohmann::json {
      ++requests;
      auto res = c.Get(path);
      if (!res) {
        err = path + ": no response";
        return {};
      }
      if (res->status != status) err = path + ": status " + std::to_string(res->status);
      return nlohmann::json::parse(res->body, nullptr, false);
    };
    const auto levels = get("/api/levels", 200);
    if (err.empty() && levels["levels"].size() != 3) err = "expected 3 levels";
    const auto sg = get("/api/levels/fig3/state-graph", 200);
    if (err.empty() && sg["nodes"].empty()) err = "empty state graph";
    const auto top = get("/api/levels/T1/sequences?top=3", 200);
    if (err.empty() && (top["selections"].empty() || top["selections"].size() > 3)) err = "top=3 returned wrong count";
    get("/api/levels/missing/state-graph", 404);
    get("/api/levels/fig3/sequence-graph", 200);
    get("/api/levels/fig3/info", 200);
    auto res = c.Post("/api/levels/fig3/pins", {{session_header, "acceptance"}},
                      R"({"node_id":0,"x":5,"y":6,"view":"state"})", "application/json");
    ++requests;
    if (err.empty() && (!res || res->status != 200)) err = "pin rejected";
  }
  service.stop();
  t.join();
  if (!err.empty()) return fail(err);
  return pass(std::to_string(requests) + " HTTP requests returned the expected status and body, no UI build involved");
}

}  // namespace

int main() {
  glyph::testing::TempDir work("acceptance");
  struct Criterion {
    std::string name;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {"condensation-example", condensation_example},
      {"mechanics-arithmetic", mechanics_arithmetic},
      {"state-metric-oracle", state_metric_oracle},
      {"metric-axioms", metric_axioms},
      {"dtw-oracle", dtw_oracle},
      {"dtw-structure", dtw_structure},
      {"strategy-ordering", strategy_ordering},
      {"popularity-accounting", popularity_accounting},
      {"flow-conservation", flow_conservation},
      {"smacof-monotone", smacof},
      {"layout-performance", layout_performance},
      {"end-to-end-determinism", [&] { return end_to_end_determinism(work.path()); }},
      {"service-over-http", [&] { return service_over_http(work.path() / "a" / "ds"); }},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size()
            << " acceptance criteria passed" << std::endl;
  return failures == 0 ? 0 : 1;
}
