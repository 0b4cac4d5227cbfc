#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "glyph/fixtures.hpp"
#include "glyph/ingest.hpp"
#include "glyph/state_graph.hpp"
#include "glyph/synth.hpp"

using namespace glyph;
using fixtures::ccw;
using fixtures::cw;

namespace {

LevelMap levels_of(std::initializer_list<LevelConfig> cfgs) {
  std::vector<Level> v;
  for (const auto& c : cfgs) v.emplace_back(c);
  return make_level_map(v);
}

std::string log_of(const std::vector<PlayTrace>& traces) {
  std::ostringstream os;
  write_trace_log(os, traces);
  return os.str();
}

IngestResult ingest(const std::string& text, const LevelMap& levels) {
  std::istringstream in(text);
  return parse_trace_log(in, levels);
}

bool has_warning(const IngestResult& r, const std::string& needle) {
  return std::any_of(r.warnings.begin(), r.warnings.end(),
                     [&](const IngestWarning& w) { return w.message.find(needle) != std::string::npos; });
}

}  // namespace

TEST(Ingest, GroupsEventsIntoOneTrace) {
  const auto levels = levels_of({fixtures::tiny_level_config()});
  const std::string text =
      R"({"player_id":"p","session_id":"s","level_id":"T1","seq_no":2,"ts":3,"move":{"cog":0,"dir":"cw","turns":1}})"
      "\n"
      R"({"player_id":"p","session_id":"s","level_id":"T1","seq_no":0,"ts":1,"move":{"cog":0,"dir":"cw","turns":1}})"
      "\n\n"
      R"({"player_id":"p","session_id":"s","level_id":"T1","seq_no":1,"ts":2,"move":{"cog":0,"dir":"ccw","turns":1}})"
      "\n"
      R"({"player_id":"p","session_id":"s","level_id":"T1","seq_no":3,"ts":4,"move":{"cog":0,"dir":"ccw","turns":4}})"
      "\n";
  auto r = ingest(text, levels);
  EXPECT_TRUE(r.warnings.empty());
  EXPECT_EQ(r.lines_read, 4u);
  ASSERT_EQ(r.traces.size(), 1u);
  EXPECT_EQ(r.traces[0].trace_id, "T1/p/s");
  EXPECT_EQ(r.traces[0].moves.size(), 4u);
  EXPECT_EQ(r.traces[0].states.size(), 5u);
  EXPECT_EQ(r.traces[0].states[1].marker, 1);
  EXPECT_EQ(r.traces[0].states[2].marker, 0);
  EXPECT_EQ(r.latest_ts, 4);
}

TEST(Ingest, FourMovesAfterOneStepTraceFormTheExampleShape) {
  Level t1(fixtures::tiny_level_config());
  auto trace = make_trace(t1, "p", "s", {cw(1), cw(1), ccw(1), cw(1)});
  auto r = ingest(log_of({trace}), levels_of({fixtures::tiny_level_config()}));
  ASSERT_EQ(r.traces.size(), 1u);
  EXPECT_EQ(r.traces[0].moves.size(), 4u);
  EXPECT_EQ(r.traces[0].states.size(), 5u);
}

TEST(Ingest, UnknownLevelIsWarnedAndSkipped) {
  Level t1(fixtures::tiny_level_config());
  auto good = make_trace(t1, "p", "s", {cw(3)});
  auto bad = good;
  bad.level_id = "nope";
  auto r = ingest(log_of({good, bad}), levels_of({fixtures::tiny_level_config()}));
  EXPECT_EQ(r.traces.size(), 1u);
  EXPECT_EQ(r.traces_excluded, 1u);
  EXPECT_TRUE(has_warning(r, "unknown level 'nope'"));
}

TEST(Ingest, CompletedFlagMismatch) {
  Level t1(fixtures::tiny_level_config());
  auto trace = make_trace(t1, "p", "s", {cw(1), cw(1), cw(1)});
  auto text = log_of({trace});
  const auto at = text.rfind("\"completed\":true");
  ASSERT_NE(at, std::string::npos);
  text.replace(at, 16, "\"completed\":false");
  auto r = ingest(text, levels_of({fixtures::tiny_level_config()}));
  EXPECT_TRUE(r.traces.empty());
  EXPECT_TRUE(has_warning(r, "replay mismatch"));
}

TEST(Ingest, MarkerMismatch) {
  const std::string text =
      R"({"player_id":"p","session_id":"s","level_id":"T1","seq_no":0,"move":{"cog":0,"dir":"cw","turns":2},"marker":3})"
      "\n";
  auto r = ingest(text, levels_of({fixtures::tiny_level_config()}));
  EXPECT_TRUE(r.traces.empty());
  EXPECT_TRUE(has_warning(r, "replay mismatch: recorded marker 3"));
}

TEST(Ingest, MalformedLinesAreReported) {
  Level t1(fixtures::tiny_level_config());
  auto text = log_of({make_trace(t1, "p", "s", {cw(3)})});
  text += "{not json\n";
  text += R"({"player_id":"p","session_id":"s2","level_id":"T1","seq_no":0,"move":{"cog":0,"dir":"up","turns":2}})"
          "\n";
  text += R"({"player_id":"p","session_id":"s3","level_id":"T1","seq_no":"0","move":{"cog":0,"dir":"cw","turns":2}})"
          "\n";
  auto r = ingest(text, levels_of({fixtures::tiny_level_config()}));
  EXPECT_EQ(r.traces.size(), 1u);
  EXPECT_EQ(r.warnings.size(), 3u);
  for (const auto& w : r.warnings) EXPECT_NE(w.message.find("malformed line"), std::string::npos);
  EXPECT_EQ(r.warnings[0].line, 2u);
}

TEST(Ingest, RejectsInvalidAndPostCompletionMoves) {
  const std::string text =
      R"({"player_id":"a","session_id":"s","level_id":"T1","seq_no":0,"move":{"cog":0,"dir":"cw","turns":9}})"
      "\n"
      R"({"player_id":"b","session_id":"s","level_id":"T1","seq_no":0,"move":{"cog":0,"dir":"cw","turns":3}})"
      "\n"
      R"({"player_id":"b","session_id":"s","level_id":"T1","seq_no":1,"move":{"cog":0,"dir":"cw","turns":1}})"
      "\n"
      R"({"player_id":"c","session_id":"s","level_id":"T1","seq_no":0,"move":{"cog":0,"dir":"cw","turns":1}})"
      "\n"
      R"({"player_id":"c","session_id":"s","level_id":"T1","seq_no":0,"move":{"cog":0,"dir":"cw","turns":1}})"
      "\n";
  auto r = ingest(text, levels_of({fixtures::tiny_level_config()}));
  EXPECT_TRUE(r.traces.empty());
  EXPECT_EQ(r.traces_seen, 3u);
  EXPECT_TRUE(has_warning(r, "invalid move cog0:cw:9"));
  EXPECT_TRUE(has_warning(r, "move after level completion"));
  EXPECT_TRUE(has_warning(r, "duplicate seq_no 0"));
}

TEST(Ingest, RoundTripsSyntheticLogs) {
  Level fig(fixtures::demo_level_config());
  auto traces = generate_synthetic_traces(fig, Policy::mixed, 60, 4);
  auto r = ingest(log_of(traces), levels_of({fixtures::demo_level_config()}));
  EXPECT_TRUE(r.warnings.empty());
  ASSERT_EQ(r.traces.size(), traces.size());
  std::sort(traces.begin(), traces.end(), [](auto& a, auto& b) { return a.trace_id < b.trace_id; });
  for (std::size_t i = 0; i < traces.size(); ++i) {
    EXPECT_EQ(r.traces[i].trace_id, traces[i].trace_id);
    EXPECT_EQ(r.traces[i].states, traces[i].states);
    EXPECT_EQ(r.traces[i].completed, traces[i].completed);
  }
}

TEST(Segment, BucketsByLevel) {
  EXPECT_TRUE(segment_by_level({}).empty());
  Level a(fixtures::tiny_level_config());
  auto ta = make_trace(a, "1", "s", {cw(1)});
  auto tb = ta;
  tb.level_id = "B";
  auto buckets = segment_by_level({ta, ta, tb});
  EXPECT_EQ(buckets["T1"].size(), 2u);
  EXPECT_EQ(buckets["B"].size(), 1u);
}

TEST(Segment, SyntheticCountsAddUp) {
  std::vector<PlayTrace> all;
  std::size_t i = 0;
  for (auto cfg : {fixtures::demo_level_config(), fixtures::tiny_level_config(), fixtures::strategy_level_config()}) {
    auto t = generate_synthetic_traces(Level(cfg), Policy::mixed, 30 + 5 * i, i);
    all.insert(all.end(), t.begin(), t.end());
    ++i;
  }
  ASSERT_EQ(all.size(), 105u);
  std::size_t total = 0;
  for (const auto& [id, v] : segment_by_level(all)) total += v.size();
  EXPECT_EQ(total, 105u);
}

TEST(Dedup, ThreeIdenticalPlusOne) {
  Level t1(fixtures::tiny_level_config());
  std::vector<PlayTrace> traces{make_trace(t1, "1", "a", {cw(3)}), make_trace(t1, "2", "a", {cw(3)}),
                                make_trace(t1, "3", "a", {cw(1), cw(2)}), make_trace(t1, "4", "a", {cw(3)})};
  auto seqs = dedup_sequences(traces);
  ASSERT_EQ(seqs.size(), 2u);
  EXPECT_EQ(seqs[0].popularity, 3u);
  EXPECT_EQ(seqs[1].popularity, 1u);
  EXPECT_EQ(seqs[0].sequence_id, 0);
  EXPECT_EQ(seqs[1].sequence_id, 1);
  EXPECT_EQ(seqs[0].member_player_ids, (std::vector<std::string>{"1", "2", "4"}));
  EXPECT_TRUE(dedup_sequences(std::vector<PlayTrace>{}).empty());
}

TEST(Dedup, FixtureFrequencies) {
  Level level(fixtures::strategy_level_config());
  auto seqs = dedup_sequences(fixtures::strategy_corpus(level));
  ASSERT_EQ(seqs.size(), 4u);
  const auto lists = fixtures::strategy_move_lists();
  const std::vector<std::size_t> freq{50, 20, 5, 2};
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(seqs[i].sequence_id, static_cast<int>(i));
    EXPECT_EQ(seqs[i].popularity, freq[i]);
    EXPECT_EQ(seqs[i].key, move_list_key(lists[i]));
    EXPECT_TRUE(seqs[i].completed);
  }
}

TEST(Dedup, TiesBreakByFirstTraceId) {
  Level t1(fixtures::tiny_level_config());
  std::vector<PlayTrace> traces{make_trace(t1, "9", "a", {cw(3)}), make_trace(t1, "1", "a", {cw(1), cw(2)})};
  auto seqs = dedup_sequences(traces);
  EXPECT_EQ(seqs[0].key, "cog0:cw:1,cog0:cw:2");
}

TEST(Dedup, MixedLevelsRejected) {
  Level t1(fixtures::tiny_level_config());
  auto a = make_trace(t1, "1", "a", {cw(3)});
  auto b = a;
  b.level_id = "other";
  EXPECT_THROW(dedup_sequences(std::vector<PlayTrace>{a, b}), InvalidInput);
}

TEST(Dedup, PropertyConservationAndShuffleInvariance) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Level level(seed % 2 ? fixtures::demo_level_config() : fixtures::strategy_level_config());
    auto traces = generate_synthetic_traces(level, Policy::mixed, 40 + seed, seed);
    auto seqs = dedup_sequences(traces);
    std::size_t total = 0;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
      total += seqs[i].popularity;
      EXPECT_EQ(seqs[i].sequence_id, static_cast<int>(i));
      if (i) {
        EXPECT_GE(seqs[i - 1].popularity, seqs[i].popularity);
      }
    }
    EXPECT_EQ(total, traces.size());
    std::mt19937_64 rng(seed);
    std::shuffle(traces.begin(), traces.end(), rng);
    auto again = dedup_sequences(traces);
    ASSERT_EQ(again.size(), seqs.size());
    for (std::size_t i = 0; i < seqs.size(); ++i) EXPECT_EQ(again[i].key, seqs[i].key);
  }
}

// ---------------------------------------------------------------------------
// state graph

TEST(StateGraph, SingleMove) {
  Level t1(fixtures::tiny_level_config());
  auto seqs = dedup_sequences(std::vector<PlayTrace>{make_trace(t1, "1", "a", {cw(3)})});
  auto g = build_state_graph(t1, seqs);
  ASSERT_EQ(g.nodes.size(), 2u);
  ASSERT_EQ(g.edges.size(), 1u);
  EXPECT_EQ(g.edges[0].traversals, 1u);
  EXPECT_EQ(g.edges[0].action_label, "cog0:cw:3");
  EXPECT_EQ(g.nodes[0].node_class, NodeClass::start);
  EXPECT_EQ(g.nodes[1].node_class, NodeClass::end);
  EXPECT_EQ(g.nodes[1].terminations, 1u);
  EXPECT_EQ(g.paths.at(0).node_ids, (std::vector<std::size_t>{0, 1}));
}

TEST(StateGraph, SharedPrefixSumsCounts) {
  Level t1(fixtures::tiny_level_config());
  std::vector<PlayTrace> traces{make_trace(t1, "1", "a", {cw(1), cw(2)}), make_trace(t1, "2", "a", {cw(1), cw(2)}),
                                make_trace(t1, "3", "a", {cw(1), ccw(5)})};
  auto g = build_state_graph(t1, dedup_sequences(traces));
  EXPECT_EQ(g.nodes[0].visits, 3u);
  EXPECT_EQ(g.nodes[1].visits, 3u);
  EXPECT_EQ(g.edges[0].traversals, 3u);
  EXPECT_TRUE(node_flow_check(g).empty());
}

TEST(StateGraph, FixtureCorpus) {
  Level level(fixtures::strategy_level_config());
  auto g = build_state_graph(level, dedup_sequences(fixtures::strategy_corpus(level)));
  EXPECT_EQ(g.nodes[0].visits, 77u);
  EXPECT_EQ(g.nodes[0].starts, 77u);
  EXPECT_EQ(std::count_if(g.nodes.begin(), g.nodes.end(),
                          [](const StateNode& n) { return n.node_class == NodeClass::start; }),
            1);
  EXPECT_TRUE(node_flow_check(g).empty());
  auto bad = g;
  bad.edges[0].traversals -= 1;
  EXPECT_EQ(node_flow_check(bad).size(), 2u);
  auto bad_one = g;
  bad_one.nodes.back().terminations += 1;
  EXPECT_EQ(node_flow_check(bad_one).size(), 1u);
}

TEST(StateGraph, FlowHoldsOnRandomCorpora) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Level level(seed % 3 == 0 ? fixtures::demo_level_config() : fixtures::strategy_level_config());
    auto seqs = dedup_sequences(generate_synthetic_traces(level, Policy::mixed, 50, seed));
    auto g = build_state_graph(level, seqs);
    EXPECT_TRUE(node_flow_check(g).empty()) << seed;
    std::uint64_t starts = 0, ends = 0;
    for (const auto& n : g.nodes) {
      starts += n.starts;
      ends += n.terminations;
      if (n.node_class == NodeClass::end) {
        for (const auto& e : g.edges) EXPECT_NE(e.from_node, n.node_id);
      }
    }
    EXPECT_EQ(starts, 50u);
    EXPECT_EQ(ends, 50u);
    for (const auto& s : seqs) EXPECT_EQ(g.paths.at(s.sequence_id).edge_ids.size(), s.moves.size());
  }
}
