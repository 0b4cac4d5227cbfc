// glyph: generate fixtures, ingest telemetry, precompute datasets, export
// views and serve the HTTP API.

#include <csignal>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "glyph/dataset.hpp"
#include "glyph/ingest.hpp"
#include "glyph/service.hpp"
#include "glyph/synth.hpp"

namespace {

int fail(const std::string& stage, const std::string& msg) {
  std::cerr << "glyph " << stage << ": error: " << msg << "\n";
  return 1;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  glyph::write_text(path, text);
}

glyph::Service* running_service = nullptr;

void handle_signal(int) {
  if (running_service) running_service->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"glyph: play-trace strategy analytics (state graph, sequence graph, query API)", "glyph"};
  app.require_subcommand(1, 1);

  // gen
  std::vector<std::string> gen_levels;
  std::string gen_policy = "mixed", gen_out = "-";
  std::size_t gen_count = 100;
  std::uint64_t gen_seed = 1;
  auto* gen = app.add_subcommand("gen", "Write a synthetic trace log (line-delimited JSON)");
  gen->add_option("--level", gen_levels, "Level file (JSON); repeat for several levels")->required()->check(CLI::ExistingFile);
  gen->add_option("--policy", gen_policy, "optimal | greedy-key | one-step | random | mixed")->capture_default_str();
  gen->add_option("--count", gen_count, "Traces per level")->capture_default_str();
  gen->add_option("--seed", gen_seed, "Random seed")->capture_default_str();
  gen->add_option("--out", gen_out, "Output file, - for stdout")->capture_default_str();

  // ingest
  std::string ing_log, ing_levels;
  bool ing_json = false;
  auto* ingest = app.add_subcommand("ingest", "Parse and validate a trace log; print a report");
  ingest->add_option("--log", ing_log, "Trace log (line-delimited JSON)")->required()->check(CLI::ExistingFile);
  ingest->add_option("--levels", ing_levels, "Directory of level files")->required()->check(CLI::ExistingDirectory);
  ingest->add_flag("--json", ing_json, "Print the report as JSON");

  // precompute
  std::string pre_log, pre_levels, pre_out;
  glyph::PrecomputeConfig pre_cfg;
  std::uint64_t pre_seed = 1;
  int pre_iterations = 300;
  auto* pre = app.add_subcommand("precompute", "Build a dataset directory (graphs, matrices, layouts)");
  pre->add_option("--log", pre_log, "Trace log (line-delimited JSON)")->required()->check(CLI::ExistingFile);
  pre->add_option("--levels", pre_levels, "Directory of level files")->required()->check(CLI::ExistingDirectory);
  pre->add_option("--out", pre_out, "Dataset directory to (re)create")->required();
  pre->add_option("--seed", pre_seed, "Layout seed")->capture_default_str();
  pre->add_option("--iterations", pre_iterations, "Layout iterations")->capture_default_str()->check(CLI::PositiveNumber);
  pre->add_option("--jobs", pre_cfg.jobs, "Worker threads for the distance matrix")->capture_default_str()->check(CLI::PositiveNumber);
  pre->add_option("--bfs-depth-cap", pre_cfg.distance.bfs_depth_cap, "State search depth cap (0 = wheel size + items)")
      ->capture_default_str();
  pre->add_option("--big", pre_cfg.distance.big, "Stand-in for infinite distance (0 = derived)")->capture_default_str();
  std::string pre_seq_algo = "stress_mds";
  pre->add_option("--sequence-layout", pre_seq_algo, "stress_mds | force_directed")
      ->capture_default_str()
      ->check(CLI::IsMember({"stress_mds", "force_directed"}));

  // export
  std::string exp_dataset, exp_level, exp_what = "state-graph", exp_view = "state", exp_out = "-";
  auto* exp = app.add_subcommand("export", "Export a level view: graph JSON, matrix CSV or SVG snapshot");
  exp->add_option("--dataset", exp_dataset, "Dataset directory")->required()->check(CLI::ExistingDirectory);
  exp->add_option("--level", exp_level, "Level id")->required();
  exp->add_option("--what", exp_what, "state-graph | sequence-graph | matrix | svg")
      ->capture_default_str()
      ->check(CLI::IsMember({"state-graph", "sequence-graph", "matrix", "svg"}));
  exp->add_option("--view", exp_view, "View for svg: state | sequence")
      ->capture_default_str()
      ->check(CLI::IsMember({"state", "sequence"}));
  exp->add_option("--out", exp_out, "Output file, - for stdout")->capture_default_str();

  // serve
  std::string srv_dataset, srv_bind = "127.0.0.1:8080", srv_static;
  long srv_ttl = 3600;
  auto* serve = app.add_subcommand("serve", "Serve the HTTP API over a dataset directory");
  serve->add_option("--dataset", srv_dataset, "Dataset directory")->required();
  serve->add_option("--bind", srv_bind, "host:port to listen on")->capture_default_str();
  serve->add_option("--session-ttl", srv_ttl, "Seconds before an idle pin session expires")->capture_default_str();
  serve->add_option("--static", srv_static, "Directory with UI assets to serve at /");

  CLI11_PARSE(app, argc, argv);

  if (*gen) {
    try {
      const auto policy = glyph::parse_policy(gen_policy);
      std::ostringstream log;
      for (std::size_t i = 0; i < gen_levels.size(); ++i) {
        const auto level = glyph::load_level(gen_levels[i]);
        const auto traces = glyph::generate_synthetic_traces(level, policy, gen_count, gen_seed + i);
        glyph::write_trace_log(log, traces, 1'700'000'000'000 + static_cast<std::int64_t>(i) * 86'400'000);
      }
      write_output(gen_out, log.str());
      return 0;
    } catch (const std::exception& e) {
      return fail("gen", e.what());
    }
  }

  if (*ingest) {
    try {
      const auto levels = glyph::make_level_map(glyph::load_levels_dir(ing_levels));
      std::ifstream in(ing_log);
      if (!in) return fail("ingest", "cannot open " + ing_log);
      const auto result = glyph::parse_trace_log(in, levels);
      auto buckets = glyph::segment_by_level(result.traces);
      if (ing_json) {
        glyph::ojson j;
        j["lines_read"] = result.lines_read;
        j["traces_seen"] = result.traces_seen;
        j["traces_accepted"] = result.traces.size();
        j["traces_excluded"] = result.traces_excluded;
        glyph::ojson per_level = glyph::ojson::object();
        for (const auto& [id, traces] : buckets)
          per_level[id] = {{"traces", traces.size()}, {"unique_sequences", glyph::dedup_sequences(traces).size()}};
        j["levels"] = per_level;
        j["warnings"] = glyph::warnings_to_json(result.warnings);
        std::cout << j.dump(2) << "\n";
      } else {
        std::cout << "lines read: " << result.lines_read << "\n"
                  << "traces accepted: " << result.traces.size() << "\n"
                  << "traces excluded: " << result.traces_excluded << "\n";
        for (const auto& [id, traces] : buckets)
          std::cout << "level " << id << ": " << traces.size() << " traces, "
                    << glyph::dedup_sequences(traces).size() << " unique sequences\n";
        std::cout << "warnings: " << result.warnings.size() << "\n";
        for (const auto& w : result.warnings) {
          std::cout << "  ";
          if (w.line) std::cout << "line " << w.line << ": ";
          if (!w.trace_id.empty()) std::cout << "[" << w.trace_id << "] ";
          std::cout << w.message << "\n";
        }
      }
      return 0;
    } catch (const std::exception& e) {
      return fail("ingest", e.what());
    }
  }

  if (*pre) {
    try {
      pre_cfg.state_layout.seed = pre_seed;
      pre_cfg.state_layout.iterations = pre_iterations;
      pre_cfg.sequence_layout.seed = pre_seed;
      pre_cfg.sequence_layout.iterations = pre_iterations;
      pre_cfg.sequence_layout.algorithm =
          pre_seq_algo == "stress_mds" ? glyph::LayoutAlgorithm::stress_mds : glyph::LayoutAlgorithm::force_directed;
      const auto report = glyph::precompute(pre_log, pre_levels, pre_out, pre_cfg);
      std::cout << "wrote " << pre_out << ": " << report.level_ids.size() << " level(s), " << report.accepted_traces
                << " traces accepted, " << report.excluded_traces << " excluded, " << report.warnings.size()
                << " warning(s)\n";
      return 0;
    } catch (const std::exception& e) {
      return fail("precompute", e.what());
    }
  }

  if (*exp) {
    try {
      const std::filesystem::path dir = std::filesystem::path(exp_dataset) / exp_level;
      if (!std::filesystem::is_directory(dir)) return fail("export", "level '" + exp_level + "' not in dataset");
      if (exp_what == "state-graph") {
        write_output(exp_out, glyph::read_json(dir / "state-graph.json").dump(2) + "\n");
      } else if (exp_what == "sequence-graph") {
        write_output(exp_out, glyph::read_json(dir / "sequence-graph.json").dump(2) + "\n");
      } else if (exp_what == "matrix") {
        write_output(exp_out, glyph::matrix_csv(glyph::matrix_from_json(glyph::read_json(dir / "sequence-graph.json"))));
      } else if (exp_view == "state") {
        write_output(exp_out, glyph::state_graph_svg(glyph::read_json(dir / "state-graph.json")));
      } else {
        write_output(exp_out, glyph::sequence_graph_svg(glyph::read_json(dir / "sequence-graph.json")));
      }
      return 0;
    } catch (const std::exception& e) {
      return fail("export", e.what());
    }
  }

  if (*serve) {
    try {
      const auto colon = srv_bind.rfind(':');
      if (colon == std::string::npos) return fail("serve", "--bind must be host:port");
      const std::string host = srv_bind.substr(0, colon);
      const int port = std::stoi(srv_bind.substr(colon + 1));
      glyph::ServiceOptions opts;
      opts.session_ttl = std::chrono::seconds(srv_ttl);
      opts.static_dir = srv_static;
      glyph::Service service(srv_dataset, opts);
      if (!service.bind(host, port)) return fail("serve", "cannot bind " + srv_bind);
      running_service = &service;
      std::signal(SIGINT, handle_signal);
      std::signal(SIGTERM, handle_signal);
      std::cerr << "glyph serve: listening on http://" << srv_bind << "\n";
      service.listen_after_bind();
      running_service = nullptr;
      return 0;
    } catch (const std::exception& e) {
      return fail("serve", e.what());
    }
  }
  return 0;
}
