// cueaudit: run the comparison-bias audit stage by stage.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "cueaudit/log.hpp"
#include "cueaudit/run.hpp"
#include "cueaudit/synth.hpp"
#include "cueaudit/text.hpp"

using namespace cueaudit;

namespace {

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string cache_dir;
  std::string log_level = "warn";
};

log::Level parse_level(const std::string& s) {
  if (s == "debug") return log::Level::debug;
  if (s == "info") return log::Level::info;
  if (s == "warn") return log::Level::warn;
  if (s == "error") return log::Level::error;
  if (s == "off") return log::Level::off;
  throw ConfigError("unknown log level " + s);
}

Run open_run(const Globals& g) {
  if (g.config.empty()) throw ConfigError("--config is required");
  RunConfig cfg = RunConfig::load(g.config);
  if (g.seed) cfg.seed = *g.seed;
  if (!g.cache_dir.empty()) cfg.cache_dir = g.cache_dir;
  return Run(std::move(cfg));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audit pairwise comparison answers against the model's own numbers and surface cues"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--config", g.config, "Run configuration (JSON)");
  app.add_option("--seed", g.seed, "Override the root seed");
  app.add_option("--cache-dir", g.cache_dir, "Override the response cache directory");
  app.add_option("--log-level", g.log_level, "debug, info, warn, error or off");

  std::function<void(Run&)> action;
  auto stage = [&](const char* name, const char* help, void (Run::*fn)()) {
    app.add_subcommand(name, help)->callback([&action, fn] { action = [fn](Run& r) { (r.*fn)(); }; });
  };
  stage("sample", "Draw comparison pairs from each catalog", &Run::sample);
  stage("render", "Render pairwise and numeric prompts", &Run::render);
  stage("query", "Send prompts to every configured model", &Run::query);
  stage("parse", "Parse completions into analysis records", &Run::parse);
  stage("analyze", "Compute every report table", &Run::analyze);
  stage("probe-swap", "Re-ask Case 2 prompts with the entities swapped", &Run::probe_swap);
  stage("run", "sample, render, query, parse and analyze", &Run::run_all);

  std::string table;
  std::string out_path;
  auto* report = app.add_subcommand("report", "Print or copy one report table");
  report->add_option("table", table, "metrics, numex, sensitivity, bos, meta, meta_summary, cases, effects, swap")
      ->required();
  report->add_option("-o,--out", out_path, "Write to a file instead of stdout");
  report->callback([&] {
    action = [&](Run& r) {
      const auto path = r.report_path(table);
      std::ifstream in(path, std::ios::binary);
      if (out_path.empty()) {
        std::cout << in.rdbuf();
      } else {
        std::ofstream out(out_path, std::ios::binary);
        out << in.rdbuf();
      }
    };
  });

  SynthOptions synth;
  std::string synth_dir;
  auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic world and a mock-model config");
  synth_cmd->add_option("--out", synth_dir, "Output directory")->required();
  synth_cmd->add_option("--datasets", synth.datasets, "Bundled dataset names")->delimiter(',');
  synth_cmd->add_option("--entities", synth.entities, "Entities per dataset");
  synth_cmd->add_option("--popularity-correlation", synth.popularity_correlation);
  synth_cmd->add_option("--association-correlation", synth.association_correlation);
  synth_cmd->add_option("--belief-noise", synth.belief_noise);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    log::set_level(parse_level(g.log_level));
    if (synth_cmd->parsed()) {
      synth.seed = g.seed.value_or(0);
      write_world(generate_world(synth), synth, synth_dir);
      std::cerr << "wrote " << synth_dir << "/config.json\n";
      return 0;
    }
    Run run = open_run(g);
    action(run);
    std::cerr << "run " << run.config().run_id << ": " << run.backend_calls() << " backend calls, "
              << run.stages_skipped() << " stages up to date\n";
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
