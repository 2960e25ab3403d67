// Command line front end. One subcommand per pipeline stage plus `run`,
// which executes every stage in order. All state lives in the workspace
// directory, so any stage can be re-run later against the same workspace.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "polarlens/config.hpp"
#include "polarlens/pipeline.hpp"
#include "polarlens/version.hpp"

namespace {

int run_stage(const std::string& stage, const polarlens::config::RunConfig& cfg,
              const std::string& workspace) {
  using polarlens::ExitCode;
  // the lock is advisory and per process; a second run against the same
  // workspace fails fast instead of interleaving writes
  polarlens::io::WorkspaceLock lock(workspace);
  polarlens::pipeline::Runner runner(cfg, workspace);
  if (stage == "run") return static_cast<int>(runner.run_all());
  if (stage == "synth")
    runner.synth_stage();
  else if (stage == "ingest")
    runner.ingest_stage();
  else if (stage == "graph")
    runner.graph_stage();
  else if (stage == "score")
    runner.score_stage();
  else if (stage == "entropy")
    runner.entropy_stage();
  else if (stage == "stats")
    runner.stats_stage();
  else if (stage == "temporal")
    runner.temporal_stage();
  else if (stage == "report")
    runner.report_stage();
  const bool partial = runner.manifest().status() == "partial";
  return static_cast<int>(partial ? ExitCode::partial : ExitCode::success);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"polarization analytics over debunking discourse"};
  app.set_version_flag("--version",
                       std::string("polarlens ") + polarlens::kVersion);
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  std::string workspace;
  std::optional<uint64_t> seed;
  bool svg = false;
  app.add_option("--config", config_path, "run configuration (JSON)")
      ->required();
  app.add_option("--workspace", workspace,
                 "artifact directory; overrides output_dir from the config");
  app.add_option("--seed", seed, "override the configured RNG seed");
  app.add_flag("--svg", svg, "also render SVG figures");

  const struct {
    const char* name;
    const char* help;
  } stages[] = {
      {"run", "execute every stage in order and write the manifest"},
      {"synth", "generate a synthetic corpus into the workspace"},
      {"ingest", "filter raw NDJSON into per-cohort record files"},
      {"graph", "build interaction graphs and classify users"},
      {"score", "score authored text per user"},
      {"entropy", "per-user entropy and minimal-interval scans"},
      {"stats", "hypothesis tests over the score distributions"},
      {"temporal", "daily series, segments, events, engagement"},
      {"report", "bubble table, densities, regressions, violins"},
  };
  for (const auto& s : stages) app.add_subcommand(s.name, s.help);

  CLI11_PARSE(app, argc, argv);

  try {
    const std::string stage = app.get_subcommands().at(0)->get_name();
    const bool reads_raw_inputs =
        stage == "run" || stage == "ingest" || stage == "synth";
    polarlens::config::RunConfig cfg =
        polarlens::config::load_config(config_path, reads_raw_inputs);
    if (seed) cfg.seed = *seed;
    if (svg) cfg.svg = true;
    const std::string ws = workspace.empty() ? cfg.output_dir : workspace;
    return run_stage(stage, cfg, ws);
  } catch (const polarlens::Error& e) {
    std::fprintf(stderr, "polarlens: %s\n", e.what());
    return static_cast<int>(polarlens::ExitCode::fatal);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "polarlens: unexpected: %s\n", e.what());
    return static_cast<int>(polarlens::ExitCode::fatal);
  }
}
