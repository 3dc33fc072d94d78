#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "legalarg/error.hpp"
#include "legalarg/experiment.hpp"

namespace {

using namespace legalarg;

struct Flags {
  std::string config;
  std::string mode;
  std::string methods;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  bool overwrite = false;
  std::string fixture_dir;
  bool verbose = false;
};

Overrides to_overrides(const Flags& f) {
  Overrides o;
  if (!f.mode.empty()) o.modes = parse_mode_list(f.mode);
  if (!f.methods.empty()) o.methods = parse_method_list(f.methods);
  o.seed = f.seed;
  o.workers = f.workers;
  o.overwrite = f.overwrite;
  if (!f.fixture_dir.empty()) o.fixture_dir = f.fixture_dir;
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Three-ply legal argument generation experiments"};
  app.require_subcommand(1);
  app.fallthrough();

  Flags flags;
  app.add_option("--config", flags.config, "Experiment config (JSON)")->required();
  app.add_option("--mode", flags.mode, "Scenario modes: all or a comma list");
  app.add_option("--methods", flags.methods, "Methods: all or a comma list of SA,SA-EP,MA,RMA");
  app.add_option("--seed", flags.seed, "Master seed for gen-cases");
  app.add_option("--workers", flags.workers, "Parallel runs")->check(CLI::PositiveNumber);
  app.add_flag("--overwrite", flags.overwrite, "Rerun or regenerate existing outputs");
  app.add_option("--fixture-dir", flags.fixture_dir, "Record or replay LLM responses here");
  app.add_flag("-v,--verbose", flags.verbose, "Debug logging");

  auto* gen = app.add_subcommand("gen-cases", "Generate case triple datasets");
  auto* run = app.add_subcommand("run", "Run methods over the datasets");
  auto* evaluate = app.add_subcommand("evaluate", "Extract factors from completed arguments");
  auto* report = app.add_subcommand("report", "Aggregate transcripts into metric tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  auto logger = spdlog::stderr_color_mt("legalarg");
  spdlog::set_default_logger(logger);
  spdlog::set_level(flags.verbose ? spdlog::level::debug : spdlog::level::info);

  try {
    const Overrides overrides = to_overrides(flags);
    ExperimentConfig config = load_config(flags.config);
    apply_overrides(config, overrides);
    if (gen->parsed()) return cmd_gen_cases(config, overrides, std::cout);
    if (run->parsed()) return cmd_run(config, overrides, std::cout);
    if (evaluate->parsed()) return cmd_evaluate(config, overrides, std::cout);
    if (report->parsed()) return cmd_report(config, overrides, std::cout);
  } catch (const ConfigError& e) {
    spdlog::error("config: {}", e.what());
    return kExitConfig;
  } catch (const MalformedTranscriptError& e) {
    spdlog::error("{}", e.what());
    return kExitEvaluation;
  } catch (const EvaluationError& e) {
    spdlog::error("{}", e.what());
    return kExitEvaluation;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 1;
}
