#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "legalarg/agents.hpp"
#include "legalarg/backend.hpp"
#include "legalarg/cases.hpp"
#include "legalarg/evaluation.hpp"
#include "legalarg/factor_catalog.hpp"
#include "legalarg/pipelines.hpp"

namespace legalarg {

enum class BackendKind { OpenAI, Fixture, Mock };

struct BackendSpec {
  std::string name;
  BackendKind kind = BackendKind::Mock;
  // openai
  std::string endpoint = "https://api.openai.com/v1";
  std::string model;
  std::string api_key_env = "OPENAI_API_KEY";
  int max_retries = 3;
  int timeout_seconds = 120;
  GenerationParams params;
  // fixture (and record-through for openai)
  std::filesystem::path fixture_dir;
  // mock developer
  MockBehavior behavior = MockBehavior::Faithful;
  int fabrications = 0;
  std::uint64_t seed = 0;
};

struct DatasetSpec {
  std::vector<ScenarioMode> modes{kAllModes.begin(), kAllModes.end()};
  int complexity = 5;
  int count = 90;
  std::uint64_t master_seed = 0;
  std::optional<std::filesystem::path> catalog;
};

struct ExperimentConfig {
  DatasetSpec dataset;
  std::vector<Method> methods{kAllMethods.begin(), kAllMethods.end()};
  std::vector<BackendSpec> backends;
  std::vector<std::string> generators;
  std::string evaluator = "canonical";  // or a backend name
  std::string analyst = "oracle";       // or a backend name
  std::string polisher = "oracle";      // or a backend name
  int workers = 1;
  std::filesystem::path output_dir = "out";
  bool timestamps = false;
  AggregationPolicy aggregation = AggregationPolicy::Pooled;

  std::shared_ptr<const FactorCatalog> catalog;  // null means the built-in one

  const FactorCatalog& factor_catalog() const { return catalog ? *catalog : load_catalog(); }
  const BackendSpec* find_backend(std::string_view name) const;
};

// JSON (comments allowed). Relative paths resolve against `base_dir`.
// Throws ConfigError.
ExperimentConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);

// Command-line flags layered over the file.
struct Overrides {
  std::optional<std::vector<ScenarioMode>> modes;
  std::optional<std::vector<Method>> methods;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<std::filesystem::path> fixture_dir;
  bool overwrite = false;
};

// Throws ConfigError.
void apply_overrides(ExperimentConfig& config, const Overrides& overrides);
void validate_config(const ExperimentConfig& config);

// "all" or a comma-separated list. Throws ConfigError.
std::vector<ScenarioMode> parse_mode_list(std::string_view text);
std::vector<Method> parse_method_list(std::string_view text);

std::filesystem::path dataset_path(const ExperimentConfig& config, ScenarioMode mode);
std::filesystem::path transcript_path(const ExperimentConfig& config, Method method,
                                      std::string_view generator);
std::filesystem::path report_dir(const ExperimentConfig& config);

// Chat backend for a non-mock spec. With `fixture_dir`, openai backends record
// through fixtures in <fixture_dir>/<name>, and replay only when the API key
// is unset.
std::shared_ptr<ChatBackend> make_backend(const BackendSpec& spec,
                                          const std::optional<std::filesystem::path>& fixture_dir);

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitPartial = 3,
  kExitEvaluation = 4,
};

// Each returns an exit code; progress goes to `out`.
int cmd_gen_cases(const ExperimentConfig& config, const Overrides& overrides, std::ostream& out);
int cmd_run(const ExperimentConfig& config, const Overrides& overrides, std::ostream& out);
int cmd_evaluate(const ExperimentConfig& config, const Overrides& overrides, std::ostream& out);
int cmd_report(const ExperimentConfig& config, const Overrides& overrides, std::ostream& out);

}  // namespace legalarg
