#include "legalarg/experiment.hpp"

#include <cstdlib>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "legalarg/case_generator.hpp"
#include "legalarg/error.hpp"
#include "text_util.hpp"

namespace legalarg {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

[[noreturn]] void bad(const std::string& what) { throw ConfigError(what); }

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    bad(fmt::format("\"{}\" has the wrong type", key));
  }
}

fs::path resolve(const fs::path& base, const fs::path& p) {
  return p.is_absolute() || base.empty() ? p : base / p;
}

std::vector<ScenarioMode> modes_from_json(const json& j) {
  if (j.is_string()) return parse_mode_list(j.get<std::string>());
  if (!j.is_array()) bad("dataset.modes must be a string or a list");
  std::vector<ScenarioMode> out;
  for (const json& m : j) {
    if (!m.is_string()) bad("dataset.modes must hold strings");
    for (ScenarioMode mode : parse_mode_list(m.get<std::string>())) out.push_back(mode);
  }
  return out;
}

std::vector<Method> methods_from_json(const json& j) {
  if (j.is_string()) return parse_method_list(j.get<std::string>());
  if (!j.is_array()) bad("methods must be a string or a list");
  std::vector<Method> out;
  for (const json& m : j) {
    if (!m.is_string()) bad("methods must hold strings");
    for (Method method : parse_method_list(m.get<std::string>())) out.push_back(method);
  }
  return out;
}

GenerationParams params_from_json(const json& j) {
  GenerationParams p;
  if (j.is_null()) return p;
  if (!j.is_object()) bad("backend params must be an object");
  p.max_tokens = get_or(j, "max_tokens", p.max_tokens);
  p.temperature = get_or(j, "temperature", p.temperature);
  p.top_p = get_or(j, "top_p", p.top_p);
  p.frequency_penalty = get_or(j, "frequency_penalty", p.frequency_penalty);
  p.presence_penalty = get_or(j, "presence_penalty", p.presence_penalty);
  return p;
}

BackendSpec backend_from_json(const std::string& name, const json& j, const fs::path& base) {
  if (!j.is_object()) bad(fmt::format("backend \"{}\" must be an object", name));
  BackendSpec b;
  b.name = name;
  const std::string kind = detail::lower(get_or<std::string>(j, "kind", "mock"));
  if (kind == "openai") {
    b.kind = BackendKind::OpenAI;
  } else if (kind == "fixture") {
    b.kind = BackendKind::Fixture;
  } else if (kind == "mock") {
    b.kind = BackendKind::Mock;
  } else {
    bad(fmt::format("backend \"{}\": unknown kind \"{}\"", name, kind));
  }
  b.endpoint = get_or(j, "endpoint", b.endpoint);
  b.model = get_or(j, "model", name);
  b.api_key_env = get_or(j, "api_key_env", b.api_key_env);
  b.max_retries = get_or(j, "max_retries", b.max_retries);
  b.timeout_seconds = get_or(j, "timeout_seconds", b.timeout_seconds);
  b.params = params_from_json(j.value("params", json()));
  if (j.contains("fixture_dir")) b.fixture_dir = resolve(base, get_or<std::string>(j, "fixture_dir", ""));
  const std::string behavior = get_or<std::string>(j, "behavior", "faithful");
  const auto mb = mock_behavior_from_string(behavior);
  if (!mb) bad(fmt::format("backend \"{}\": unknown behavior \"{}\"", name, behavior));
  b.behavior = *mb;
  b.fabrications = get_or(j, "fabrications", b.behavior == MockBehavior::Fabricating ? 1 : 0);
  b.seed = get_or<std::uint64_t>(j, "seed", 0);
  if (b.kind == BackendKind::Fixture && b.fixture_dir.empty()) {
    bad(fmt::format("backend \"{}\": fixture backends need fixture_dir", name));
  }
  if (b.max_retries < 0 || b.timeout_seconds <= 0 || b.fabrications < 0) {
    bad(fmt::format("backend \"{}\": negative limits", name));
  }
  return b;
}

std::string mode_list(const std::vector<ScenarioMode>& modes) {
  std::vector<std::string> names;
  for (ScenarioMode m : modes) names.emplace_back(to_string(m));
  return detail::join(names, ",");
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const fs::path& path, std::string_view content) {
  fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(fmt::format("cannot write {}", tmp.string()));
    out << content;
    if (!out.flush()) throw std::runtime_error(fmt::format("cannot write {}", tmp.string()));
  }
  fs::rename(tmp, path);
}

}  // namespace

const BackendSpec* ExperimentConfig::find_backend(std::string_view name) const {
  for (const BackendSpec& b : backends) {
    if (b.name == name) return &b;
  }
  return nullptr;
}

std::vector<ScenarioMode> parse_mode_list(std::string_view text) {
  if (detail::iequals(detail::trim(text), "all")) return {kAllModes.begin(), kAllModes.end()};
  std::vector<ScenarioMode> out;
  std::string_view rest = text;
  while (!rest.empty()) {
    const std::size_t comma = rest.find(',');
    const std::string_view item = detail::trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view() : rest.substr(comma + 1);
    if (item.empty()) continue;
    const auto mode = mode_from_string(item);
    if (!mode) bad(fmt::format("unknown mode \"{}\"", item));
    if (std::find(out.begin(), out.end(), *mode) == out.end()) out.push_back(*mode);
  }
  if (out.empty()) bad("empty mode list");
  return out;
}

std::vector<Method> parse_method_list(std::string_view text) {
  if (detail::iequals(detail::trim(text), "all")) return {kAllMethods.begin(), kAllMethods.end()};
  std::vector<Method> out;
  std::string_view rest = text;
  while (!rest.empty()) {
    const std::size_t comma = rest.find(',');
    const std::string_view item = detail::trim(rest.substr(0, comma));
    rest = comma == std::string_view::npos ? std::string_view() : rest.substr(comma + 1);
    if (item.empty()) continue;
    const auto method = method_from_string(item);
    if (!method) bad(fmt::format("unknown method \"{}\"", item));
    if (std::find(out.begin(), out.end(), *method) == out.end()) out.push_back(*method);
  }
  if (out.empty()) bad("empty method list");
  return out;
}

ExperimentConfig parse_config(std::string_view text, const fs::path& base_dir) {
  json j;
  try {
    j = json::parse(text, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    bad(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) bad("config must be a JSON object");

  ExperimentConfig c;
  if (j.contains("dataset")) {
    const json& d = j.at("dataset");
    if (!d.is_object()) bad("dataset must be an object");
    if (d.contains("modes")) c.dataset.modes = modes_from_json(d.at("modes"));
    c.dataset.complexity = get_or(d, "complexity", c.dataset.complexity);
    c.dataset.count = get_or(d, "count", c.dataset.count);
    c.dataset.master_seed = get_or(d, "master_seed", c.dataset.master_seed);
    if (d.contains("catalog")) {
      c.dataset.catalog = resolve(base_dir, get_or<std::string>(d, "catalog", ""));
    }
  }
  if (j.contains("methods")) c.methods = methods_from_json(j.at("methods"));
  if (j.contains("backends")) {
    const json& b = j.at("backends");
    if (!b.is_object()) bad("backends must be an object keyed by name");
    for (const auto& [name, spec] : b.items()) c.backends.push_back(backend_from_json(name, spec, base_dir));
  }
  if (j.contains("generators")) {
    const json& g = j.at("generators");
    if (g.is_string()) {
      c.generators.push_back(g.get<std::string>());
    } else if (g.is_array()) {
      for (const json& name : g) {
        if (!name.is_string()) bad("generators must hold backend names");
        c.generators.push_back(name.get<std::string>());
      }
    } else {
      bad("generators must be a list of backend names");
    }
  }
  c.evaluator = get_or(j, "evaluator", c.evaluator);
  if (j.contains("agents")) {
    const json& a = j.at("agents");
    if (!a.is_object()) bad("agents must be an object");
    c.analyst = get_or(a, "analyst", c.analyst);
    c.polisher = get_or(a, "polisher", c.polisher);
  }
  c.workers = get_or(j, "workers", c.workers);
  c.output_dir = resolve(base_dir, get_or<std::string>(j, "output_dir", c.output_dir.string()));
  c.timestamps = get_or(j, "timestamps", c.timestamps);
  const std::string policy = detail::squash(get_or<std::string>(j, "aggregation", "pooled"));
  if (policy == "pooled") {
    c.aggregation = AggregationPolicy::Pooled;
  } else if (policy == "meanpertriple" || policy == "mean") {
    c.aggregation = AggregationPolicy::MeanPerTriple;
  } else {
    bad(fmt::format("unknown aggregation \"{}\"", policy));
  }

  if (c.dataset.catalog) {
    try {
      c.catalog = std::make_shared<const FactorCatalog>(load_catalog_file(*c.dataset.catalog));
    } catch (const CatalogFormatError& e) {
      bad(std::string("catalog: ") + e.what());
    }
  }
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  return parse_config(read_file(path), path.parent_path());
}

void apply_overrides(ExperimentConfig& config, const Overrides& o) {
  if (o.modes) config.dataset.modes = *o.modes;
  if (o.methods) config.methods = *o.methods;
  if (o.seed) config.dataset.master_seed = *o.seed;
  if (o.workers) config.workers = *o.workers;
  validate_config(config);
}

void validate_config(const ExperimentConfig& c) {
  if (c.dataset.count < 1) bad("dataset.count must be at least 1");
  if (c.dataset.complexity < 1) bad("dataset.complexity must be at least 1");
  if (c.dataset.modes.empty()) bad("dataset.modes is empty");
  if (c.methods.empty()) bad("methods is empty");
  if (c.workers < 1) bad("workers must be at least 1");
  std::set<std::string> names;
  for (const BackendSpec& b : c.backends) {
    if (b.name.empty() || b.name.find_first_of("/\\") != std::string::npos || b.name == "oracle" ||
        b.name == "canonical") {
      bad(fmt::format("invalid backend name \"{}\"", b.name));
    }
    if (!names.insert(b.name).second) bad(fmt::format("duplicate backend \"{}\"", b.name));
  }
  for (const std::string& g : c.generators) {
    if (c.find_backend(g) == nullptr) bad(fmt::format("unknown generator backend \"{}\"", g));
  }
  const auto check_chat = [&](const std::string& role, const std::string& name,
                              const std::string& builtin) {
    if (name == builtin) return;
    const BackendSpec* b = c.find_backend(name);
    if (b == nullptr) bad(fmt::format("{}: unknown backend \"{}\"", role, name));
    if (b->kind == BackendKind::Mock) bad(fmt::format("{}: backend \"{}\" is a mock developer", role, name));
  };
  check_chat("evaluator", c.evaluator, "canonical");
  check_chat("agents.analyst", c.analyst, "oracle");
  check_chat("agents.polisher", c.polisher, "oracle");
}

fs::path dataset_path(const ExperimentConfig& config, ScenarioMode mode) {
  return config.output_dir / "dataset" / fmt::format("{}.jsonl", to_string(mode));
}

fs::path transcript_path(const ExperimentConfig& config, Method method, std::string_view generator) {
  return config.output_dir / "transcripts" / fmt::format("{}__{}.jsonl", to_string(method), generator);
}

fs::path report_dir(const ExperimentConfig& config) { return config.output_dir / "report"; }

std::shared_ptr<ChatBackend> make_backend(const BackendSpec& spec,
                                          const std::optional<fs::path>& fixture_dir) {
  switch (spec.kind) {
    case BackendKind::Mock:
      bad(fmt::format("backend \"{}\" is a mock developer, not a chat backend", spec.name));
    case BackendKind::Fixture:
      return std::make_shared<FixtureBackend>(fixture_dir ? *fixture_dir / spec.name : spec.fixture_dir,
                                              spec.model);
    case BackendKind::OpenAI: {
      const char* key = spec.api_key_env.empty() ? nullptr : std::getenv(spec.api_key_env.c_str());
      if (key == nullptr || *key == '\0') {
        if (fixture_dir) {
          spdlog::info("{}: {} unset, replaying fixtures only", spec.name, spec.api_key_env);
          return std::make_shared<FixtureBackend>(*fixture_dir / spec.name, spec.model);
        }
        bad(fmt::format("backend \"{}\": environment variable {} is not set", spec.name,
                        spec.api_key_env));
      }
      HttpBackendConfig http;
      http.endpoint = spec.endpoint;
      http.model = spec.model;
      http.api_key = key;
      http.max_retries = spec.max_retries;
      http.timeout = std::chrono::seconds(spec.timeout_seconds);
      auto live = std::make_shared<HttpChatBackend>(std::move(http));
      if (!fixture_dir) return live;
      return std::make_shared<FixtureBackend>(*fixture_dir / spec.name, spec.model, live);
    }
  }
  bad("unreachable backend kind");
}

// ---------------------------------------------------------------------------

int cmd_gen_cases(const ExperimentConfig& config, const Overrides& overrides, std::ostream& out) {
  const FactorCatalog& catalog = config.factor_catalog();
  for (ScenarioMode mode : config.dataset.modes) {
    std::vector<CaseTriple> triples;
    try {
      triples = generate_set(mode, config.dataset.complexity, config.dataset.count,
                             config.dataset.master_seed, catalog);
    } catch (const InfeasibleParametersError& e) {
      bad(fmt::format("{}: {}", to_string(mode), e.what()));
    }
    std::size_t ok = 0;
    for (const CaseTriple& t : triples) {
      try {
        validate_triple(t, catalog);
        if (classify_triple(t, catalog) == mode) ++ok;
      } catch (const Error& e) {
        spdlog::error("{}: {}", t.id, e.what());
      }
    }
    const fs::path path = dataset_path(config, mode);
    const std::string content = serialize_dataset(triples);
    if (fs::exists(path) && !overrides.overwrite && read_file(path) != content) {
      bad(fmt::format("{} exists with different contents; pass --overwrite to replace it",
                      path.string()));
    }
    write_file_atomic(path, content);
    out << fmt::format("{}: {} triples, {}/{} satisfy the mode contract -> {}\n", to_string(mode),
                       triples.size(), ok, triples.size(), path.string());
    if (ok != triples.size()) throw ContractViolation("generated triple violates its mode contract");
  }
  return kExitOk;
}

int cmd_run(const ExperimentConfig& config, const Overrides& overrides, std::ostream& out) {
  if (config.generators.empty()) bad("no generators configured");
  const FactorCatalog& catalog = config.factor_catalog();

  std::vector<CaseTriple> triples;
  for (ScenarioMode mode : config.dataset.modes) {
    const fs::path path = dataset_path(config, mode);
    if (!fs::exists(path)) bad(fmt::format("{} is missing; run gen-cases first", path.string()));
    std::vector<CaseTriple> part;
    try {
      part = parse_dataset(read_file(path));
    } catch (const DatasetFormatError& e) {
      bad(fmt::format("{}: {}", path.string(), e.what()));
    }
    triples.insert(triples.end(), part.begin(), part.end());
  }

  std::map<std::string, std::shared_ptr<ChatBackend>> chat;
  const auto chat_backend = [&](const std::string& name) {
    auto it = chat.find(name);
    if (it == chat.end()) it = chat.emplace(name, make_backend(*config.find_backend(name), overrides.fixture_dir)).first;
    return it->second;
  };

  std::unique_ptr<Analyst> analyst;
  std::unique_ptr<Polisher> polisher;
  const bool any_rma = std::find(config.methods.begin(), config.methods.end(), Method::RMA) !=
                       config.methods.end();
  if (any_rma) {
    const BackendSpec* a = config.find_backend(config.analyst);
    analyst = a == nullptr ? std::unique_ptr<Analyst>(std::make_unique<OracleAnalyst>(catalog))
                           : std::make_unique<LlmAnalyst>(chat_backend(a->name), a->params, catalog);
    const BackendSpec* p = config.find_backend(config.polisher);
    polisher = p == nullptr ? std::unique_ptr<Polisher>(std::make_unique<OraclePolisher>(catalog))
                            : std::make_unique<LlmPolisher>(chat_backend(p->name), p->params, catalog);
  }

  PipelineOptions options;
  options.catalog = &catalog;
  options.timestamps = config.timestamps;

  std::size_t failed = 0;
  for (const std::string& generator : config.generators) {
    const BackendSpec& spec = *config.find_backend(generator);
    std::unique_ptr<Developer> developer;
    if (spec.kind == BackendKind::Mock) {
      developer = std::make_unique<MockDeveloper>(spec.behavior, spec.fabrications, spec.seed, catalog);
    } else {
      developer = std::make_unique<LlmDeveloper>(chat_backend(generator), spec.params, catalog);
    }
    const AgentSet agents{developer.get(), analyst.get(), polisher.get()};
    for (Method method : config.methods) {
      BatchOptions batch;
      batch.workers = config.workers;
      batch.overwrite = overrides.overwrite;
      batch.method = method;
      batch.model = developer->name();
      const fs::path path = transcript_path(config, method, generator);
      fs::create_directories(path.parent_path());
      const BatchSummary s = run_batch(
          triples, [&](const CaseTriple& t) { return run_method(method, t, agents, options); }, path,
          batch);
      failed += s.failed;
      out << fmt::format("{} {}: {} triples, {} skipped, {} completed, {} abstained, {} failed\n",
                         to_string(method), generator, s.total, s.skipped, s.completed, s.abstained,
                         s.failed);
    }
  }
  return failed > 0 ? kExitPartial : kExitOk;
}

int cmd_evaluate(const ExperimentConfig& config, const Overrides& overrides, std::ostream& out) {
  std::shared_ptr<ChatBackend> backend;
  if (config.evaluator != "canonical") {
    backend = make_backend(*config.find_backend(config.evaluator), overrides.fixture_dir);
  }
  std::size_t failures = 0;
  for (const std::string& generator : config.generators) {
    for (Method method : config.methods) {
      const fs::path path = transcript_path(config, method, generator);
      if (!fs::exists(path)) continue;
      std::vector<RunRecord> records = read_transcript(path);
      const std::size_t f =
          evaluate_records(records, backend.get(), config.factor_catalog(), config.workers);
      failures += f;
      std::string content;
      for (const RunRecord& r : records) content += serialize_run_record(r) + "\n";
      write_file_atomic(path, content);
      out << fmt::format("{} {}: {} records, {} extraction failures\n", to_string(method),
                         generator, records.size(), f);
    }
  }
  return failures > 0 ? kExitEvaluation : kExitOk;
}

int cmd_report(const ExperimentConfig& config, const Overrides& /*overrides*/, std::ostream& out) {
  std::vector<RunRecord> records;
  for (const std::string& generator : config.generators) {
    for (Method method : config.methods) {
      const fs::path path = transcript_path(config, method, generator);
      if (!fs::exists(path)) continue;
      std::vector<RunRecord> part = read_transcript(path);
      for (RunRecord& r : part) {
        if (std::find(config.dataset.modes.begin(), config.dataset.modes.end(), r.scenario) !=
            config.dataset.modes.end()) {
          records.push_back(std::move(r));
        }
      }
    }
  }

  ReportMetadata meta;
  meta.policy = config.aggregation;
  meta.lines.push_back(fmt::format("dataset: modes={} complexity={} count={} master_seed={}",
                                   mode_list(config.dataset.modes), config.dataset.complexity,
                                   config.dataset.count, config.dataset.master_seed));
  meta.lines.push_back(fmt::format("evaluator: {}", config.evaluator));
  meta.lines.push_back(fmt::format("agents: analyst={} polisher={}", config.analyst, config.polisher));
  meta.lines.push_back(fmt::format("records: {}", records.size()));

  const RenderedReport report = render_report(aggregate(records, config.aggregation), meta);
  const fs::path dir = report_dir(config);
  write_file_atomic(dir / "acc_h.csv", report.acc_h_csv);
  write_file_atomic(dir / "rec_u.csv", report.rec_u_csv);
  write_file_atomic(dir / "abstention.csv", report.abstention_csv);
  write_file_atomic(dir / "counts.csv", report.counts_csv);
  write_file_atomic(dir / "report.txt", report.text);
  out << report.text;
  return kExitOk;
}

}  // namespace legalarg
