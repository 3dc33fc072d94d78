#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "legalarg/agents.hpp"
#include "legalarg/argument.hpp"
#include "legalarg/cases.hpp"
#include "legalarg/reports.hpp"

namespace legalarg {

enum class Method { SA, SA_EP, MA, RMA };

inline constexpr std::array<Method, 4> kAllMethods = {Method::SA, Method::SA_EP, Method::MA,
                                                      Method::RMA};

std::string_view to_string(Method method);      // "SA", "SA-EP", "MA", "RMA"
std::string_view display_name(Method method);   // "Single Agent", ...
std::optional<Method> method_from_string(std::string_view text);
PromptVariant variant_of(Method method);

enum class RunStatus { Completed, Abstained, Failed };

std::string_view to_string(RunStatus status);
std::optional<RunStatus> status_from_string(std::string_view text);

// Why a ply was revised: the polisher asked, the analyst demanded
// correction, or both.
enum class RevisionTrigger { None, Analyst, Polisher, Both };

std::string_view to_string(RevisionTrigger trigger);

struct PlyReview {
  int ply = 1;
  std::vector<AnalystReport> analyst;    // one per round
  std::vector<PolisherReport> polisher;  // one per round
  RevisionTrigger trigger = RevisionTrigger::None;
  // The post-revision analyst still required correction.
  bool unresolved = false;

  bool operator==(const PlyReview&) const = default;
};

struct RunFailure {
  int ply = 0;  // 0 when the failure is not tied to a ply
  std::string stage;
  std::string message;

  bool operator==(const RunFailure&) const = default;
};

struct RunRecord {
  std::string triple_id;
  Method method = Method::SA;
  std::string model;
  ScenarioMode scenario = ScenarioMode::Arguable;
  FactorSets ground_truth;
  RunStatus status = RunStatus::Failed;
  std::optional<ThreePlyArgument> result;  // absent iff Failed
  std::optional<RunFailure> failure;       // present iff Failed
  std::vector<PlyReview> reviews;          // RMA only
  std::array<int, 3> revisions{};
  int reprompts = 0;
  // Filled by the evaluate step.
  std::optional<ExtractedFactors> extracted;
  std::string extractor;
  std::optional<std::string> started_at;
  std::optional<std::string> finished_at;

  bool operator==(const RunRecord&) const = default;
};

// Structural invariants: at most one revision per ply, Abstained iff the
// result is an abstention, Failed iff there is a failure and no result,
// reviews only for RMA. Throws ContractViolation.
void check_invariants(const RunRecord& record);

struct PipelineOptions {
  const FactorCatalog* catalog = &load_catalog();
  bool timestamps = false;
};

RunRecord run_sa(const CaseTriple& triple, Developer& developer, const PipelineOptions& options = {});
RunRecord run_sa_ep(const CaseTriple& triple, Developer& developer,
                    const PipelineOptions& options = {});
// Three sequential turns, each seeing the earlier plies; no reviewers.
RunRecord run_ma(const CaseTriple& triple, Developer& developer, const PipelineOptions& options = {});
// Per ply: develop, analyze, polish, then at most one revision followed by a
// second analysis and polish. An abstention verdict stops the run.
RunRecord run_rma(const CaseTriple& triple, Developer& developer, Analyst& analyst,
                  Polisher& polisher, const PipelineOptions& options = {});

struct AgentSet {
  Developer* developer = nullptr;
  Analyst* analyst = nullptr;    // RMA only
  Polisher* polisher = nullptr;  // RMA only
};

RunRecord run_method(Method method, const CaseTriple& triple, const AgentSet& agents,
                     const PipelineOptions& options = {});

// One transcript line per record.
std::string serialize_run_record(const RunRecord& record);
// Throws MalformedTranscriptError with an empty file name and line 0.
RunRecord parse_run_record(std::string_view line);
// Throws MalformedTranscriptError naming the file and line.
std::vector<RunRecord> read_transcript(const std::filesystem::path& path);

struct BatchOptions {
  int workers = 1;
  bool overwrite = false;
  // Labels for records of runs that threw.
  Method method = Method::SA;
  std::string model;
};

struct BatchSummary {
  std::size_t total = 0;
  std::size_t skipped = 0;
  std::size_t completed = 0;
  std::size_t abstained = 0;
  std::size_t failed = 0;
};

using RunFunction = std::function<RunRecord(const CaseTriple&)>;

// Runs every triple whose id is not already in the transcript (all of them
// with `overwrite`) on up to `workers` threads and appends the records in
// input order. A truncated final line left by an interrupted run is dropped.
// Exceptions escaping `run` become Failed records.
BatchSummary run_batch(const std::vector<CaseTriple>& triples, const RunFunction& run,
                       const std::filesystem::path& transcript, const BatchOptions& options);

}  // namespace legalarg
