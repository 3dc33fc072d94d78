#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "legalarg/argument.hpp"
#include "legalarg/backend.hpp"
#include "legalarg/cases.hpp"
#include "legalarg/pipelines.hpp"

namespace legalarg {

// Exact fraction with a positive denominator. Equality is by value.
struct Ratio {
  std::int64_t num = 0;
  std::int64_t den = 1;

  Ratio reduced() const;
  double percent() const { return 100.0 * static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Ratio& a, const Ratio& b);
  friend bool operator<(const Ratio& a, const Ratio& b);
  friend Ratio operator+(const Ratio& a, const Ratio& b);
};

// 100·num/den with two decimals, ties rounded away from zero: "92.22".
std::string format_percent(const Ratio& ratio);

struct MetricInputs {
  FactorSets ground_truth;
  ExtractedFactors extracted;
  bool abstained = false;
  ScenarioMode scenario = ScenarioMode::Arguable;
};

struct MetricCounts {
  std::int64_t n_gt = 0;    // Σ|F_GT,c|
  std::int64_t n_h = 0;     // Σ|F_Ext,c ∖ F_GT,c|
  std::int64_t n_util = 0;  // Σ|F_Ext,c ∩ F_GT,c|

  bool operator==(const MetricCounts&) const = default;
};

// Membership by factor id; duplicate mentions count once.
MetricCounts count_metrics(const FactorSets& ground_truth, const ExtractedFactors& extracted);

// 1 - N_h/N_gt; negative when N_h > N_gt. Throws DegenerateInputError on N_gt = 0.
Ratio hallucination_accuracy_ratio(const MetricInputs& inputs);
// N_util/N_gt, or 0 for an abstained run. Throws DegenerateInputError on N_gt = 0.
Ratio factor_recall_ratio(const MetricInputs& inputs);
// N_sa/N_ta over the cell's Completed and Abstained records; Failed runs are
// left out of both counts. Throws EmptyCellError when nothing remains.
Ratio abstention_ratio_exact(const std::vector<RunRecord>& records);

// The same as percentages.
double hallucination_accuracy(const MetricInputs& inputs);
double factor_recall(const MetricInputs& inputs);
double abstention_ratio(const std::vector<RunRecord>& records);

// Distiller reply: an object with keys c1, c2, c3 holding factor strings.
// Ids are read from the tokens; unknown ids are kept (they are
// hallucinations). Throws MalformedOutputError.
ExtractedFactors parse_distiller_output(std::string_view text);

// Asks the evaluator backend to list factors per case, with one reprompt.
// Throws ContractViolation for an abstention and EvaluationError when the
// reply stays malformed.
ExtractedFactors extract_factors_llm(const ThreePlyArgument& argument, ChatBackend& backend,
                                     int* reprompts = nullptr);

// Fills `extracted` for Completed records (canonical extractor when
// `backend` is null) and clears it for the others. Returns the number of
// records whose extraction failed; those stay unscored. Up to `workers`
// records are extracted at once.
std::size_t evaluate_records(std::vector<RunRecord>& records, ChatBackend* backend,
                             const FactorCatalog& catalog = load_catalog(), int workers = 1);

enum class AggregationPolicy { Pooled, MeanPerTriple };

std::string_view to_string(AggregationPolicy policy);

struct CellReport {
  std::string model;
  Method method = Method::SA;
  ScenarioMode scenario = ScenarioMode::Arguable;
  std::size_t triples = 0;
  std::size_t completed = 0;
  std::size_t abstained = 0;
  std::size_t failed = 0;
  std::size_t unscored = 0;  // completed without extracted factors
  MetricCounts pooled;       // over scored completed runs
  std::optional<Ratio> acc_h;          // scored completed runs only
  std::optional<Ratio> rec_u;          // arguable cells only
  std::optional<Ratio> ratio_abstain;  // mismatched and non-arguable cells only
  bool negative_acc_h = false;
};

// One cell per (model, method, scenario), sorted by model, method order and
// scenario order.
std::vector<CellReport> aggregate(const std::vector<RunRecord>& records,
                                  AggregationPolicy policy = AggregationPolicy::Pooled);

struct ReportMetadata {
  AggregationPolicy policy = AggregationPolicy::Pooled;
  std::vector<std::string> lines;  // extra "key: value" lines
};

struct RenderedReport {
  std::string acc_h_csv;
  std::string rec_u_csv;
  std::string abstention_csv;
  std::string counts_csv;
  std::string text;  // aligned tables, best value per model and scenario marked '*'
};

RenderedReport render_report(const std::vector<CellReport>& cells, const ReportMetadata& meta);

}  // namespace legalarg
