#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace legalarg {

enum class AnalysisOutcome { RequiresAbstention, RequiresCorrection, ValidArgument };
enum class AbstentionReason { NoCommonFactors, UnfavorableOutcome, Both };

std::string_view to_string(AnalysisOutcome outcome);      // "REQUIRES_ABSTENTION", ...
std::string_view describe(AbstentionReason reason);       // protocol sentence
std::string_view to_string(AbstentionReason reason);      // "NoCommonFactors", ...

struct CorrectionDetails {
  std::vector<std::string> fabricated_or_misrepresented_factors;
  std::optional<std::string> misrepresented_tsc_outcome;
  std::optional<std::string> other_issues_for_correction;

  bool operator==(const CorrectionDetails&) const = default;
};

// Factor Analyst verdict on one ply. abstention_reason is set exactly when the
// outcome is RequiresAbstention, correction exactly when RequiresCorrection.
struct AnalystReport {
  AnalysisOutcome outcome = AnalysisOutcome::ValidArgument;
  std::string summary;
  std::optional<AbstentionReason> abstention_reason;
  std::optional<CorrectionDetails> correction;

  bool operator==(const AnalystReport&) const = default;
};

enum class AccuracyGrade { Accurate, MinorInaccuracies, MajorInaccuracies };
enum class StrengthGrade { Strong, Moderate, Weak };
enum class UtilizationGrade { Excellent, Good, Fair, Poor };

std::string_view to_string(AccuracyGrade grade);     // "Minor Inaccuracies"
std::string_view to_string(StrengthGrade grade);
std::string_view to_string(UtilizationGrade grade);

struct PolisherReport {
  std::string argument_segment_type;
  AccuracyGrade accuracy = AccuracyGrade::Accurate;
  StrengthGrade strength = StrengthGrade::Strong;
  UtilizationGrade utilization = UtilizationGrade::Excellent;
  std::string feedback_summary;
  bool revision_needed = false;
  std::optional<std::string> instructions_for_developer;  // iff revision_needed

  bool operator==(const PolisherReport&) const = default;
};

// Strict schema validation of the agents' JSON replies. Enum values match
// case-insensitively with spaces and underscores ignored. Surrounding prose,
// code fences and // comments are tolerated. Throws MalformedReportError.
AnalystReport parse_analyst_report(std::string_view text);
PolisherReport parse_polisher_report(std::string_view text);

std::string serialize_analyst_report(const AnalystReport& report);
std::string serialize_polisher_report(const PolisherReport& report);

}  // namespace legalarg
