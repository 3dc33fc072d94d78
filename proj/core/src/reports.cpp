#include "legalarg/reports.hpp"

#include <nlohmann/json.hpp>

#include "legalarg/argument.hpp"
#include "legalarg/error.hpp"
#include "text_util.hpp"

namespace legalarg {

using ojson = nlohmann::ordered_json;

std::string_view to_string(AnalysisOutcome outcome) {
  switch (outcome) {
    case AnalysisOutcome::RequiresAbstention:
      return "REQUIRES_ABSTENTION";
    case AnalysisOutcome::RequiresCorrection:
      return "REQUIRES_CORRECTION";
    case AnalysisOutcome::ValidArgument:
      return "VALID_ARGUMENT";
  }
  return "?";
}

std::string_view describe(AbstentionReason reason) {
  switch (reason) {
    case AbstentionReason::NoCommonFactors:
      return "No common factors found.";
    case AbstentionReason::UnfavorableOutcome:
      return "Cited precedent outcome is unfavorable for the arguing party.";
    case AbstentionReason::Both:
      return "Both: No common factors and unfavorable precedent outcome.";
  }
  return "?";
}

std::string_view to_string(AbstentionReason reason) {
  switch (reason) {
    case AbstentionReason::NoCommonFactors:
      return "NoCommonFactors";
    case AbstentionReason::UnfavorableOutcome:
      return "UnfavorableOutcome";
    case AbstentionReason::Both:
      return "Both";
  }
  return "?";
}

std::string_view to_string(AccuracyGrade grade) {
  switch (grade) {
    case AccuracyGrade::Accurate:
      return "Accurate";
    case AccuracyGrade::MinorInaccuracies:
      return "Minor Inaccuracies";
    case AccuracyGrade::MajorInaccuracies:
      return "Major Inaccuracies";
  }
  return "?";
}

std::string_view to_string(StrengthGrade grade) {
  switch (grade) {
    case StrengthGrade::Strong:
      return "Strong";
    case StrengthGrade::Moderate:
      return "Moderate";
    case StrengthGrade::Weak:
      return "Weak";
  }
  return "?";
}

std::string_view to_string(UtilizationGrade grade) {
  switch (grade) {
    case UtilizationGrade::Excellent:
      return "Excellent";
    case UtilizationGrade::Good:
      return "Good";
    case UtilizationGrade::Fair:
      return "Fair";
    case UtilizationGrade::Poor:
      return "Poor";
  }
  return "?";
}

namespace {

ojson parse_report_object(std::string_view text) {
  try {
    return ojson::parse(find_json_object(text), nullptr, true, /*ignore_comments=*/true);
  } catch (const MalformedOutputError& e) {
    throw MalformedReportError(e.what());
  }
}

const ojson* field(const ojson& obj, std::string_view key) {
  auto it = obj.find(std::string(key));
  if (it == obj.end() || it->is_null()) return nullptr;
  return &*it;
}

std::string required_string(const ojson& obj, std::string_view key) {
  const ojson* v = field(obj, key);
  if (v == nullptr || !v->is_string()) {
    throw MalformedReportError("missing string field \"" + std::string(key) + "\"");
  }
  return v->get<std::string>();
}

std::optional<std::string> optional_string(const ojson& obj, std::string_view key) {
  const ojson* v = field(obj, key);
  if (v == nullptr) return std::nullopt;
  if (!v->is_string()) throw MalformedReportError("\"" + std::string(key) + "\" must be a string");
  if (detail::trim(v->get<std::string>()).empty()) return std::nullopt;
  return v->get<std::string>();
}

// Present and non-empty object.
bool has_section(const ojson& obj, std::string_view key) {
  const ojson* v = field(obj, key);
  if (v == nullptr) return false;
  if (!v->is_object()) throw MalformedReportError("\"" + std::string(key) + "\" must be an object");
  return !v->empty();
}

template <typename Enum, std::size_t N>
Enum match_enum(const ojson& obj, std::string_view key,
                const std::array<std::pair<std::string_view, Enum>, N>& table) {
  const std::string value = detail::squash(required_string(obj, key));
  for (const auto& [name, e] : table) {
    if (value == name) return e;
  }
  throw MalformedReportError("unrecognized value for \"" + std::string(key) + "\"");
}

AbstentionReason parse_reason(const std::string& text) {
  const std::string s = detail::squash(text);
  if (s.starts_with("both")) return AbstentionReason::Both;
  const bool no_common = s.find("nocommonfactor") != std::string::npos ||
                         s.find("zerocommonfactor") != std::string::npos;
  const bool unfavorable = s.find("unfavorable") != std::string::npos;
  if (no_common && unfavorable) return AbstentionReason::Both;
  if (no_common) return AbstentionReason::NoCommonFactors;
  if (unfavorable) return AbstentionReason::UnfavorableOutcome;
  throw MalformedReportError("unrecognized reason_for_abstention: " + text);
}

}  // namespace

AnalystReport parse_analyst_report(std::string_view text) {
  const ojson obj = parse_report_object(text);
  AnalystReport report;
  report.outcome = match_enum<AnalysisOutcome, 3>(
      obj, "analysis_outcome",
      {{{"requiresabstention", AnalysisOutcome::RequiresAbstention},
        {"requirescorrection", AnalysisOutcome::RequiresCorrection},
        {"validargument", AnalysisOutcome::ValidArgument}}});
  report.summary = required_string(obj, "summary");

  const bool abstention_section = has_section(obj, "abstention_details");
  const bool correction_section = has_section(obj, "correction_details");
  const bool abstaining = report.outcome == AnalysisOutcome::RequiresAbstention;
  const bool correcting = report.outcome == AnalysisOutcome::RequiresCorrection;
  if (abstention_section != abstaining) {
    throw MalformedReportError(abstaining ? "REQUIRES_ABSTENTION without abstention_details"
                                          : "abstention_details on a non-abstention report");
  }
  if (correction_section != correcting) {
    throw MalformedReportError(correcting ? "REQUIRES_CORRECTION without correction_details"
                                          : "correction_details on a non-correction report");
  }
  if (abstaining) {
    report.abstention_reason =
        parse_reason(required_string(obj["abstention_details"], "reason_for_abstention"));
  }
  if (correcting) {
    const ojson& details = obj["correction_details"];
    CorrectionDetails c;
    const ojson* factors = field(details, "fabricated_or_misrepresented_factors");
    if (factors != nullptr) {
      if (!factors->is_array()) {
        throw MalformedReportError("fabricated_or_misrepresented_factors must be a list");
      }
      for (const auto& f : *factors) {
        if (!f.is_string()) {
          throw MalformedReportError("fabricated_or_misrepresented_factors must hold strings");
        }
        c.fabricated_or_misrepresented_factors.push_back(f.get<std::string>());
      }
    }
    c.misrepresented_tsc_outcome = optional_string(details, "misrepresented_tsc_outcome");
    c.other_issues_for_correction = optional_string(details, "other_issues_for_correction");
    if (c.fabricated_or_misrepresented_factors.empty() && !c.misrepresented_tsc_outcome && !c.other_issues_for_correction) {
      throw MalformedReportError("correction_details lists no errors");
    }
    report.correction = std::move(c);
  }
  return report;
}

PolisherReport parse_polisher_report(std::string_view text) {
  const ojson obj = parse_report_object(text);
  PolisherReport report;
  report.argument_segment_type = required_string(obj, "argument_segment_type");
  report.accuracy = match_enum<AccuracyGrade, 3>(
      obj, "accuracy_assessment",
      {{{"accurate", AccuracyGrade::Accurate},
        {"minorinaccuracies", AccuracyGrade::MinorInaccuracies},
        {"majorinaccuracies", AccuracyGrade::MajorInaccuracies}}});
  report.strength = match_enum<StrengthGrade, 3>(obj, "strength_assessment",
                                                 {{{"strong", StrengthGrade::Strong},
                                                   {"moderate", StrengthGrade::Moderate},
                                                   {"weak", StrengthGrade::Weak}}});
  report.utilization = match_enum<UtilizationGrade, 4>(
      obj, "factor_utilization_assessment",
      {{{"excellent", UtilizationGrade::Excellent},
        {"good", UtilizationGrade::Good},
        {"fair", UtilizationGrade::Fair},
        {"poor", UtilizationGrade::Poor}}});
  report.feedback_summary = required_string(obj, "feedback_summary");
  const ojson* revision = field(obj, "revision_needed");
  if (revision == nullptr || !revision->is_boolean()) {
    throw MalformedReportError("missing boolean field \"revision_needed\"");
  }
  report.revision_needed = revision->get<bool>();
  if (report.revision_needed) {
    report.instructions_for_developer = optional_string(obj, "instructions_for_developer");
    if (!report.instructions_for_developer) {
      throw MalformedReportError("revision_needed without instructions_for_developer");
    }
  }
  return report;
}

std::string serialize_analyst_report(const AnalystReport& report) {
  ojson obj;
  obj["analysis_outcome"] = std::string(to_string(report.outcome));
  obj["summary"] = report.summary;
  if (report.abstention_reason) {
    obj["abstention_details"] =
        ojson{{"reason_for_abstention", std::string(describe(*report.abstention_reason))}};
  }
  if (report.correction) {
    ojson details;
    details["fabricated_or_misrepresented_factors"] =
        report.correction->fabricated_or_misrepresented_factors;
    if (report.correction->misrepresented_tsc_outcome) {
      details["misrepresented_tsc_outcome"] = *report.correction->misrepresented_tsc_outcome;
    }
    if (report.correction->other_issues_for_correction) {
      details["other_issues_for_correction"] = *report.correction->other_issues_for_correction;
    }
    obj["correction_details"] = std::move(details);
  }
  return obj.dump();
}

std::string serialize_polisher_report(const PolisherReport& report) {
  ojson obj;
  obj["argument_segment_type"] = report.argument_segment_type;
  obj["accuracy_assessment"] = std::string(to_string(report.accuracy));
  obj["strength_assessment"] = std::string(to_string(report.strength));
  obj["factor_utilization_assessment"] = std::string(to_string(report.utilization));
  obj["feedback_summary"] = report.feedback_summary;
  obj["revision_needed"] = report.revision_needed;
  if (report.instructions_for_developer) {
    obj["instructions_for_developer"] = *report.instructions_for_developer;
  }
  return obj.dump();
}

}  // namespace legalarg
