// Worked examples from the agent protocols, verbatim.
#pragma once

#include <string_view>

namespace golden {

constexpr std::string_view kUnfavorable = R"js({
  "analysis_outcome": "REQUIRES_ABSTENTION",
  "summary": "The argument for Plaintiff, citing c2, must be abstained from. c2's actual outcome is 'Defendant', which does not favor the Plaintiff.",
  "abstention_details": {
    "reason_for_abstention": "Cited precedent outcome is unfavorable for the arguing party."
  }
})js";

constexpr std::string_view kNoCommon = R"js({
  "analysis_outcome": "REQUIRES_ABSTENTION",
  "summary": "The argument must be abstained from as there are no common factors between c1 and the cited precedentX.",
  "abstention_details": {
    "reason_for_abstention": "No common factors found."
  }
})js";

constexpr std::string_view kFabricated = R"js({
  "analysis_outcome": "REQUIRES_CORRECTION",
  "summary": "The argument requires correction. Factor F4 was claimed as common with c2, but F4 is not present in c2's actual factors.",
  "correction_details": {
    "fabricated_or_misrepresented_factors": ["F4 (claimed as common with c2 but not present in c2's actual factors)"]
  }
})js";

constexpr std::string_view kValid = R"js({
  "analysis_outcome": "VALID_ARGUMENT",
  "summary": "The argument segment appears valid. The cited precedent outcome favors the arguing party, and the claimed common factor (F1) is verified."
})js";

constexpr std::string_view kExampleArgument = R"js({
  "Plaintiff's Argument": "c1 shares F4 (P) and F6 (P) with c2 (outcome Plaintiff). c1 also features F12 (P).",
  "Defendant's Counterargument": "c2 also had F7 (P), distinguishing it. c1 has F1 (D). c3 (outcome Defendant) is similar, c1 and c3 share F1 (D).",
  "Plaintiff's Rebuttal": "c3 is different, c1 does not have F5 (D) which was in c3."
})js";

constexpr std::string_view kExampleOutput = R"js({
  "c1": ["F4 Agreed-not-to-disclose (P)", "F6 Security-measures (P)", "F12 Outsider-disclosures-restricted (P)", "F1 Disclosure-in-negotiations (D)"],
  "c2": ["F4 Agreed-not-to-disclose (P)", "F6 Security-measures (P)", "F7 Brought-tools (P)"],
  "c3": ["F1 Disclosure-in-negotiations (D)", "F5 Agreement-not-specific (D)"]
})js";

}  // namespace golden
