#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "legalarg/argument.hpp"
#include "legalarg/cases.hpp"
#include "legalarg/factor_catalog.hpp"
#include "legalarg/reports.hpp"

namespace legalarg {

enum class PromptVariant { SA, SA_EP, MA, RMA };

using Party = Outcome;

// Role assignment for one ply:
//   1 -> (Plaintiff, c2)   2 -> (Defendant, c3)   3 -> (Plaintiff, c2, rebutting c3)
struct PlyContext {
  int ply = 1;
  Party arguing = Party::Plaintiff;
  Slot primary = Slot::c2;
  CaseTriple triple;
  std::vector<std::string> prior_plies;

  // Throws std::invalid_argument for ply outside 1..3 or more prior plies
  // than ply - 1.
  static PlyContext for_ply(const CaseTriple& triple, int ply,
                            std::vector<std::string> prior_plies = {});

  std::string_view key() const { return kPlyKeys[static_cast<std::size_t>(ply - 1)]; }
  const Case& primary_case() const { return triple.at(primary); }
};

struct Prompt {
  std::string system;
  std::string user;
};

// Draft being revised plus the consolidated reviewer feedback.
struct Revision {
  std::string draft;
  std::string feedback;
};

// Protocol texts, kept verbatim.
extern const std::string_view kDeveloperSystemPrompt;
extern const std::string_view kCorePrompt;
extern const std::string_view kTerminationInstruction;
extern const std::string_view kAbstentionInstruction;  // SA-EP chain-of-thought block
extern const std::string_view kAnalystPrompt;
extern const std::string_view kPolisherPrompt;
extern const std::string_view kDistillerPrompt;
extern const std::string_view kFormatReminder;

// SA and SA-EP ask for all three plies in one object; MA and RMA ask for the
// current ply only, with the earlier plies quoted. `revision` is only used by
// RMA.
Prompt build_developer_prompt(const PlyContext& context, const std::optional<Revision>& revision,
                              PromptVariant variant,
                              const FactorCatalog& catalog = load_catalog());

Prompt build_analyst_prompt(const PlyContext& context, std::string_view ply_text,
                            const FactorCatalog& catalog = load_catalog());

Prompt build_polisher_prompt(const PlyContext& context, std::string_view ply_text,
                             const AnalystReport& analyst,
                             const FactorCatalog& catalog = load_catalog());

// `argument_json` is the 3-ply object as serialized by serialize_three_ply.
Prompt build_distiller_prompt(std::string_view argument_json);

// Appends the format reminder used for the single reprompt.
Prompt with_format_reminder(Prompt prompt);

}  // namespace legalarg
