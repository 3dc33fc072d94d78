#include "legalarg/agents.hpp"

#include <algorithm>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "legalarg/case_generator.hpp"
#include "legalarg/error.hpp"
#include "sampler.hpp"
#include "text_util.hpp"

namespace legalarg {

using ojson = nlohmann::ordered_json;

namespace {

bool contains(const std::vector<FactorId>& ids, FactorId id) {
  return std::find(ids.begin(), ids.end(), id) != ids.end();
}

Side side_of(Party party) { return party == Party::Plaintiff ? Side::P : Side::D; }

std::string factor_names(const std::vector<FactorId>& ids, const FactorCatalog& catalog) {
  std::vector<std::string> parts;
  for (FactorId id : ids) parts.push_back(render_factor(catalog.lookup(id)));
  if (parts.size() <= 1) return parts.empty() ? std::string() : parts.front();
  const std::string last = parts.back();
  parts.pop_back();
  return detail::join(parts, ", ") + " and " + last;
}

std::string abstention_summary(const PlyContext& context, AbstentionReason reason) {
  const std::string slot(to_string(context.primary));
  const std::string party(to_string(context.arguing));
  const std::string no_common = fmt::format(
      "there are no common factors between c1 and the cited {}", slot);
  const std::string unfavorable =
      fmt::format("{}'s actual outcome is '{}', which does not favor the {}", slot,
                  context.primary_case().outcome ? to_string(*context.primary_case().outcome)
                                                 : std::string_view("none"),
                  party);
  switch (reason) {
    case AbstentionReason::NoCommonFactors:
      return fmt::format("The argument for {}, citing {}, must be abstained from as {}.", party,
                         slot, no_common);
    case AbstentionReason::UnfavorableOutcome:
      return fmt::format("The argument for {}, citing {}, must be abstained from. {}.", party,
                         slot, unfavorable);
    case AbstentionReason::Both:
      return fmt::format("The argument for {}, citing {}, must be abstained from: {}, and {}.",
                         party, slot, no_common, unfavorable);
  }
  return {};
}

// Abstention reason a faithful developer sees for a ply. The rebuttal only
// re-checks the c2 outcome; commonality was settled at ply 1.
std::optional<AbstentionReason> ungroundable(const PlyContext& context) {
  const bool unfavorable =
      context.primary_case().outcome != std::optional<Outcome>(context.arguing);
  const bool no_common =
      context.ply < 3 &&
      intersect(context.triple.c1.factors, context.primary_case().factors).empty();
  if (no_common && unfavorable) return AbstentionReason::Both;
  if (no_common) return AbstentionReason::NoCommonFactors;
  if (unfavorable) return AbstentionReason::UnfavorableOutcome;
  return std::nullopt;
}

std::string correction_text(const CorrectionDetails& c) {
  std::vector<std::string> parts;
  if (!c.fabricated_or_misrepresented_factors.empty()) {
    parts.push_back(detail::join(c.fabricated_or_misrepresented_factors, "; ") + ".");
  }
  if (c.misrepresented_tsc_outcome) parts.push_back(*c.misrepresented_tsc_outcome);
  if (c.other_issues_for_correction) parts.push_back(*c.other_issues_for_correction);
  return detail::join(parts, " ");
}

}  // namespace

// ---------------------------------------------------------------------------
// Oracle reviewers

AnalystReport oracle_analyst(const PlyContext& context, const CanonicalExtraction& claims,
                             const FactorCatalog& /*catalog*/) {
  const CaseTriple& t = context.triple;
  const Case& primary = context.primary_case();
  const auto shared = intersect(t.c1.factors, primary.factors);
  const bool unfavorable = primary.outcome != std::optional<Outcome>(context.arguing);

  bool no_common = shared.empty();
  if (context.ply == 3) {
    bool claims_common = false;
    for (FactorId id : claims.attributed.at(Slot::c1)) {
      if (contains(claims.attributed.at(Slot::c2), id)) claims_common = true;
    }
    bool valid_distinction = false;
    for (FactorId id : subtract(t.c3.factors, t.c1.factors)) {
      if (contains(claims.attributed.at(Slot::c3), id)) valid_distinction = true;
    }
    for (FactorId id : subtract(t.c1.factors, t.c3.factors)) {
      if (contains(claims.attributed.at(Slot::c1), id)) valid_distinction = true;
    }
    no_common = claims_common && shared.empty() && !valid_distinction;
  }

  AnalystReport report;
  if (no_common || unfavorable) {
    const AbstentionReason reason = no_common && unfavorable ? AbstentionReason::Both
                                    : no_common              ? AbstentionReason::NoCommonFactors
                                                             : AbstentionReason::UnfavorableOutcome;
    report.outcome = AnalysisOutcome::RequiresAbstention;
    report.abstention_reason = reason;
    report.summary = abstention_summary(context, reason);
    return report;
  }

  CorrectionDetails details;
  for (Slot slot : kAllSlots) {
    const Case& c = t.at(slot);
    const std::string name(to_string(slot));
    for (FactorId id : claims.attributed.at(slot)) {
      if (!c.has(id)) {
        details.fabricated_or_misrepresented_factors.push_back(
            fmt::format("{} (claimed for {} but not present in {}'s actual factors)",
                        to_string(id), name, name));
      }
    }
    for (FactorId id : claims.denied.at(slot)) {
      if (c.has(id)) {
        details.fabricated_or_misrepresented_factors.push_back(
            fmt::format("{} (claimed absent from {} but present in {}'s actual factors)",
                        to_string(id), name, name));
      }
    }
  }
  std::vector<std::string> outcome_errors;
  for (Slot slot : {Slot::c2, Slot::c3}) {
    const auto& claimed = claims.claimed_outcomes[index_of(slot)];
    const auto& actual = t.at(slot).outcome;
    if (claimed && actual && claimed != actual) {
      outcome_errors.push_back(fmt::format("Argument claims {} outcome is {}, but actual outcome is {}.",
                                           to_string(slot), to_string(*claimed),
                                           to_string(*actual)));
    }
  }
  if (!outcome_errors.empty()) details.misrepresented_tsc_outcome = detail::join(outcome_errors, " ");
  if (claims.claimed_outcomes[index_of(Slot::c1)]) {
    details.other_issues_for_correction =
        "Argument assigns an outcome to c1, which is the undecided current case.";
  }

  if (!details.fabricated_or_misrepresented_factors.empty() ||
      details.misrepresented_tsc_outcome || details.other_issues_for_correction) {
    report.outcome = AnalysisOutcome::RequiresCorrection;
    report.summary = "The argument requires correction. " + correction_text(details);
    report.correction = std::move(details);
    return report;
  }

  report.outcome = AnalysisOutcome::ValidArgument;
  report.summary =
      "The argument segment appears valid. The cited precedent outcome favors the arguing party, "
      "and the claimed factors are verified.";
  return report;
}

std::vector<FactorId> favorable_shared(const PlyContext& context, const FactorCatalog& catalog) {
  std::vector<FactorId> out;
  for (FactorId id : intersect(context.triple.c1.factors, context.primary_case().factors)) {
    if (catalog.side_of(id) == side_of(context.arguing)) out.push_back(id);
  }
  return out;
}

PolisherReport oracle_polisher(const PlyContext& context, const AnalystReport& analyst,
                               const CanonicalExtraction& claims, const FactorCatalog& catalog) {
  if (analyst.outcome == AnalysisOutcome::RequiresAbstention) {
    throw ContractViolation("polisher invoked after an abstention verdict");
  }
  const auto favorable = favorable_shared(context, catalog);
  std::vector<FactorId> missing;
  for (FactorId id : favorable) {
    if (!contains(claims.attributed.at(Slot::c1), id) ||
        !contains(claims.attributed.at(context.primary), id)) {
      missing.push_back(id);
    }
  }
  const std::size_t total = favorable.size();
  const std::size_t cited = total - missing.size();

  PolisherReport report;
  report.argument_segment_type = std::string(context.key());
  if (cited == total) {
    report.utilization = UtilizationGrade::Excellent;
  } else if (cited * 4 >= total * 3) {
    report.utilization = UtilizationGrade::Good;
  } else if (cited * 2 >= total) {
    report.utilization = UtilizationGrade::Fair;
  } else {
    report.utilization = UtilizationGrade::Poor;
  }

  std::size_t errors = 0;
  if (analyst.correction) {
    errors = analyst.correction->fabricated_or_misrepresented_factors.size() +
             (analyst.correction->misrepresented_tsc_outcome ? 1 : 0) +
             (analyst.correction->other_issues_for_correction ? 1 : 0);
  }
  if (analyst.outcome == AnalysisOutcome::ValidArgument) {
    report.accuracy = AccuracyGrade::Accurate;
  } else {
    report.accuracy = errors <= 1 ? AccuracyGrade::MinorInaccuracies : AccuracyGrade::MajorInaccuracies;
  }
  const bool well_used = report.utilization == UtilizationGrade::Excellent ||
                         report.utilization == UtilizationGrade::Good;
  if (report.accuracy == AccuracyGrade::Accurate && well_used) {
    report.strength = StrengthGrade::Strong;
  } else if (report.utilization == UtilizationGrade::Poor ||
             report.accuracy == AccuracyGrade::MajorInaccuracies) {
    report.strength = StrengthGrade::Weak;
  } else {
    report.strength = StrengthGrade::Moderate;
  }

  report.feedback_summary = fmt::format(
      "The argument cites {} of {} favorable factors shared by c1 and {}.", cited, total,
      to_string(context.primary));
  if (errors > 0) {
    report.feedback_summary += fmt::format(" The Factor Analyst reported {} factual error{}.",
                                           errors, errors == 1 ? "" : "s");
  }

  std::vector<std::string> instructions;
  if (analyst.correction) {
    instructions.push_back("Correct these errors: " + correction_text(*analyst.correction));
  }
  if (!missing.empty()) {
    instructions.push_back(fmt::format(
        "Ensure all favorable factors for your side common to c1 and {} are mentioned: {}.",
        to_string(context.primary), factor_names(missing, catalog)));
  }
  report.revision_needed = !instructions.empty();
  if (report.revision_needed) report.instructions_for_developer = detail::join(instructions, " ");
  return report;
}

std::string consolidate_feedback(const AnalystReport& analyst, const PolisherReport& polisher) {
  std::vector<std::string> parts;
  if (analyst.correction) {
    parts.push_back("Factor Analyst: " + analyst.summary);
  }
  if (polisher.instructions_for_developer) {
    parts.push_back("Argument Polisher: " + *polisher.instructions_for_developer);
  }
  return detail::join(parts, "\n");
}

std::string OracleAnalyst::review(const PlyContext& context, std::string_view ply_text, bool) {
  return serialize_analyst_report(
      oracle_analyst(context, extract_canonical(ply_text, catalog_), catalog_));
}

std::string OraclePolisher::review(const PlyContext& context, std::string_view ply_text,
                                   const AnalystReport& analyst, bool) {
  return serialize_polisher_report(
      oracle_polisher(context, analyst, extract_canonical(ply_text, catalog_), catalog_));
}

// ---------------------------------------------------------------------------
// MockDeveloper

std::string_view to_string(MockBehavior behavior) {
  switch (behavior) {
    case MockBehavior::Faithful:
      return "faithful";
    case MockBehavior::Fabricating:
      return "fabricating";
    case MockBehavior::NonAbstaining:
      return "non-abstaining";
  }
  return "?";
}

std::optional<MockBehavior> mock_behavior_from_string(std::string_view text) {
  const std::string s = detail::squash(text);
  if (s == "faithful") return MockBehavior::Faithful;
  if (s == "fabricating") return MockBehavior::Fabricating;
  if (s == "nonabstaining") return MockBehavior::NonAbstaining;
  return std::nullopt;
}

MockDeveloper::MockDeveloper(MockBehavior behavior, int fabrications, std::uint64_t seed,
                             const FactorCatalog& catalog)
    : behavior_(behavior),
      fabrications_(behavior == MockBehavior::Fabricating ? std::max(fabrications, 0) : 0),
      seed_(seed),
      catalog_(catalog) {}

std::string MockDeveloper::name() const {
  if (behavior_ == MockBehavior::Fabricating) return fmt::format("mock-fabricating-{}", fabrications_);
  return fmt::format("mock-{}", to_string(behavior_));
}

std::vector<Fabrication> MockDeveloper::plan_fabrications(const CaseTriple& triple) const {
  std::vector<Fabrication> plan;
  detail::Sampler rng(mix64(seed_ ^ triple.seed));
  for (int i = 0; i < fabrications_; ++i) {
    Fabrication f;
    f.ply = rng.between(1, 3);
    f.slot = kAllSlots[rng.below(3)];
    std::vector<FactorId> pool;
    for (FactorId id : catalog_.ids()) {
      if (triple.at(f.slot).has(id)) continue;
      const bool taken = std::any_of(plan.begin(), plan.end(), [&](const Fabrication& p) {
        return p.slot == f.slot && p.factor == id;
      });
      if (!taken) pool.push_back(id);
    }
    if (pool.empty()) continue;
    f.factor = rng.pick(pool);
    plan.push_back(f);
  }
  return plan;
}

std::optional<int> MockDeveloper::abstains_at(const CaseTriple& triple) const {
  if (behavior_ == MockBehavior::NonAbstaining) return std::nullopt;
  for (int ply = 1; ply <= 3; ++ply) {
    if (ungroundable(PlyContext::for_ply(triple, ply))) return ply;
  }
  return std::nullopt;
}

std::string MockDeveloper::ply_text(const CaseTriple& triple, int ply, bool revised) const {
  const PlyContext context = PlyContext::for_ply(triple, ply);
  if (behavior_ != MockBehavior::NonAbstaining) {
    if (auto reason = ungroundable(context)) {
      return terminate_text("Generation stopped. " + abstention_summary(context, *reason));
    }
  }

  const auto outcome_of = [&](Slot slot) {
    const auto& o = triple.at(slot).outcome;
    return o ? std::string(to_string(*o)) : std::string("none");
  };
  // Shared factors, or one borrowed precedent factor when there are none.
  const auto claimed_shared = [&](Slot slot) {
    auto shared = intersect(triple.c1.factors, triple.at(slot).factors);
    if (shared.empty() && !triple.at(slot).factors.empty()) {
      shared.push_back(triple.at(slot).factors.front());
    }
    return shared;
  };

  std::vector<std::string> sentences;
  if (ply == 1) {
    sentences.push_back(fmt::format("c1 and c2 (outcome {}) share {}, so c1 should likewise be "
                                    "decided for the Plaintiff.",
                                    outcome_of(Slot::c2),
                                    factor_names(claimed_shared(Slot::c2), catalog_)));
  } else if (ply == 2) {
    const auto only_c2 = subtract(triple.c2.factors, triple.c1.factors);
    if (!only_c2.empty()) {
      sentences.push_back(fmt::format("c2 is distinguishable: c2 has {}, which c1 does not have.",
                                      factor_names(only_c2, catalog_)));
    }
    sentences.push_back(fmt::format(
        "c1 and c3 (outcome {}) share {}, so c1 should be decided for the Defendant.",
        outcome_of(Slot::c3), factor_names(claimed_shared(Slot::c3), catalog_)));
  } else {
    const auto only_c3 = subtract(triple.c3.factors, triple.c1.factors);
    const auto only_c1 = subtract(triple.c1.factors, triple.c3.factors);
    if (!only_c3.empty()) {
      sentences.push_back(fmt::format("c3 is distinguishable: c3 has {}, which c1 does not have.",
                                      factor_names(only_c3, catalog_)));
    }
    if (!only_c1.empty()) {
      sentences.push_back(fmt::format("c1 has {}, which c3 does not have.",
                                      factor_names(only_c1, catalog_)));
    }
    std::vector<FactorId> reinforce;
    for (FactorId id : intersect(triple.c1.factors, triple.c2.factors)) {
      if (catalog_.side_of(id) == Side::P) reinforce.push_back(id);
    }
    if (reinforce.empty() && behavior_ == MockBehavior::NonAbstaining) {
      reinforce = claimed_shared(Slot::c2);
    }
    if (!reinforce.empty()) {
      sentences.push_back(fmt::format("c1 and c2 share {}, which reinforces the Plaintiff's "
                                      "position.",
                                      factor_names(reinforce, catalog_)));
    }
    if (sentences.empty()) sentences.push_back("The Plaintiff maintains the original analogy.");
  }

  if (!revised) {
    for (const Fabrication& f : plan_fabrications(triple)) {
      if (f.ply != ply) continue;
      sentences.push_back(fmt::format("{} also has {}.", to_string(f.slot),
                                      render_factor(catalog_.lookup(f.factor))));
    }
  }
  return detail::join(sentences, " ");
}

ExtractedFactors MockDeveloper::declared_claims(const CaseTriple& triple) const {
  ExtractedFactors out;
  const int last = abstains_at(triple).value_or(4) - 1;
  for (int ply = 1; ply <= last; ++ply) {
    const auto claims = extract_canonical(ply_text(triple, ply, true), catalog_);
    for (Slot slot : kAllSlots) {
      for (FactorId id : claims.attributed.at(slot)) out.add(slot, id);
    }
  }
  return out;
}

std::string MockDeveloper::respond(const DeveloperTurn& turn) {
  const CaseTriple& triple = turn.context.triple;
  const bool revised = turn.revision.has_value();
  ojson out;
  if (turn.variant == PromptVariant::SA || turn.variant == PromptVariant::SA_EP) {
    const int stop = abstains_at(triple).value_or(3);
    for (int ply = 1; ply <= stop; ++ply) {
      out[std::string(kPlyKeys[static_cast<std::size_t>(ply - 1)])] = ply_text(triple, ply, revised);
    }
  } else {
    out[std::string(turn.context.key())] = ply_text(triple, turn.context.ply, revised);
  }
  return out.dump();
}

// ---------------------------------------------------------------------------
// LLM-backed agents

LlmDeveloper::LlmDeveloper(std::shared_ptr<ChatBackend> backend, GenerationParams params,
                           const FactorCatalog& catalog)
    : backend_(std::move(backend)), params_(params), catalog_(catalog) {}

std::string LlmDeveloper::respond(const DeveloperTurn& turn) {
  Prompt prompt = build_developer_prompt(turn.context, turn.revision, turn.variant, catalog_);
  if (turn.format_reminder) prompt = with_format_reminder(std::move(prompt));
  return complete(*backend_, std::move(prompt.system), std::move(prompt.user), params_);
}

LlmAnalyst::LlmAnalyst(std::shared_ptr<ChatBackend> backend, GenerationParams params,
                       const FactorCatalog& catalog)
    : backend_(std::move(backend)), params_(params), catalog_(catalog) {}

std::string LlmAnalyst::review(const PlyContext& context, std::string_view ply_text,
                               bool format_reminder) {
  Prompt prompt = build_analyst_prompt(context, ply_text, catalog_);
  if (format_reminder) prompt = with_format_reminder(std::move(prompt));
  return complete(*backend_, std::move(prompt.system), std::move(prompt.user), params_);
}

LlmPolisher::LlmPolisher(std::shared_ptr<ChatBackend> backend, GenerationParams params,
                         const FactorCatalog& catalog)
    : backend_(std::move(backend)), params_(params), catalog_(catalog) {}

std::string LlmPolisher::review(const PlyContext& context, std::string_view ply_text,
                                const AnalystReport& analyst, bool format_reminder) {
  Prompt prompt = build_polisher_prompt(context, ply_text, analyst, catalog_);
  if (format_reminder) prompt = with_format_reminder(std::move(prompt));
  return complete(*backend_, std::move(prompt.system), std::move(prompt.user), params_);
}

}  // namespace legalarg
