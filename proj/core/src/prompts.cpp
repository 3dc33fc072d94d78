#include "legalarg/prompts.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace legalarg {

const std::string_view kDeveloperSystemPrompt =
    "You are an AI assistant tasked with formulating legal arguments for trade secret "
    "misappropriation claims.";

const std::string_view kCorePrompt = R"PROMPT(Construct a 3-Ply Argument:
1. Plaintiff's Argument: Cite a relevant Trade Secret Case (c2) with a favorable outcome for Plaintiff. Highlight shared factors between c1 and c2.
2. Defendant's Counterargument: Distinguish c2. Cite a counterexample (c3, with a Defendant-favorable outcome) and draw an analogy to c1, highlighting shared factors between c1 and c3.
3. Plaintiff's Rebuttal: Address and distinguish c3, reinforcing the Plaintiff's original argument (e.g. by re-emphasizing shared factors between c1 and c2, or distinguishing c1 from c3 on further grounds).

Base your arguments on the provided factors. Ensure logical consistency.
Output the 3-ply argument in a single JSON object with keys: "Plaintiff's Argument", "Defendant's Counterargument", "Plaintiff's Rebuttal".

Example c1:
F1 Disclosure-in-negotiations (D)
F4 Agreed-not-to-disclose (P)
F6 Security-measures (P)

Example c2 (for Plaintiff):
outcome Plaintiff
F4 Agreed-not-to-disclose (P)
F6 Security-measures (P)
F7 Brought-tools (P)

Example c3 (for Defendant):
outcome Defendant
F1 Disclosure-in-negotiations (D)
F5 Agreement-not-specific (D)

Example JSON Output:
{
  "Plaintiff's Argument": "Factors F4 Agreed-not-to-disclose (P) and F6 Security-measures (P) were present in both c1 and c2 (outcome Plaintiff), supporting the Plaintiff. c1 also has F12...",
  "Defendant's Counterargument": "c2 is distinguishable because it had F7 Brought-tools (P), not in c1. Furthermore, c1 has F1 Disclosure-in-negotiations (D). c3 (outcome Defendant) is analogous; c1 and c3 share F1 Disclosure-in-negotiations (D) and F5 Agreement-not-specific (D).",
  "Plaintiff's Rebuttal": "c3 is distinguishable as c1 lacks F5 Agreement-not-specific (D) and has strong pro-plaintiff factors like F4 and F6 not in c3."
}

If you cannot make a valid argument for a step (e.g., no suitable precedent), state that clearly for that part of the argument.)PROMPT";

const std::string_view kTerminationInstruction =
    "If no valid argument can be constructed for a step from the provided factors, use "
    "\"TERMINATE: \" followed by the reason as the value for that step.";

const std::string_view kAbstentionInstruction = R"PROMPT(Think step by step before writing each ply:
1. Minimize hallucination. List the factors of c1, c2 and c3 exactly as given. Attribute a factor to a case only if it appears in that case's list, and never invent factors.
2. Check groundability. For each ply, count the factors shared between c1 and the precedent cited in that ply, and check that the precedent's outcome favors the party citing it (Plaintiff needs a Plaintiff-outcome c2, Defendant needs a Defendant-outcome c3).
3. Abstain when ungroundable. If the cited precedent shares no factors with c1 or its outcome is unfavorable to the arguing party, do not argue; write "TERMINATE: " and the reason for that ply.
4. Maximize factor utilization. Otherwise use every relevant shared factor and every distinguishing factor from the lists.)PROMPT";

const std::string_view kAnalystPrompt = R"PROMPT(You are a Factor Analyst Agent. Your task is to analyze a given legal argument segment against c1 and relevant Trade Secret Case(s) (c2, c3). Your goal is to determine if the argument segment must be abstained from, if it requires correction of factual errors, or if it appears valid based on the provided data.

IMPORTANT CONTEXT: You will be analyzing one ply of a 3-ply argument at a time (Plaintiff's Argument using c2, Defendant's Counterargument using c3, or Plaintiff's Rebuttal addressing c3 and reinforcing with c2). Pay close attention to which party is arguing and which precedent (c2 or c3) is primarily being cited or addressed in the segment provided.

Follow this process STRICTLY:
1. Identify the Context:
   - Determine the party making the argument segment (Plaintiff or Defendant).
   - Identify the primary precedent being cited or addressed in this segment (c2 for Plaintiff's Argument, c3 for Defendant's Counterargument, c2 & c3 for Plaintiff's Rebuttal). You will be given the factors and outcome for the relevant precedent(s).
2. Determine if Abstention is REQUIRED (This is the FIRST and most critical check):
   - Focus ONLY on the PRIMARY cited precedent for the argument ply being evaluated (c2 for Plaintiff's Arg, c3 for Defendant's Counter). For Rebuttal, consider the check against c2 for reinforcement.
   - Verify the actual common factors between c1 and this primary cited precedent (c2 or c3) based only on the provided factor lists. Ignore factors mentioned from other, non-primary precedents during this step.
   - Check the actual outcome of the primary cited precedent and whether it favors the arguing party (Plaintiff needs Plaintiff-outcome c2, Defendant needs Defendant-outcome c3).
   - Abstention IS REQUIRED and you MUST output "REQUIRES_ABSTENTION" if EITHER of the following conditions is true for the primary cited precedent:
     a. There are ZERO genuinely common factors between c1 and the primary cited precedent (c2 or c3) used for the core analogy/argument. (For Rebuttal, check this specifically for factors cited from c2 for reinforcement). Count common factors carefully. If the count is 0, abstention is mandatory.
     OR
     b. The actual outcome of the primary cited precedent is UNFAVORABLE to the party making this argument segment (e.g., Plaintiff citing a Defendant-outcome c2, Defendant citing a Plaintiff-outcome c3).
   - If abstention is required, set analysis_outcome to "REQUIRES_ABSTENTION", provide the reason, and proceed to output formatting. DO NOT proceed to step 3.
3. If Abstention is NOT Required, then Determine if Correction is Needed:
   - Identify all factors claimed as common or distinguishing in the argument segment. Compare these against the actual factor lists for c1 and all relevant precedents (c2 & c3).
   - Identify if the argument segment misrepresents the outcome of any cited precedent.
   - Correction IS REQUIRED if:
     a. The argument claims common factors that are fabricated (e.g., a factor claimed as common between c1 and precedentX is not present in both's actual lists).
     b. The argument claims distinguishing factors that are fabricated (e.g., claiming precedentX has factor Y which it doesn't, or claiming c1 lacks factor Z which it has).
     c. The argument misrepresents the actual outcome of a cited precedent (and this wasn't caught by the abstention rule).
   - If correction is required (and abstention was not), your analysis_outcome is "REQUIRES CORRECTION". List the specific errors.
4. If Neither Abstention nor Correction is Required:
   - Your analysis_outcome is "VALID ARGUMENT".

Special Notes for Plaintiff's Rebuttal:
- The Rebuttal aims to distinguish c3 (cited by Defendant) and reinforce the Plaintiff's case (potentially citing c2 again).
- Analyze claims about c3: Are the claimed distinguishing factors accurate based on the actual factor lists of c1 and c3?
- Analyze claims about c2 (if used for reinforcement): Are the claimed common factors accurate? Is the outcome still favorable?
- Abstention (Rule 2a) applies if the reinforcement part claims common factors with c2 but there are actually zero and no valid distinction of c3 is made. Abstention (Rule 2b) applies if c2 (used for reinforcement) has an unfavorable outcome.
- Correction (Rule 3) applies if any factor claims (common or distinguishing, regarding c2 or c3) are fabricated or misrepresented.

Output your analysis in JSON format as specified below. Ensure the JSON is the only output.

JSON Output Format:
{
  "analysis_outcome": "REQUIRES_ABSTENTION" / "REQUIRES_CORRECTION" / "VALID_ARGUMENT",
  "summary": "A concise explanation. If abstention, state the specific reason (unfavorable outcome OR zero common factors for the *primary* cited precedent). If correction, summarize key factual errors. If valid, confirm.",
  "abstention_details": { // Include this section ONLY if analysis_outcome is "REQUIRES_ABSTENTION"
    "reason_for_abstention": "No common factors found." / "Cited precedent outcome is unfavorable for the arguing party." / "Both: No common factors and unfavorable precedent outcome."
  },
  "correction_details": { // Include this section ONLY if analysis_outcome is "REQUIRES_CORRECTION"
    "fabricated_or_misrepresented_factors": ["Factor A (P) - claimed as common but not in c2's actual factors", "Factor B (D) - claimed for c1 but not present in c1's actual factors"], // List factors that are incorrectly claimed. Be specific about the error.
    "misrepresented_tsc_outcome": "e.g., Argument claims c2 outcome is Plaintiff, but actual outcome is Defendant.", // Describe if precedent outcome is misrepresented. Omit or null if not applicable. (Note: "tsc" kept in key for consistency with original prompt key, value changed to precedent)
    "other_issues_for_correction": "Brief description of any other critical factual errors needing correction." // Omit or null if not applicable.
  }
}

Example 1 (Requires Abstention - unfavorable outcome):
Argument: Plaintiff's argument cites c2. Provided data: c2 actual outcome is 'Defendant'.
Output:
{
  "analysis_outcome": "REQUIRES_ABSTENTION",
  "summary": "The argument for Plaintiff, citing c2, must be abstained from. c2's actual outcome is 'Defendant', which does not favor the Plaintiff.",
  "abstention_details": {
    "reason_for_abstention": "Cited precedent outcome is unfavorable for the arguing party."
  }
}

Example 2 (Requires Abstention - no common factors):
Argument: Cites precedentX. Provided data: c1 factors {F1, F2}, precedentX factors {F3, F4}. (No common factors).
Output:
{
  "analysis_outcome": "REQUIRES_ABSTENTION",
  "summary": "The argument must be abstained from as there are no common factors between c1 and the cited precedentX.",
  "abstention_details": {
    "reason_for_abstention": "No common factors found."
  }
}

Example 3 (Requires Correction - fabricated factor):
Argument for Plaintiff cites c2. Provided data: c2 actual outcome 'Plaintiff'. c1 {F1, F2}, c2 {F1, F3}.
Argument claims: "c1 and c2 share F1 and F4." (F4 is fabricated as it's not in c2 and not common).
Output:
{
  "analysis_outcome": "REQUIRES_CORRECTION",
  "summary": "The argument requires correction. Factor F4 was claimed as common with c2, but F4 is not present in c2's actual factors.",
  "correction_details": {
    "fabricated_or_misrepresented_factors": ["F4 (claimed as common with c2 but not present in c2's actual factors)"]
  }
}

Example 4 (Valid Argument):
Argument for Plaintiff cites c2. Provided data: c2 actual outcome 'Plaintiff'. c1 {F1, F2}, c2 {F1, F3}.
Argument claims: "c1 and c2 share F1."
Output:
{
  "analysis_outcome": "VALID_ARGUMENT",
  "summary": "The argument segment appears valid. The cited precedent outcome favors the arguing party, and the claimed common factor (F1) is verified."
})PROMPT";

const std::string_view kPolisherPrompt = R"PROMPT(You are an Argument Polisher Agent. You will receive a generated legal argument segment, the original c1 factors, relevant c2/c3 factors, and the Factor Analyst's report.
Your tasks:
1. Review the argument segment for factual accuracy based on the provided case factors and Factor Analyst's report.
2. Check for logical coherence and persuasive strength. Specifically, assess factor utilization:
   a. Are all relevant supporting factors from c1 and cited precedent (c2/c3) effectively used to build the analogy or argument?
   b. Are distinguishing factors (both in the cited precedent (c2/c3) not present in c1, and in c1 not present in the cited precedent (c2/c3)) clearly highlighted when making distinctions or counterarguments?
   c. Are there any crucial factors from c1 or precedents (c2/c3) that have been overlooked and could strengthen or weaken the argument?
3. Provide feedback on inaccuracies, argument strength, and specifically on factor utilization.
4. If revisions are needed, provide clear instructions to the Argument Developer Agent on what to correct or improve, with a strong focus on enhancing factor utilization.

Output your assessment in JSON format:
{
  "argument_segment_type": "Plaintiff's Argument / Defendant's Counterargument / Plaintiff's Rebuttal",
  "accuracy_assessment": "Accurate / Minor Inaccuracies / Major Inaccuracies",
  "strength_assessment": "Strong / Moderate / Weak (based on factor utilization and logic)",
  "factor_utilization_assessment": "Excellent / Good / Fair / Poor",
  "feedback_summary": "e.g., 'The argument correctly identifies shared factors but misses a key distinguishing factor in c2. Factor utilization could be improved by incorporating F_X from c1.'",
  "revision_needed": true/false,
  "instructions_for_developer": "If revision_needed is true, provide concise instructions. e.g., 'Re-evaluate c2. While F4 is common, c2 also has F7 (P) which is a key distinction you missed. c1 has F10 (D) which weakens your analogy. Strengthen your argument by explicitly mentioning how F10 (D) is overcome or why c2 is still a good precedent despite it. Ensure all favorable factors for your side common to c1 and c2 are mentioned.'"
})PROMPT";

const std::string_view kDistillerPrompt = R"PROMPT(You are a Factor Distiller Agent. Given a 3-ply legal argument in JSON format, extract all unique legal factors mentioned for "c1", "c2", and "c3".
Factors are in the format like "F1 Disclosure-in-negotiations (D)", "F4 Agreed-not-to-disclose (P)", etc.
Output the results as a JSON object with keys "c1", "c2", and "c3", where each value is a list of unique factor strings.

Example Input Argument JSON:
{
  "Plaintiff's Argument": "c1 shares F4 (P) and F6 (P) with c2 (outcome Plaintiff). c1 also features F12 (P).",
  "Defendant's Counterargument": "c2 also had F7 (P), distinguishing it. c1 has F1 (D). c3 (outcome Defendant) is similar, c1 and c3 share F1 (D).",
  "Plaintiff's Rebuttal": "c3 is different, c1 does not have F5 (D) which was in c3."
}

Example Output JSON:
{
  "c1": ["F4 Agreed-not-to-disclose (P)", "F6 Security-measures (P)", "F12 Outsider-disclosures-restricted (P)", "F1 Disclosure-in-negotiations (D)"],
  "c2": ["F4 Agreed-not-to-disclose (P)", "F6 Security-measures (P)", "F7 Brought-tools (P)"],
  "c3": ["F1 Disclosure-in-negotiations (D)", "F5 Agreement-not-specific (D)"]
}
Ensure each factor appears only once per list, even if mentioned multiple times in the argument.)PROMPT";

const std::string_view kFormatReminder =
    "Your previous reply could not be parsed. Reply with the JSON object only, using exactly "
    "the keys and values of the required format.";

PlyContext PlyContext::for_ply(const CaseTriple& triple, int ply,
                               std::vector<std::string> prior_plies) {
  if (ply < 1 || ply > 3) throw std::invalid_argument("ply must be 1, 2 or 3");
  if (prior_plies.size() > static_cast<std::size_t>(ply - 1)) {
    throw std::invalid_argument("more prior plies than the ply index allows");
  }
  PlyContext context;
  context.ply = ply;
  context.arguing = ply == 2 ? Party::Defendant : Party::Plaintiff;
  context.primary = ply == 2 ? Slot::c3 : Slot::c2;
  context.triple = triple;
  context.prior_plies = std::move(prior_plies);
  return context;
}

namespace {

std::string case_block(const CaseTriple& triple, const FactorCatalog& catalog) {
  return fmt::format(
      "c1 (current case):\n{}\n\nc2 (Plaintiff's precedent):\n{}\n\nc3 (Defendant's precedent):\n{}",
      render_case_listing(triple.c1, catalog), render_case_listing(triple.c2, catalog),
      render_case_listing(triple.c3, catalog));
}

std::string case_lines(const CaseTriple& triple, const FactorCatalog& catalog) {
  return fmt::format("c1: {}\nc2: {}\nc3: {}", render_case(triple.c1, catalog),
                     render_case(triple.c2, catalog), render_case(triple.c3, catalog));
}

std::string prior_block(const PlyContext& context) {
  std::string out;
  for (std::size_t i = 0; i < context.prior_plies.size(); ++i) {
    out += fmt::format("{}:\n{}\n\n", kPlyKeys[i], context.prior_plies[i]);
  }
  return out;
}

std::string ply_header(const PlyContext& context) {
  return fmt::format("Argument segment type: {}\nArguing party: {}\nPrimary precedent: {}{}",
                     context.key(), to_string(context.arguing), to_string(context.primary),
                     context.ply == 3 ? " (reinforcement), addressing c3" : "");
}

}  // namespace

Prompt build_developer_prompt(const PlyContext& context, const std::optional<Revision>& revision,
                              PromptVariant variant, const FactorCatalog& catalog) {
  Prompt prompt;
  std::string user = fmt::format("{}\n\n{}\n\n", kCorePrompt, kTerminationInstruction);
  if (variant == PromptVariant::SA || variant == PromptVariant::SA_EP) {
    prompt.system = std::string(kDeveloperSystemPrompt);
    if (variant == PromptVariant::SA_EP) user += fmt::format("{}\n\n", kAbstentionInstruction);
    user += fmt::format("{}\n\nOutput only the JSON object.", case_block(context.triple, catalog));
    prompt.user = std::move(user);
    return prompt;
  }

  prompt.system = fmt::format("{} You argue for the {} in this debate.", kDeveloperSystemPrompt,
                              to_string(context.arguing));
  user += fmt::format("{}\n\n", case_block(context.triple, catalog));
  if (!context.prior_plies.empty()) user += "Previous plies:\n\n" + prior_block(context);
  user += fmt::format(
      "Current step: ply {} of 3, \"{}\". You are arguing for the {}; the primary precedent is {}.\n"
      "Output only this ply as a JSON object with the single key \"{}\".",
      context.ply, context.key(), to_string(context.arguing), to_string(context.primary),
      context.key());
  if (variant == PromptVariant::RMA && revision) {
    user += fmt::format(
        "\n\nYour draft of this ply:\n{}\n\nReviewer feedback (revise the draft once to address "
        "it):\n{}",
        revision->draft, revision->feedback);
  }
  prompt.user = std::move(user);
  return prompt;
}

Prompt build_analyst_prompt(const PlyContext& context, std::string_view ply_text,
                            const FactorCatalog& catalog) {
  std::string user = fmt::format("{}\n\n{}\n\n", ply_header(context),
                                 case_block(context.triple, catalog));
  if (!context.prior_plies.empty()) user += "Previous plies:\n\n" + prior_block(context);
  user += fmt::format("Argument segment:\n{}", ply_text);
  return Prompt{std::string(kAnalystPrompt), std::move(user)};
}

Prompt build_polisher_prompt(const PlyContext& context, std::string_view ply_text,
                             const AnalystReport& analyst, const FactorCatalog& catalog) {
  std::string user = fmt::format(
      "{}\n\n{}\n\nArgument segment:\n{}\n\nFactor Analyst's report:\n{}", ply_header(context),
      case_lines(context.triple, catalog), ply_text, serialize_analyst_report(analyst));
  return Prompt{std::string(kPolisherPrompt), std::move(user)};
}

Prompt build_distiller_prompt(std::string_view argument_json) {
  return Prompt{std::string(kDistillerPrompt),
                fmt::format("Input Argument JSON:\n{}", argument_json)};
}

Prompt with_format_reminder(Prompt prompt) {
  prompt.user += fmt::format("\n\n{}", kFormatReminder);
  return prompt;
}

}  // namespace legalarg
