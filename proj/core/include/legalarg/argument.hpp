#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "legalarg/cases.hpp"
#include "legalarg/factor_catalog.hpp"

namespace legalarg {

// JSON keys of the three plies, in argument order.
inline constexpr std::array<std::string_view, 3> kPlyKeys = {
    "Plaintiff's Argument", "Defendant's Counterargument", "Plaintiff's Rebuttal"};

inline constexpr std::string_view kTerminate = "TERMINATE";

// "[TSC2] [outcome Plaintiff] [Factors: F4 Agreed-not-to-disclose (P), ...]".
// The outcome segment appears only when the case has one.
std::string render_case(const Case& c, const FactorCatalog& catalog = load_catalog());

// One factor per line, preceded by "outcome <X>" for precedents.
std::string render_case_listing(const Case& c, const FactorCatalog& catalog = load_catalog());

struct Abstention {
  int ply = 1;  // 1-based ply that emitted TERMINATE
  std::string reason;

  bool operator==(const Abstention&) const = default;
};

class ThreePlyArgument {
 public:
  using Plies = std::array<std::string, 3>;

  // Throws std::invalid_argument on an empty ply.
  static ThreePlyArgument argued(Plies plies);
  static ThreePlyArgument abstained(int ply, std::string reason);

  bool is_abstention() const { return std::holds_alternative<Abstention>(content_); }
  const Plies& plies() const { return std::get<Plies>(content_); }
  const Abstention& abstention() const { return std::get<Abstention>(content_); }

  bool operator==(const ThreePlyArgument&) const = default;

 private:
  explicit ThreePlyArgument(std::variant<Plies, Abstention> content)
      : content_(std::move(content)) {}
  std::variant<Plies, Abstention> content_;
};

// If `text` (trimmed) starts with TERMINATE, returns the remainder with a
// leading ':' and surrounding whitespace removed.
std::optional<std::string> termination_reason(std::string_view text);
std::string terminate_text(std::string_view reason);

// Extracts the first complete JSON object embedded in `text`, skipping prose
// and code fences. Throws MalformedOutputError when there is none.
std::string find_json_object(std::string_view text);

// Any ply starting with TERMINATE makes the result an abstention at the first
// such ply; otherwise all three keys must be present with non-empty strings.
// Throws MalformedOutputError / MissingKeyError.
ThreePlyArgument parse_three_ply(std::string_view text);

// Single-ply output of the per-ply pipelines: an object keyed by kPlyKeys[ply-1].
std::string parse_single_ply(std::string_view text, int ply);

std::string serialize_three_ply(const ThreePlyArgument& argument);

// Factor ids attributed to each case, duplicate-free, first-mention order.
struct ExtractedFactors {
  FactorSets per_slot;

  const std::vector<FactorId>& at(Slot slot) const { return per_slot[index_of(slot)]; }
  std::vector<FactorId>& at(Slot slot) { return per_slot[index_of(slot)]; }
  // Adds unless already present.
  void add(Slot slot, FactorId id);
  bool operator==(const ExtractedFactors&) const = default;
};

struct CanonicalExtraction {
  ExtractedFactors attributed;
  // Factors explicitly denied for a slot ("c1 does not have F5").
  ExtractedFactors denied;
  // Outcomes stated as "c2 (outcome Plaintiff)".
  std::array<std::optional<Outcome>, 3> claimed_outcomes;
  std::vector<std::string> ambiguous_sentences;
  // Mentions whose written side disagrees with the catalog.
  std::vector<FactorId> side_mismatches;
};

// Attribution for canonical-syntax text: sentences split on . ! ? ; and every
// factor in a sentence goes to every case the sentence names, except cases
// that are negated ("c1 does not have", "c1 lacks", "not in c1").
CanonicalExtraction extract_canonical(std::string_view text,
                                      const FactorCatalog& catalog = load_catalog());

// The same over every ply of a non-abstained argument.
CanonicalExtraction extract_factors_canonical(const ThreePlyArgument& argument,
                                              const FactorCatalog& catalog = load_catalog());

// Throws AmbiguousAttributionError if any sentence could not be attributed.
ExtractedFactors extract_factors_canonical_strict(const ThreePlyArgument& argument,
                                                  const FactorCatalog& catalog = load_catalog());

}  // namespace legalarg
