#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "legalarg/factor_catalog.hpp"

namespace legalarg {

enum class Outcome { Plaintiff, Defendant };

std::string_view to_string(Outcome outcome);
std::optional<Outcome> outcome_from_string(std::string_view text);

enum class ScenarioMode { Arguable, Mismatched, NonArguable };

inline constexpr std::array<ScenarioMode, 3> kAllModes = {
    ScenarioMode::Arguable, ScenarioMode::Mismatched, ScenarioMode::NonArguable};

// "arguable", "mismatched", "non-arguable"
std::string_view to_string(ScenarioMode mode);
// Also accepts "NonArguable", "non_arguable", ...
std::optional<ScenarioMode> mode_from_string(std::string_view text);
// "Arguable", "Mismatched", "Non-Arguable"
std::string_view display_name(ScenarioMode mode);

// Position of a case inside a triple: the current case and the two precedents.
enum class Slot { c1, c2, c3 };

inline constexpr std::array<Slot, 3> kAllSlots = {Slot::c1, Slot::c2, Slot::c3};

std::string_view to_string(Slot slot);
inline constexpr std::size_t index_of(Slot slot) { return static_cast<std::size_t>(slot); }

struct Case {
  std::string name;
  std::optional<Outcome> outcome;
  std::vector<FactorId> factors;  // sorted, duplicate-free

  bool has(FactorId id) const;
  bool operator==(const Case&) const = default;
};

struct CaseTriple {
  std::string id;
  Case c1;
  Case c2;
  Case c3;
  ScenarioMode mode = ScenarioMode::Arguable;
  std::uint64_t seed = 0;
  int complexity = 0;

  const Case& at(Slot slot) const;
  bool operator==(const CaseTriple&) const = default;
};

using FactorSets = std::array<std::vector<FactorId>, 3>;

// Ground-truth factor ids per slot.
FactorSets ground_truth(const CaseTriple& triple);

// Sorted intersection / difference of sorted id lists.
std::vector<FactorId> intersect(const std::vector<FactorId>& a, const std::vector<FactorId>& b);
std::vector<FactorId> subtract(const std::vector<FactorId>& a, const std::vector<FactorId>& b);

// Structural checks: c1 without outcome, precedents with one, sorted unique
// factor ids that all resolve. Throws InvalidTripleError.
void validate_triple(const CaseTriple& triple, const FactorCatalog& catalog);

// One dataset line, fields in the order id, mode, complexity, seed, c1, c2, c3.
std::string serialize_triple(const CaseTriple& triple);
// Throws DatasetFormatError (line number 0 when parsing a single record).
CaseTriple parse_triple(std::string_view line);

std::string serialize_dataset(const std::vector<CaseTriple>& triples);
std::vector<CaseTriple> parse_dataset(std::string_view text);

}  // namespace legalarg
