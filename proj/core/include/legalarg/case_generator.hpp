#pragma once

#include <cstdint>
#include <vector>

#include "legalarg/cases.hpp"
#include "legalarg/factor_catalog.hpp"

namespace legalarg {

// SplitMix64 finalizer. Per-triple seeds are derived as
// seed_i = mix64(master_seed + (i + 1) * 0x9E3779B97F4A7C15), i.e. the i-th
// output of a SplitMix64 stream started at master_seed.
std::uint64_t mix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index);

// Samples a triple satisfying the mode contract. Each case gets between
// complexity-1 and complexity+1 factors. Pure in its arguments.
// Throws InfeasibleParametersError.
CaseTriple generate_triple(ScenarioMode mode, int complexity, std::uint64_t seed,
                           const FactorCatalog& catalog = load_catalog());

// `count` triples with ids "<mode>-<index>" and seeds from derive_seed().
std::vector<CaseTriple> generate_set(ScenarioMode mode, int complexity, int count,
                                     std::uint64_t master_seed,
                                     const FactorCatalog& catalog = load_catalog());

// Which scenario contract the triple satisfies, ignoring its `mode` field:
//   NonArguable  c1∩c2 = ∅ and c1∩c3 = ∅
//   Mismatched   c1∩c2 holds a P factor, c1∩c3 a D factor, but a precedent
//                outcome does not favor the side it is cited for
//   Arguable     same overlap, c2 won by Plaintiff and c3 by Defendant
// Anything else throws UnclassifiableTripleError.
ScenarioMode classify_triple(const CaseTriple& triple,
                             const FactorCatalog& catalog = load_catalog());

}  // namespace legalarg
