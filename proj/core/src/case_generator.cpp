#include "legalarg/case_generator.hpp"

#include <algorithm>
#include <cstdio>
#include <limits>

#include "legalarg/error.hpp"
#include "sampler.hpp"

namespace legalarg {

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t index) {
  return mix64(master_seed + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

namespace {

using detail::Sampler;

std::vector<FactorId> with_side(const std::vector<FactorId>& ids, Side side,
                                const FactorCatalog& catalog) {
  std::vector<FactorId> out;
  for (FactorId id : ids) {
    if (catalog.side_of(id) == side) out.push_back(id);
  }
  return out;
}

std::vector<FactorId> without(std::vector<FactorId> ids, FactorId drop) {
  ids.erase(std::remove(ids.begin(), ids.end(), drop), ids.end());
  return ids;
}

std::vector<FactorId> merged(std::vector<FactorId> a, const std::vector<FactorId>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  return a;
}

// A precedent sharing `shared` with c1 and padded with factors outside c1.
Case precedent(Sampler& rng, std::vector<FactorId> shared, int size,
               const std::vector<FactorId>& outside_c1) {
  const auto extra = static_cast<std::size_t>(size) - shared.size();
  Case c;
  c.factors = merged(std::move(shared), rng.choose(outside_c1, extra));
  return c;
}

// Overlap of c1 with a precedent: one anchor of `side` plus random others.
std::vector<FactorId> overlap(Sampler& rng, const std::vector<FactorId>& c1, Side side,
                              int precedent_size, const FactorCatalog& catalog) {
  const int upper = std::max(1, std::min(static_cast<int>(c1.size()), precedent_size) - 1);
  const int count = rng.between(1, upper);
  const FactorId anchor = rng.pick(with_side(c1, side, catalog));
  auto others = rng.choose(without(c1, anchor), static_cast<std::size_t>(count - 1));
  others.push_back(anchor);
  std::sort(others.begin(), others.end());
  return others;
}

void check_feasible(ScenarioMode mode, int complexity, const FactorCatalog& catalog) {
  if (complexity < 2) {
    throw InfeasibleParametersError("complexity must be at least 2, got " +
                                    std::to_string(complexity));
  }
  const auto available = static_cast<long>(catalog.count());
  const long largest = complexity + 1;
  // Worst case: c1 and a precedent both at the maximum size, sharing one
  // factor (arguable) or nothing (non-arguable).
  const long needed = mode == ScenarioMode::NonArguable ? 2 * largest : 2 * largest - 1;
  if (needed > available) {
    throw InfeasibleParametersError(
        "complexity " + std::to_string(complexity) + " needs up to " + std::to_string(needed) +
        " distinct factors in " + std::string(to_string(mode)) + " mode but the catalog has " +
        std::to_string(available));
  }
}

}  // namespace

CaseTriple generate_triple(ScenarioMode mode, int complexity, std::uint64_t seed,
                           const FactorCatalog& catalog) {
  check_feasible(mode, complexity, catalog);
  Sampler rng(seed);
  const auto all = catalog.ids();

  const bool overlapping = mode != ScenarioMode::NonArguable;
  const int n1 = rng.between(overlapping ? std::max(2, complexity - 1) : complexity - 1,
                             complexity + 1);
  const int n2 = rng.between(complexity - 1, complexity + 1);
  const int n3 = rng.between(complexity - 1, complexity + 1);

  CaseTriple t;
  t.mode = mode;
  t.seed = seed;
  t.complexity = complexity;

  if (overlapping) {
    // c1 holds at least one factor per side so each precedent can share one
    // that favors the party citing it.
    const FactorId p_anchor = rng.pick(catalog.ids_with_side(Side::P));
    const FactorId d_anchor = rng.pick(catalog.ids_with_side(Side::D));
    auto rest = rng.choose(without(without(all, p_anchor), d_anchor),
                           static_cast<std::size_t>(n1 - 2));
    t.c1.factors = merged(std::move(rest), {p_anchor, d_anchor});
    const auto outside = subtract(all, t.c1.factors);
    auto shared_p = overlap(rng, t.c1.factors, Side::P, n2, catalog);
    auto shared_d = overlap(rng, t.c1.factors, Side::D, n3, catalog);
    t.c2 = precedent(rng, std::move(shared_p), n2, outside);
    t.c3 = precedent(rng, std::move(shared_d), n3, outside);
  } else {
    t.c1.factors = rng.choose(all, static_cast<std::size_t>(n1));
    const auto outside = subtract(all, t.c1.factors);
    t.c2 = precedent(rng, {}, n2, outside);
    t.c3 = precedent(rng, {}, n3, outside);
  }

  t.c1.name = "TSC1";
  t.c2.name = "TSC2";
  t.c3.name = "TSC3";
  const bool swapped = mode == ScenarioMode::Mismatched;
  t.c2.outcome = swapped ? Outcome::Defendant : Outcome::Plaintiff;
  t.c3.outcome = swapped ? Outcome::Plaintiff : Outcome::Defendant;

  char id[64];
  std::snprintf(id, sizeof id, "%.*s-%016llx", static_cast<int>(to_string(mode).size()),
                to_string(mode).data(), static_cast<unsigned long long>(seed));
  t.id = id;
  return t;
}

std::vector<CaseTriple> generate_set(ScenarioMode mode, int complexity, int count,
                                     std::uint64_t master_seed, const FactorCatalog& catalog) {
  if (count < 1) throw InfeasibleParametersError("count must be at least 1");
  std::vector<CaseTriple> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    CaseTriple t = generate_triple(mode, complexity, derive_seed(master_seed, i), catalog);
    char id[64];
    std::snprintf(id, sizeof id, "%.*s-%04d", static_cast<int>(to_string(mode).size()),
                  to_string(mode).data(), i);
    t.id = id;
    out.push_back(std::move(t));
  }
  return out;
}

ScenarioMode classify_triple(const CaseTriple& triple, const FactorCatalog& catalog) {
  if (!triple.c2.outcome || !triple.c3.outcome) {
    throw UnclassifiableTripleError(triple.id + ": precedent without outcome");
  }
  const auto shared_c2 = intersect(triple.c1.factors, triple.c2.factors);
  const auto shared_c3 = intersect(triple.c1.factors, triple.c3.factors);
  if (shared_c2.empty() && shared_c3.empty()) return ScenarioMode::NonArguable;

  const bool c2_usable = !with_side(shared_c2, Side::P, catalog).empty();
  const bool c3_usable = !with_side(shared_c3, Side::D, catalog).empty();
  if (!c2_usable || !c3_usable) {
    throw UnclassifiableTripleError(
        triple.id + ": c1 must share a P factor with c2 and a D factor with c3 (shares " +
        std::to_string(shared_c2.size()) + " with c2, " + std::to_string(shared_c3.size()) +
        " with c3)");
  }
  if (*triple.c2.outcome == Outcome::Plaintiff && *triple.c3.outcome == Outcome::Defendant) {
    return ScenarioMode::Arguable;
  }
  return ScenarioMode::Mismatched;
}

}  // namespace legalarg
