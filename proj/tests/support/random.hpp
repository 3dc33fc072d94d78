// Hand-rolled generators for property tests.
#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "legalarg/argument.hpp"
#include "legalarg/cases.hpp"
#include "legalarg/pipelines.hpp"

namespace gen {

using legalarg::FactorId;

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  int between(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(engine_); }
  bool coin(double p = 0.5) { return std::bernoulli_distribution(p)(engine_); }
  std::uint64_t u64() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

// Sorted distinct ids drawn from 1..universe.
inline std::vector<FactorId> id_set(Rng& rng, int max_size, int universe = 30) {
  std::vector<int> pool(static_cast<std::size_t>(universe));
  for (int i = 0; i < universe; ++i) pool[static_cast<std::size_t>(i)] = i + 1;
  for (int i = universe - 1; i > 0; --i) std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(rng.between(0, i))]);
  const int n = rng.between(0, std::min(max_size, universe));
  std::vector<FactorId> out;
  for (int i = 0; i < n; ++i) out.push_back(FactorId{pool[static_cast<std::size_t>(i)]});
  std::sort(out.begin(), out.end());
  return out;
}

// Ids in first-mention order with duplicates, as an extractor might see them.
inline std::vector<FactorId> mentions(Rng& rng, const std::vector<FactorId>& truth, int max_size) {
  std::vector<FactorId> out;
  const int n = rng.between(0, max_size);
  for (int i = 0; i < n; ++i) {
    if (!truth.empty() && rng.coin(0.6)) {
      out.push_back(truth[static_cast<std::size_t>(rng.between(0, static_cast<int>(truth.size()) - 1))]);
    } else {
      out.push_back(FactorId{rng.between(1, 30)});
    }
  }
  return out;
}

inline legalarg::FactorSets nonempty_truth(Rng& rng) {
  legalarg::FactorSets gt;
  do {
    for (auto& s : gt) s = id_set(rng, 7);
  } while (gt[0].empty() && gt[1].empty() && gt[2].empty());
  return gt;
}

inline legalarg::RunStatus status(Rng& rng) {
  switch (rng.between(0, 2)) {
    case 0:
      return legalarg::RunStatus::Completed;
    case 1:
      return legalarg::RunStatus::Abstained;
    default:
      return legalarg::RunStatus::Failed;
  }
}

// A structurally valid record for the given status.
inline legalarg::RunRecord record(Rng& rng, legalarg::RunStatus st, std::string id = "t",
                                  legalarg::ScenarioMode scenario = legalarg::ScenarioMode::Arguable) {
  legalarg::RunRecord r;
  r.triple_id = std::move(id);
  r.method = legalarg::Method::SA;
  r.model = "m";
  r.scenario = scenario;
  r.ground_truth = nonempty_truth(rng);
  r.status = st;
  switch (st) {
    case legalarg::RunStatus::Completed:
      r.result = legalarg::ThreePlyArgument::argued({"a", "b", "c"});
      break;
    case legalarg::RunStatus::Abstained:
      r.result = legalarg::ThreePlyArgument::abstained(rng.between(1, 3), "Generation stopped.");
      break;
    case legalarg::RunStatus::Failed:
      r.failure = legalarg::RunFailure{1, "developer", "malformed"};
      break;
  }
  return r;
}

}  // namespace gen
