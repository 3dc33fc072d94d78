#pragma once

#include <algorithm>
#include <cstdint>
#include <random>
#include <vector>

#include "legalarg/factor_catalog.hpp"

namespace legalarg::detail {

// std::uniform_int_distribution is implementation-defined; datasets must be
// identical across standard libraries, so sampling is done by hand on top of
// the fully specified mt19937_64 output.
class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, n).
  std::size_t below(std::size_t n) {
    const std::uint64_t bound = n;
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t r = engine_();
      if (r >= threshold) return static_cast<std::size_t>(r % bound);
    }
  }

  // Uniform in [lo, hi].
  int between(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::size_t>(hi - lo + 1))); }

  // `k` distinct elements of `pool`, sorted.
  std::vector<FactorId> choose(std::vector<FactorId> pool, std::size_t k) {
    for (std::size_t i = 0; i < k; ++i) {
      std::swap(pool[i], pool[i + below(pool.size() - i)]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  FactorId pick(const std::vector<FactorId>& pool) { return pool[below(pool.size())]; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace legalarg::detail
