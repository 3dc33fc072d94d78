#include <benchmark/benchmark.h>

#include "legalarg/case_generator.hpp"
#include "legalarg/evaluation.hpp"
#include "legalarg/pipelines.hpp"

using namespace legalarg;

namespace {

void BM_GenerateTriple(benchmark::State& state) {
  const auto mode = static_cast<ScenarioMode>(state.range(0));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(generate_triple(mode, 5, ++seed));
}
BENCHMARK(BM_GenerateTriple)->Arg(0)->Arg(1)->Arg(2);

void BM_CanonicalExtraction(benchmark::State& state) {
  MockDeveloper dev(MockBehavior::Faithful);
  const CaseTriple t = generate_triple(ScenarioMode::Arguable, 5, 7);
  const RunRecord r = run_ma(t, dev);
  for (auto _ : state) benchmark::DoNotOptimize(extract_factors_canonical(*r.result));
}
BENCHMARK(BM_CanonicalExtraction);

void BM_CountMetrics(benchmark::State& state) {
  const CaseTriple t = generate_triple(ScenarioMode::Arguable, 5, 7);
  ExtractedFactors e;
  for (Slot s : kAllSlots) {
    for (FactorId id : t.at(s).factors) e.add(s, id);
  }
  const FactorSets gt = ground_truth(t);
  for (auto _ : state) benchmark::DoNotOptimize(count_metrics(gt, e));
}
BENCHMARK(BM_CountMetrics);

void BM_OracleRma(benchmark::State& state) {
  MockDeveloper dev(MockBehavior::Fabricating, 1);
  OracleAnalyst analyst;
  OraclePolisher polisher;
  const auto triples = generate_set(ScenarioMode::Arguable, 5, 16, 3);
  std::size_t i = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(run_rma(triples[i++ % triples.size()], dev, analyst, polisher));
  }
}
BENCHMARK(BM_OracleRma);

void BM_TranscriptRoundTrip(benchmark::State& state) {
  MockDeveloper dev(MockBehavior::Fabricating, 1);
  OracleAnalyst analyst;
  OraclePolisher polisher;
  const RunRecord r = run_rma(generate_triple(ScenarioMode::Arguable, 5, 3), dev, analyst, polisher);
  for (auto _ : state) benchmark::DoNotOptimize(parse_run_record(serialize_run_record(r)));
}
BENCHMARK(BM_TranscriptRoundTrip);

}  // namespace

BENCHMARK_MAIN();
