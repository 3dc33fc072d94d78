#include <gtest/gtest.h>

#include "legalarg/case_generator.hpp"
#include "legalarg/error.hpp"
#include "legalarg/evaluation.hpp"
#include "support/worked_examples.hpp"
#include "support/oracles.hpp"
#include "support/random.hpp"

using namespace legalarg;

namespace {

ExtractedFactors to_extracted(const std::array<std::vector<FactorId>, 3>& ids) {
  ExtractedFactors e;
  for (std::size_t s = 0; s < 3; ++s) {
    for (FactorId id : ids[s]) e.add(kAllSlots[s], id);
  }
  return e;
}

RunRecord scored(const FactorSets& gt, const FactorSets& ext, Method m = Method::SA,
                 ScenarioMode scenario = ScenarioMode::Arguable) {
  RunRecord r;
  r.triple_id = "t";
  r.method = m;
  r.model = "m";
  r.scenario = scenario;
  r.ground_truth = gt;
  r.status = RunStatus::Completed;
  r.result = ThreePlyArgument::argued({"a", "b", "c"});
  r.extracted = to_extracted(ext);
  return r;
}

RunRecord with_status(RunStatus st, const FactorSets& gt, ScenarioMode scenario) {
  gen::Rng rng(0);
  RunRecord r = gen::record(rng, st, "t", scenario);
  r.ground_truth = gt;
  return r;
}

}  // namespace

TEST(MetricOracle, CountsAndRatiosMatchBruteForce) {
  gen::Rng rng(2024);
  for (int i = 0; i < 1000; ++i) {
    const FactorSets gt = gen::nonempty_truth(rng);
    std::array<std::vector<FactorId>, 3> ext;
    for (std::size_t s = 0; s < 3; ++s) ext[s] = gen::mentions(rng, gt[s], 9);
    const MetricInputs in{gt, to_extracted(ext), false, ScenarioMode::Arguable};

    const oracle::Counts c = oracle::brute_counts(gt, ext);
    const MetricCounts got = count_metrics(gt, in.extracted);
    ASSERT_EQ(got.n_gt, c.n_gt);
    ASSERT_EQ(got.n_h, c.n_h);
    ASSERT_EQ(got.n_util, c.n_util);

    const Ratio acc = hallucination_accuracy_ratio(in);
    const oracle::Fraction acc_o = oracle::brute_acc_h(c);
    ASSERT_TRUE(oracle::same_value(acc_o, acc.num, acc.den));
    ASSERT_EQ(format_percent(acc), oracle::nearest_percent(acc_o.num, acc_o.den));

    MetricInputs abst = in;
    abst.abstained = rng.coin();
    const Ratio rec = factor_recall_ratio(abst);
    const oracle::Fraction rec_o = oracle::brute_rec_u(c, abst.abstained);
    ASSERT_TRUE(oracle::same_value(rec_o, rec.num, rec.den));
    ASSERT_GE(rec.num, 0);
    ASSERT_LE(rec.num, rec.den);
    ASSERT_LE(acc.num, acc.den);
  }
}

TEST(MetricOracle, AbstentionMatchesBruteForce) {
  gen::Rng rng(7);
  int checked = 0;
  for (int i = 0; i < 600; ++i) {
    std::vector<RunRecord> records;
    std::vector<RunStatus> statuses;
    const int n = rng.between(1, 12);
    for (int k = 0; k < n; ++k) {
      const RunStatus st = gen::status(rng);
      statuses.push_back(st);
      records.push_back(gen::record(rng, st, "t" + std::to_string(k), ScenarioMode::Mismatched));
    }
    const oracle::Fraction f = oracle::brute_abstention(statuses);
    if (f.den == 0) {
      EXPECT_THROW(abstention_ratio_exact(records), EmptyCellError);
      continue;
    }
    const Ratio r = abstention_ratio_exact(records);
    ASSERT_TRUE(oracle::same_value(f, r.num, r.den));
    ASSERT_EQ(format_percent(r), oracle::nearest_percent(f.num, f.den));
    ++checked;
  }
  EXPECT_GT(checked, 400);
}

TEST(Percent, KnownValues) {
  EXPECT_EQ(format_percent(Ratio{83, 90}), "92.22");
  EXPECT_EQ(format_percent(Ratio{0, 90}), "0.00");
  EXPECT_EQ(format_percent(Ratio{90, 90}), "100.00");
  EXPECT_EQ(format_percent(Ratio{1, 8}), "12.50");
  EXPECT_EQ(format_percent(Ratio{1, 80000}), "0.00");
  EXPECT_EQ(format_percent(Ratio{1, 40000}), "0.00");
  EXPECT_EQ(format_percent(Ratio{1, 20000}), "0.01");  // exactly 0.005, tie
  EXPECT_EQ(format_percent(Ratio{-1, 20000}), "-0.01");
  EXPECT_EQ(format_percent(Ratio{-1, 80000}), "0.00");  // no negative zero
  EXPECT_EQ(format_percent(Ratio{-3, 2}), "-150.00");
  EXPECT_THROW(format_percent(Ratio{1, 0}), DegenerateInputError);
}

TEST(Percent, MatchesSearchOracle) {
  gen::Rng rng(5);
  for (int i = 0; i < 5000; ++i) {
    const std::int64_t den = rng.between(1, 100000);
    const std::int64_t num = rng.between(-2 * static_cast<int>(den), 2 * static_cast<int>(den));
    ASSERT_EQ(format_percent(Ratio{num, den}), oracle::nearest_percent(num, den)) << num << "/" << den;
  }
}

TEST(RatioType, ValueSemantics) {
  EXPECT_EQ((Ratio{2, 4}), (Ratio{1, 2}));
  EXPECT_LT((Ratio{1, 3}), (Ratio{1, 2}));
  EXPECT_EQ((Ratio{1, 3}) + (Ratio{1, 6}), (Ratio{1, 2}));
  EXPECT_EQ((Ratio{6, 8}).reduced().den, 4);
  EXPECT_EQ((Ratio{-6, -8}).reduced().num, 3);
}

TEST(Metrics, Degenerate) {
  const MetricInputs empty{};
  EXPECT_THROW(hallucination_accuracy_ratio(empty), DegenerateInputError);
  EXPECT_THROW(factor_recall_ratio(empty), DegenerateInputError);
  EXPECT_THROW(abstention_ratio_exact({}), EmptyCellError);
  const FactorSets gt{{{FactorId{1}}, {}, {}}};
  EXPECT_THROW(abstention_ratio_exact({with_status(RunStatus::Failed, gt, ScenarioMode::NonArguable)}),
               EmptyCellError);
}

TEST(Metrics, NegativeAccuracyAndDuplicates) {
  const FactorSets gt{{{FactorId{1}}, {}, {}}};
  MetricInputs in;
  in.ground_truth = gt;
  in.extracted = to_extracted({{{FactorId{2}, FactorId{3}}, {FactorId{4}}, {}}});
  EXPECT_EQ(hallucination_accuracy_ratio(in), (Ratio{-2, 1}));
  EXPECT_DOUBLE_EQ(hallucination_accuracy(in), -200.0);
  in.extracted = to_extracted({{{FactorId{1}, FactorId{1}}, {FactorId{1}}, {}}});
  const MetricCounts c = count_metrics(gt, in.extracted);
  EXPECT_EQ(c, (MetricCounts{1, 1, 1}));
}

TEST(Metrics, FailedRunsDoNotMoveAbstention) {
  const FactorSets gt{{{FactorId{1}}, {}, {}}};
  std::vector<RunRecord> records = {with_status(RunStatus::Abstained, gt, ScenarioMode::Mismatched),
                                    with_status(RunStatus::Completed, gt, ScenarioMode::Mismatched)};
  const Ratio before = abstention_ratio_exact(records);
  for (int i = 0; i < 5; ++i) records.push_back(with_status(RunStatus::Failed, gt, ScenarioMode::Mismatched));
  EXPECT_EQ(abstention_ratio_exact(records), before);
  EXPECT_DOUBLE_EQ(abstention_ratio(records), 50.0);
}

TEST(Distiller, ParsesListsOfFactorStrings) {
  const std::string reply = "Here you go:\n```json\n" + std::string(golden::kExampleOutput) + "\n```";
  const ExtractedFactors e = parse_distiller_output(reply);
  EXPECT_EQ(e.at(Slot::c1), (std::vector<FactorId>{FactorId{4}, FactorId{6}, FactorId{12}, FactorId{1}}));
  EXPECT_EQ(e.at(Slot::c2), (std::vector<FactorId>{FactorId{4}, FactorId{6}, FactorId{7}}));
  EXPECT_EQ(e.at(Slot::c3), (std::vector<FactorId>{FactorId{1}, FactorId{5}}));
  // Unknown ids are kept as hallucinations; duplicates collapse.
  const ExtractedFactors u = parse_distiller_output(R"({"c1":["F9","F9 x"],"c2":[],"c3":[]})");
  EXPECT_EQ(u.at(Slot::c1), (std::vector<FactorId>{FactorId{9}}));
}

TEST(Distiller, Malformed) {
  EXPECT_THROW(parse_distiller_output("nothing"), MalformedOutputError);
  EXPECT_THROW(parse_distiller_output(R"({"c1":[],"c2":[]})"), MissingKeyError);
  EXPECT_THROW(parse_distiller_output(R"({"c1":"F1","c2":[],"c3":[]})"), MalformedOutputError);
  EXPECT_THROW(parse_distiller_output(R"({"c1":[1],"c2":[],"c3":[]})"), MalformedOutputError);
  EXPECT_THROW(parse_distiller_output(R"({"c1":["no token"],"c2":[],"c3":[]})"), MalformedOutputError);
}

TEST(Distiller, OneRepromptThenEvaluationError) {
  const auto arg = ThreePlyArgument::argued({"c1 has F4.", "b", "c"});
  ScriptedBackend ok("judge");
  ok.push("garbage");
  ok.push(R"({"c1":["F4"],"c2":[],"c3":[]})");
  int reprompts = 0;
  EXPECT_EQ(extract_factors_llm(arg, ok, &reprompts).at(Slot::c1), (std::vector<FactorId>{FactorId{4}}));
  EXPECT_EQ(reprompts, 1);
  ASSERT_EQ(ok.call_count(), 2u);
  EXPECT_NE(ok.requests()[1].user, ok.requests()[0].user);
  EXPECT_DOUBLE_EQ(ok.requests()[0].params.temperature, 0.0);

  ScriptedBackend bad("judge");
  bad.push("garbage");
  bad.push("{}");
  bad.push(R"({"c1":[],"c2":[],"c3":[]})");
  EXPECT_THROW(extract_factors_llm(arg, bad), EvaluationError);
  EXPECT_EQ(bad.call_count(), 2u);

  EXPECT_THROW(extract_factors_llm(ThreePlyArgument::abstained(1, "x"), ok), ContractViolation);
}

TEST(Evaluate, FillsCompletedAndCountsFailures) {
  gen::Rng rng(3);
  std::vector<RunRecord> records;
  for (RunStatus st : {RunStatus::Completed, RunStatus::Abstained, RunStatus::Failed, RunStatus::Completed}) {
    records.push_back(gen::record(rng, st));
  }
  records[0].result = ThreePlyArgument::argued({"c1 and c2 share F4 Agreed-Not-To-Disclose (P).", "b", "c"});
  records[1].extracted = ExtractedFactors{};
  EXPECT_EQ(evaluate_records(records, nullptr), 0u);
  EXPECT_EQ(records[0].extractor, "canonical");
  EXPECT_EQ(records[0].extracted->at(Slot::c2), (std::vector<FactorId>{FactorId{4}}));
  EXPECT_TRUE(records[3].extracted.has_value());
  EXPECT_FALSE(records[1].extracted.has_value());
  EXPECT_FALSE(records[2].extracted.has_value());

  ScriptedBackend judge("judge");
  judge.push(R"({"c1":["F2"],"c2":[],"c3":[]})");
  judge.push("x");
  judge.push("y");
  EXPECT_EQ(evaluate_records(records, &judge, load_catalog(), 1), 1u);
  EXPECT_EQ(records[0].extractor, "judge");
  EXPECT_FALSE(records[3].extracted.has_value());
}

TEST(Evaluate, WorkersDoNotChangeResults) {
  const auto triples = generate_set(ScenarioMode::Arguable, 5, 30, 8);
  std::vector<RunRecord> a;
  for (const CaseTriple& t : triples) {
    RunRecord r = scored(ground_truth(t), {}, Method::SA);
    r.triple_id = t.id;
    r.extracted.reset();
    std::string text = "c1 and c2 share";
    for (FactorId id : t.c1.factors) text += " " + to_string(id);
    r.result = ThreePlyArgument::argued({text + ".", "b", "c"});
    a.push_back(r);
  }
  std::vector<RunRecord> b = a;
  evaluate_records(a, nullptr, load_catalog(), 1);
  evaluate_records(b, nullptr, load_catalog(), 4);
  EXPECT_EQ(a, b);
}

TEST(Aggregate, PooledAndMeanPerTriple) {
  const FactorSets gt_small{{{FactorId{1}}, {}, {}}};
  const FactorSets gt_big{{{FactorId{1}, FactorId{2}, FactorId{3}}, {}, {}}};
  std::vector<RunRecord> records = {
      scored(gt_small, {{{FactorId{1}, FactorId{5}}, {}, {}}}),  // acc 0/1, rec 1/1
      scored(gt_big, {{{FactorId{1}}, {}, {}}}),                 // acc 3/3, rec 1/3
  };
  auto cells = aggregate(records, AggregationPolicy::Pooled);
  ASSERT_EQ(cells.size(), 1u);
  EXPECT_EQ(*cells[0].acc_h, (Ratio{3, 4}));
  EXPECT_EQ(*cells[0].rec_u, (Ratio{2, 4}));
  EXPECT_FALSE(cells[0].ratio_abstain.has_value());

  cells = aggregate(records, AggregationPolicy::MeanPerTriple);
  EXPECT_EQ(*cells[0].acc_h, (Ratio{1, 2}));
  EXPECT_EQ(*cells[0].rec_u, (Ratio{2, 3}));
}

TEST(Aggregate, AbstainedAndFailedRuns) {
  const FactorSets gt{{{FactorId{1}, FactorId{2}}, {}, {}}};
  std::vector<RunRecord> records = {scored(gt, {{{FactorId{1}, FactorId{2}}, {}, {}}}),
                                    with_status(RunStatus::Abstained, gt, ScenarioMode::Arguable),
                                    with_status(RunStatus::Failed, gt, ScenarioMode::Arguable)};
  records.push_back(scored(gt, {}));
  records.back().extracted.reset();  // unscored
  const auto cells = aggregate(records);
  ASSERT_EQ(cells.size(), 1u);
  const CellReport& c = cells[0];
  EXPECT_EQ(c.triples, 4u);
  EXPECT_EQ(c.completed, 2u);
  EXPECT_EQ(c.abstained, 1u);
  EXPECT_EQ(c.failed, 1u);
  EXPECT_EQ(c.unscored, 1u);
  EXPECT_EQ(*c.acc_h, (Ratio{1, 1}));
  EXPECT_EQ(*c.rec_u, (Ratio{2, 4}));
}

TEST(Aggregate, CellsAndNonArguableAbstention) {
  const FactorSets gt{{{FactorId{1}}, {}, {}}};
  std::vector<RunRecord> records;
  for (Method m : {Method::RMA, Method::SA}) {
    records.push_back(with_status(RunStatus::Abstained, gt, ScenarioMode::NonArguable));
    records.back().method = m;
    records.push_back(scored(gt, {{{FactorId{1}}, {}, {}}}, m, ScenarioMode::NonArguable));
    records.push_back(scored(gt, {{{FactorId{1}}, {}, {}}}, m, ScenarioMode::Arguable));
  }
  records.push_back(with_status(RunStatus::Failed, gt, ScenarioMode::NonArguable));
  const auto cells = aggregate(records);
  ASSERT_EQ(cells.size(), 4u);
  EXPECT_EQ(cells[0].method, Method::SA);
  EXPECT_EQ(cells[0].scenario, ScenarioMode::Arguable);
  EXPECT_EQ(cells[1].scenario, ScenarioMode::NonArguable);
  EXPECT_EQ(*cells[1].ratio_abstain, (Ratio{1, 2}));
  EXPECT_FALSE(cells[1].rec_u.has_value());
  EXPECT_EQ(cells[3].method, Method::RMA);
}

TEST(Report, TablesAndCsv) {
  const FactorSets gt{{{FactorId{1}, FactorId{2}}, {}, {}}};
  std::vector<RunRecord> records = {
      scored(gt, {{{FactorId{1}, FactorId{2}}, {}, {}}}, Method::RMA),
      scored(gt, {{{FactorId{1}, FactorId{9}}, {}, {}}}, Method::SA),
      with_status(RunStatus::Abstained, gt, ScenarioMode::Mismatched),
  };
  ReportMetadata meta;
  meta.lines.push_back("dataset: test");
  const RenderedReport r = render_report(aggregate(records), meta);
  EXPECT_EQ(r.acc_h_csv, "model,method,arguable,mismatched,non-arguable\nm,SA,50.00,,\nm,RMA,100.00,,\n");
  EXPECT_EQ(r.rec_u_csv, "model,method,arguable\nm,SA,50.00\nm,RMA,100.00\n");
  EXPECT_EQ(r.abstention_csv, "model,method,mismatched,non-arguable\nm,SA,100.00,\nm,RMA,,\n");
  EXPECT_NE(r.counts_csv.find("m,SA,mismatched,1,0,1,0,0,0,0,0,,,100.00\n"), std::string::npos);
  EXPECT_NE(r.text.find("# dataset: test\n"), std::string::npos);
  EXPECT_NE(r.text.find("Hallucination Accuracy (%)"), std::string::npos);
  EXPECT_NE(r.text.find("100.00*"), std::string::npos);
  EXPECT_NE(r.text.find("50.00 "), std::string::npos);
  EXPECT_NE(r.text.find("Run counts"), std::string::npos);
}

TEST(Report, EmptyInput) {
  const RenderedReport r = render_report({}, ReportMetadata{});
  EXPECT_EQ(r.acc_h_csv, "model,method,arguable,mismatched,non-arguable\n");
  EXPECT_NE(r.text.find("Successful Abstention Ratio (%)"), std::string::npos);
}
