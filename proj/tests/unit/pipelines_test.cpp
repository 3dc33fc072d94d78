#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "legalarg/case_generator.hpp"
#include "legalarg/error.hpp"
#include "legalarg/pipelines.hpp"
#include "support/random.hpp"

using namespace legalarg;
namespace fs = std::filesystem;

namespace {

const std::string kValid = R"({"analysis_outcome":"VALID_ARGUMENT","summary":"ok"})";
const std::string kNoRevision = R"({"argument_segment_type":"x","accuracy_assessment":"Accurate",
  "strength_assessment":"Strong","factor_utilization_assessment":"Excellent","feedback_summary":"ok",
  "revision_needed":false})";

std::string ply_json(int ply, const std::string& text) {
  return "{\"" + std::string(kPlyKeys[static_cast<std::size_t>(ply - 1)]) + "\": \"" + text + "\"}";
}

// Developer answering from a fixed list, one entry per call.
class ListDeveloper final : public Developer {
 public:
  explicit ListDeveloper(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  std::string respond(const DeveloperTurn& turn) override {
    turns.push_back({turn.context.ply, turn.revision.has_value(), turn.format_reminder});
    if (calls_ >= replies_.size()) throw TransportError("no reply left");
    return replies_[calls_++];
  }
  std::string name() const override { return "list"; }

  struct Seen {
    int ply;
    bool revision;
    bool reminder;
  };
  std::vector<Seen> turns;

 private:
  std::vector<std::string> replies_;
  std::size_t calls_ = 0;
};

class ListAnalyst final : public Analyst {
 public:
  explicit ListAnalyst(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  std::string review(const PlyContext&, std::string_view, bool) override {
    return replies_.at(std::min(calls++, replies_.size() - 1));
  }
  std::string name() const override { return "list"; }
  std::size_t calls = 0;

 private:
  std::vector<std::string> replies_;
};

class ListPolisher final : public Polisher {
 public:
  explicit ListPolisher(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  std::string review(const PlyContext&, std::string_view, const AnalystReport&, bool) override {
    return replies_.at(std::min(calls++, replies_.size() - 1));
  }
  std::string name() const override { return "list"; }
  std::size_t calls = 0;

 private:
  std::vector<std::string> replies_;
};

// Always re-adds a fabricated c1 factor, even when revising.
class StubbornDeveloper final : public Developer {
 public:
  std::string respond(const DeveloperTurn& turn) override {
    const CaseTriple& t = turn.context.triple;
    FactorId fake{1};
    while (t.c1.has(fake) || !load_catalog().contains(fake)) ++fake.value;
    return ply_json(turn.context.ply, "c1 has " + to_string(fake) + ".");
  }
  std::string name() const override { return "stubborn"; }
};

CaseTriple arguable() { return generate_triple(ScenarioMode::Arguable, 5, 1234); }

fs::path temp_file(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "legalarg_pipelines";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  fs::remove(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Methods, Names) {
  EXPECT_EQ(to_string(Method::SA_EP), "SA-EP");
  EXPECT_EQ(display_name(Method::RMA), "Reflective Multi-Agent");
  EXPECT_EQ(method_from_string("sa_ep"), std::optional(Method::SA_EP));
  EXPECT_EQ(method_from_string("Multi-Agent Debate without Reflection"), std::optional(Method::MA));
  EXPECT_FALSE(method_from_string("XYZ").has_value());
  EXPECT_EQ(variant_of(Method::RMA), PromptVariant::RMA);
}

TEST(FaithfulPipelines, StatusFollowsScenario) {
  MockDeveloper dev(MockBehavior::Faithful);
  OracleAnalyst analyst;
  OraclePolisher polisher;
  const AgentSet agents{&dev, &analyst, &polisher};
  for (ScenarioMode mode : kAllModes) {
    for (const CaseTriple& t : generate_set(mode, 5, 30, 2)) {
      for (Method m : kAllMethods) {
        const RunRecord r = run_method(m, t, agents);
        EXPECT_NO_THROW(check_invariants(r));
        EXPECT_EQ(r.status, mode == ScenarioMode::Arguable ? RunStatus::Completed : RunStatus::Abstained)
            << t.id << " " << to_string(m);
        EXPECT_EQ(r.reprompts, 0);
        EXPECT_EQ(r.model, "mock-faithful");
        EXPECT_EQ(r.ground_truth, ground_truth(t));
        if (m == Method::RMA && r.status == RunStatus::Completed) {
          EXPECT_EQ(r.reviews.size(), 3u);
          for (const PlyReview& review : r.reviews) EXPECT_EQ(review.trigger, RevisionTrigger::None);
        }
      }
    }
  }
}

TEST(RmaPipeline, FabricationIsRevisedAway) {
  MockDeveloper dev(MockBehavior::Fabricating, 1, 3);
  OracleAnalyst analyst;
  OraclePolisher polisher;
  for (const CaseTriple& t : generate_set(ScenarioMode::Arguable, 5, 40, 6)) {
    const auto plan = dev.plan_fabrications(t);
    ASSERT_EQ(plan.size(), 1u);
    const RunRecord r = run_rma(t, dev, analyst, polisher);
    ASSERT_EQ(r.status, RunStatus::Completed);
    const int ply = plan[0].ply;
    EXPECT_EQ(r.revisions[static_cast<std::size_t>(ply - 1)], 1);
    const PlyReview& review = r.reviews[static_cast<std::size_t>(ply - 1)];
    EXPECT_TRUE(review.trigger == RevisionTrigger::Analyst || review.trigger == RevisionTrigger::Both);
    EXPECT_EQ(review.analyst.size(), 2u);
    EXPECT_EQ(review.analyst[1].outcome, AnalysisOutcome::ValidArgument);
    EXPECT_FALSE(review.unresolved);
    EXPECT_EQ(r.result->plies()[static_cast<std::size_t>(ply - 1)], dev.ply_text(t, ply, true));
    EXPECT_EQ(r.revisions[0] + r.revisions[1] + r.revisions[2], 1);
  }
}

TEST(RmaPipeline, AnalystAbstentionStopsTheRun) {
  MockDeveloper dev(MockBehavior::NonAbstaining);
  OracleAnalyst analyst;
  OraclePolisher polisher;
  const CaseTriple t = generate_triple(ScenarioMode::NonArguable, 5, 3);
  const RunRecord r = run_rma(t, dev, analyst, polisher);
  ASSERT_EQ(r.status, RunStatus::Abstained);
  EXPECT_EQ(r.result->abstention().ply, 1);
  EXPECT_EQ(r.result->abstention().reason.rfind("Generation stopped. ", 0), 0u);
  ASSERT_EQ(r.reviews.size(), 1u);
  EXPECT_TRUE(r.reviews[0].polisher.empty());
  // Without reviewers the same developer argues anyway.
  EXPECT_EQ(run_ma(t, dev).status, RunStatus::Completed);
  EXPECT_EQ(run_sa(t, dev).status, RunStatus::Completed);
}

TEST(RmaPipeline, SecondCorrectionIsRecordedAsUnresolved) {
  StubbornDeveloper dev;
  OracleAnalyst analyst;
  OraclePolisher polisher;
  const RunRecord r = run_rma(arguable(), dev, analyst, polisher);
  ASSERT_EQ(r.status, RunStatus::Completed);
  for (const PlyReview& review : r.reviews) {
    EXPECT_TRUE(review.unresolved);
    EXPECT_EQ(review.analyst.size(), 2u);
    EXPECT_EQ(review.polisher.size(), 2u);
  }
  EXPECT_EQ(r.revisions, (std::array<int, 3>{1, 1, 1}));
}

TEST(RmaPipeline, PolisherAloneCanTriggerRevision) {
  const std::string needs = R"({"argument_segment_type":"x","accuracy_assessment":"Accurate",
    "strength_assessment":"Moderate","factor_utilization_assessment":"Fair","feedback_summary":"thin",
    "revision_needed":true,"instructions_for_developer":"use more factors"})";
  ListDeveloper dev({ply_json(1, "draft"), ply_json(1, "better"), ply_json(2, "two"), ply_json(3, "three")});
  ListAnalyst analyst({kValid});
  ListPolisher polisher({needs, kNoRevision});
  const RunRecord r = run_rma(arguable(), dev, analyst, polisher);
  ASSERT_EQ(r.status, RunStatus::Completed);
  EXPECT_EQ(r.reviews[0].trigger, RevisionTrigger::Polisher);
  EXPECT_EQ(r.result->plies()[0], "better");
  EXPECT_EQ(r.revisions, (std::array<int, 3>{1, 0, 0}));
  ASSERT_GE(dev.turns.size(), 2u);
  EXPECT_TRUE(dev.turns[1].revision);
}

TEST(Protocol, OneReprompt) {
  const CaseTriple t = arguable();
  ListDeveloper ok({"not json", R"({"Plaintiff's Argument":"a","Defendant's Counterargument":"b","Plaintiff's Rebuttal":"c"})"});
  const RunRecord r = run_sa(t, ok);
  EXPECT_EQ(r.status, RunStatus::Completed);
  EXPECT_EQ(r.reprompts, 1);
  ASSERT_EQ(ok.turns.size(), 2u);
  EXPECT_FALSE(ok.turns[0].reminder);
  EXPECT_TRUE(ok.turns[1].reminder);

  ListDeveloper broken({"not json", "still not json", "never asked"});
  const RunRecord f = run_sa_ep(t, broken);
  EXPECT_EQ(f.status, RunStatus::Failed);
  EXPECT_EQ(f.reprompts, 1);
  EXPECT_EQ(broken.turns.size(), 2u);
  EXPECT_EQ(f.failure->stage, "developer");
  EXPECT_FALSE(f.result.has_value());
}

TEST(Protocol, MalformedAnalystFailsAtThatStage) {
  ListDeveloper dev({ply_json(1, "a")});
  ListAnalyst analyst({"{}"});
  ListPolisher polisher({kNoRevision});
  const RunRecord r = run_rma(arguable(), dev, analyst, polisher);
  EXPECT_EQ(r.status, RunStatus::Failed);
  EXPECT_EQ(r.failure->stage, "analyst");
  EXPECT_EQ(r.failure->ply, 1);
  EXPECT_EQ(analyst.calls, 2u);
  EXPECT_EQ(r.reprompts, 1);
}

TEST(Protocol, TransportErrorIsNotReprompted) {
  ListDeveloper dev({});
  const RunRecord r = run_ma(arguable(), dev);
  EXPECT_EQ(r.status, RunStatus::Failed);
  EXPECT_EQ(r.reprompts, 0);
  EXPECT_EQ(dev.turns.size(), 1u);
}

TEST(Protocol, WrongKeyForSinglePlyIsMalformed) {
  ListDeveloper dev({ply_json(2, "wrong ply"), ply_json(2, "again")});
  const RunRecord r = run_ma(arguable(), dev);
  EXPECT_EQ(r.status, RunStatus::Failed);
  EXPECT_EQ(r.reprompts, 1);
}

TEST(Protocol, MaTerminationAtLaterPly) {
  ListDeveloper dev({ply_json(1, "a"), ply_json(2, "TERMINATE: nothing shared")});
  const RunRecord r = run_ma(arguable(), dev);
  ASSERT_EQ(r.status, RunStatus::Abstained);
  EXPECT_EQ(r.result->abstention(), (Abstention{2, "nothing shared"}));
}

TEST(Invariants, Violations) {
  gen::Rng rng(1);
  RunRecord r = gen::record(rng, RunStatus::Completed);
  EXPECT_NO_THROW(check_invariants(r));
  RunRecord bad = r;
  bad.status = RunStatus::Abstained;
  EXPECT_THROW(check_invariants(bad), ContractViolation);
  bad = r;
  bad.failure = RunFailure{};
  EXPECT_THROW(check_invariants(bad), ContractViolation);
  bad = r;
  bad.revisions[0] = 1;
  EXPECT_THROW(check_invariants(bad), ContractViolation);
  bad = r;
  bad.method = Method::RMA;
  bad.revisions[0] = 2;
  EXPECT_THROW(check_invariants(bad), ContractViolation);
  bad = r;
  bad.reviews.push_back(PlyReview{});
  EXPECT_THROW(check_invariants(bad), ContractViolation);
}

TEST(TranscriptProperty, SerializeThenParseIsIdentity) {
  MockDeveloper dev(MockBehavior::Fabricating, 1, 9);
  OracleAnalyst analyst;
  OraclePolisher polisher;
  PipelineOptions opts;
  opts.timestamps = true;
  gen::Rng rng(77);
  int n = 0;
  for (ScenarioMode mode : kAllModes) {
    for (const CaseTriple& t : generate_set(mode, 5, 60, 4)) {
      RunRecord r = run_method(kAllMethods[static_cast<std::size_t>(rng.between(0, 3))], t,
                               AgentSet{&dev, &analyst, &polisher}, opts);
      if (rng.coin() && r.status == RunStatus::Completed) {
        r.extracted = extract_factors_canonical(*r.result).attributed;
        r.extractor = "canonical";
      }
      const std::string line = serialize_run_record(r);
      EXPECT_EQ(line.find('\n'), std::string::npos);
      EXPECT_EQ(parse_run_record(line), r);
      ++n;
    }
  }
  for (int i = 0; i < 400; ++i) {
    const RunRecord r = gen::record(rng, gen::status(rng), "g" + std::to_string(i));
    EXPECT_EQ(parse_run_record(serialize_run_record(r)), r);
    ++n;
  }
  EXPECT_GE(n, 500);
}

TEST(Transcript, FieldsAndErrors) {
  gen::Rng rng(2);
  const RunRecord r = gen::record(rng, RunStatus::Abstained);
  const auto j = nlohmann::json::parse(serialize_run_record(r));
  EXPECT_EQ(j["abstention"]["rule"], "ply-prefix");
  EXPECT_TRUE(j["extracted_factors"].is_null());
  EXPECT_FALSE(j.contains("timestamps"));
  EXPECT_THROW(parse_run_record("{"), MalformedTranscriptError);
  EXPECT_THROW(parse_run_record("{\"triple_id\":\"x\"}"), MalformedTranscriptError);

  const fs::path p = temp_file("bad.jsonl");
  {
    std::ofstream out(p);
    out << serialize_run_record(r) << "\n\n" << "{\"oops\":1}\n";
  }
  try {
    read_transcript(p);
    FAIL();
  } catch (const MalformedTranscriptError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.file(), p.string());
  }
}

TEST(Batch, ResumeSkipsExistingAndNeverDuplicates) {
  const auto triples = generate_set(ScenarioMode::Arguable, 5, 12, 1);
  MockDeveloper dev(MockBehavior::Faithful);
  const RunFunction run = [&](const CaseTriple& t) { return run_sa(t, dev); };
  const fs::path p = temp_file("resume.jsonl");
  BatchOptions opts;
  const std::vector<CaseTriple> first(triples.begin(), triples.begin() + 5);
  EXPECT_EQ(run_batch(first, run, p, opts).completed, 5u);
  const BatchSummary s = run_batch(triples, run, p, opts);
  EXPECT_EQ(s.skipped, 5u);
  EXPECT_EQ(s.completed, 7u);
  const auto records = read_transcript(p);
  ASSERT_EQ(records.size(), 12u);
  for (std::size_t i = 0; i < records.size(); ++i) EXPECT_EQ(records[i].triple_id, triples[i].id);
  EXPECT_EQ(run_batch(triples, run, p, opts).skipped, 12u);
  EXPECT_EQ(read_transcript(p).size(), 12u);
  opts.overwrite = true;
  EXPECT_EQ(run_batch(first, run, p, opts).completed, 5u);
  EXPECT_EQ(read_transcript(p).size(), 5u);
}

TEST(Batch, TornFinalLineIsDropped) {
  const auto triples = generate_set(ScenarioMode::Arguable, 5, 4, 1);
  MockDeveloper dev(MockBehavior::Faithful);
  const RunFunction run = [&](const CaseTriple& t) { return run_sa(t, dev); };
  const fs::path p = temp_file("torn.jsonl");
  {
    std::ofstream out(p, std::ios::binary);
    out << serialize_run_record(run(triples[0])) << "\n" << serialize_run_record(run(triples[1])).substr(0, 40);
  }
  const BatchSummary s = run_batch(triples, run, p, BatchOptions{});
  EXPECT_EQ(s.skipped, 1u);
  EXPECT_EQ(read_transcript(p).size(), 4u);
}

TEST(Batch, ParallelOutputMatchesSerial) {
  const auto triples = generate_set(ScenarioMode::Mismatched, 5, 40, 3);
  MockDeveloper dev(MockBehavior::Fabricating, 1);
  OracleAnalyst analyst;
  OraclePolisher polisher;
  const RunFunction run = [&](const CaseTriple& t) { return run_rma(t, dev, analyst, polisher); };
  const fs::path serial = temp_file("serial.jsonl");
  const fs::path parallel = temp_file("parallel.jsonl");
  BatchOptions opts;
  run_batch(triples, run, serial, opts);
  opts.workers = 4;
  run_batch(triples, run, parallel, opts);
  EXPECT_EQ(slurp(serial), slurp(parallel));
}

TEST(Batch, ExceptionsBecomeFailedRecords) {
  const auto triples = generate_set(ScenarioMode::Arguable, 5, 3, 1);
  const fs::path p = temp_file("crash.jsonl");
  BatchOptions opts;
  opts.method = Method::MA;
  opts.model = "crashy";
  const BatchSummary s = run_batch(
      triples, [](const CaseTriple&) -> RunRecord { throw std::runtime_error("boom"); }, p, opts);
  EXPECT_EQ(s.failed, 3u);
  const auto records = read_transcript(p);
  ASSERT_EQ(records.size(), 3u);
  EXPECT_EQ(records[0].failure->stage, "internal");
  EXPECT_EQ(records[0].method, Method::MA);
  EXPECT_EQ(records[0].model, "crashy");
  BatchOptions none;
  none.workers = 0;
  EXPECT_THROW(run_batch(triples, [](const CaseTriple&) { return RunRecord{}; }, p, none), ConfigError);
}
