#include "legalarg/pipelines.hpp"

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <ctime>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <fmt/chrono.h>
#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "legalarg/error.hpp"
#include "text_util.hpp"

namespace legalarg {

using ojson = nlohmann::ordered_json;

std::string_view to_string(Method method) {
  switch (method) {
    case Method::SA:
      return "SA";
    case Method::SA_EP:
      return "SA-EP";
    case Method::MA:
      return "MA";
    case Method::RMA:
      return "RMA";
  }
  return "?";
}

std::string_view display_name(Method method) {
  switch (method) {
    case Method::SA:
      return "Single Agent";
    case Method::SA_EP:
      return "Single Agent with Enhanced Prompting";
    case Method::MA:
      return "Multi-Agent Debate without Reflection";
    case Method::RMA:
      return "Reflective Multi-Agent";
  }
  return "?";
}

std::optional<Method> method_from_string(std::string_view text) {
  const std::string s = detail::squash(text);
  for (Method m : kAllMethods) {
    if (s == detail::squash(to_string(m)) || s == detail::squash(display_name(m))) return m;
  }
  return std::nullopt;
}

PromptVariant variant_of(Method method) {
  switch (method) {
    case Method::SA:
      return PromptVariant::SA;
    case Method::SA_EP:
      return PromptVariant::SA_EP;
    case Method::MA:
      return PromptVariant::MA;
    case Method::RMA:
      return PromptVariant::RMA;
  }
  return PromptVariant::SA;
}

std::string_view to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Completed:
      return "completed";
    case RunStatus::Abstained:
      return "abstained";
    case RunStatus::Failed:
      return "failed";
  }
  return "?";
}

std::optional<RunStatus> status_from_string(std::string_view text) {
  for (RunStatus s : {RunStatus::Completed, RunStatus::Abstained, RunStatus::Failed}) {
    if (detail::iequals(text, to_string(s))) return s;
  }
  return std::nullopt;
}

std::string_view to_string(RevisionTrigger trigger) {
  switch (trigger) {
    case RevisionTrigger::None:
      return "none";
    case RevisionTrigger::Analyst:
      return "analyst";
    case RevisionTrigger::Polisher:
      return "polisher";
    case RevisionTrigger::Both:
      return "both";
  }
  return "?";
}

void check_invariants(const RunRecord& r) {
  for (int n : r.revisions) {
    if (n < 0 || n > 1) throw ContractViolation(r.triple_id + ": more than one revision in a ply");
  }
  if (r.status == RunStatus::Failed) {
    if (r.result || !r.failure) throw ContractViolation(r.triple_id + ": Failed needs a failure and no result");
  } else {
    if (!r.result || r.failure) throw ContractViolation(r.triple_id + ": missing result");
    if (r.result->is_abstention() != (r.status == RunStatus::Abstained)) {
      throw ContractViolation(r.triple_id + ": Abstained must match an abstention result");
    }
    if (r.result->is_abstention()) {
      const int ply = r.result->abstention().ply;
      if (ply < 1 || ply > 3) throw ContractViolation(r.triple_id + ": abstention ply out of range");
    }
  }
  if (r.method != Method::RMA) {
    if (!r.reviews.empty()) throw ContractViolation(r.triple_id + ": reviews outside RMA");
    for (int n : r.revisions) {
      if (n != 0) throw ContractViolation(r.triple_id + ": revision outside RMA");
    }
  }
  int last = 0;
  for (const PlyReview& review : r.reviews) {
    if (review.ply <= last || review.ply > 3) {
      throw ContractViolation(r.triple_id + ": reviews out of ply order");
    }
    last = review.ply;
    if (review.analyst.size() > 2 || review.polisher.size() > review.analyst.size()) {
      throw ContractViolation(r.triple_id + ": too many review rounds");
    }
    const int revised = r.revisions[static_cast<std::size_t>(review.ply - 1)];
    if ((review.trigger != RevisionTrigger::None) != (revised == 1)) {
      throw ContractViolation(r.triple_id + ": revision count disagrees with trigger");
    }
  }
}

namespace {

std::string now_utc() {
  const auto now = std::chrono::system_clock::now();
  return fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::chrono::system_clock::to_time_t(now)));
}

// Calls `call(false)`, and once more with `call(true)` if parsing fails.
template <typename Call, typename Parse>
auto with_reprompt(Call&& call, Parse&& parse, int& reprompts, std::string_view what)
    -> decltype(parse(std::string())) {
  std::string first_error;
  try {
    return parse(call(false));
  } catch (const MalformedOutputError& e) {
    first_error = e.what();
  } catch (const MalformedReportError& e) {
    first_error = e.what();
  }
  spdlog::debug("{}: unparseable reply ({}), reprompting", what, first_error);
  ++reprompts;
  try {
    return parse(call(true));
  } catch (const MalformedOutputError& e) {
    throw ProtocolError(fmt::format("{}: malformed output after reprompt: {}", what, e.what()));
  } catch (const MalformedReportError& e) {
    throw ProtocolError(fmt::format("{}: malformed report after reprompt: {}", what, e.what()));
  }
}

RunRecord start_record(const CaseTriple& triple, Method method, std::string model,
                       const PipelineOptions& options) {
  RunRecord r;
  r.triple_id = triple.id;
  r.method = method;
  r.model = std::move(model);
  r.scenario = triple.mode;
  r.ground_truth = ground_truth(triple);
  if (options.timestamps) r.started_at = now_utc();
  return r;
}

void finish(RunRecord& r, ThreePlyArgument result, const PipelineOptions& options) {
  r.status = result.is_abstention() ? RunStatus::Abstained : RunStatus::Completed;
  r.result = std::move(result);
  if (options.timestamps) r.finished_at = now_utc();
}

void fail(RunRecord& r, int ply, std::string stage, std::string message,
          const PipelineOptions& options) {
  spdlog::warn("{} {}: failed at ply {} ({}): {}", r.triple_id, to_string(r.method), ply, stage,
               message);
  r.status = RunStatus::Failed;
  r.result.reset();
  r.failure = RunFailure{ply, std::move(stage), std::move(message)};
  if (options.timestamps) r.finished_at = now_utc();
}

RunRecord run_single_turn(const CaseTriple& triple, Developer& developer, Method method,
                          const PipelineOptions& options) {
  RunRecord r = start_record(triple, method, developer.name(), options);
  const PlyContext context = PlyContext::for_ply(triple, 1);
  try {
    ThreePlyArgument argument = with_reprompt(
        [&](bool reminder) {
          return developer.respond(DeveloperTurn{variant_of(method), context, std::nullopt, reminder});
        },
        [](const std::string& text) { return parse_three_ply(text); }, r.reprompts,
        "developer");
    finish(r, std::move(argument), options);
  } catch (const TransportError& e) {
    fail(r, 0, "developer", e.what(), options);
  } catch (const ProtocolError& e) {
    fail(r, 0, "developer", e.what(), options);
  }
  return r;
}

}  // namespace

RunRecord run_sa(const CaseTriple& triple, Developer& developer, const PipelineOptions& options) {
  return run_single_turn(triple, developer, Method::SA, options);
}

RunRecord run_sa_ep(const CaseTriple& triple, Developer& developer,
                    const PipelineOptions& options) {
  return run_single_turn(triple, developer, Method::SA_EP, options);
}

RunRecord run_ma(const CaseTriple& triple, Developer& developer, const PipelineOptions& options) {
  RunRecord r = start_record(triple, Method::MA, developer.name(), options);
  std::vector<std::string> plies;
  int ply = 1;
  try {
    for (; ply <= 3; ++ply) {
      const PlyContext context = PlyContext::for_ply(triple, ply, plies);
      std::string text = with_reprompt(
          [&](bool reminder) {
            return developer.respond(DeveloperTurn{PromptVariant::MA, context, std::nullopt, reminder});
          },
          [ply](const std::string& raw) { return parse_single_ply(raw, ply); }, r.reprompts,
          "developer");
      if (auto reason = termination_reason(text)) {
        finish(r, ThreePlyArgument::abstained(ply, *reason), options);
        return r;
      }
      plies.push_back(std::move(text));
    }
    finish(r, ThreePlyArgument::argued({plies[0], plies[1], plies[2]}), options);
  } catch (const TransportError& e) {
    fail(r, ply, "developer", e.what(), options);
  } catch (const ProtocolError& e) {
    fail(r, ply, "developer", e.what(), options);
  }
  return r;
}

RunRecord run_rma(const CaseTriple& triple, Developer& developer, Analyst& analyst,
                  Polisher& polisher, const PipelineOptions& options) {
  RunRecord r = start_record(triple, Method::RMA, developer.name(), options);
  std::vector<std::string> plies;
  int ply = 1;
  std::string stage = "developer";
  try {
    for (; ply <= 3; ++ply) {
      const PlyContext context = PlyContext::for_ply(triple, ply, plies);
      const auto develop = [&](const std::optional<Revision>& revision) {
        stage = "developer";
        return with_reprompt(
            [&](bool reminder) {
              return developer.respond(DeveloperTurn{PromptVariant::RMA, context, revision, reminder});
            },
            [&](const std::string& raw) { return parse_single_ply(raw, ply); }, r.reprompts,
            "developer");
      };
      const auto analyze = [&](const std::string& text) {
        stage = "analyst";
        return with_reprompt(
            [&](bool reminder) { return analyst.review(context, text, reminder); },
            [](const std::string& raw) { return parse_analyst_report(raw); }, r.reprompts,
            "analyst");
      };
      const auto polish = [&](const std::string& text, const AnalystReport& report) {
        stage = "polisher";
        return with_reprompt(
            [&](bool reminder) { return polisher.review(context, text, report, reminder); },
            [](const std::string& raw) { return parse_polisher_report(raw); }, r.reprompts,
            "polisher");
      };
      const auto abstain = [&](const AnalystReport& report) {
        finish(r, ThreePlyArgument::abstained(ply, "Generation stopped. " + report.summary), options);
      };

      PlyReview review;
      review.ply = ply;
      std::string text = develop(std::nullopt);
      if (auto reason = termination_reason(text)) {
        r.reviews.push_back(std::move(review));
        finish(r, ThreePlyArgument::abstained(ply, *reason), options);
        return r;
      }

      AnalystReport first = analyze(text);
      review.analyst.push_back(first);
      if (first.outcome == AnalysisOutcome::RequiresAbstention) {
        r.reviews.push_back(std::move(review));
        abstain(first);
        return r;
      }
      PolisherReport first_polish = polish(text, first);
      review.polisher.push_back(first_polish);

      const bool by_analyst = first.outcome == AnalysisOutcome::RequiresCorrection;
      const bool by_polisher = first_polish.revision_needed;
      review.trigger = by_analyst && by_polisher ? RevisionTrigger::Both
                       : by_analyst              ? RevisionTrigger::Analyst
                       : by_polisher             ? RevisionTrigger::Polisher
                                                 : RevisionTrigger::None;
      if (review.trigger != RevisionTrigger::None) {
        std::string revised =
            develop(Revision{text, consolidate_feedback(first, first_polish)});
        r.revisions[static_cast<std::size_t>(ply - 1)] = 1;
        if (auto reason = termination_reason(revised)) {
          r.reviews.push_back(std::move(review));
          finish(r, ThreePlyArgument::abstained(ply, *reason), options);
          return r;
        }
        AnalystReport second = analyze(revised);
        review.analyst.push_back(second);
        if (second.outcome == AnalysisOutcome::RequiresAbstention) {
          r.reviews.push_back(std::move(review));
          abstain(second);
          return r;
        }
        review.polisher.push_back(polish(revised, second));
        if (second.outcome == AnalysisOutcome::RequiresCorrection) {
          review.unresolved = true;
          spdlog::info("{} RMA ply {}: correction still required after revision", triple.id, ply);
        }
        text = std::move(revised);
      }
      r.reviews.push_back(std::move(review));
      plies.push_back(std::move(text));
    }
    finish(r, ThreePlyArgument::argued({plies[0], plies[1], plies[2]}), options);
  } catch (const TransportError& e) {
    fail(r, ply, stage, e.what(), options);
  } catch (const ProtocolError& e) {
    fail(r, ply, stage, e.what(), options);
  }
  return r;
}

RunRecord run_method(Method method, const CaseTriple& triple, const AgentSet& agents,
                     const PipelineOptions& options) {
  if (agents.developer == nullptr) throw ContractViolation("no developer agent");
  switch (method) {
    case Method::SA:
      return run_sa(triple, *agents.developer, options);
    case Method::SA_EP:
      return run_sa_ep(triple, *agents.developer, options);
    case Method::MA:
      return run_ma(triple, *agents.developer, options);
    case Method::RMA:
      if (agents.analyst == nullptr || agents.polisher == nullptr) {
        throw ContractViolation("RMA needs an analyst and a polisher");
      }
      return run_rma(triple, *agents.developer, *agents.analyst, *agents.polisher, options);
  }
  throw ContractViolation("unknown method");
}

// ---------------------------------------------------------------------------
// Transcript records

namespace {

ojson ids_json(const std::vector<FactorId>& ids) {
  ojson out = ojson::array();
  for (FactorId id : ids) out.push_back(id.value);
  return out;
}

ojson sets_json(const FactorSets& sets) {
  ojson out;
  for (Slot slot : kAllSlots) out[std::string(to_string(slot))] = ids_json(sets[index_of(slot)]);
  return out;
}

[[noreturn]] void bad(const std::string& what) { throw MalformedTranscriptError("", 0, what); }

std::vector<FactorId> ids_from(const ojson& j, std::string_view what) {
  if (!j.is_array()) bad(std::string(what) + " must be a list of factor ids");
  std::vector<FactorId> out;
  for (const auto& v : j) {
    if (!v.is_number_integer()) bad(std::string(what) + " must hold integers");
    out.push_back(FactorId{v.get<int>()});
  }
  return out;
}

FactorSets sets_from(const ojson& j, std::string_view what) {
  if (!j.is_object()) bad(std::string(what) + " must be an object");
  FactorSets out;
  for (Slot slot : kAllSlots) {
    const std::string key(to_string(slot));
    if (!j.contains(key)) bad(std::string(what) + " lacks " + key);
    out[index_of(slot)] = ids_from(j.at(key), what);
  }
  return out;
}

const ojson& need(const ojson& j, const char* key) {
  if (!j.contains(key)) bad(std::string("missing field \"") + key + "\"");
  return j.at(key);
}

std::string need_string(const ojson& j, const char* key) {
  const ojson& v = need(j, key);
  if (!v.is_string()) bad(std::string("field \"") + key + "\" must be a string");
  return v.get<std::string>();
}

int need_int(const ojson& j, const char* key) {
  const ojson& v = need(j, key);
  if (!v.is_number_integer()) bad(std::string("field \"") + key + "\" must be an integer");
  return v.get<int>();
}

}  // namespace

std::string serialize_run_record(const RunRecord& r) {
  ojson j;
  j["triple_id"] = r.triple_id;
  j["method"] = std::string(to_string(r.method));
  j["model"] = r.model;
  j["scenario"] = std::string(to_string(r.scenario));
  j["status"] = std::string(to_string(r.status));
  j["ground_truth"] = sets_json(r.ground_truth);
  if (r.result && !r.result->is_abstention()) {
    ojson plies;
    for (std::size_t i = 0; i < 3; ++i) plies[std::string(kPlyKeys[i])] = r.result->plies()[i];
    j["ply_texts"] = std::move(plies);
  }
  if (r.result && r.result->is_abstention()) {
    j["abstention"] = ojson{{"ply", r.result->abstention().ply},
                            {"reason", r.result->abstention().reason},
                            {"rule", "ply-prefix"}};
  }
  if (r.failure) {
    j["failure"] = ojson{{"ply", r.failure->ply},
                         {"stage", r.failure->stage},
                         {"message", r.failure->message}};
  }
  ojson reviews = ojson::array();
  for (const PlyReview& review : r.reviews) {
    ojson entry;
    entry["ply"] = review.ply;
    entry["analyst"] = ojson::array();
    for (const auto& a : review.analyst) entry["analyst"].push_back(ojson::parse(serialize_analyst_report(a)));
    entry["polisher"] = ojson::array();
    for (const auto& p : review.polisher) entry["polisher"].push_back(ojson::parse(serialize_polisher_report(p)));
    entry["revision_trigger"] = std::string(to_string(review.trigger));
    entry["unresolved"] = review.unresolved;
    reviews.push_back(std::move(entry));
  }
  j["agent_reports"] = std::move(reviews);
  j["revisions"] = r.revisions;
  j["reprompts"] = r.reprompts;
  if (r.extracted) {
    ojson extracted = sets_json(r.extracted->per_slot);
    extracted["extractor"] = r.extractor;
    j["extracted_factors"] = std::move(extracted);
  } else {
    j["extracted_factors"] = nullptr;
  }
  if (r.started_at || r.finished_at) {
    ojson ts;
    if (r.started_at) ts["started"] = *r.started_at;
    if (r.finished_at) ts["finished"] = *r.finished_at;
    j["timestamps"] = std::move(ts);
  }
  return j.dump();
}

RunRecord parse_run_record(std::string_view line) {
  ojson j;
  try {
    j = ojson::parse(line);
  } catch (const ojson::parse_error& e) {
    bad(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) bad("record is not an object");

  RunRecord r;
  r.triple_id = need_string(j, "triple_id");
  const auto method = method_from_string(need_string(j, "method"));
  if (!method) bad("unknown method");
  r.method = *method;
  r.model = need_string(j, "model");
  const auto scenario = mode_from_string(need_string(j, "scenario"));
  if (!scenario) bad("unknown scenario");
  r.scenario = *scenario;
  const auto status = status_from_string(need_string(j, "status"));
  if (!status) bad("unknown status");
  r.status = *status;
  r.ground_truth = sets_from(need(j, "ground_truth"), "ground_truth");

  try {
    if (j.contains("ply_texts")) {
      const ojson& plies = j.at("ply_texts");
      ThreePlyArgument::Plies texts;
      for (std::size_t i = 0; i < 3; ++i) texts[i] = plies.at(std::string(kPlyKeys[i])).get<std::string>();
      r.result = ThreePlyArgument::argued(std::move(texts));
    }
    if (j.contains("abstention")) {
      const ojson& a = j.at("abstention");
      r.result = ThreePlyArgument::abstained(a.at("ply").get<int>(), a.at("reason").get<std::string>());
    }
    if (j.contains("failure")) {
      const ojson& f = j.at("failure");
      r.failure = RunFailure{f.at("ply").get<int>(), f.at("stage").get<std::string>(),
                             f.at("message").get<std::string>()};
    }
    for (const ojson& entry : need(j, "agent_reports")) {
      PlyReview review;
      review.ply = entry.at("ply").get<int>();
      for (const ojson& a : entry.at("analyst")) review.analyst.push_back(parse_analyst_report(a.dump()));
      for (const ojson& p : entry.at("polisher")) review.polisher.push_back(parse_polisher_report(p.dump()));
      const std::string trigger = entry.at("revision_trigger").get<std::string>();
      bool known = false;
      for (RevisionTrigger t : {RevisionTrigger::None, RevisionTrigger::Analyst,
                                RevisionTrigger::Polisher, RevisionTrigger::Both}) {
        if (trigger == to_string(t)) {
          review.trigger = t;
          known = true;
        }
      }
      if (!known) bad("unknown revision_trigger");
      review.unresolved = entry.at("unresolved").get<bool>();
      r.reviews.push_back(std::move(review));
    }
    r.revisions = need(j, "revisions").get<std::array<int, 3>>();
    r.reprompts = need_int(j, "reprompts");
    const ojson& extracted = need(j, "extracted_factors");
    if (!extracted.is_null()) {
      r.extracted = ExtractedFactors{sets_from(extracted, "extracted_factors")};
      r.extractor = extracted.value("extractor", "");
    }
    if (j.contains("timestamps")) {
      const ojson& ts = j.at("timestamps");
      if (ts.contains("started")) r.started_at = ts.at("started").get<std::string>();
      if (ts.contains("finished")) r.finished_at = ts.at("finished").get<std::string>();
    }
  } catch (const ojson::exception& e) {
    bad(e.what());
  } catch (const MalformedReportError& e) {
    bad(std::string("agent report: ") + e.what());
  } catch (const std::invalid_argument& e) {
    bad(e.what());
  }
  try {
    check_invariants(r);
  } catch (const ContractViolation& e) {
    bad(e.what());
  }
  return r;
}

std::vector<RunRecord> read_transcript(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedTranscriptError(path.string(), 0, "cannot open transcript");
  std::vector<RunRecord> records;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (detail::trim(line).empty()) continue;
    try {
      records.push_back(parse_run_record(line));
    } catch (const MalformedTranscriptError& e) {
      throw MalformedTranscriptError(path.string(), number, e.detail());
    }
  }
  return records;
}

// ---------------------------------------------------------------------------
// Batch execution

namespace {

// Ids already in the transcript. Drops a torn final line.
std::set<std::string> existing_ids(const std::filesystem::path& path) {
  std::set<std::string> ids;
  std::ifstream in(path, std::ios::binary);
  if (!in) return ids;
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string content = buf.str();
  in.close();

  std::size_t start = 0;
  std::size_t number = 0;
  while (start < content.size()) {
    const std::size_t end = content.find('\n', start);
    ++number;
    if (end == std::string::npos) {
      spdlog::warn("{}: dropping incomplete final line {}", path.string(), number);
      std::filesystem::resize_file(path, start);
      break;
    }
    const std::string_view line(content.data() + start, end - start);
    if (!detail::trim(line).empty()) {
      try {
        ids.insert(parse_run_record(line).triple_id);
      } catch (const MalformedTranscriptError& e) {
        throw MalformedTranscriptError(path.string(), number, e.detail());
      }
    }
    start = end + 1;
  }
  return ids;
}

RunRecord crashed_record(const CaseTriple& triple, const BatchOptions& options,
                         const std::string& message) {
  RunRecord r;
  r.triple_id = triple.id;
  r.method = options.method;
  r.model = options.model;
  r.scenario = triple.mode;
  r.ground_truth = ground_truth(triple);
  r.status = RunStatus::Failed;
  r.failure = RunFailure{0, "internal", message};
  return r;
}

}  // namespace

BatchSummary run_batch(const std::vector<CaseTriple>& triples, const RunFunction& run,
                       const std::filesystem::path& transcript, const BatchOptions& options) {
  if (options.workers < 1) throw ConfigError("workers must be at least 1");
  if (transcript.has_parent_path()) std::filesystem::create_directories(transcript.parent_path());

  BatchSummary summary;
  summary.total = triples.size();
  std::set<std::string> done;
  if (!options.overwrite) done = existing_ids(transcript);

  std::vector<const CaseTriple*> pending;
  std::set<std::string> queued;
  for (const CaseTriple& t : triples) {
    if (done.count(t.id) != 0 || !queued.insert(t.id).second) {
      ++summary.skipped;
      continue;
    }
    pending.push_back(&t);
  }

  std::ofstream out(transcript, std::ios::binary | (options.overwrite ? std::ios::trunc : std::ios::app));
  if (!out) throw Error("cannot open transcript " + transcript.string());

  std::vector<std::optional<RunRecord>> slots(pending.size());
  std::mutex mutex;
  std::condition_variable ready;
  std::atomic<std::size_t> next{0};

  const auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= pending.size()) return;
      RunRecord record;
      try {
        record = run(*pending[i]);
      } catch (const std::exception& e) {
        record = crashed_record(*pending[i], options, e.what());
      }
      {
        std::lock_guard lock(mutex);
        slots[i] = std::move(record);
      }
      ready.notify_all();
    }
  };

  const std::size_t thread_count =
      std::min<std::size_t>(static_cast<std::size_t>(options.workers), pending.size());
  std::vector<std::thread> threads;
  for (std::size_t t = 0; t < thread_count; ++t) threads.emplace_back(worker);

  for (std::size_t i = 0; i < pending.size(); ++i) {
    RunRecord record;
    {
      std::unique_lock lock(mutex);
      ready.wait(lock, [&] { return slots[i].has_value(); });
      record = std::move(*slots[i]);
      slots[i].reset();
    }
    switch (record.status) {
      case RunStatus::Completed:
        ++summary.completed;
        break;
      case RunStatus::Abstained:
        ++summary.abstained;
        break;
      case RunStatus::Failed:
        ++summary.failed;
        break;
    }
    out << serialize_run_record(record) << '\n';
    out.flush();
  }
  for (auto& t : threads) t.join();
  if (!out) throw Error("write to " + transcript.string() + " failed");
  return summary;
}

}  // namespace legalarg
