#include "legalarg/evaluation.hpp"

#include <algorithm>
#include <atomic>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>
#include <tuple>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <spdlog/spdlog.h>

#include "legalarg/error.hpp"
#include "legalarg/prompts.hpp"
#include "text_util.hpp"

namespace legalarg {

using ojson = nlohmann::ordered_json;
__extension__ typedef __int128 i128;

namespace {

i128 abs128(i128 v) { return v < 0 ? -v : v; }

i128 gcd128(i128 a, i128 b) {
  a = abs128(a);
  b = abs128(b);
  while (b != 0) {
    const i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

Ratio make_ratio(i128 num, i128 den) {
  if (den == 0) throw DegenerateInputError("zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  const i128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  constexpr i128 kMax = std::numeric_limits<std::int64_t>::max();
  if (abs128(num) > kMax || den > kMax) throw DegenerateInputError("ratio overflow");
  return Ratio{static_cast<std::int64_t>(num), static_cast<std::int64_t>(den)};
}

}  // namespace

Ratio Ratio::reduced() const { return make_ratio(num, den); }

bool operator==(const Ratio& a, const Ratio& b) {
  return static_cast<i128>(a.num) * b.den == static_cast<i128>(b.num) * a.den;
}

bool operator<(const Ratio& a, const Ratio& b) {
  return static_cast<i128>(a.num) * b.den < static_cast<i128>(b.num) * a.den;
}

Ratio operator+(const Ratio& a, const Ratio& b) {
  return make_ratio(static_cast<i128>(a.num) * b.den + static_cast<i128>(b.num) * a.den,
                    static_cast<i128>(a.den) * b.den);
}

std::string format_percent(const Ratio& ratio) {
  if (ratio.den <= 0) throw DegenerateInputError("non-positive denominator");
  const i128 scaled = static_cast<i128>(ratio.num) * 10000;
  const i128 magnitude = abs128(scaled);
  i128 hundredths = magnitude / ratio.den;
  if (2 * (magnitude % ratio.den) >= ratio.den) ++hundredths;
  const bool negative = scaled < 0 && hundredths != 0;
  return fmt::format("{}{}.{:02}", negative ? "-" : "", static_cast<long long>(hundredths / 100),
                     static_cast<int>(hundredths % 100));
}

MetricCounts count_metrics(const FactorSets& ground_truth, const ExtractedFactors& extracted) {
  MetricCounts counts;
  for (Slot slot : kAllSlots) {
    const std::set<FactorId> gt(ground_truth[index_of(slot)].begin(),
                                ground_truth[index_of(slot)].end());
    const std::set<FactorId> ext(extracted.at(slot).begin(), extracted.at(slot).end());
    counts.n_gt += static_cast<std::int64_t>(gt.size());
    for (FactorId id : ext) {
      if (gt.count(id) != 0) {
        ++counts.n_util;
      } else {
        ++counts.n_h;
      }
    }
  }
  return counts;
}

Ratio hallucination_accuracy_ratio(const MetricInputs& inputs) {
  const MetricCounts c = count_metrics(inputs.ground_truth, inputs.extracted);
  if (c.n_gt == 0) throw DegenerateInputError("no ground-truth factors (N_gt = 0)");
  return Ratio{c.n_gt - c.n_h, c.n_gt};
}

Ratio factor_recall_ratio(const MetricInputs& inputs) {
  const MetricCounts c = count_metrics(inputs.ground_truth, inputs.extracted);
  if (c.n_gt == 0) throw DegenerateInputError("no ground-truth factors (N_gt = 0)");
  return Ratio{inputs.abstained ? 0 : c.n_util, c.n_gt};
}

Ratio abstention_ratio_exact(const std::vector<RunRecord>& records) {
  std::int64_t n_sa = 0;
  std::int64_t n_ta = 0;
  for (const RunRecord& r : records) {
    if (r.status == RunStatus::Failed) continue;
    ++n_ta;
    if (r.status == RunStatus::Abstained) ++n_sa;
  }
  if (n_ta == 0) throw EmptyCellError("no completed or abstained runs in cell");
  return Ratio{n_sa, n_ta};
}

double hallucination_accuracy(const MetricInputs& inputs) {
  return hallucination_accuracy_ratio(inputs).percent();
}

double factor_recall(const MetricInputs& inputs) { return factor_recall_ratio(inputs).percent(); }

double abstention_ratio(const std::vector<RunRecord>& records) {
  return abstention_ratio_exact(records).percent();
}

// ---------------------------------------------------------------------------
// Extraction

ExtractedFactors parse_distiller_output(std::string_view text) {
  ojson j;
  try {
    j = ojson::parse(find_json_object(text), nullptr, true, /*ignore_comments=*/true);
  } catch (const ojson::exception& e) {
    throw MalformedOutputError(std::string("distiller output: ") + e.what());
  }
  ExtractedFactors out;
  for (Slot slot : kAllSlots) {
    const std::string key(to_string(slot));
    if (!j.contains(key)) throw MissingKeyError(key);
    const ojson& list = j.at(key);
    if (!list.is_array()) throw MalformedOutputError("\"" + key + "\" must be a list");
    for (const ojson& item : list) {
      if (!item.is_string()) throw MalformedOutputError("\"" + key + "\" must hold strings");
      const auto mentions = scan_factor_mentions(item.get<std::string>());
      if (mentions.empty()) {
        throw MalformedOutputError("no factor token in \"" + item.get<std::string>() + "\"");
      }
      out.add(slot, mentions.front().id);
    }
  }
  return out;
}

ExtractedFactors extract_factors_llm(const ThreePlyArgument& argument, ChatBackend& backend,
                                     int* reprompts) {
  if (argument.is_abstention()) {
    throw ContractViolation("factor extraction is not run on abstentions");
  }
  Prompt prompt = build_distiller_prompt(serialize_three_ply(argument));
  const GenerationParams params = GenerationParams::evaluator();
  try {
    return parse_distiller_output(complete(backend, prompt.system, prompt.user, params));
  } catch (const MalformedOutputError& e) {
    spdlog::debug("distiller: unparseable reply ({}), reprompting", e.what());
  }
  if (reprompts != nullptr) ++*reprompts;
  prompt = with_format_reminder(std::move(prompt));
  try {
    return parse_distiller_output(complete(backend, prompt.system, prompt.user, params));
  } catch (const MalformedOutputError& e) {
    throw EvaluationError(std::string("distiller output malformed after reprompt: ") + e.what());
  }
}

std::size_t evaluate_records(std::vector<RunRecord>& records, ChatBackend* backend,
                             const FactorCatalog& catalog, int workers) {
  const std::string extractor = backend != nullptr ? backend->model() : "canonical";
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> failures{0};
  const auto work = [&] {
    for (std::size_t i = next++; i < records.size(); i = next++) {
      RunRecord& r = records[i];
      r.extracted.reset();
      r.extractor.clear();
      if (r.status != RunStatus::Completed) continue;
      try {
        r.extracted = backend != nullptr
                          ? extract_factors_llm(*r.result, *backend)
                          : extract_factors_canonical(*r.result, catalog).attributed;
        r.extractor = extractor;
      } catch (const Error& e) {
        if (dynamic_cast<const EvaluationError*>(&e) == nullptr &&
            dynamic_cast<const TransportError*>(&e) == nullptr) {
          throw;
        }
        ++failures;
        spdlog::warn("{} {}: extraction failed: {}", r.triple_id, to_string(r.method), e.what());
      }
    }
  };
  const std::size_t n =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(workers, 1)), records.size());
  if (n <= 1) {
    work();
    return failures;
  }
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (std::size_t t = 0; t < n; ++t) {
    pool.emplace_back([&] {
      try {
        work();
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = records.size();
      }
    });
  }
  for (auto& th : pool) th.join();
  if (error) std::rethrow_exception(error);
  return failures;
}

// ---------------------------------------------------------------------------
// Aggregation

std::string_view to_string(AggregationPolicy policy) {
  return policy == AggregationPolicy::Pooled ? "pooled" : "mean-per-triple";
}

namespace {

std::int64_t gt_size(const FactorSets& sets) {
  std::int64_t n = 0;
  for (const auto& s : sets) n += static_cast<std::int64_t>(s.size());
  return n;
}

Ratio mean(const std::vector<Ratio>& values) {
  Ratio sum{0, 1};
  for (const Ratio& v : values) sum = sum + v;
  return make_ratio(sum.num, static_cast<i128>(sum.den) * static_cast<i128>(values.size()));
}

CellReport build_cell(const std::vector<const RunRecord*>& runs, AggregationPolicy policy) {
  CellReport cell;
  cell.model = runs.front()->model;
  cell.method = runs.front()->method;
  cell.scenario = runs.front()->scenario;
  cell.triples = runs.size();

  std::vector<Ratio> per_acc;
  std::vector<Ratio> per_rec;
  std::int64_t recall_den = 0;
  for (const RunRecord* r : runs) {
    switch (r->status) {
      case RunStatus::Failed:
        ++cell.failed;
        break;
      case RunStatus::Abstained:
        ++cell.abstained;
        recall_den += gt_size(r->ground_truth);
        if (gt_size(r->ground_truth) > 0) per_rec.push_back(Ratio{0, gt_size(r->ground_truth)});
        break;
      case RunStatus::Completed: {
        ++cell.completed;
        if (!r->extracted) {
          ++cell.unscored;
          break;
        }
        const MetricCounts c = count_metrics(r->ground_truth, *r->extracted);
        cell.pooled.n_gt += c.n_gt;
        cell.pooled.n_h += c.n_h;
        cell.pooled.n_util += c.n_util;
        recall_den += c.n_gt;
        if (c.n_gt > 0) {
          per_acc.push_back(Ratio{c.n_gt - c.n_h, c.n_gt});
          per_rec.push_back(Ratio{c.n_util, c.n_gt});
        }
        break;
      }
    }
  }

  if (policy == AggregationPolicy::Pooled) {
    if (cell.pooled.n_gt > 0) cell.acc_h = Ratio{cell.pooled.n_gt - cell.pooled.n_h, cell.pooled.n_gt};
    if (cell.scenario == ScenarioMode::Arguable && recall_den > 0) {
      cell.rec_u = Ratio{cell.pooled.n_util, recall_den};
    }
  } else {
    if (!per_acc.empty()) cell.acc_h = mean(per_acc);
    if (cell.scenario == ScenarioMode::Arguable && !per_rec.empty()) cell.rec_u = mean(per_rec);
  }
  if (cell.scenario != ScenarioMode::Arguable && cell.completed + cell.abstained > 0) {
    cell.ratio_abstain = Ratio{static_cast<std::int64_t>(cell.abstained),
                               static_cast<std::int64_t>(cell.completed + cell.abstained)};
  }
  cell.negative_acc_h = cell.acc_h && cell.acc_h->num < 0;
  return cell;
}

}  // namespace

std::vector<CellReport> aggregate(const std::vector<RunRecord>& records, AggregationPolicy policy) {
  std::map<std::tuple<std::string, int, int>, std::vector<const RunRecord*>> cells;
  for (const RunRecord& r : records) {
    cells[{r.model, static_cast<int>(r.method), static_cast<int>(r.scenario)}].push_back(&r);
  }
  std::vector<CellReport> out;
  for (const auto& [key, runs] : cells) {
    out.push_back(build_cell(runs, policy));
    if (out.back().negative_acc_h) {
      spdlog::warn("{} {} {}: hallucination accuracy is negative (N_h > N_gt)", out.back().model,
                   to_string(out.back().method), to_string(out.back().scenario));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

using Getter = std::optional<Ratio> (*)(const CellReport&);

struct Table {
  std::string title;
  std::string csv_name;
  std::vector<ScenarioMode> scenarios;
  Getter get;
};

const CellReport* find_cell(const std::vector<CellReport>& cells, const std::string& model,
                            Method method, ScenarioMode scenario) {
  for (const CellReport& c : cells) {
    if (c.model == model && c.method == method && c.scenario == scenario) return &c;
  }
  return nullptr;
}

std::string csv_field(std::string_view s) {
  if (s.find_first_of(",\"\n") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

struct Row {
  std::string model;
  Method method;
};

std::vector<Row> rows_of(const std::vector<CellReport>& cells) {
  std::vector<Row> rows;
  for (const CellReport& c : cells) {
    const bool seen = std::any_of(rows.begin(), rows.end(), [&](const Row& r) {
      return r.model == c.model && r.method == c.method;
    });
    if (!seen) rows.push_back(Row{c.model, c.method});
  }
  return rows;
}

std::string render_csv(const std::vector<CellReport>& cells, const Table& table) {
  std::string out = "model,method";
  for (ScenarioMode m : table.scenarios) out += fmt::format(",{}", to_string(m));
  out += '\n';
  for (const Row& row : rows_of(cells)) {
    out += fmt::format("{},{}", csv_field(row.model), to_string(row.method));
    for (ScenarioMode m : table.scenarios) {
      const CellReport* c = find_cell(cells, row.model, row.method, m);
      const auto v = c != nullptr ? table.get(*c) : std::nullopt;
      out += "," + (v ? format_percent(*v) : std::string());
    }
    out += '\n';
  }
  return out;
}

std::string render_aligned(const std::vector<std::vector<std::string>>& grid,
                           std::size_t text_columns = 2) {
  std::vector<std::size_t> widths;
  for (const auto& row : grid) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (std::size_t i = 0; i < row.size(); ++i) widths[i] = std::max(widths[i], row[i].size());
  }
  std::string out;
  for (const auto& row : grid) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      // Text columns left-aligned, numbers right-aligned.
      line += i < text_columns ? fmt::format("{:<{}}", row[i], widths[i]) : fmt::format("{:>{}}", row[i], widths[i]);
      if (i + 1 < row.size()) line += "  ";
    }
    while (!line.empty() && line.back() == ' ') line.pop_back();
    out += line + '\n';
  }
  return out;
}

std::string render_text_table(const std::vector<CellReport>& cells, const Table& table) {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header = {"Model", "Method"};
  for (ScenarioMode m : table.scenarios) header.emplace_back(display_name(m));
  grid.push_back(header);
  for (const Row& row : rows_of(cells)) {
    std::vector<std::string> line = {row.model, std::string(display_name(row.method))};
    for (ScenarioMode m : table.scenarios) {
      const CellReport* c = find_cell(cells, row.model, row.method, m);
      const auto v = c != nullptr ? table.get(*c) : std::nullopt;
      if (!v) {
        line.emplace_back("-");
        continue;
      }
      bool best = true;
      for (const CellReport& other : cells) {
        if (other.model != row.model || other.scenario != m) continue;
        const auto ov = table.get(other);
        if (ov && *v < *ov) best = false;
      }
      line.push_back(format_percent(*v) + (best ? "*" : " "));
    }
    grid.push_back(std::move(line));
  }
  return table.title + "\n" + render_aligned(grid);
}

}  // namespace

RenderedReport render_report(const std::vector<CellReport>& cells, const ReportMetadata& meta) {
  const Table acc{"Hallucination Accuracy (%)", "acc_h",
                  {ScenarioMode::Arguable, ScenarioMode::Mismatched, ScenarioMode::NonArguable},
                  [](const CellReport& c) { return c.acc_h; }};
  const Table rec{"Factor Utilization Recall (%)", "rec_u", {ScenarioMode::Arguable},
                  [](const CellReport& c) { return c.rec_u; }};
  const Table abst{"Successful Abstention Ratio (%)", "abstention",
                   {ScenarioMode::Mismatched, ScenarioMode::NonArguable},
                   [](const CellReport& c) { return c.ratio_abstain; }};

  RenderedReport out;
  out.acc_h_csv = render_csv(cells, acc);
  out.rec_u_csv = render_csv(cells, rec);
  out.abstention_csv = render_csv(cells, abst);

  out.counts_csv =
      "model,method,scenario,triples,completed,abstained,failed,unscored,n_gt,n_h,n_util,acc_h,"
      "rec_u,ratio_abstain\n";
  std::vector<std::vector<std::string>> counts = {
      {"Model", "Method", "Scenario", "Triples", "Completed", "Abstained", "Failed", "Unscored"}};
  for (const CellReport& c : cells) {
    const auto pct = [](const std::optional<Ratio>& r) { return r ? format_percent(*r) : std::string(); };
    out.counts_csv += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", csv_field(c.model),
                                  to_string(c.method), to_string(c.scenario), c.triples,
                                  c.completed, c.abstained, c.failed, c.unscored, c.pooled.n_gt,
                                  c.pooled.n_h, c.pooled.n_util, pct(c.acc_h), pct(c.rec_u),
                                  pct(c.ratio_abstain));
    counts.push_back({c.model, std::string(to_string(c.method)),
                      std::string(display_name(c.scenario)), std::to_string(c.triples),
                      std::to_string(c.completed), std::to_string(c.abstained),
                      std::to_string(c.failed), std::to_string(c.unscored)});
  }

  std::string text;
  text += fmt::format("# aggregation: {}\n", to_string(meta.policy));
  text += "# acc_h: completed runs only; abstained runs are excluded and counted below\n";
  text += "# rec_u: abstained runs contribute 0; failed runs are excluded everywhere\n";
  for (const std::string& line : meta.lines) text += "# " + line + "\n";
  text += "# '*' marks the best value among methods for each model and scenario\n\n";
  text += render_text_table(cells, acc) + "\n";
  text += render_text_table(cells, rec) + "\n";
  text += render_text_table(cells, abst) + "\n";
  text += "Run counts\n" + render_aligned(counts, 3);
  for (const CellReport& c : cells) {
    if (c.negative_acc_h) {
      text += fmt::format("warning: {} {} {}: negative hallucination accuracy\n", c.model,
                          to_string(c.method), display_name(c.scenario));
    }
  }
  out.text = std::move(text);
  return out;
}

}  // namespace legalarg
