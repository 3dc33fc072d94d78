#include "legalarg/cases.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "legalarg/error.hpp"
#include "text_util.hpp"

namespace legalarg {

using ojson = nlohmann::ordered_json;

std::string_view to_string(Outcome outcome) {
  return outcome == Outcome::Plaintiff ? "Plaintiff" : "Defendant";
}

std::optional<Outcome> outcome_from_string(std::string_view text) {
  const std::string s = detail::squash(text);
  if (s == "plaintiff") return Outcome::Plaintiff;
  if (s == "defendant") return Outcome::Defendant;
  return std::nullopt;
}

std::string_view to_string(ScenarioMode mode) {
  switch (mode) {
    case ScenarioMode::Arguable:
      return "arguable";
    case ScenarioMode::Mismatched:
      return "mismatched";
    case ScenarioMode::NonArguable:
      return "non-arguable";
  }
  return "?";
}

std::optional<ScenarioMode> mode_from_string(std::string_view text) {
  const std::string s = detail::squash(text);
  if (s == "arguable") return ScenarioMode::Arguable;
  if (s == "mismatched") return ScenarioMode::Mismatched;
  if (s == "nonarguable") return ScenarioMode::NonArguable;
  return std::nullopt;
}

std::string_view display_name(ScenarioMode mode) {
  switch (mode) {
    case ScenarioMode::Arguable:
      return "Arguable";
    case ScenarioMode::Mismatched:
      return "Mismatched";
    case ScenarioMode::NonArguable:
      return "Non-Arguable";
  }
  return "?";
}

std::string_view to_string(Slot slot) {
  switch (slot) {
    case Slot::c1:
      return "c1";
    case Slot::c2:
      return "c2";
    case Slot::c3:
      return "c3";
  }
  return "?";
}

bool Case::has(FactorId id) const { return std::binary_search(factors.begin(), factors.end(), id); }

const Case& CaseTriple::at(Slot slot) const {
  switch (slot) {
    case Slot::c1:
      return c1;
    case Slot::c2:
      return c2;
    case Slot::c3:
      return c3;
  }
  return c1;
}

FactorSets ground_truth(const CaseTriple& triple) {
  return {triple.c1.factors, triple.c2.factors, triple.c3.factors};
}

std::vector<FactorId> intersect(const std::vector<FactorId>& a, const std::vector<FactorId>& b) {
  std::vector<FactorId> out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

std::vector<FactorId> subtract(const std::vector<FactorId>& a, const std::vector<FactorId>& b) {
  std::vector<FactorId> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
  return out;
}

void validate_triple(const CaseTriple& triple, const FactorCatalog& catalog) {
  if (triple.c1.outcome) throw InvalidTripleError(triple.id + ": current case has an outcome");
  if (!triple.c2.outcome || !triple.c3.outcome) {
    throw InvalidTripleError(triple.id + ": precedent without outcome");
  }
  for (Slot slot : kAllSlots) {
    const Case& c = triple.at(slot);
    if (c.factors.empty()) {
      throw InvalidTripleError(triple.id + ": " + std::string(to_string(slot)) + " has no factors");
    }
    for (std::size_t i = 0; i < c.factors.size(); ++i) {
      if (i > 0 && c.factors[i] <= c.factors[i - 1]) {
        throw InvalidTripleError(triple.id + ": " + std::string(to_string(slot)) +
                                 " factors must be sorted and unique");
      }
      if (!catalog.contains(c.factors[i])) {
        throw InvalidTripleError(triple.id + ": " + std::string(to_string(slot)) + " cites " +
                                 to_string(c.factors[i]) + " which is not in the catalog");
      }
    }
  }
}

namespace {

ojson case_to_json(const Case& c) {
  ojson j;
  j["name"] = c.name;
  if (c.outcome) j["outcome"] = std::string(to_string(*c.outcome));
  ojson ids = ojson::array();
  for (FactorId id : c.factors) ids.push_back(id.value);
  j["factor_ids"] = std::move(ids);
  return j;
}

Case case_from_json(const ojson& j, std::string_view slot) {
  const std::string where = std::string(slot) + ": ";
  if (!j.is_object()) throw DatasetFormatError(0, where + "case must be an object");
  Case c;
  auto name = j.find("name");
  if (name == j.end() || !name->is_string()) throw DatasetFormatError(0, where + "missing name");
  c.name = name->get<std::string>();
  if (auto outcome = j.find("outcome"); outcome != j.end() && !outcome->is_null()) {
    auto parsed = outcome->is_string() ? outcome_from_string(outcome->get<std::string>())
                                       : std::nullopt;
    if (!parsed) throw DatasetFormatError(0, where + "bad outcome");
    c.outcome = parsed;
  }
  auto ids = j.find("factor_ids");
  if (ids == j.end() || !ids->is_array()) {
    throw DatasetFormatError(0, where + "missing factor_ids");
  }
  for (const auto& id : *ids) {
    if (!id.is_number_integer()) throw DatasetFormatError(0, where + "factor id must be an integer");
    c.factors.push_back(FactorId{id.get<int>()});
  }
  return c;
}

}  // namespace

std::string serialize_triple(const CaseTriple& triple) {
  ojson j;
  j["id"] = triple.id;
  j["mode"] = std::string(to_string(triple.mode));
  j["complexity"] = triple.complexity;
  j["seed"] = triple.seed;
  j["c1"] = case_to_json(triple.c1);
  j["c2"] = case_to_json(triple.c2);
  j["c3"] = case_to_json(triple.c3);
  return j.dump();
}

CaseTriple parse_triple(std::string_view line) {
  ojson j;
  try {
    j = ojson::parse(line);
  } catch (const ojson::parse_error& e) {
    throw DatasetFormatError(0, std::string("not a JSON record: ") + e.what());
  }
  if (!j.is_object()) throw DatasetFormatError(0, "record must be an object");
  CaseTriple t;
  auto id = j.find("id");
  if (id == j.end() || !id->is_string()) throw DatasetFormatError(0, "missing id");
  t.id = id->get<std::string>();
  auto mode = j.find("mode");
  auto parsed_mode = (mode != j.end() && mode->is_string())
                         ? mode_from_string(mode->get<std::string>())
                         : std::nullopt;
  if (!parsed_mode) throw DatasetFormatError(0, "missing or unknown mode");
  t.mode = *parsed_mode;
  auto complexity = j.find("complexity");
  if (complexity == j.end() || !complexity->is_number_integer()) {
    throw DatasetFormatError(0, "missing complexity");
  }
  t.complexity = complexity->get<int>();
  auto seed = j.find("seed");
  if (seed == j.end() || !seed->is_number_unsigned()) {
    throw DatasetFormatError(0, "missing or negative seed");
  }
  t.seed = seed->get<std::uint64_t>();
  for (auto [key, target] : {std::pair{"c1", &t.c1}, {"c2", &t.c2}, {"c3", &t.c3}}) {
    auto c = j.find(key);
    if (c == j.end()) throw DatasetFormatError(0, std::string("missing ") + key);
    *target = case_from_json(*c, key);
  }
  return t;
}

std::string serialize_dataset(const std::vector<CaseTriple>& triples) {
  std::string out;
  for (const auto& t : triples) {
    out += serialize_triple(t);
    out += '\n';
  }
  return out;
}

std::vector<CaseTriple> parse_dataset(std::string_view text) {
  std::vector<CaseTriple> out;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = detail::trim(text.substr(start, end - start));
    ++line_no;
    start = end + 1;
    if (line.empty()) continue;
    try {
      out.push_back(parse_triple(line));
    } catch (const DatasetFormatError& e) {
      throw DatasetFormatError(line_no, e.detail());
    }
  }
  return out;
}

}  // namespace legalarg
