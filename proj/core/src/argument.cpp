#include "legalarg/argument.hpp"

#include <algorithm>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "legalarg/error.hpp"
#include "text_util.hpp"

namespace legalarg {

using ojson = nlohmann::ordered_json;

std::string render_case(const Case& c, const FactorCatalog& catalog) {
  std::string out = "[" + c.name + "]";
  if (c.outcome) {
    out += " [outcome ";
    out += to_string(*c.outcome);
    out += "]";
  }
  out += " [Factors: ";
  for (std::size_t i = 0; i < c.factors.size(); ++i) {
    if (i > 0) out += ", ";
    out += render_factor(catalog.lookup(c.factors[i]));
  }
  out += "]";
  return out;
}

std::string render_case_listing(const Case& c, const FactorCatalog& catalog) {
  std::string out;
  if (c.outcome) {
    out += "outcome ";
    out += to_string(*c.outcome);
    out += '\n';
  }
  for (FactorId id : c.factors) {
    out += render_factor(catalog.lookup(id));
    out += '\n';
  }
  if (!out.empty()) out.pop_back();
  return out;
}

namespace {

std::string strip_reason(std::string_view rest) {
  rest = detail::trim(rest);
  while (!rest.empty() && (rest.front() == ':' || rest.front() == '-')) {
    rest = detail::trim(rest.substr(1));
  }
  return std::string(rest);
}

}  // namespace

ThreePlyArgument ThreePlyArgument::argued(Plies plies) {
  for (const auto& p : plies) {
    if (detail::trim(p).empty()) throw std::invalid_argument("argument ply is empty");
  }
  return ThreePlyArgument(std::move(plies));
}

ThreePlyArgument ThreePlyArgument::abstained(int ply, std::string reason) {
  if (ply < 1 || ply > 3) throw std::invalid_argument("abstention ply must be 1..3");
  return ThreePlyArgument(Abstention{ply, strip_reason(reason)});
}

std::optional<std::string> termination_reason(std::string_view text) {
  text = detail::trim(text);
  if (!text.starts_with(kTerminate)) return std::nullopt;
  return strip_reason(text.substr(kTerminate.size()));
}

std::string terminate_text(std::string_view reason) {
  std::string out(kTerminate);
  if (!reason.empty()) {
    out += ": ";
    out += reason;
  }
  return out;
}

std::string find_json_object(std::string_view text) {
  for (std::size_t open = text.find('{'); open != std::string_view::npos;
       open = text.find('{', open + 1)) {
    int depth = 0;
    bool in_string = false;
    std::size_t i = open;
    for (; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (c == '\\') {
          ++i;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
        const auto eol = text.find('\n', i);
        if (eol == std::string_view::npos) break;
        i = eol;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) break;
      }
    }
    if (i >= text.size()) continue;
    std::string_view candidate = text.substr(open, i - open + 1);
    try {
      auto parsed = ojson::parse(candidate, nullptr, true, /*ignore_comments=*/true);
      if (parsed.is_object()) return std::string(candidate);
    } catch (const ojson::parse_error&) {
      // try the next opening brace
    }
  }
  throw MalformedOutputError("no JSON object found in model output");
}

namespace {

ojson parse_object(std::string_view text) {
  return ojson::parse(find_json_object(text), nullptr, true, /*ignore_comments=*/true);
}

// Looks up a ply key tolerating curly apostrophes and case differences.
const ojson* find_key(const ojson& obj, std::string_view key) {
  if (auto it = obj.find(std::string(key)); it != obj.end()) return &*it;
  const std::string wanted = detail::squash(key);
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (detail::squash(it.key()) == wanted) return &it.value();
  }
  return nullptr;
}

}  // namespace

ThreePlyArgument parse_three_ply(std::string_view text) {
  const ojson obj = parse_object(text);
  std::array<const ojson*, 3> values{};
  for (std::size_t i = 0; i < kPlyKeys.size(); ++i) {
    values[i] = find_key(obj, kPlyKeys[i]);
    if (values[i] != nullptr && !values[i]->is_string()) {
      throw MalformedOutputError("\"" + std::string(kPlyKeys[i]) + "\" is not a string");
    }
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == nullptr) continue;
    if (auto reason = termination_reason(values[i]->get<std::string>())) {
      return ThreePlyArgument::abstained(static_cast<int>(i) + 1, *reason);
    }
  }
  ThreePlyArgument::Plies plies;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (values[i] == nullptr) throw MissingKeyError(std::string(kPlyKeys[i]));
    plies[i] = values[i]->get<std::string>();
    if (detail::trim(plies[i]).empty()) {
      throw MalformedOutputError("\"" + std::string(kPlyKeys[i]) + "\" is empty");
    }
  }
  return ThreePlyArgument::argued(std::move(plies));
}

std::string parse_single_ply(std::string_view text, int ply) {
  if (ply < 1 || ply > 3) throw std::invalid_argument("ply must be 1..3");
  const ojson obj = parse_object(text);
  const std::string_view key = kPlyKeys[static_cast<std::size_t>(ply - 1)];
  const ojson* value = find_key(obj, key);
  if (value == nullptr) throw MissingKeyError(std::string(key));
  if (!value->is_string() || detail::trim(value->get<std::string>()).empty()) {
    throw MalformedOutputError("\"" + std::string(key) + "\" must be a non-empty string");
  }
  return value->get<std::string>();
}

std::string serialize_three_ply(const ThreePlyArgument& argument) {
  ojson obj = ojson::object();
  if (argument.is_abstention()) {
    const auto& a = argument.abstention();
    obj[std::string(kPlyKeys[static_cast<std::size_t>(a.ply - 1)])] = terminate_text(a.reason);
  } else {
    for (std::size_t i = 0; i < kPlyKeys.size(); ++i) {
      obj[std::string(kPlyKeys[i])] = argument.plies()[i];
    }
  }
  return obj.dump();
}

void ExtractedFactors::add(Slot slot, FactorId id) {
  auto& list = at(slot);
  if (std::find(list.begin(), list.end(), id) == list.end()) list.push_back(id);
}

namespace {

struct SlotAlias {
  std::string_view text;  // lowercase
  Slot slot;
};

constexpr std::array<SlotAlias, 8> kSlotAliases = {{
    {"the current case", Slot::c1},
    {"the input case", Slot::c1},
    {"tsc1", Slot::c1},
    {"c1", Slot::c1},
    {"tsc2", Slot::c2},
    {"c2", Slot::c2},
    {"tsc3", Slot::c3},
    {"c3", Slot::c3},
}};

constexpr std::array<std::string_view, 9> kNegatedAfter = {
    "does not have", "doesn't have", "did not have", "didn't have", "do not have",
    "lacks",         "lacked",       "has no",       "does not contain"};

constexpr std::array<std::string_view, 6> kNegatedBefore = {
    "not in", "not present in", "absent from", "missing from", "lacking in", "not found in"};

struct SlotMention {
  Slot slot;
  std::size_t offset;
  std::size_t length;
};

bool boundary_at(std::string_view s, std::size_t pos) {
  return pos >= s.size() || !detail::is_alnum(s[pos]);
}

std::vector<SlotMention> find_slot_mentions(std::string_view lowered) {
  std::vector<SlotMention> out;
  std::vector<bool> taken(lowered.size(), false);
  for (const auto& alias : kSlotAliases) {
    for (std::size_t pos = lowered.find(alias.text); pos != std::string_view::npos;
         pos = lowered.find(alias.text, pos + 1)) {
      const std::size_t end = pos + alias.text.size();
      if ((pos > 0 && detail::is_alnum(lowered[pos - 1])) || !boundary_at(lowered, end)) continue;
      if (std::any_of(taken.begin() + static_cast<long>(pos), taken.begin() + static_cast<long>(end),
                      [](bool b) { return b; })) {
        continue;
      }
      std::fill(taken.begin() + static_cast<long>(pos), taken.begin() + static_cast<long>(end), true);
      out.push_back({alias.slot, pos, alias.text.size()});
    }
  }
  std::sort(out.begin(), out.end(),
            [](const SlotMention& a, const SlotMention& b) { return a.offset < b.offset; });
  return out;
}

bool negated(std::string_view lowered, const SlotMention& m) {
  std::string_view after = detail::trim(lowered.substr(m.offset + m.length));
  for (auto cue : kNegatedAfter) {
    if (after.starts_with(cue) && boundary_at(after, cue.size())) return true;
  }
  std::string_view before = detail::trim(lowered.substr(0, m.offset));
  for (auto cue : kNegatedBefore) {
    if (before.ends_with(cue) &&
        (before.size() == cue.size() || !detail::is_alnum(before[before.size() - cue.size() - 1]))) {
      return true;
    }
  }
  return false;
}

std::optional<Outcome> stated_outcome(std::string_view lowered, const SlotMention& m) {
  std::string_view after = detail::trim(lowered.substr(m.offset + m.length));
  constexpr std::string_view prefix = "(outcome ";
  if (!after.starts_with(prefix)) return std::nullopt;
  after.remove_prefix(prefix.size());
  const auto close = after.find(')');
  if (close == std::string_view::npos) return std::nullopt;
  return outcome_from_string(after.substr(0, close));
}

std::vector<std::string_view> split_sentences(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    if (i == text.size() || text[i] == '.' || text[i] == '!' || text[i] == '?' || text[i] == ';') {
      auto s = detail::trim(text.substr(start, i - start));
      if (!s.empty()) out.push_back(s);
      start = i + 1;
    }
  }
  return out;
}

void merge_into(CanonicalExtraction& into, const CanonicalExtraction& from) {
  for (Slot slot : kAllSlots) {
    for (FactorId id : from.attributed.at(slot)) into.attributed.add(slot, id);
    for (FactorId id : from.denied.at(slot)) into.denied.add(slot, id);
    auto& outcome = into.claimed_outcomes[index_of(slot)];
    if (!outcome) outcome = from.claimed_outcomes[index_of(slot)];
  }
  into.ambiguous_sentences.insert(into.ambiguous_sentences.end(), from.ambiguous_sentences.begin(),
                                  from.ambiguous_sentences.end());
  into.side_mismatches.insert(into.side_mismatches.end(), from.side_mismatches.begin(),
                              from.side_mismatches.end());
}

}  // namespace

CanonicalExtraction extract_canonical(std::string_view text, const FactorCatalog& catalog) {
  CanonicalExtraction out;
  for (std::string_view sentence : split_sentences(text)) {
    const std::string lowered = detail::lower(sentence);
    const auto slots = find_slot_mentions(lowered);
    for (const auto& m : slots) {
      if (auto outcome = stated_outcome(lowered, m); outcome && !out.claimed_outcomes[index_of(m.slot)]) {
        out.claimed_outcomes[index_of(m.slot)] = outcome;
      }
    }
    const auto factors = scan_factor_mentions(sentence);
    if (factors.empty()) continue;
    if (slots.empty()) {
      out.ambiguous_sentences.emplace_back(sentence);
      continue;
    }
    std::array<bool, 3> positive{};
    std::array<bool, 3> negative{};
    for (const auto& m : slots) {
      (negated(lowered, m) ? negative : positive)[index_of(m.slot)] = true;
    }
    for (const auto& f : factors) {
      if (const Factor* known = catalog.find(f.id); known && f.written_side && *f.written_side != known->side) {
        out.side_mismatches.push_back(f.id);
      }
      for (Slot slot : kAllSlots) {
        if (positive[index_of(slot)]) {
          out.attributed.add(slot, f.id);
        } else if (negative[index_of(slot)]) {
          out.denied.add(slot, f.id);
        }
      }
    }
  }
  return out;
}

CanonicalExtraction extract_factors_canonical(const ThreePlyArgument& argument,
                                              const FactorCatalog& catalog) {
  CanonicalExtraction out;
  if (argument.is_abstention()) return out;
  for (const auto& ply : argument.plies()) merge_into(out, extract_canonical(ply, catalog));
  return out;
}

ExtractedFactors extract_factors_canonical_strict(const ThreePlyArgument& argument,
                                                  const FactorCatalog& catalog) {
  auto result = extract_factors_canonical(argument, catalog);
  if (!result.ambiguous_sentences.empty()) {
    throw AmbiguousAttributionError(result.ambiguous_sentences.size());
  }
  return result.attributed;
}

}  // namespace legalarg
