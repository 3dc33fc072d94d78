#include "legalarg/factor_catalog.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "legalarg/error.hpp"
#include "text_util.hpp"

namespace legalarg {

std::string to_string(FactorId id) { return "F" + std::to_string(id.value); }

char side_letter(Side side) { return side == Side::P ? 'P' : 'D'; }

std::optional<Side> side_from_letter(char letter) {
  switch (letter) {
    case 'P':
    case 'p':
      return Side::P;
    case 'D':
    case 'd':
      return Side::D;
    default:
      return std::nullopt;
  }
}

std::string render_factor(const Factor& factor) {
  std::string out = to_string(factor.id);
  out += ' ';
  out += factor.label;
  out += " (";
  out += side_letter(factor.side);
  out += ')';
  return out;
}

FactorCatalog::FactorCatalog(std::vector<Factor> entries) : entries_(std::move(entries)) {
  if (entries_.empty()) throw CatalogFormatError(0, "catalog is empty");
  bool has_p = false;
  bool has_d = false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Factor& f = entries_[i];
    if (f.id.value <= 0) {
      throw CatalogFormatError(i + 1, "factor id must be positive");
    }
    if (i > 0 && f.id <= entries_[i - 1].id) {
      throw CatalogFormatError(i + 1, "factor ids must be strictly increasing");
    }
    if (f.label.empty()) throw CatalogFormatError(i + 1, "empty label");
    if (std::any_of(f.label.begin(), f.label.end(), detail::is_space)) {
      throw CatalogFormatError(i + 1, "label contains whitespace: " + f.label);
    }
    (f.side == Side::P ? has_p : has_d) = true;
  }
  if (!has_p || !has_d) {
    throw CatalogFormatError(entries_.size(), "catalog must contain factors for both sides");
  }
}

const Factor* FactorCatalog::find(FactorId id) const noexcept {
  auto it = std::lower_bound(entries_.begin(), entries_.end(), id,
                             [](const Factor& f, FactorId v) { return f.id < v; });
  if (it == entries_.end() || it->id != id) return nullptr;
  return &*it;
}

const Factor& FactorCatalog::lookup(FactorId id) const {
  const Factor* f = find(id);
  if (f == nullptr) throw UnknownFactorError(id.value);
  return *f;
}

std::vector<FactorId> FactorCatalog::ids() const {
  std::vector<FactorId> out;
  out.reserve(entries_.size());
  for (const auto& f : entries_) out.push_back(f.id);
  return out;
}

std::vector<FactorId> FactorCatalog::ids_with_side(Side side) const {
  std::vector<FactorId> out;
  for (const auto& f : entries_) {
    if (f.side == side) out.push_back(f.id);
  }
  return out;
}

const FactorCatalog& load_catalog() {
  // Conventional CATO labels. F13, F19, F21 and F26 are placeholders
  // (marked in data/trade_secret_factors.jsonl).
  static const FactorCatalog catalog({
      {{1}, "Disclosure-in-negotiations", Side::D},
      {{2}, "Bribe-employee", Side::P},
      {{3}, "Employee-sole-developer", Side::D},
      {{4}, "Agreed-not-to-disclose", Side::P},
      {{5}, "Agreement-not-specific", Side::D},
      {{6}, "Security-measures", Side::P},
      {{7}, "Brought-tools", Side::P},
      {{8}, "Competitive-advantage", Side::P},
      {{10}, "Secrets-disclosed-outsiders", Side::D},
      {{11}, "Vertical-knowledge", Side::D},
      {{12}, "Outsider-disclosures-restricted", Side::P},
      {{13}, "Noncompetition-agreement", Side::P},
      {{14}, "Restricted-materials-used", Side::P},
      {{15}, "Unique-product", Side::P},
      {{16}, "Info-reverse-engineerable", Side::D},
      {{17}, "Info-independently-generated", Side::D},
      {{18}, "Identical-products", Side::P},
      {{19}, "No-security-measures", Side::D},
      {{20}, "Info-known-to-competitors", Side::D},
      {{21}, "Knew-info-confidential", Side::P},
      {{22}, "Invasive-techniques", Side::P},
      {{23}, "Waiver-of-confidentiality", Side::D},
      {{24}, "Info-obtainable-elsewhere", Side::D},
      {{25}, "Info-reverse-engineered", Side::D},
      {{26}, "Deception", Side::P},
      {{27}, "Disclosure-in-public-forum", Side::D},
  });
  return catalog;
}

FactorCatalog parse_catalog(std::string_view text) {
  std::vector<Factor> entries;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = detail::trim(text.substr(start, end - start));
    ++line_no;
    start = end + 1;
    if (line.empty()) continue;

    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw CatalogFormatError(line_no, std::string("not a JSON record: ") + e.what());
    }
    if (!record.is_object()) throw CatalogFormatError(line_no, "record must be an object");
    const auto id = record.find("id");
    const auto label = record.find("label");
    const auto side = record.find("side");
    if (id == record.end() || !id->is_number_integer()) {
      throw CatalogFormatError(line_no, "missing integer field \"id\"");
    }
    if (label == record.end() || !label->is_string()) {
      throw CatalogFormatError(line_no, "missing string field \"label\"");
    }
    if (side == record.end() || !side->is_string() || side->get<std::string>().size() != 1) {
      throw CatalogFormatError(line_no, "field \"side\" must be \"P\" or \"D\"");
    }
    auto parsed_side = side_from_letter(side->get<std::string>()[0]);
    if (!parsed_side) throw CatalogFormatError(line_no, "field \"side\" must be \"P\" or \"D\"");

    Factor f{{id->get<int>()}, label->get<std::string>(), *parsed_side};
    if (!entries.empty() && f.id <= entries.back().id) {
      throw CatalogFormatError(line_no, "factor ids must be strictly increasing");
    }
    if (f.label.empty() || std::any_of(f.label.begin(), f.label.end(), detail::is_space)) {
      throw CatalogFormatError(line_no, "label must be non-empty and contain no whitespace");
    }
    entries.push_back(std::move(f));
  }
  return FactorCatalog(std::move(entries));
}

FactorCatalog load_catalog_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CatalogFormatError(0, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_catalog(buf.str());
}

std::string serialize_catalog(const FactorCatalog& catalog) {
  std::string out;
  for (const auto& f : catalog.entries()) {
    nlohmann::ordered_json record;
    record["id"] = f.id.value;
    record["label"] = f.label;
    record["side"] = std::string(1, side_letter(f.side));
    out += record.dump();
    out += '\n';
  }
  return out;
}

namespace {

bool is_label_char(char c) { return detail::is_alnum(c) || c == '-' || c == '_' || c == '\''; }

// Matches "(P)" / "(D)" at pos; returns the side and advances pos.
std::optional<Side> match_side(std::string_view text, std::size_t& pos) {
  if (pos + 2 >= text.size() || text[pos] != '(' || text[pos + 2] != ')') return std::nullopt;
  const char letter = text[pos + 1];
  if (letter != 'P' && letter != 'D') return std::nullopt;
  pos += 3;
  return side_from_letter(letter);
}

std::size_t skip_spaces(std::string_view text, std::size_t pos) {
  while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  return pos;
}

}  // namespace

std::vector<FactorMention> scan_factor_mentions(std::string_view text) {
  std::vector<FactorMention> out;
  std::size_t i = 0;
  while (i < text.size()) {
    if (text[i] != 'F' || (i > 0 && detail::is_alnum(text[i - 1])) || i + 1 >= text.size() ||
        !detail::is_digit(text[i + 1])) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < text.size() && detail::is_digit(text[j])) ++j;
    if ((j < text.size() && (detail::is_alnum(text[j]) || text[j] == '_')) || j - i > 6) {
      i = j;
      continue;
    }
    FactorMention m;
    m.id = FactorId{std::stoi(std::string(text.substr(i + 1, j - i - 1)))};
    m.offset = i;
    std::size_t end = j;

    std::size_t p = skip_spaces(text, j);
    if (auto side = match_side(text, p)) {
      m.written_side = side;
      end = p;
    } else {
      std::size_t w = p;
      while (w < text.size() && is_label_char(text[w])) ++w;
      if (w > p) {
        std::string_view word = text.substr(p, w - p);
        std::size_t q = skip_spaces(text, w);
        if (auto side = match_side(text, q)) {
          m.written_label = std::string(word);
          m.written_side = side;
          end = q;
        } else if (word.find('-') != std::string_view::npos && word.front() != '-') {
          m.written_label = std::string(word);
          end = w;
        }
      }
    }
    m.length = end - i;
    out.push_back(std::move(m));
    i = end;
  }
  return out;
}

FactorToken parse_factor_token(const FactorCatalog& catalog, std::string_view text,
                               TokenCheck check) {
  auto mentions = scan_factor_mentions(text);
  if (mentions.empty()) {
    throw TokenParseError("no factor token in \"" + std::string(text) + "\"");
  }
  const FactorMention& m = mentions.front();
  FactorToken token{catalog.lookup(m.id), m.written_label, m.written_side};
  token.label_mismatch = m.written_label && !detail::iequals(*m.written_label, token.factor.label);
  token.side_mismatch = m.written_side && *m.written_side != token.factor.side;
  if (check == TokenCheck::strict && (token.label_mismatch || token.side_mismatch)) {
    throw FactorMismatchError("\"" + std::string(detail::trim(text)) +
                              "\" contradicts catalog entry " + render_factor(token.factor));
  }
  return token;
}

}  // namespace legalarg
