#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace legalarg {

// Catalog number of a factor ("F4" has value 4).
struct FactorId {
  int value = 0;

  constexpr auto operator<=>(const FactorId&) const = default;
};

std::string to_string(FactorId id);

enum class Side { P, D };

char side_letter(Side side);
std::optional<Side> side_from_letter(char letter);

struct Factor {
  FactorId id;
  std::string label;
  Side side = Side::P;

  bool operator==(const Factor&) const = default;
};

// "F4 Agreed-not-to-disclose (P)"
std::string render_factor(const Factor& factor);

// Immutable, id-ordered factor table. Safe to share between threads.
class FactorCatalog {
 public:
  // Validates ids (unique, strictly increasing, positive), labels (non-empty,
  // no whitespace) and that both sides are represented.
  explicit FactorCatalog(std::vector<Factor> entries);

  std::span<const Factor> entries() const noexcept { return entries_; }
  std::size_t count() const noexcept { return entries_.size(); }

  const Factor* find(FactorId id) const noexcept;
  bool contains(FactorId id) const noexcept { return find(id) != nullptr; }

  // Throws UnknownFactorError.
  const Factor& lookup(FactorId id) const;
  Side side_of(FactorId id) const { return lookup(id).side; }

  std::vector<FactorId> ids() const;
  std::vector<FactorId> ids_with_side(Side side) const;

 private:
  std::vector<Factor> entries_;
};

// The 26-factor trade-secret catalog, numbered F1..F27 with F9 unused.
const FactorCatalog& load_catalog();

// Line-delimited JSON records {"id":..,"label":..,"side":"P"|"D"}.
// Throws CatalogFormatError naming the offending line.
FactorCatalog load_catalog_file(const std::filesystem::path& path);
FactorCatalog parse_catalog(std::string_view text);
std::string serialize_catalog(const FactorCatalog& catalog);

enum class TokenCheck {
  strict,   // label or side disagreeing with the catalog throws
  lenient,  // disagreement is reported in FactorToken
};

struct FactorToken {
  Factor factor;
  std::optional<std::string> written_label;
  std::optional<Side> written_side;
  bool label_mismatch = false;
  bool side_mismatch = false;
};

// Parses "F<n>", "F<n> <label>", "F<n> (<P|D>)" or "F<n> <label> (<P|D>)",
// resolving by number. Throws TokenParseError, UnknownFactorError, and in
// strict mode FactorMismatchError.
FactorToken parse_factor_token(const FactorCatalog& catalog, std::string_view text,
                               TokenCheck check = TokenCheck::strict);

// A factor mention found inside free text. The id is syntactic only and may
// be absent from the catalog.
struct FactorMention {
  FactorId id;
  std::size_t offset = 0;
  std::size_t length = 0;
  std::optional<std::string> written_label;
  std::optional<Side> written_side;
};

std::vector<FactorMention> scan_factor_mentions(std::string_view text);

}  // namespace legalarg
