#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace wxpipe {

enum class ScriptId { Devanagari, Gujarati, Gurmukhi, PersoArabic };

ScriptId script_from_name(std::string_view name);  // throws FormatError
std::string_view script_name(ScriptId id);
const std::vector<ScriptId>& all_scripts();

struct BlockRange {
  char32_t first = 0;
  char32_t last = 0;
  bool contains(char32_t cp) const { return cp >= first && cp <= last; }
};

BlockRange script_block(ScriptId id);
bool script_invertible(ScriptId id);

/// One script's codepoint <-> WX mapping plus the transduction parameters.
/// Loaded from the human-auditable table files under data/tables; a copy of
/// each shipped table is embedded in the library at build time.
class ScriptTable {
 public:
  enum class Kind { Vowel, Matra, Consonant, Sign, Digit };

  struct Entry {
    Kind kind;
    std::string wx;
    // false when another codepoint owns this wx string on the decode side
    // (e.g. tippi vs bindi); such entries are encode-only.
    bool decode_canonical = true;
  };

  static ScriptTable parse(std::string_view text,
                           std::string_view origin = "<memory>");
  static ScriptTable load(const std::string& path);
  /// Embedded copy of the shipped table; honors the WXPIPE_TABLES
  /// environment variable as an override directory.
  static const ScriptTable& builtin(ScriptId id);

  ScriptId script() const { return script_; }
  BlockRange block() const { return block_; }
  bool invertible() const { return invertible_; }
  bool abugida() const { return abugida_; }
  char32_t virama() const { return virama_; }
  const std::string& inherent_vowel() const { return inherent_; }
  int version() const { return version_; }

  const Entry* find(char32_t cp) const;
  /// Canonical nukta decomposition, or nullopt when cp is not precomposed.
  std::optional<std::pair<char32_t, char32_t>> decompose(char32_t cp) const;
  const std::map<char32_t, Entry>& entries() const { return entries_; }

  // Decode-side lookups (canonical entries only).
  std::optional<char32_t> vowel_independent(std::string_view wx) const;
  std::optional<char32_t> vowel_dependent(std::string_view wx) const;
  std::optional<char32_t> sign(std::string_view wx) const;
  std::optional<char32_t> digit(char ascii) const;
  /// Longest consonant WX string starting at wx[0]; returns (codepoint,
  /// matched length) or nullopt.
  std::optional<std::pair<char32_t, std::size_t>> consonant_prefix(
      std::string_view wx) const;
  /// Single codepoint replacing base + nukta when the script writes that
  /// combination as one letter (e.g. Gurmukhi rra).
  std::optional<char32_t> nukta_join(char32_t base) const;

 private:
  ScriptId script_ = ScriptId::Devanagari;
  BlockRange block_;
  bool invertible_ = false;
  bool abugida_ = false;
  char32_t virama_ = 0;
  std::string inherent_;
  int version_ = 0;

  std::map<char32_t, Entry> entries_;
  std::vector<char32_t> entry_order_;  // file order, for duplicate resolution
  std::map<char32_t, std::pair<char32_t, char32_t>> decompose_;

  // Inverse indexes, canonical entries only.
  std::map<std::string, char32_t, std::less<>> inv_vowel_;
  std::map<std::string, char32_t, std::less<>> inv_matra_;
  std::map<std::string, char32_t, std::less<>> inv_sign_;
  std::map<char, char32_t> inv_digit_;
  std::map<std::string, char32_t, std::less<>> inv_consonant_;
  std::size_t max_consonant_wx_ = 0;
  std::map<char32_t, char32_t> nukta_join_;

  void build_indexes(std::string_view origin);
};

}  // namespace wxpipe
