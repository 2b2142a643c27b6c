#include "wxpipe/script_table.hpp"

#include <array>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>

#include "wxpipe/errors.hpp"

namespace wxpipe {

namespace detail {
extern const char* const embedded_table_devanagari;
extern const char* const embedded_table_gujarati;
extern const char* const embedded_table_gurmukhi;
extern const char* const embedded_table_perso_arabic;
}  // namespace detail

ScriptId script_from_name(std::string_view name) {
  if (name == "devanagari") return ScriptId::Devanagari;
  if (name == "gujarati") return ScriptId::Gujarati;
  if (name == "gurmukhi") return ScriptId::Gurmukhi;
  if (name == "perso_arabic" || name == "urdu") return ScriptId::PersoArabic;
  throw FormatError("unknown script name: " + std::string(name));
}

std::string_view script_name(ScriptId id) {
  switch (id) {
    case ScriptId::Devanagari: return "devanagari";
    case ScriptId::Gujarati: return "gujarati";
    case ScriptId::Gurmukhi: return "gurmukhi";
    case ScriptId::PersoArabic: return "perso_arabic";
  }
  return "?";
}

const std::vector<ScriptId>& all_scripts() {
  static const std::vector<ScriptId> ids = {
      ScriptId::Devanagari, ScriptId::Gujarati, ScriptId::Gurmukhi,
      ScriptId::PersoArabic};
  return ids;
}

BlockRange script_block(ScriptId id) { return ScriptTable::builtin(id).block(); }

bool script_invertible(ScriptId id) {
  return ScriptTable::builtin(id).invertible();
}

namespace {

char32_t parse_codepoint(const std::string& field, std::string_view origin,
                         int lineno) {
  std::uint32_t value = 0;
  std::istringstream in(field);
  in >> std::hex >> value;
  if (in.fail() || !in.eof() || value > 0x10FFFF) {
    throw FormatError(std::string(origin) + ":" + std::to_string(lineno) +
                      ": bad codepoint '" + field + "'");
  }
  return static_cast<char32_t>(value);
}

bool parse_bool(const std::string& field, std::string_view origin,
                int lineno) {
  if (field == "yes") return true;
  if (field == "no") return false;
  throw FormatError(std::string(origin) + ":" + std::to_string(lineno) +
                    ": expected yes/no, got '" + field + "'");
}

bool ascii_only(std::string_view s) {
  for (unsigned char c : s)
    if (c >= 0x80) return false;
  return true;
}

}  // namespace

ScriptTable ScriptTable::parse(std::string_view text,
                               std::string_view origin) {
  ScriptTable t;
  bool saw_script = false;
  std::istringstream lines{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(lines, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream fields(line);
    std::string key;
    if (!(fields >> key)) continue;

    auto want = [&](int n) {
      std::vector<std::string> out(n);
      for (auto& f : out) {
        if (!(fields >> f))
          throw FormatError(std::string(origin) + ":" +
                            std::to_string(lineno) + ": truncated '" + key +
                            "' record");
      }
      return out;
    };

    if (key == "script") {
      t.script_ = script_from_name(want(1)[0]);
      saw_script = true;
    } else if (key == "version") {
      t.version_ = std::stoi(want(1)[0]);
    } else if (key == "block") {
      auto f = want(2);
      t.block_.first = parse_codepoint(f[0], origin, lineno);
      t.block_.last = parse_codepoint(f[1], origin, lineno);
    } else if (key == "invertible") {
      t.invertible_ = parse_bool(want(1)[0], origin, lineno);
    } else if (key == "abugida") {
      t.abugida_ = parse_bool(want(1)[0], origin, lineno);
    } else if (key == "inherent") {
      t.inherent_ = want(1)[0];
    } else if (key == "virama") {
      t.virama_ = parse_codepoint(want(1)[0], origin, lineno);
    } else if (key == "vowel" || key == "matra" || key == "consonant" ||
               key == "sign" || key == "digit") {
      auto f = want(2);
      char32_t cp = parse_codepoint(f[0], origin, lineno);
      if (!ascii_only(f[1]))
        throw FormatError(std::string(origin) + ":" + std::to_string(lineno) +
                          ": WX output must be ASCII");
      Kind kind = key == "vowel"       ? Kind::Vowel
                  : key == "matra"     ? Kind::Matra
                  : key == "consonant" ? Kind::Consonant
                  : key == "sign"      ? Kind::Sign
                                       : Kind::Digit;
      if (t.entries_.count(cp))
        throw FormatError(std::string(origin) + ":" + std::to_string(lineno) +
                          ": duplicate codepoint record");
      t.entries_.emplace(cp, Entry{kind, f[1], true});
      t.entry_order_.push_back(cp);
    } else if (key == "decompose") {
      auto f = want(3);
      char32_t cp = parse_codepoint(f[0], origin, lineno);
      t.decompose_[cp] = {parse_codepoint(f[1], origin, lineno),
                          parse_codepoint(f[2], origin, lineno)};
    } else {
      throw FormatError(std::string(origin) + ":" + std::to_string(lineno) +
                        ": unknown record '" + key + "'");
    }
  }
  if (!saw_script || t.block_.last == 0)
    throw FormatError(std::string(origin) + ": missing script/block header");
  if (t.abugida_ && (t.inherent_.empty() || t.virama_ == 0))
    throw FormatError(std::string(origin) +
                      ": abugida table needs inherent and virama records");
  t.build_indexes(origin);
  return t;
}

void ScriptTable::build_indexes(std::string_view origin) {
  // File order decides which codepoint is decode-canonical for a given wx
  // string: first record wins, later duplicates become encode-only.
  for (char32_t cp : entry_order_) {
    Entry& entry = entries_.at(cp);
    switch (entry.kind) {
      case Kind::Vowel:
        if (!inv_vowel_.emplace(entry.wx, cp).second)
          entry.decode_canonical = false;
        break;
      case Kind::Matra:
        if (!inv_matra_.emplace(entry.wx, cp).second)
          entry.decode_canonical = false;
        break;
      case Kind::Consonant:
        if (!inv_consonant_.emplace(entry.wx, cp).second)
          entry.decode_canonical = false;
        max_consonant_wx_ = std::max(max_consonant_wx_, entry.wx.size());
        break;
      case Kind::Sign:
        if (!inv_sign_.emplace(entry.wx, cp).second)
          entry.decode_canonical = false;
        break;
      case Kind::Digit:
        if (!inv_digit_.emplace(entry.wx[0], cp).second)
          entry.decode_canonical = false;
        break;
    }
  }

  // A consonant written as <other consonant wx> + Z is a joined nukta form
  // (e.g. Gurmukhi rra): decode folds base + nukta back into it.
  for (const auto& [wx, cp] : inv_consonant_) {
    if (wx.size() > 1 && wx.back() == 'Z') {
      auto base = inv_consonant_.find(wx.substr(0, wx.size() - 1));
      if (base != inv_consonant_.end()) nukta_join_[base->second] = cp;
    }
  }

  if (invertible_) {
    // Invertibility needs matching letters for the two vowel forms and a
    // matra for every non-inherent vowel.
    for (const auto& [wx, cp] : inv_matra_) {
      if (!inv_vowel_.count(wx))
        throw FormatError(std::string(origin) + ": matra '" + wx +
                          "' has no independent vowel");
    }
    for (const auto& [wx, cp] : inv_vowel_) {
      if (wx != inherent_ && !inv_matra_.count(wx))
        throw FormatError(std::string(origin) + ": vowel '" + wx +
                          "' has no matra and is not the inherent vowel");
    }
    // Prefix-decodability: a multi-char consonant string must extend an
    // existing consonant so greedy longest-match stays deterministic.
    for (const auto& [wx, cp] : inv_consonant_) {
      for (std::size_t len = 1; len < wx.size(); ++len) {
        if (!inv_consonant_.count(wx.substr(0, len)))
          throw FormatError(std::string(origin) + ": consonant '" + wx +
                            "' has an undecodable prefix");
      }
    }
  }
}

ScriptTable ScriptTable::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open script table: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path);
}

const ScriptTable& ScriptTable::builtin(ScriptId id) {
  static std::array<ScriptTable, 4> tables;
  static std::once_flag once;
  std::call_once(once, [] {
    auto load_one = [](ScriptId sid, const char* embedded) {
      if (const char* dir = std::getenv("WXPIPE_TABLES")) {
        auto path = std::filesystem::path(dir) /
                    (std::string(script_name(sid)) + ".wx");
        if (std::filesystem::exists(path)) return load(path.string());
      }
      return parse(embedded, script_name(sid));
    };
    tables[0] = load_one(ScriptId::Devanagari,
                         detail::embedded_table_devanagari);
    tables[1] = load_one(ScriptId::Gujarati, detail::embedded_table_gujarati);
    tables[2] = load_one(ScriptId::Gurmukhi, detail::embedded_table_gurmukhi);
    tables[3] = load_one(ScriptId::PersoArabic,
                         detail::embedded_table_perso_arabic);
  });
  return tables[static_cast<int>(id)];
}

const ScriptTable::Entry* ScriptTable::find(char32_t cp) const {
  auto it = entries_.find(cp);
  return it == entries_.end() ? nullptr : &it->second;
}

std::optional<std::pair<char32_t, char32_t>> ScriptTable::decompose(
    char32_t cp) const {
  auto it = decompose_.find(cp);
  if (it == decompose_.end()) return std::nullopt;
  return it->second;
}

std::optional<char32_t> ScriptTable::vowel_independent(
    std::string_view wx) const {
  auto it = inv_vowel_.find(wx);
  if (it == inv_vowel_.end()) return std::nullopt;
  return it->second;
}

std::optional<char32_t> ScriptTable::vowel_dependent(
    std::string_view wx) const {
  auto it = inv_matra_.find(wx);
  if (it == inv_matra_.end()) return std::nullopt;
  return it->second;
}

std::optional<char32_t> ScriptTable::sign(std::string_view wx) const {
  auto it = inv_sign_.find(wx);
  if (it == inv_sign_.end()) return std::nullopt;
  return it->second;
}

std::optional<char32_t> ScriptTable::digit(char ascii) const {
  auto it = inv_digit_.find(ascii);
  if (it == inv_digit_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::pair<char32_t, std::size_t>> ScriptTable::consonant_prefix(
    std::string_view wx) const {
  for (std::size_t len = std::min(max_consonant_wx_, wx.size()); len >= 1;
       --len) {
    auto it = inv_consonant_.find(wx.substr(0, len));
    if (it != inv_consonant_.end()) return std::make_pair(it->second, len);
  }
  return std::nullopt;
}

std::optional<char32_t> ScriptTable::nukta_join(char32_t base) const {
  auto it = nukta_join_.find(base);
  if (it == nukta_join_.end()) return std::nullopt;
  return it->second;
}

}  // namespace wxpipe
