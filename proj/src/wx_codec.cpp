#include "wxpipe/wx_codec.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

#include "wxpipe/errors.hpp"
#include "wxpipe/utf8.hpp"

namespace wxpipe {

namespace {

// ASCII characters that decode and validate accept silently besides WX
// letters and digits.
constexpr std::string_view kNeutralPunct = ".,;:!?'\"()[]{}-_/";

bool is_neutral_ascii(char c) {
  unsigned char u = static_cast<unsigned char>(c);
  return std::isspace(u) || std::isdigit(u) ||
         kNeutralPunct.find(c) != std::string_view::npos;
}

class SpanBuilder {
 public:
  explicit SpanBuilder(EncodedText& out) : out_(out) {}

  void emit(SpanKind kind, std::string_view text) {
    if (text.empty()) return;
    std::size_t begin = out_.wx.size();
    out_.wx.append(text);
    if (!out_.spans.empty() && out_.spans.back().kind == kind &&
        out_.spans.back().end == begin) {
      out_.spans.back().end = out_.wx.size();
    } else {
      out_.spans.push_back({begin, out_.wx.size(), kind});
    }
  }

  void emit(SpanKind kind, char32_t cp) {
    buf_.clear();
    utf8::append(buf_, cp);
    emit(kind, buf_);
  }

 private:
  EncodedText& out_;
  std::string buf_;
};

}  // namespace

WxCodec::WxCodec(const ScriptTable& table) : table_(&table) {}

EncodedText WxCodec::encode(std::string_view text) const {
  const ScriptTable& t = *table_;
  EncodedText out;
  out.source_script = t.script();
  SpanBuilder spans(out);

  std::u32string cps = utf8::decode(text);
  // Canonical nukta decomposition first, so precomposed letters transduce
  // like their base + nukta spelling.
  if (t.abugida()) {
    std::u32string norm;
    norm.reserve(cps.size());
    for (char32_t cp : cps) {
      if (auto d = t.decompose(cp)) {
        norm.push_back(d->first);
        norm.push_back(d->second);
      } else {
        norm.push_back(cp);
      }
    }
    cps.swap(norm);
  }

  bool pending_inherent = false;
  auto resolve_inherent = [&] {
    if (pending_inherent) {
      spans.emit(SpanKind::Transliterated, t.inherent_vowel());
      pending_inherent = false;
    }
  };

  for (std::size_t i = 0; i < cps.size(); ++i) {
    char32_t cp = cps[i];
    const ScriptTable::Entry* entry = t.find(cp);
    if (!entry) {
      if (cp == t.virama() && t.abugida()) {
        if (pending_inherent) {
          pending_inherent = false;
        } else {
          out.diagnostics.push_back({i, cp, "orphan virama"});
        }
        continue;
      }
      resolve_inherent();
      // In-block but unmapped (candra vowels, avagraha, ...): passthrough
      // by design, reported except for the danda punctuation pair.
      if (t.block().contains(cp) && cp != U'।' && cp != U'॥')
        out.diagnostics.push_back({i, cp, "unmapped in-block codepoint"});
      spans.emit(SpanKind::Passthrough, cp);
      continue;
    }

    if (!t.abugida()) {
      spans.emit(SpanKind::Transliterated, entry->wx);
      continue;
    }

    switch (entry->kind) {
      case ScriptTable::Kind::Consonant:
        resolve_inherent();
        spans.emit(SpanKind::Transliterated, entry->wx);
        pending_inherent = true;
        break;
      case ScriptTable::Kind::Vowel:
        resolve_inherent();
        spans.emit(SpanKind::Transliterated, entry->wx);
        break;
      case ScriptTable::Kind::Matra:
        if (pending_inherent) {
          pending_inherent = false;
        } else {
          out.diagnostics.push_back({i, cp, "orphan dependent vowel"});
        }
        spans.emit(SpanKind::Transliterated, entry->wx);
        break;
      case ScriptTable::Kind::Sign:
        if (entry->wx == "Z") {
          // Nukta binds to the pending consonant; the inherent vowel stays
          // unresolved until the next vowel sign or boundary.
          if (!pending_inherent)
            out.diagnostics.push_back({i, cp, "orphan nukta"});
          spans.emit(SpanKind::Transliterated, entry->wx);
        } else {
          resolve_inherent();
          spans.emit(SpanKind::Transliterated, entry->wx);
        }
        break;
      case ScriptTable::Kind::Digit:
        resolve_inherent();
        spans.emit(SpanKind::Transliterated, entry->wx);
        break;
    }
  }
  resolve_inherent();
  return out;
}

DecodeResult WxCodec::decode(std::string_view wx) const {
  const ScriptTable& t = *table_;
  if (!t.invertible())
    throw NonInvertibleScript(std::string(script_name(t.script())) +
                              " has no deterministic inverse transduction");

  DecodeResult out;
  bool awaiting_vowel = false;  // consonant emitted, vowel letter not yet seen
  char32_t last_consonant = 0;
  std::size_t last_consonant_offset = 0;  // byte offset of it in out.text

  auto flush = [&] {
    if (awaiting_vowel) {
      utf8::append(out.text, t.virama());
      awaiting_vowel = false;
    }
    last_consonant = 0;
  };

  std::size_t i = 0;
  while (i < wx.size()) {
    unsigned char c = static_cast<unsigned char>(wx[i]);
    if (c >= 0x80) {
      flush();
      std::size_t len = std::min(
          static_cast<std::size_t>(utf8::sequence_length(c)), wx.size() - i);
      out.text.append(wx.substr(i, len));
      i += len;
      continue;
    }

    std::string_view one(wx.data() + i, 1);
    if (auto match = t.consonant_prefix(wx.substr(i))) {
      flush();
      last_consonant = match->first;
      last_consonant_offset = out.text.size();
      utf8::append(out.text, match->first);
      awaiting_vowel = true;
      i += match->second;
      continue;
    }
    if (auto vowel = t.vowel_independent(one)) {
      if (awaiting_vowel) {
        // After a consonant a vowel letter is a matra; the inherent vowel
        // closes the consonant without emitting anything.
        if (one != t.inherent_vowel())
          utf8::append(out.text, *t.vowel_dependent(one));
        awaiting_vowel = false;
        last_consonant = 0;
      } else {
        utf8::append(out.text, *vowel);
      }
      ++i;
      continue;
    }
    if (auto sign = t.sign(one)) {
      if (one == "Z" && awaiting_vowel && last_consonant != 0) {
        if (auto joined = t.nukta_join(last_consonant)) {
          out.text.resize(last_consonant_offset);
          utf8::append(out.text, *joined);
          last_consonant = *joined;
        } else {
          utf8::append(out.text, *sign);
        }
        // consonant + nukta still awaits its vowel
        ++i;
        continue;
      }
      if (one == "Z") {
        utf8::append(out.text, *sign);
      } else {
        flush();
        utf8::append(out.text, *sign);
      }
      ++i;
      continue;
    }
    if (std::isdigit(c)) {
      flush();
      if (auto digit = t.digit(static_cast<char>(c))) {
        utf8::append(out.text, *digit);
      } else {
        out.text.push_back(static_cast<char>(c));
      }
      ++i;
      continue;
    }
    flush();
    if (!is_neutral_ascii(static_cast<char>(c))) {
      out.diagnostics.push_back(
          {i, c, "symbol not in the WX alphabet, copied through"});
    }
    out.text.push_back(static_cast<char>(c));
    ++i;
  }
  flush();
  return out;
}

EncodedText encode(std::string_view text, ScriptId script) {
  return WxCodec(ScriptTable::builtin(script)).encode(text);
}

DecodeResult decode(std::string_view wx, ScriptId script) {
  return WxCodec(ScriptTable::builtin(script)).decode(wx);
}

ScriptGuess detect_script(std::string_view text) {
  std::u32string cps = utf8::decode(text);
  std::size_t total_letters = 0;
  std::vector<std::size_t> per_block(all_scripts().size(), 0);
  for (char32_t cp : cps) {
    if (cp < 0x80) {
      if (std::isalpha(static_cast<int>(cp))) ++total_letters;
      continue;
    }
    for (std::size_t s = 0; s < all_scripts().size(); ++s) {
      const ScriptTable& t = ScriptTable::builtin(all_scripts()[s]);
      if (!t.block().contains(cp)) continue;
      const auto* entry = t.find(cp);
      if (entry && entry->kind == ScriptTable::Kind::Digit) break;
      ++per_block[s];
      ++total_letters;
      break;
    }
  }
  auto best = std::max_element(per_block.begin(), per_block.end());
  if (*best == 0)
    throw NoIndicContent("no codepoint falls in a known script block");
  return {all_scripts()[best - per_block.begin()],
          static_cast<double>(*best) / static_cast<double>(total_letters)};
}

std::vector<Diagnostic> validate_wx(std::string_view wx) {
  // Validation is against the normative table; the WX alphabet is shared
  // across scripts by construction.
  const ScriptTable& t = ScriptTable::builtin(ScriptId::Devanagari);
  std::vector<Diagnostic> out;
  bool after_consonant = false;
  std::size_t i = 0;
  while (i < wx.size()) {
    unsigned char c = static_cast<unsigned char>(wx[i]);
    if (c >= 0x80) {
      out.push_back({i, c, "non-ASCII content in WX text"});
      i += std::min(static_cast<std::size_t>(utf8::sequence_length(c)),
                    wx.size() - i);
      after_consonant = false;
      continue;
    }
    std::string_view one(wx.data() + i, 1);
    if (auto match = t.consonant_prefix(wx.substr(i))) {
      after_consonant = true;
      i += match->second;
      continue;
    }
    if (t.vowel_independent(one)) {
      after_consonant = false;
      ++i;
      continue;
    }
    if (t.sign(one)) {
      if (one == "Z" && !after_consonant)
        out.push_back({i, c, "nukta without a preceding consonant"});
      if (one != "Z") after_consonant = false;
      ++i;
      continue;
    }
    if (is_neutral_ascii(static_cast<char>(c))) {
      after_consonant = false;
      ++i;
      continue;
    }
    out.push_back({i, c, "symbol not in the WX alphabet"});
    after_consonant = false;
    ++i;
  }
  return out;
}

}  // namespace wxpipe
