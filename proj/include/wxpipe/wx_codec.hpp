#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "wxpipe/script_table.hpp"

namespace wxpipe {

enum class SpanKind { Transliterated, Passthrough };

/// Half-open byte range [begin, end) into the WX output.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
  SpanKind kind = SpanKind::Transliterated;
  bool operator==(const Span&) const = default;
};

struct Diagnostic {
  std::size_t offset = 0;  // codepoint index (encode) or byte offset (decode)
  char32_t codepoint = 0;
  std::string message;
};

struct EncodedText {
  std::string wx;
  std::vector<Span> spans;
  ScriptId source_script = ScriptId::Devanagari;
  std::vector<Diagnostic> diagnostics;
};

struct DecodeResult {
  std::string text;
  std::vector<Diagnostic> diagnostics;
};

/// Transliterates one script to and from the WX character space.
/// Immutable once constructed; encode/decode are pure and may run from any
/// number of threads concurrently.
class WxCodec {
 public:
  explicit WxCodec(const ScriptTable& table);

  const ScriptTable& table() const { return *table_; }

  /// Total function: every codepoint either transduces per the table or is
  /// copied into a passthrough span. Malformed sequences (orphan matras,
  /// orphan viramas) are repaired and reported in diagnostics.
  EncodedText encode(std::string_view text) const;

  /// Inverse transduction. Interprets every ASCII letter as WX and ASCII
  /// digits as the script's digits; mixed-content callers must route
  /// around passthrough spans themselves. Throws NonInvertibleScript for
  /// lossy scripts.
  DecodeResult decode(std::string_view wx) const;

 private:
  const ScriptTable* table_;
};

EncodedText encode(std::string_view text, ScriptId script);
DecodeResult decode(std::string_view wx, ScriptId script);

struct ScriptGuess {
  ScriptId script;
  double fraction = 0.0;  // plurality block's share of letter codepoints
};

/// Block-counting detector; throws NoIndicContent when no codepoint falls
/// in a known block.
ScriptGuess detect_script(std::string_view text);

/// Reports WX symbols outside the alphabet and structurally undecodable
/// sequences. Empty result means decode(wx) reproduces wx under encode.
std::vector<Diagnostic> validate_wx(std::string_view wx);

}  // namespace wxpipe
