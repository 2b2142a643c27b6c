#pragma once

#include <string>
#include <string_view>

namespace wxpipe::utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;

/// Decodes UTF-8 into codepoints; malformed bytes become U+FFFD.
std::u32string decode(std::string_view s);

std::string encode(std::u32string_view s);
std::string encode(char32_t c);

/// Appends the UTF-8 encoding of c to out.
void append(std::string& out, char32_t c);

/// Number of bytes in the sequence starting with this lead byte (1..4);
/// 1 for continuation/invalid leads.
std::size_t sequence_length(unsigned char lead);

}  // namespace wxpipe::utf8
