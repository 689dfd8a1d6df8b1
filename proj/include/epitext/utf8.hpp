#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace epitext::utf8 {

inline constexpr char32_t kReplacement = 0xFFFD;

/// Decodes the UTF-8 sequence starting at `i` and advances `i` past it.
/// Malformed bytes decode to U+FFFD one byte at a time, so decoding never fails.
char32_t decode_next(std::string_view s, std::size_t& i);

std::vector<char32_t> decode(std::string_view s);

void append(std::string& out, char32_t cp);
std::string encode(const std::vector<char32_t>& cps);

bool is_space(char32_t cp);

/// Letters and digits, i.e. everything the tokenizer keeps inside a token.
/// Non-ASCII code points count as letters unless they are known punctuation.
bool is_word_char(char32_t cp);

/// Lowercase mapping covering ASCII, Latin-1 Supplement and Latin Extended-A
/// (enough for Polish and most western European text). Other code points pass
/// through unchanged.
char32_t to_lower(char32_t cp);

/// Best-effort diacritic removal after lowering; unmapped code points pass
/// through unchanged.
char32_t fold_ascii(char32_t cp);

std::string lower(std::string_view s);
std::string fold_ascii(std::string_view s);

}  // namespace epitext::utf8
