#include "epitext/textproc.hpp"

#include <fstream>

#include "epitext/error.hpp"
#include "epitext/utf8.hpp"

namespace epitext::textproc {

std::string normalize_token(std::string_view surface) {
  auto cps = utf8::decode(surface);
  for (auto& cp : cps) cp = utf8::to_lower(cp);
  std::size_t b = 0;
  std::size_t e = cps.size();
  while (b < e && !utf8::is_word_char(cps[b])) ++b;
  while (e > b && !utf8::is_word_char(cps[e - 1])) --e;
  std::string out;
  for (std::size_t i = b; i < e; ++i) utf8::append(out, cps[i]);
  return out;
}

std::vector<Token> tokenize(std::string_view text, std::size_t base_offset) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t start = i;
    char32_t cp = utf8::decode_next(text, i);
    if (utf8::is_space(cp)) continue;
    std::size_t end = i;
    while (i < text.size()) {
      cp = utf8::decode_next(text, i);
      if (utf8::is_space(cp)) break;
      end = i;
    }
    const std::string_view surface = text.substr(start, end - start);
    std::string norm = normalize_token(surface);
    if (!norm.empty()) {
      tokens.push_back(Token{std::string(surface), std::move(norm), base_offset + start});
    }
  }
  return tokens;
}

SentenceSplitter::SentenceSplitter() : SentenceSplitter({"r", "dr", "ul", "np"}) {}

SentenceSplitter::SentenceSplitter(std::vector<std::string> abbreviations) {
  for (auto& a : abbreviations) {
    std::string norm = normalize_token(a);
    if (!norm.empty()) abbreviations_.insert(std::move(norm));
  }
}

SentenceSplitter SentenceSplitter::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open abbreviation file: " + path.string());
  std::vector<std::string> entries;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    entries.push_back(line);
  }
  return SentenceSplitter(std::move(entries));
}

namespace {

struct CodePoint {
  char32_t cp;
  std::size_t pos;   // byte offset of the code point
  std::size_t next;  // byte offset just past it
};

std::vector<CodePoint> decode_with_positions(std::string_view text) {
  std::vector<CodePoint> cps;
  cps.reserve(text.size());
  std::size_t i = 0;
  while (i < text.size()) {
    const std::size_t p = i;
    const char32_t cp = utf8::decode_next(text, i);
    cps.push_back({cp, p, i});
  }
  return cps;
}

}  // namespace

std::vector<Sentence> SentenceSplitter::split(std::string_view text) const {
  const auto cps = decode_with_positions(text);
  constexpr std::size_t npos = std::string_view::npos;

  std::vector<Sentence> sentences;
  std::size_t begin = npos;
  std::size_t last_non_ws_end = 0;

  const auto flush = [&](std::size_t end) {
    if (begin != npos && end > begin) {
      Sentence s;
      s.begin = begin;
      s.end = end;
      s.tokens = tokenize(text.substr(begin, end - begin), begin);
      sentences.push_back(std::move(s));
    }
    begin = npos;
  };

  const auto guarded_abbreviation = [&](std::size_t dot_index) {
    // Collect the run of word characters directly before the '.'.
    std::size_t j = dot_index;
    while (j > 0 && utf8::is_word_char(cps[j - 1].cp)) --j;
    if (j == dot_index) return false;
    std::string word;
    for (std::size_t k = j; k < dot_index; ++k) utf8::append(word, utf8::to_lower(cps[k].cp));
    return abbreviations_.contains(word);
  };

  for (std::size_t k = 0; k < cps.size(); ++k) {
    const auto& c = cps[k];
    if (!utf8::is_space(c.cp)) {
      if (begin == npos) begin = c.pos;
      last_non_ws_end = c.next;
    }
    if (begin == npos) continue;
    const bool terminator = c.cp == U'.' || c.cp == U'!' || c.cp == U'?';
    if (terminator && k + 1 < cps.size() && utf8::is_space(cps[k + 1].cp)) {
      if (c.cp == U'.' && guarded_abbreviation(k)) continue;
      flush(c.next);
    }
  }
  flush(last_non_ws_end);
  return sentences;
}

std::vector<Sentence> split_sentences(std::string_view text, const SentenceSplitter& splitter) {
  return splitter.split(text);
}

}  // namespace epitext::textproc
