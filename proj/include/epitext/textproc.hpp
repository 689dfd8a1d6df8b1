#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace epitext::textproc {

/// A whitespace-delimited token. `normalized` is the lowercased form with
/// leading/trailing punctuation stripped; diacritics and interior characters
/// (e.g. the '/' of "4/12" or the '.' of "5.5") are preserved. `offset` is the
/// byte index of `surface` in the source text.
struct Token {
  std::string surface;
  std::string normalized;
  std::size_t offset = 0;
};

/// A sentence as the byte span [begin, end) of the source text plus its tokens.
struct Sentence {
  std::vector<Token> tokens;
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Unicode lowercase + strip leading/trailing punctuation. Idempotent and
/// never longer than its input; pure punctuation normalizes to "".
std::string normalize_token(std::string_view surface);

/// Splits on whitespace and drops tokens whose normalized form is empty.
std::vector<Token> tokenize(std::string_view text, std::size_t base_offset = 0);

/// Terminator-based sentence segmentation: '.', '!' or '?' followed by
/// whitespace ends a sentence, unless the word directly before a '.' is a
/// known abbreviation.
class SentenceSplitter {
 public:
  /// Default guard list: r, dr, ul, np.
  SentenceSplitter();
  explicit SentenceSplitter(std::vector<std::string> abbreviations);

  /// Loads one abbreviation per line; '#' starts a comment line.
  static SentenceSplitter from_file(const std::filesystem::path& path);

  std::vector<Sentence> split(std::string_view text) const;

  const std::set<std::string>& abbreviations() const { return abbreviations_; }

 private:
  std::set<std::string> abbreviations_;
};

std::vector<Sentence> split_sentences(std::string_view text,
                                      const SentenceSplitter& splitter = SentenceSplitter{});

}  // namespace epitext::textproc
