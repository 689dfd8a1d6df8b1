#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epitext/corpus.hpp"
#include "epitext/textproc.hpp"
#include "epitext/types.hpp"

namespace epitext::rules {

/// Ages above `max_years` whole years are rejected by every production
/// (pediatric corpus bound; configurable).
struct AgeGrammar {
  int max_years = 18;
};

/// Scans the token window left to right and returns the first match of, in
/// priority order at each position:
///   1. INT [connector "i"] INT"/12"   (numerator must be below 12)
///   2. a decimal number with '.' or ',' separator (months rounded half up)
///   3. a bare INT
/// A fraction with numerator >= 12 rejects production 1; the bare-INT reading
/// of the leading number still applies.
std::optional<AgeValue> parse_age_expression(std::span<const textproc::Token> tokens,
                                             const AgeGrammar& grammar = {});

/// Tokenizes free text and applies the age grammar to all of its tokens.
std::optional<AgeValue> parse_age_text(std::string_view text, const AgeGrammar& grammar = {});

struct AgeExtraction {
  std::optional<AgeValue> age;
  std::vector<Diagnostic> diagnostics;
};

/// Applies the age grammar to the first six tokens of the first sentence only.
AgeExtraction extract_age(const corpus::EpicrisisRecord& record,
                          const textproc::SentenceSplitter& splitter = textproc::SentenceSplitter{},
                          const AgeGrammar& grammar = {});

inline constexpr std::size_t kAgeWindowTokens = 6;

/// Exact-token lookup of grammatical gender cues. No form may map to both
/// genders; all forms are stored normalized.
class GenderCueLexicon {
 public:
  GenderCueLexicon() = default;
  static GenderCueLexicon from_file(const std::filesystem::path& path);
  static GenderCueLexicon from_entries(std::span<const std::pair<std::string, Sex>> entries);

  void add(std::string form, Sex sex);
  std::optional<Sex> lookup(std::string_view normalized_token) const;
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, Sex, std::less<>> entries_;
};

struct SexExtraction {
  std::optional<Sex> sex;
  std::vector<Diagnostic> diagnostics;
};

/// Scans the first sentence in token order; the earliest cue wins. When cues
/// of both genders occur, the earlier one decides and an ambiguity diagnostic
/// is recorded.
SexExtraction extract_sex(const corpus::EpicrisisRecord& record, const GenderCueLexicon& lexicon,
                          const textproc::SentenceSplitter& splitter = textproc::SentenceSplitter{});

/// Lowercase, duplicate-free, single-token lesion stems matched by substring
/// containment inside document tokens.
class LesionLexicon {
 public:
  LesionLexicon() = default;
  explicit LesionLexicon(std::vector<std::string> stems);
  static LesionLexicon from_file(const std::filesystem::path& path);

  const std::vector<std::string>& stems() const { return stems_; }
  bool empty() const { return stems_.empty(); }

 private:
  std::vector<std::string> stems_;
};

struct LesionExtraction {
  std::optional<std::string> stem;
  std::vector<Diagnostic> diagnostics;
};

/// Scans all tokens of the document in order; a token matches when any stem is
/// a substring of it (stems tried in lexicon order). Returns the stem of the
/// first matching token; further distinct stems are reported as a diagnostic.
LesionExtraction extract_skin_lesion(const corpus::EpicrisisRecord& record, const LesionLexicon& lexicon);

}  // namespace epitext::rules
