#include "epitext/rule_extract.hpp"

#include <algorithm>
#include <fstream>

#include "epitext/error.hpp"
#include "epitext/utf8.hpp"

namespace epitext::rules {

namespace {

std::optional<long long> parse_uint(std::string_view s) {
  if (s.empty() || s.size() > 9) return std::nullopt;
  long long value = 0;
  for (char c : s) {
    if (c < '0' || c > '9') return std::nullopt;
    value = value * 10 + (c - '0');
  }
  return value;
}

/// Accepts "N/12" and returns N when N < 12. A numerator of 12 or more keeps
/// the fraction shape but yields no value, which makes production 1 fall back
/// to the bare-int reading.
std::optional<int> parse_month_fraction(std::string_view s) {
  const auto slash = s.find('/');
  if (slash == std::string_view::npos) return std::nullopt;
  if (s.substr(slash + 1) != "12") return std::nullopt;
  const auto numerator = parse_uint(s.substr(0, slash));
  if (!numerator || *numerator >= 12) return std::nullopt;
  return static_cast<int>(*numerator);
}

std::optional<AgeValue> parse_decimal(std::string_view s, int max_years) {
  auto sep = s.find_first_of(".,");
  if (sep == std::string_view::npos) return std::nullopt;
  if (s.find_first_of(".,", sep + 1) != std::string_view::npos) return std::nullopt;
  const auto years = parse_uint(s.substr(0, sep));
  std::string_view frac = s.substr(sep + 1);
  if (!years || frac.empty()) return std::nullopt;
  if (frac.size() > 9) frac = frac.substr(0, 9);
  const auto numerator = parse_uint(frac);
  if (!numerator) return std::nullopt;
  long long denominator = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) denominator *= 10;
  // round(12 * numerator / denominator), half up
  int months = static_cast<int>((24 * *numerator + denominator) / (2 * denominator));
  long long whole = *years;
  if (months == 12) {
    ++whole;
    months = 0;
  }
  if (whole > max_years) return std::nullopt;
  return AgeValue{static_cast<int>(whole), months};
}

}  // namespace

std::optional<AgeValue> parse_age_expression(std::span<const textproc::Token> tokens,
                                             const AgeGrammar& grammar) {
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const std::string_view tok = tokens[i].normalized;
    const auto years = parse_uint(tok);
    const bool int_in_range = years && *years <= grammar.max_years;

    if (int_in_range) {
      std::size_t j = i + 1;
      if (j < tokens.size() && tokens[j].normalized == "i") ++j;
      if (j < tokens.size()) {
        if (const auto months = parse_month_fraction(tokens[j].normalized)) {
          return AgeValue{static_cast<int>(*years), *months};
        }
      }
    }
    if (const auto decimal = parse_decimal(tok, grammar.max_years)) return decimal;
    if (int_in_range) return AgeValue{static_cast<int>(*years), 0};
  }
  return std::nullopt;
}

std::optional<AgeValue> parse_age_text(std::string_view text, const AgeGrammar& grammar) {
  const auto tokens = textproc::tokenize(text);
  return parse_age_expression(tokens, grammar);
}

AgeExtraction extract_age(const corpus::EpicrisisRecord& record,
                          const textproc::SentenceSplitter& splitter, const AgeGrammar& grammar) {
  AgeExtraction out;
  const auto sentences = splitter.split(record.text);
  if (sentences.empty()) {
    out.diagnostics.push_back({diag::kAgeEmptyText, "record text is empty"});
    return out;
  }
  const auto& tokens = sentences.front().tokens;
  const std::span window(tokens.data(), std::min(tokens.size(), kAgeWindowTokens));
  out.age = parse_age_expression(window, grammar);
  if (!out.age) {
    out.diagnostics.push_back(
        {diag::kAgeWindowMiss, "no age pattern within the first-sentence window"});
  }
  return out;
}

GenderCueLexicon GenderCueLexicon::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open gender cue lexicon: " + path.string());
  GenderCueLexicon lexicon;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    if (line_no == 1 && utf8::lower(line) == "form,gender") continue;  // optional header
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected 'form,gender'");
    }
    const std::string form = line.substr(0, comma);
    const std::string gender = textproc::normalize_token(line.substr(comma + 1));
    std::optional<Sex> sex;
    if (gender == "m") sex = Sex::M;
    if (gender == "f") sex = Sex::F;
    if (!sex) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": gender must be M or F");
    }
    try {
      lexicon.add(form, *sex);
    } catch (const Error& e) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return lexicon;
}

GenderCueLexicon GenderCueLexicon::from_entries(std::span<const std::pair<std::string, Sex>> entries) {
  GenderCueLexicon lexicon;
  for (const auto& [form, sex] : entries) lexicon.add(form, sex);
  return lexicon;
}

void GenderCueLexicon::add(std::string form, Sex sex) {
  std::string norm = textproc::normalize_token(form);
  if (norm.empty()) throw Error("gender cue form is empty after normalization: '" + form + "'");
  auto [it, inserted] = entries_.emplace(std::move(norm), sex);
  if (!inserted && it->second != sex) {
    throw Error("gender cue '" + it->first + "' maps to both genders");
  }
}

std::optional<Sex> GenderCueLexicon::lookup(std::string_view normalized_token) const {
  const auto it = entries_.find(normalized_token);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

SexExtraction extract_sex(const corpus::EpicrisisRecord& record, const GenderCueLexicon& lexicon,
                          const textproc::SentenceSplitter& splitter) {
  SexExtraction out;
  const auto sentences = splitter.split(record.text);
  if (sentences.empty()) return out;
  std::string first_cue;
  for (const auto& token : sentences.front().tokens) {
    const auto sex = lexicon.lookup(token.normalized);
    if (!sex) continue;
    if (!out.sex) {
      out.sex = *sex;
      first_cue = token.normalized;
    } else if (*sex != *out.sex) {
      out.diagnostics.push_back({diag::kSexAmbiguousCues,
                                 "'" + first_cue + "' precedes conflicting cue '" + token.normalized + "'"});
      break;
    }
  }
  return out;
}

LesionLexicon::LesionLexicon(std::vector<std::string> stems) {
  for (auto& raw : stems) {
    std::string norm = textproc::normalize_token(raw);
    if (norm.empty()) throw Error("lesion stem is empty after normalization: '" + raw + "'");
    if (norm.find(' ') != std::string::npos) {
      throw Error("lesion stem must be a single token: '" + raw + "'");
    }
    if (std::find(stems_.begin(), stems_.end(), norm) == stems_.end()) stems_.push_back(std::move(norm));
  }
}

LesionLexicon LesionLexicon::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open lesion lexicon: " + path.string());
  std::vector<std::string> stems;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    stems.push_back(line);
  }
  try {
    return LesionLexicon(std::move(stems));
  } catch (const Error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

LesionExtraction extract_skin_lesion(const corpus::EpicrisisRecord& record, const LesionLexicon& lexicon) {
  LesionExtraction out;
  std::vector<std::string> seen;  // distinct stems in first-occurrence order
  for (const auto& token : textproc::tokenize(record.text)) {
    for (const auto& stem : lexicon.stems()) {
      if (token.normalized.find(stem) == std::string::npos) continue;
      if (!out.stem) out.stem = stem;
      if (std::find(seen.begin(), seen.end(), stem) == seen.end()) seen.push_back(stem);
      break;  // a token is assigned to the first stem that matches it
    }
  }
  if (seen.size() > 1) {
    std::string detail;
    for (const auto& s : seen) {
      if (!detail.empty()) detail += ", ";
      detail += s;
    }
    out.diagnostics.push_back({diag::kLesionMultipleStems, detail});
  }
  return out;
}

}  // namespace epitext::rules
