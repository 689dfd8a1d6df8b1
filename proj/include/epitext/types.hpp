#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace epitext {

enum class Language { PL, EN };
enum class Sex { M, F };

const char* to_string(Language lang);
const char* to_string(Sex sex);
std::optional<Language> language_from_string(std::string_view s);
std::optional<Sex> sex_from_string(std::string_view s);

/// Exact patient age with month resolution. `months` is always in [0, 11].
struct AgeValue {
  int years = 0;
  int months = 0;

  int total_months() const { return years * 12 + months; }
  double fractional_years() const { return years + months / 12.0; }

  friend bool operator==(const AgeValue&, const AgeValue&) = default;
};

/// A structured note attached to an extraction: a stable machine-readable
/// code plus free-form detail.
struct Diagnostic {
  std::string code;
  std::string detail;
};

namespace diag {
inline constexpr const char* kAgeEmptyText = "age.empty-text";
inline constexpr const char* kAgeWindowMiss = "age.window-miss";
inline constexpr const char* kSexAmbiguousCues = "sex.ambiguous-cues";
inline constexpr const char* kLesionMultipleStems = "lesion.multiple-stems";
inline constexpr const char* kLlmParsePartial = "llm.parse-partial";
inline constexpr const char* kLlmParseUnparseable = "llm.parse-unparseable";
inline constexpr const char* kLlmAgeUnparsed = "llm.age-unparsed";
inline constexpr const char* kLlmSexUnrecognized = "llm.sex-unrecognized";
}  // namespace diag

/// The four extracted fields for one record, plus provenance and notes.
struct Extraction {
  std::string id;
  std::string method;  // "rule" or "llm:<model>"
  std::optional<AgeValue> age;
  std::optional<Sex> sex;
  std::optional<std::string> lesion;
  std::vector<std::string> drugs;  // duplicate-free, in text order
  std::vector<Diagnostic> diagnostics;
};

}  // namespace epitext
