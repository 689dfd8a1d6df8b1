#pragma once

#include <optional>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "epitext/corpus.hpp"
#include "epitext/types.hpp"

namespace epitext::metrics {

/// years + 1 when months >= 6 (half up).
int round_age_years(const AgeValue& age);

/// Mean absolute age error kept exact: the sum of whole-month differences and
/// the pair count. The months view is exactly 12 times the years view at the
/// rational level; each double view is a single correctly rounded division.
struct AgeMae {
  long long sum_abs_months = 0;
  long long pairs = 0;

  double years() const { return static_cast<double>(sum_abs_months) / (12.0 * static_cast<double>(pairs)); }
  double months() const { return static_cast<double>(sum_abs_months) / static_cast<double>(pairs); }
};

/// Pairs with an absent prediction must be excluded (and counted) upstream.
/// Throws std::invalid_argument on an empty list; callers report N/A.
AgeMae age_mae(std::span<const std::pair<AgeValue, AgeValue>> pairs);

/// Fraction of pairs for which `correct(prediction, gold)` holds. The
/// predicate decides how absent predictions are treated (they normally count
/// as incorrect). Throws std::invalid_argument on an empty list.
template <class P, class G, class Correct>
double field_accuracy(std::span<const std::pair<P, G>> pairs, Correct correct) {
  if (pairs.empty()) throw std::invalid_argument("field_accuracy: no evaluable pairs");
  long long ok = 0;
  for (const auto& [prediction, gold] : pairs) {
    if (correct(prediction, gold)) ++ok;
  }
  return static_cast<double>(ok) / static_cast<double>(pairs.size());
}

template <class P, class G, class Correct>
double field_accuracy(const std::vector<std::pair<P, G>>& pairs, Correct correct) {
  return field_accuracy(std::span<const std::pair<P, G>>(pairs.data(), pairs.size()), correct);
}

/// One record's drug evaluation: the gold set (tofind), the predicted set and
/// their intersection (correctfound).
struct DrugEvalInstance {
  std::set<std::string> gold;
  std::set<std::string> predicted;
  std::set<std::string> correct;

  /// Normalizes both sides (lowercase, trimmed) and computes the intersection.
  static DrugEvalInstance make(std::span<const std::string> gold, std::span<const std::string> predicted);
};

enum class AdjustedAccuracyMode {
  /// Mean over records of (min/max + correct/tofind) / 2; a perfect
  /// extraction scores 1 regardless of set size. Default.
  PerRecordMean,
  /// Alternative bracketing: sum of (min + correct/tofind) / max over
  /// records, divided by 2N. A perfect two-drug extraction scores 0.75.
  LiteralSum,
};

/// Degenerate cases in both modes: both sets empty scores 1; an empty gold set
/// against a non-empty prediction (or vice versa) scores 0.
/// Throws std::invalid_argument on an empty instance list.
double adjusted_accuracy(std::span<const DrugEvalInstance> instances,
                         AdjustedAccuracyMode mode = AdjustedAccuracyMode::PerRecordMean);

/// Per-group metric table row.
struct GroupEval {
  std::string group;
  std::size_t n = 0;

  std::size_t evaluated_age = 0, evaluated_sex = 0, evaluated_lesion = 0, evaluated_drugs = 0;
  std::size_t absent_age = 0, absent_sex = 0, absent_lesion = 0;
  std::size_t parse_failures = 0;

  std::optional<double> age_accuracy;
  std::optional<AgeMae> mae;
  std::optional<double> rounded_age_accuracy;
  std::optional<double> rounded_age_mae_years;
  std::optional<double> sex_accuracy;
  std::optional<double> lesion_accuracy;
  std::optional<double> drugs_adjusted_accuracy;
};

/// Joins extractions to their records, groups them, and computes every metric
/// per group plus an "overall" row (appended last). Extractions whose id does
/// not resolve to a record are an error.
std::vector<GroupEval> evaluate(std::span<const corpus::EpicrisisRecord> records,
                                std::span<const Extraction> extractions, corpus::GroupBy group_by,
                                AdjustedAccuracyMode mode = AdjustedAccuracyMode::PerRecordMean);

/// JSON array with one object per group; N/A metrics are null.
std::string report_to_json(std::span<const GroupEval> report);

/// CSV summary table; N/A metrics are empty cells.
std::string report_to_csv(std::span<const GroupEval> report);

}  // namespace epitext::metrics
