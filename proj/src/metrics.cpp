#include "epitext/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <map>
#include <sstream>

#include "epitext/error.hpp"
#include "epitext/format.hpp"
#include "epitext/textproc.hpp"
#include "json.hpp"

namespace epitext::metrics {

using nlohmann::ordered_json;

int round_age_years(const AgeValue& age) { return age.years + (age.months >= 6 ? 1 : 0); }

AgeMae age_mae(std::span<const std::pair<AgeValue, AgeValue>> pairs) {
  if (pairs.empty()) throw std::invalid_argument("age_mae: no evaluable pairs");
  AgeMae mae;
  mae.pairs = static_cast<long long>(pairs.size());
  for (const auto& [prediction, gold] : pairs) {
    mae.sum_abs_months += std::abs(prediction.total_months() - gold.total_months());
  }
  return mae;
}

DrugEvalInstance DrugEvalInstance::make(std::span<const std::string> gold,
                                        std::span<const std::string> predicted) {
  DrugEvalInstance instance;
  for (const auto& name : gold) {
    const std::string norm = textproc::normalize_token(name);
    if (!norm.empty()) instance.gold.insert(norm);
  }
  for (const auto& name : predicted) {
    const std::string norm = textproc::normalize_token(name);
    if (!norm.empty()) instance.predicted.insert(norm);
  }
  std::set_intersection(instance.gold.begin(), instance.gold.end(), instance.predicted.begin(),
                        instance.predicted.end(),
                        std::inserter(instance.correct, instance.correct.begin()));
  return instance;
}

namespace {

double per_record_score(const DrugEvalInstance& in) {
  const auto ny = in.gold.size();
  const auto np = in.predicted.size();
  if (ny == 0 && np == 0) return 1.0;
  if (ny == 0 || np == 0) return 0.0;
  const double size_ratio =
      static_cast<double>(std::min(ny, np)) / static_cast<double>(std::max(ny, np));
  const double recall = static_cast<double>(in.correct.size()) / static_cast<double>(ny);
  return (size_ratio + recall) / 2.0;
}

double literal_term(const DrugEvalInstance& in) {
  const auto ny = in.gold.size();
  const auto np = in.predicted.size();
  if (ny == 0 && np == 0) return 2.0;  // scores 1 after the global /2
  if (ny == 0 || np == 0) return 0.0;
  const double recall = static_cast<double>(in.correct.size()) / static_cast<double>(ny);
  return (static_cast<double>(std::min(ny, np)) + recall) / static_cast<double>(std::max(ny, np));
}

}  // namespace

double adjusted_accuracy(std::span<const DrugEvalInstance> instances, AdjustedAccuracyMode mode) {
  if (instances.empty()) throw std::invalid_argument("adjusted_accuracy: no instances");
  double total = 0;
  for (const auto& in : instances) {
    total += mode == AdjustedAccuracyMode::PerRecordMean ? per_record_score(in) : literal_term(in);
  }
  const double n = static_cast<double>(instances.size());
  return mode == AdjustedAccuracyMode::PerRecordMean ? total / n : total / (2.0 * n);
}

namespace {

GroupEval evaluate_group(std::string group,
                         std::span<const std::pair<const corpus::EpicrisisRecord*, const Extraction*>> pairs,
                         AdjustedAccuracyMode mode) {
  GroupEval ev;
  ev.group = std::move(group);
  ev.n = pairs.size();

  std::vector<std::pair<std::optional<AgeValue>, AgeValue>> age_pairs;
  std::vector<std::pair<AgeValue, AgeValue>> present_age_pairs;
  std::vector<std::pair<std::optional<Sex>, Sex>> sex_pairs;
  std::vector<std::pair<std::optional<std::string>, std::optional<std::string>>> lesion_pairs;
  std::vector<DrugEvalInstance> drug_instances;

  for (const auto& [record, extraction] : pairs) {
    for (const auto& d : extraction->diagnostics) {
      if (d.code == diag::kLlmParseUnparseable) {
        ++ev.parse_failures;
        break;
      }
    }
    if (!record->gold) continue;
    const auto& gold = *record->gold;
    if (gold.age) {
      age_pairs.emplace_back(extraction->age, *gold.age);
      if (extraction->age) {
        present_age_pairs.emplace_back(*extraction->age, *gold.age);
      } else {
        ++ev.absent_age;
      }
    }
    if (gold.sex) {
      sex_pairs.emplace_back(extraction->sex, *gold.sex);
      if (!extraction->sex) ++ev.absent_sex;
    }
    std::optional<std::string> gold_lesion;
    if (!gold.lesions.empty()) gold_lesion = gold.lesions.front();
    lesion_pairs.emplace_back(extraction->lesion, gold_lesion);
    if (!extraction->lesion && gold_lesion) ++ev.absent_lesion;
    drug_instances.push_back(DrugEvalInstance::make(gold.drugs, extraction->drugs));
  }

  ev.evaluated_age = age_pairs.size();
  ev.evaluated_sex = sex_pairs.size();
  ev.evaluated_lesion = lesion_pairs.size();
  ev.evaluated_drugs = drug_instances.size();

  if (!age_pairs.empty()) {
    ev.age_accuracy = field_accuracy(age_pairs,
                                     [](const std::optional<AgeValue>& p, const AgeValue& g) {
                                       return p && *p == g;
                                     });
    ev.rounded_age_accuracy =
        field_accuracy(age_pairs, [](const std::optional<AgeValue>& p, const AgeValue& g) {
          return p && round_age_years(*p) == round_age_years(g);
        });
  }
  if (!present_age_pairs.empty()) {
    ev.mae = age_mae(present_age_pairs);
    long long rounded_sum = 0;
    for (const auto& [p, g] : present_age_pairs) {
      rounded_sum += std::abs(round_age_years(p) - round_age_years(g));
    }
    ev.rounded_age_mae_years =
        static_cast<double>(rounded_sum) / static_cast<double>(present_age_pairs.size());
  }
  if (!sex_pairs.empty()) {
    ev.sex_accuracy = field_accuracy(sex_pairs,
                                     [](const std::optional<Sex>& p, Sex g) { return p && *p == g; });
  }
  if (!lesion_pairs.empty()) {
    ev.lesion_accuracy =
        field_accuracy(lesion_pairs,
                       [](const std::optional<std::string>& p, const std::optional<std::string>& g) {
                         return p == g;
                       });
  }
  if (!drug_instances.empty()) {
    ev.drugs_adjusted_accuracy = adjusted_accuracy(drug_instances, mode);
  }
  return ev;
}

}  // namespace

std::vector<GroupEval> evaluate(std::span<const corpus::EpicrisisRecord> records,
                                std::span<const Extraction> extractions, corpus::GroupBy group_by,
                                AdjustedAccuracyMode mode) {
  std::map<std::string, const corpus::EpicrisisRecord*> by_id;
  for (const auto& rec : records) by_id[rec.id] = &rec;

  std::vector<std::string> unresolved;
  std::vector<std::pair<const corpus::EpicrisisRecord*, const Extraction*>> all;
  std::map<std::string, std::vector<std::pair<const corpus::EpicrisisRecord*, const Extraction*>>> groups;
  for (const auto& ex : extractions) {
    const auto it = by_id.find(ex.id);
    if (it == by_id.end()) {
      unresolved.push_back(ex.id);
      continue;
    }
    const auto* rec = it->second;
    const std::string key =
        group_by == corpus::GroupBy::Doctor ? rec->doctor : rec->icd10.value_or("UNKNOWN");
    groups[key].emplace_back(rec, &ex);
    all.emplace_back(rec, &ex);
  }
  if (!unresolved.empty()) {
    std::string msg = "extraction ids with no matching record:";
    for (const auto& id : unresolved) msg += " " + id;
    throw Error(msg);
  }

  std::vector<GroupEval> report;
  report.reserve(groups.size() + 1);
  for (const auto& [key, pairs] : groups) report.push_back(evaluate_group(key, pairs, mode));
  report.push_back(evaluate_group("overall", all, mode));
  return report;
}

namespace {

ordered_json opt_json(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::string opt_csv(const std::optional<double>& v) { return v ? format_double(*v) : std::string(); }

}  // namespace

std::string report_to_json(std::span<const GroupEval> report) {
  ordered_json out = ordered_json::array();
  for (const auto& ev : report) {
    ordered_json row;
    row["group"] = ev.group;
    row["n"] = ev.n;
    row["age"] = {{"accuracy", opt_json(ev.age_accuracy)},
                  {"mae_years", ev.mae ? ordered_json(ev.mae->years()) : ordered_json(nullptr)},
                  {"mae_months", ev.mae ? ordered_json(ev.mae->months()) : ordered_json(nullptr)},
                  {"rounded_accuracy", opt_json(ev.rounded_age_accuracy)},
                  {"rounded_mae_years", opt_json(ev.rounded_age_mae_years)},
                  {"evaluated", ev.evaluated_age},
                  {"absent_predictions", ev.absent_age}};
    row["sex"] = {{"accuracy", opt_json(ev.sex_accuracy)},
                  {"evaluated", ev.evaluated_sex},
                  {"absent_predictions", ev.absent_sex}};
    row["lesion"] = {{"accuracy", opt_json(ev.lesion_accuracy)},
                     {"evaluated", ev.evaluated_lesion},
                     {"absent_predictions", ev.absent_lesion}};
    row["drugs"] = {{"adjusted_accuracy", opt_json(ev.drugs_adjusted_accuracy)},
                    {"evaluated", ev.evaluated_drugs}};
    row["parse_failures"] = ev.parse_failures;
    out.push_back(std::move(row));
  }
  return out.dump(2) + "\n";
}

std::string report_to_csv(std::span<const GroupEval> report) {
  std::ostringstream out;
  out << "group,n,age_acc,age_mae_years,age_mae_months,age_acc_rounded,age_mae_rounded_years,"
         "sex_acc,lesion_acc,adjusted_acc\n";
  for (const auto& ev : report) {
    out << ev.group << ',' << ev.n << ',' << opt_csv(ev.age_accuracy) << ','
        << (ev.mae ? format_double(ev.mae->years()) : std::string()) << ','
        << (ev.mae ? format_double(ev.mae->months()) : std::string()) << ','
        << opt_csv(ev.rounded_age_accuracy) << ',' << opt_csv(ev.rounded_age_mae_years) << ','
        << opt_csv(ev.sex_accuracy) << ',' << opt_csv(ev.lesion_accuracy) << ','
        << opt_csv(ev.drugs_adjusted_accuracy) << '\n';
  }
  return out.str();
}

}  // namespace epitext::metrics
