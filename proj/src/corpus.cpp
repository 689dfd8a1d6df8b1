#include "epitext/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "epitext/error.hpp"
#include "epitext/format.hpp"
#include "epitext/utf8.hpp"
#include "json.hpp"

namespace epitext {

const char* to_string(Language lang) { return lang == Language::PL ? "pl" : "en"; }
const char* to_string(Sex sex) { return sex == Sex::M ? "M" : "F"; }

std::optional<Language> language_from_string(std::string_view s) {
  std::string low = utf8::lower(s);
  if (low == "pl") return Language::PL;
  if (low == "en") return Language::EN;
  return std::nullopt;
}

std::optional<Sex> sex_from_string(std::string_view s) {
  if (s == "M" || s == "m") return Sex::M;
  if (s == "F" || s == "f") return Sex::F;
  return std::nullopt;
}

}  // namespace epitext

namespace epitext::corpus {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, std::size_t line, const std::string& what) {
  throw ParseError(path.string() + ":" + std::to_string(line) + ": " + what);
}

std::string require_string(const json& obj, const char* field, const std::filesystem::path& path,
                           std::size_t line) {
  if (!obj.contains(field)) fail(path, line, std::string("missing field '") + field + "'");
  if (!obj[field].is_string()) fail(path, line, std::string("field '") + field + "' must be a string");
  return obj[field].get<std::string>();
}

bool is_blank(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size()) {
    if (!utf8::is_space(utf8::decode_next(text, i))) return false;
  }
  return true;
}

GoldLabel parse_gold(const json& g, const std::filesystem::path& path, std::size_t line) {
  if (!g.is_object()) fail(path, line, "field 'gold' must be an object");
  GoldLabel gold;
  if (g.contains("age_years")) {
    if (!g["age_years"].is_number_integer()) fail(path, line, "field 'gold.age_years' must be an integer");
    const int years = g["age_years"].get<int>();
    int months = 0;
    if (g.contains("age_months")) {
      if (!g["age_months"].is_number_integer()) fail(path, line, "field 'gold.age_months' must be an integer");
      months = g["age_months"].get<int>();
    }
    if (years < 0) fail(path, line, "field 'gold.age_years' must be non-negative");
    if (months < 0 || months > 11) fail(path, line, "field 'gold.age_months' must be in [0, 11]");
    gold.age = AgeValue{years, months};
  } else if (g.contains("age_months")) {
    fail(path, line, "field 'gold.age_months' given without 'gold.age_years'");
  }
  if (g.contains("sex")) {
    if (!g["sex"].is_string()) fail(path, line, "field 'gold.sex' must be a string");
    auto sex = sex_from_string(g["sex"].get<std::string>());
    if (!sex) fail(path, line, "field 'gold.sex' must be \"M\" or \"F\"");
    gold.sex = *sex;
  }
  if (g.contains("lesions")) {
    if (!g["lesions"].is_array()) fail(path, line, "field 'gold.lesions' must be an array");
    for (const auto& item : g["lesions"]) {
      if (!item.is_string()) fail(path, line, "field 'gold.lesions' must contain strings");
      std::string term = textproc::normalize_token(item.get<std::string>());
      if (term.empty()) fail(path, line, "field 'gold.lesions' contains an empty term");
      gold.lesions.push_back(std::move(term));
    }
    if (gold.lesions.size() > 1) fail(path, line, "field 'gold.lesions' holds more than one term");
  }
  if (g.contains("drugs")) {
    if (!g["drugs"].is_array()) fail(path, line, "field 'gold.drugs' must be an array");
    for (const auto& item : g["drugs"]) {
      if (!item.is_string()) fail(path, line, "field 'gold.drugs' must contain strings");
      std::string name = textproc::normalize_token(item.get<std::string>());
      if (name.empty()) fail(path, line, "field 'gold.drugs' contains an empty name");
      if (std::find(gold.drugs.begin(), gold.drugs.end(), name) != gold.drugs.end()) {
        fail(path, line, "field 'gold.drugs' duplicates '" + name + "' after normalization");
      }
      gold.drugs.push_back(std::move(name));
    }
  }
  return gold;
}

}  // namespace

std::vector<EpicrisisRecord> load_records(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open corpus file: " + path.string());

  std::vector<EpicrisisRecord> records;
  std::map<std::string, std::size_t> id_lines;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (is_blank(line)) continue;

    json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded()) fail(path, line_no, "line is not valid JSON");
    if (!obj.is_object()) fail(path, line_no, "line is not a JSON object");

    EpicrisisRecord rec;
    rec.id = require_string(obj, "id", path, line_no);
    if (rec.id.empty()) fail(path, line_no, "field 'id' must be non-empty");
    if (auto [it, inserted] = id_lines.emplace(rec.id, line_no); !inserted) {
      fail(path, line_no,
           "duplicate record id '" + rec.id + "' (first seen on line " + std::to_string(it->second) + ")");
    }
    rec.doctor = require_string(obj, "doctor", path, line_no);
    if (rec.doctor.empty()) fail(path, line_no, "field 'doctor' must be non-empty");
    if (obj.contains("icd10")) {
      if (!obj["icd10"].is_string()) fail(path, line_no, "field 'icd10' must be a string");
      std::string code = obj["icd10"].get<std::string>();
      if (!code.empty()) rec.icd10 = std::move(code);
    }
    auto lang = language_from_string(require_string(obj, "language", path, line_no));
    if (!lang) fail(path, line_no, "field 'language' must be \"pl\" or \"en\"");
    rec.language = *lang;
    rec.text = require_string(obj, "text", path, line_no);
    if (is_blank(rec.text)) fail(path, line_no, "field 'text' must be non-empty");
    if (obj.contains("gold") && !obj["gold"].is_null()) {
      rec.gold = parse_gold(obj["gold"], path, line_no);
    }
    records.push_back(std::move(rec));
  }
  return records;
}

void write_records(const std::filesystem::path& path, std::span<const EpicrisisRecord> records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path.string());
  for (const auto& rec : records) {
    ordered_json obj;
    obj["id"] = rec.id;
    obj["doctor"] = rec.doctor;
    if (rec.icd10) obj["icd10"] = *rec.icd10;
    obj["language"] = to_string(rec.language);
    obj["text"] = rec.text;
    if (rec.gold) {
      ordered_json g;
      if (rec.gold->age) {
        g["age_years"] = rec.gold->age->years;
        g["age_months"] = rec.gold->age->months;
      }
      if (rec.gold->sex) g["sex"] = to_string(*rec.gold->sex);
      g["lesions"] = rec.gold->lesions;
      g["drugs"] = rec.gold->drugs;
      obj["gold"] = std::move(g);
    }
    out << obj.dump() << '\n';
  }
}

std::optional<GroupBy> group_by_from_string(std::string_view s) {
  if (s == "doctor") return GroupBy::Doctor;
  if (s == "icd10") return GroupBy::Icd10;
  return std::nullopt;
}

RecordCounts count_record(const EpicrisisRecord& record, const textproc::SentenceSplitter& splitter) {
  RecordCounts counts;
  const auto sentences = splitter.split(record.text);
  counts.sentences = static_cast<long long>(sentences.size());
  for (const auto& s : sentences) counts.words += static_cast<long long>(s.tokens.size());
  if (!sentences.empty()) counts.first_sentence_words = static_cast<long long>(sentences.front().tokens.size());
  return counts;
}

namespace {

struct MeanStd {
  double mean = 0, std_dev = 0;
};

template <typename Get>
MeanStd mean_and_population_std(std::span<const RecordCounts> counts, Get get) {
  const double n = static_cast<double>(counts.size());
  double sum = 0;
  for (const auto& c : counts) sum += static_cast<double>(get(c));
  const double mean = sum / n;
  double sq = 0;
  for (const auto& c : counts) {
    const double d = static_cast<double>(get(c)) - mean;
    sq += d * d;
  }
  return {mean, std::sqrt(sq / n)};
}

}  // namespace

StatsRow aggregate_counts(std::string group, std::span<const RecordCounts> counts) {
  StatsRow row;
  row.group = std::move(group);
  row.n = counts.size();
  if (counts.empty()) return row;
  const auto sent = mean_and_population_std(counts, [](const RecordCounts& c) { return c.sentences; });
  const auto word = mean_and_population_std(counts, [](const RecordCounts& c) { return c.words; });
  const auto first = mean_and_population_std(counts, [](const RecordCounts& c) { return c.first_sentence_words; });
  row.sent_mean = sent.mean;
  row.sent_std = sent.std_dev;
  row.word_mean = word.mean;
  row.word_std = word.std_dev;
  row.first_sent_mean = first.mean;
  row.first_sent_std = first.std_dev;
  row.words_per_sentence = sent.mean > 0 ? word.mean / sent.mean : 0.0;
  return row;
}

std::vector<StatsRow> corpus_stats(std::span<const EpicrisisRecord> records, GroupBy group_by,
                                   const textproc::SentenceSplitter& splitter) {
  std::map<std::string, std::vector<RecordCounts>> groups;
  for (const auto& rec : records) {
    const std::string key =
        group_by == GroupBy::Doctor ? rec.doctor : rec.icd10.value_or("UNKNOWN");
    groups[key].push_back(count_record(rec, splitter));
  }
  std::vector<StatsRow> rows;
  rows.reserve(groups.size());
  for (const auto& [key, counts] : groups) rows.push_back(aggregate_counts(key, counts));
  return rows;
}

std::string stats_to_csv(std::span<const StatsRow> rows) {
  std::ostringstream out;
  out << "group,n,sent_mean,sent_std,word_mean,word_std,first_sent_mean,first_sent_std,words_per_sentence\n";
  for (const auto& r : rows) {
    out << r.group << ',' << r.n << ',' << format_double(r.sent_mean) << ',' << format_double(r.sent_std)
        << ',' << format_double(r.word_mean) << ',' << format_double(r.word_std) << ','
        << format_double(r.first_sent_mean) << ',' << format_double(r.first_sent_std) << ','
        << format_double(r.words_per_sentence) << '\n';
  }
  return out.str();
}

}  // namespace epitext::corpus
