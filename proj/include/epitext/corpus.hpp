#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "epitext/textproc.hpp"
#include "epitext/types.hpp"

namespace epitext::corpus {

/// Reference labels for one record. `lesions` holds at most one normalized
/// term; `drugs` are normalized and duplicate-free.
struct GoldLabel {
  std::optional<AgeValue> age;
  std::optional<Sex> sex;
  std::vector<std::string> lesions;
  std::vector<std::string> drugs;
};

/// One anonymized clinical summary.
struct EpicrisisRecord {
  std::string id;
  std::string doctor;
  std::optional<std::string> icd10;
  Language language = Language::PL;
  std::string text;
  std::optional<GoldLabel> gold;
};

/// Loads a JSON Lines corpus. Every line must be a record object; blank lines
/// are ignored. Errors name the offending line and field; a duplicate id names
/// both lines.
std::vector<EpicrisisRecord> load_records(const std::filesystem::path& path);

/// Writes records back out as JSON Lines (used by the translate flow).
void write_records(const std::filesystem::path& path, std::span<const EpicrisisRecord> records);

enum class GroupBy { Doctor, Icd10 };

std::optional<GroupBy> group_by_from_string(std::string_view s);

/// Raw per-record counts feeding the statistics table.
struct RecordCounts {
  long long sentences = 0;
  long long words = 0;
  long long first_sentence_words = 0;
};

RecordCounts count_record(const EpicrisisRecord& record, const textproc::SentenceSplitter& splitter);

/// One group row of the text-length statistics table. Means are arithmetic
/// means; stds are population standard deviations (divide by n).
struct StatsRow {
  std::string group;
  std::size_t n = 0;
  double sent_mean = 0, sent_std = 0;
  double word_mean = 0, word_std = 0;
  double first_sent_mean = 0, first_sent_std = 0;
  double words_per_sentence = 0;  // word_mean / sent_mean
};

StatsRow aggregate_counts(std::string group, std::span<const RecordCounts> counts);

/// Rows are sorted by group key. Records missing the icd10 key fall into the
/// "UNKNOWN" group when grouping by diagnosis code.
std::vector<StatsRow> corpus_stats(std::span<const EpicrisisRecord> records, GroupBy group_by,
                                   const textproc::SentenceSplitter& splitter = textproc::SentenceSplitter{});

std::string stats_to_csv(std::span<const StatsRow> rows);

}  // namespace epitext::corpus
