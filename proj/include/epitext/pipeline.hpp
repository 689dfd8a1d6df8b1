#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "epitext/corpus.hpp"
#include "epitext/llm_extract.hpp"
#include "epitext/metrics.hpp"
#include "epitext/types.hpp"

namespace epitext::pipeline {

enum class Method { Rule, Llm };

std::optional<Method> method_from_string(std::string_view s);

struct RunConfig {
  std::filesystem::path input;
  std::filesystem::path output;
  Method method = Method::Rule;

  std::filesystem::path gender_lexicon;
  std::filesystem::path lesion_lexicon;
  std::filesystem::path drug_db;
  std::filesystem::path abbreviations;     // optional; default guard list otherwise
  std::filesystem::path extractions;       // evaluate input
  std::filesystem::path prompt_template;   // optional; built-in template otherwise

  int threshold = 80;
  corpus::GroupBy group_by = corpus::GroupBy::Doctor;
  int concurrency = 4;
  bool fold_ascii = false;
  int drug_window = 1;
  int age_max_years = 18;
  metrics::AdjustedAccuracyMode aa_mode = metrics::AdjustedAccuracyMode::PerRecordMean;
  llm::LlmEndpointConfig endpoint;
};

/// Reads a flat `key = value` configuration file ('#' comments). Unknown keys
/// are rejected.
std::map<std::string, std::string> read_config_file(const std::filesystem::path& path);

/// Builds a validated RunConfig from a merged option map (CLI over file over
/// defaults). Key names match the CLI flags with '-' replaced by '_'.
RunConfig make_run_config(const std::map<std::string, std::string>& options);

struct RecordError {
  std::string id;
  std::string message;
};

struct RunSummary {
  std::size_t records = 0;
  std::size_t written = 0;
  std::size_t absent_age = 0, absent_sex = 0, absent_lesion = 0;
  std::size_t drug_mentions = 0;
  std::size_t diagnostics = 0;
  std::vector<RecordError> errors;

  std::string to_text() const;
};

/// Writes one Extraction per input record as JSON Lines, in input order.
/// Records that fail at the transport level are reported in the summary and
/// produce no output line; the run continues.
RunSummary run_extract(const RunConfig& config);

/// Joins an extraction file back to its corpus and writes `<output>.json` and
/// `<output>.csv` report files.
void run_evaluate(const RunConfig& config);

/// Writes the per-group text-length statistics CSV.
void run_stats(const RunConfig& config);

/// Translates a Polish corpus into an English one (new JSON Lines file).
RunSummary run_translate(const RunConfig& config);

void write_extractions(const std::filesystem::path& path, std::span<const Extraction> extractions);
std::vector<Extraction> load_extractions(const std::filesystem::path& path);

}  // namespace epitext::pipeline
