#include "epitext/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "epitext/drug_match.hpp"
#include "epitext/error.hpp"
#include "epitext/rule_extract.hpp"
#include "json.hpp"

namespace epitext::pipeline {

using nlohmann::json;
using nlohmann::ordered_json;

std::optional<Method> method_from_string(std::string_view s) {
  if (s == "rule") return Method::Rule;
  if (s == "llm") return Method::Llm;
  return std::nullopt;
}

namespace {

std::string trim_copy(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t')) --e;
  return std::string(s.substr(b, e - b));
}

const std::vector<std::string> kConfigKeys = {
    "input",       "output",          "method",        "gender_lexicon", "lesion_lexicon",
    "drug_db",     "abbreviations",   "extractions",   "prompt_template", "threshold",
    "group_by",    "concurrency",     "fold_ascii",    "drug_window",    "age_max_years",
    "adjusted_accuracy", "endpoint",  "model",         "temperature",    "timeout_ms",
    "max_retries", "api_key_env"};

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
  if (value == "false" || value == "0" || value == "no" || value == "off") return false;
  throw Error("config key '" + key + "' expects a boolean, got '" + value + "'");
}

int parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t consumed = 0;
    const int parsed = std::stoi(value, &consumed);
    if (consumed != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw Error("config key '" + key + "' expects an integer, got '" + value + "'");
  }
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    std::size_t consumed = 0;
    const double parsed = std::stod(value, &consumed);
    if (consumed != value.size()) throw std::invalid_argument(value);
    return parsed;
  } catch (const std::exception&) {
    throw Error("config key '" + key + "' expects a number, got '" + value + "'");
  }
}

}  // namespace

std::map<std::string, std::string> read_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config file: " + path.string());
  std::map<std::string, std::string> options;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const std::string stripped = trim_copy(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim_copy(stripped.substr(0, eq));
    const std::string value = trim_copy(stripped.substr(eq + 1));
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": unknown config key '" + key + "'");
    }
    options[key] = value;
  }
  return options;
}

RunConfig make_run_config(const std::map<std::string, std::string>& options) {
  RunConfig config;
  for (const auto& [key, value] : options) {
    if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) == kConfigKeys.end()) {
      throw Error("unknown config key '" + key + "'");
    }
    if (key == "input") config.input = value;
    else if (key == "output") config.output = value;
    else if (key == "method") {
      const auto method = method_from_string(value);
      if (!method) throw Error("method must be 'rule' or 'llm', got '" + value + "'");
      config.method = *method;
    } else if (key == "gender_lexicon") config.gender_lexicon = value;
    else if (key == "lesion_lexicon") config.lesion_lexicon = value;
    else if (key == "drug_db") config.drug_db = value;
    else if (key == "abbreviations") config.abbreviations = value;
    else if (key == "extractions") config.extractions = value;
    else if (key == "prompt_template") config.prompt_template = value;
    else if (key == "threshold") config.threshold = parse_int(key, value);
    else if (key == "group_by") {
      const auto group_by = corpus::group_by_from_string(value);
      if (!group_by) throw Error("group_by must be 'doctor' or 'icd10', got '" + value + "'");
      config.group_by = *group_by;
    } else if (key == "concurrency") config.concurrency = parse_int(key, value);
    else if (key == "fold_ascii") config.fold_ascii = parse_bool(key, value);
    else if (key == "drug_window") config.drug_window = parse_int(key, value);
    else if (key == "age_max_years") config.age_max_years = parse_int(key, value);
    else if (key == "adjusted_accuracy") {
      if (value == "per-record") config.aa_mode = metrics::AdjustedAccuracyMode::PerRecordMean;
      else if (value == "literal") config.aa_mode = metrics::AdjustedAccuracyMode::LiteralSum;
      else throw Error("adjusted_accuracy must be 'per-record' or 'literal', got '" + value + "'");
    } else if (key == "endpoint") config.endpoint.base_url = value;
    else if (key == "model") config.endpoint.model = value;
    else if (key == "temperature") config.endpoint.temperature = parse_real(key, value);
    else if (key == "timeout_ms") config.endpoint.timeout_ms = parse_int(key, value);
    else if (key == "max_retries") config.endpoint.max_retries = parse_int(key, value);
    else if (key == "api_key_env") config.endpoint.api_key_env = value;
  }
  if (config.threshold <= 0 || config.threshold > 100) {
    throw Error("threshold must be in (0, 100]");
  }
  if (config.concurrency < 1) throw Error("concurrency must be >= 1");
  if (config.drug_window < 1 || config.drug_window > 3) throw Error("drug_window must be in [1, 3]");
  if (config.age_max_years < 0) throw Error("age_max_years must be >= 0");
  return config;
}

std::string RunSummary::to_text() const {
  std::ostringstream out;
  out << "records: " << records << '\n';
  out << "written: " << written << '\n';
  out << "absent: age=" << absent_age << " sex=" << absent_sex << " lesion=" << absent_lesion << '\n';
  out << "drug mentions: " << drug_mentions << '\n';
  out << "diagnostics: " << diagnostics << '\n';
  out << "errors: " << errors.size() << '\n';
  for (const auto& e : errors) out << "  " << e.id << ": " << e.message << '\n';
  return out.str();
}

namespace {

ordered_json extraction_to_json(const Extraction& ex) {
  ordered_json obj;
  obj["id"] = ex.id;
  obj["method"] = ex.method;
  if (ex.age) {
    obj["age"] = {{"years", ex.age->years}, {"months", ex.age->months}};
  } else {
    obj["age"] = nullptr;
  }
  obj["sex"] = ex.sex ? ordered_json(to_string(*ex.sex)) : ordered_json(nullptr);
  obj["lesion"] = ex.lesion ? ordered_json(*ex.lesion) : ordered_json(nullptr);
  obj["drugs"] = ex.drugs;
  auto& diags = obj["diagnostics"] = ordered_json::array();
  for (const auto& d : ex.diagnostics) diags.push_back({{"code", d.code}, {"detail", d.detail}});
  return obj;
}

textproc::SentenceSplitter make_splitter(const RunConfig& config) {
  if (config.abbreviations.empty()) return textproc::SentenceSplitter{};
  return textproc::SentenceSplitter::from_file(config.abbreviations);
}

void ensure_parent_dir(const std::filesystem::path& path) {
  const auto parent = path.parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

std::vector<std::optional<Extraction>> extract_rule(const RunConfig& config,
                                                    std::span<const corpus::EpicrisisRecord> records) {
  if (config.gender_lexicon.empty() || config.lesion_lexicon.empty() || config.drug_db.empty()) {
    throw Error("method 'rule' requires --gender-lexicon, --lesion-lexicon and --drug-db");
  }
  const auto splitter = make_splitter(config);
  const auto gender = rules::GenderCueLexicon::from_file(config.gender_lexicon);
  const auto lesions = rules::LesionLexicon::from_file(config.lesion_lexicon);
  const auto registry = drugs::DrugRegistry::from_file(config.drug_db);
  const rules::AgeGrammar grammar{config.age_max_years};
  const drugs::DrugMatcherOptions matcher{config.threshold, config.fold_ascii, config.drug_window};

  std::vector<std::optional<Extraction>> results(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& record = records[i];
    Extraction ex;
    ex.id = record.id;
    ex.method = "rule";

    auto age = rules::extract_age(record, splitter, grammar);
    ex.age = age.age;
    auto sex = rules::extract_sex(record, gender, splitter);
    ex.sex = sex.sex;
    auto lesion = rules::extract_skin_lesion(record, lesions);
    ex.lesion = lesion.stem;
    for (const auto& match : drugs::extract_drugs(record, registry, matcher)) {
      ex.drugs.push_back(match.canonical);
    }
    for (auto& d : age.diagnostics) ex.diagnostics.push_back(std::move(d));
    for (auto& d : sex.diagnostics) ex.diagnostics.push_back(std::move(d));
    for (auto& d : lesion.diagnostics) ex.diagnostics.push_back(std::move(d));
    results[i] = std::move(ex);
  }
  return results;
}

std::vector<std::optional<Extraction>> extract_llm(const RunConfig& config,
                                                   std::span<const corpus::EpicrisisRecord> records,
                                                   std::vector<std::optional<RecordError>>& errors) {
  const auto client = llm::make_chat_client(config.endpoint);
  const auto spec = config.prompt_template.empty()
                        ? llm::PromptSpec::defaults()
                        : llm::PromptSpec::from_template_file(config.prompt_template,
                                                              llm::PromptSpec::default_keys());
  const rules::AgeGrammar grammar{config.age_max_years};

  std::vector<std::optional<Extraction>> results(records.size());
  errors.assign(records.size(), std::nullopt);

  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::clamp(config.concurrency, 1, 64)),
                            std::max<std::size_t>(records.size(), 1));
  std::atomic<std::size_t> next{0};
  const auto work = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= records.size()) return;
      try {
        results[i] = llm::extract_via_llm(records[i], spec, *client, grammar);
      } catch (const TransportError& e) {
        errors[i] = RecordError{records[i].id, e.what()};
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& t : pool) t.join();
  return results;
}

}  // namespace

RunSummary run_extract(const RunConfig& config) {
  if (config.input.empty() || config.output.empty()) {
    throw Error("extract requires --input and --output");
  }
  const auto records = corpus::load_records(config.input);

  std::vector<std::optional<RecordError>> llm_errors;
  std::vector<std::optional<Extraction>> results;
  if (config.method == Method::Rule) {
    results = extract_rule(config, records);
  } else {
    results = extract_llm(config, records, llm_errors);
  }

  ensure_parent_dir(config.output);
  std::ofstream out(config.output, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + config.output.string());

  RunSummary summary;
  summary.records = records.size();
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (!results[i]) {
      if (i < llm_errors.size() && llm_errors[i]) summary.errors.push_back(*llm_errors[i]);
      continue;
    }
    const Extraction& ex = *results[i];
    if (!ex.age) ++summary.absent_age;
    if (!ex.sex) ++summary.absent_sex;
    if (!ex.lesion) ++summary.absent_lesion;
    summary.drug_mentions += ex.drugs.size();
    summary.diagnostics += ex.diagnostics.size();
    out << extraction_to_json(ex).dump() << '\n';
    ++summary.written;
  }
  return summary;
}

void run_evaluate(const RunConfig& config) {
  if (config.input.empty() || config.extractions.empty() || config.output.empty()) {
    throw Error("evaluate requires --input, --extractions and --output");
  }
  const auto records = corpus::load_records(config.input);
  const auto extractions = load_extractions(config.extractions);
  const auto report = metrics::evaluate(records, extractions, config.group_by, config.aa_mode);

  ensure_parent_dir(config.output);
  const auto json_path = config.output.string() + ".json";
  const auto csv_path = config.output.string() + ".csv";
  std::ofstream json_out(json_path, std::ios::binary);
  if (!json_out) throw Error("cannot open output file: " + json_path);
  json_out << metrics::report_to_json(report);
  std::ofstream csv_out(csv_path, std::ios::binary);
  if (!csv_out) throw Error("cannot open output file: " + csv_path);
  csv_out << metrics::report_to_csv(report);
}

void run_stats(const RunConfig& config) {
  if (config.input.empty() || config.output.empty()) {
    throw Error("stats requires --input and --output");
  }
  const auto records = corpus::load_records(config.input);
  const auto rows = corpus::corpus_stats(records, config.group_by, make_splitter(config));
  ensure_parent_dir(config.output);
  std::ofstream out(config.output, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + config.output.string());
  out << corpus::stats_to_csv(rows);
}

RunSummary run_translate(const RunConfig& config) {
  if (config.input.empty() || config.output.empty()) {
    throw Error("translate requires --input and --output");
  }
  const auto records = corpus::load_records(config.input);
  const auto client = llm::make_chat_client(config.endpoint);

  RunSummary summary;
  summary.records = records.size();
  std::vector<corpus::EpicrisisRecord> translated;
  translated.reserve(records.size());
  for (const auto& record : records) {
    try {
      translated.push_back(llm::translate_record(record, *client));
      ++summary.written;
    } catch (const Error& e) {
      summary.errors.push_back({record.id, e.what()});
    }
  }
  ensure_parent_dir(config.output);
  corpus::write_records(config.output, translated);
  return summary;
}

void write_extractions(const std::filesystem::path& path, std::span<const Extraction> extractions) {
  ensure_parent_dir(path);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file: " + path.string());
  for (const auto& ex : extractions) out << extraction_to_json(ex).dump() << '\n';
}

std::vector<Extraction> load_extractions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open extraction file: " + path.string());
  std::vector<Extraction> extractions;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (obj.is_discarded() || !obj.is_object()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": line is not a JSON object");
    }
    Extraction ex;
    if (!obj.contains("id") || !obj["id"].is_string()) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) + ": missing field 'id'");
    }
    ex.id = obj["id"].get<std::string>();
    ex.method = obj.value("method", "");
    if (obj.contains("age") && obj["age"].is_object()) {
      ex.age = AgeValue{obj["age"].value("years", 0), obj["age"].value("months", 0)};
    }
    if (obj.contains("sex") && obj["sex"].is_string()) {
      ex.sex = sex_from_string(obj["sex"].get<std::string>());
    }
    if (obj.contains("lesion") && obj["lesion"].is_string()) {
      ex.lesion = obj["lesion"].get<std::string>();
    }
    if (obj.contains("drugs") && obj["drugs"].is_array()) {
      for (const auto& d : obj["drugs"]) {
        if (d.is_string()) ex.drugs.push_back(d.get<std::string>());
      }
    }
    if (obj.contains("diagnostics") && obj["diagnostics"].is_array()) {
      for (const auto& d : obj["diagnostics"]) {
        if (d.is_object()) ex.diagnostics.push_back({d.value("code", ""), d.value("detail", "")});
      }
    }
    extractions.push_back(std::move(ex));
  }
  return extractions;
}

}  // namespace epitext::pipeline
