#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "epitext/error.hpp"
#include "epitext/pipeline.hpp"

namespace {

using OptionMap = std::map<std::string, std::string>;

/// Collects CLI values as strings so file and default values merge underneath
/// them (precedence: CLI > config file > built-in default).
struct CommandOptions {
  OptionMap cli;
  std::string config_path;

  void add_common(CLI::App* cmd) {
    const auto bind = [this, cmd](const std::string& flag, const std::string& key,
                                  const std::string& help) {
      cmd->add_option_function<std::string>(
          flag, [this, key](const std::string& value) { cli[key] = value; }, help);
    };
    bind("--input", "input", "input corpus (JSON Lines)");
    bind("--output", "output", "output path");
    bind("--method", "method", "extraction method: rule | llm");
    bind("--gender-lexicon", "gender_lexicon", "gender cue CSV (form,gender)");
    bind("--lesion-lexicon", "lesion_lexicon", "lesion stem list, one per line");
    bind("--drug-db", "drug_db", "drug registry, one name per line");
    bind("--abbrev", "abbreviations", "sentence-split abbreviation guard list");
    bind("--extractions", "extractions", "extraction file to evaluate");
    bind("--prompt-template", "prompt_template", "prompt template file");
    bind("--threshold", "threshold", "drug match threshold in (0, 100], default 80");
    bind("--group-by", "group_by", "report grouping: doctor | icd10");
    bind("--concurrency", "concurrency", "max in-flight endpoint requests, default 4");
    bind("--endpoint", "endpoint", "chat endpoint base URL, or mock:[script.json]");
    bind("--model", "model", "model name sent to the endpoint");
    bind("--fold-ascii", "fold_ascii", "fold diacritics for drug matching: true | false");
    bind("--drug-window", "drug_window", "document tokens per drug comparison window (1..3)");
    bind("--age-max-years", "age_max_years", "upper bound accepted by the age grammar");
    bind("--adjusted-accuracy", "adjusted_accuracy", "drug score mode: per-record | literal");
    bind("--temperature", "temperature", "sampling temperature, default 0");
    bind("--timeout-ms", "timeout_ms", "endpoint request timeout");
    bind("--max-retries", "max_retries", "endpoint retry count");
    bind("--api-key-env", "api_key_env", "env var holding the bearer token");
    cmd->add_option("--config", config_path, "flat key=value configuration file");
  }

  epitext::pipeline::RunConfig resolve() const {
    OptionMap merged;
    if (!config_path.empty()) merged = epitext::pipeline::read_config_file(config_path);
    for (const auto& [key, value] : cli) merged[key] = value;
    return epitext::pipeline::make_run_config(merged);
  }
};

int finish(const epitext::pipeline::RunSummary& summary) {
  std::cout << summary.to_text();
  return summary.errors.empty() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"epitext - clinical record extraction, evaluation and corpus statistics"};
  app.require_subcommand(1);

  CommandOptions extract_opts, evaluate_opts, stats_opts, translate_opts;
  auto* extract = app.add_subcommand("extract", "extract age, sex, lesion and drug fields");
  extract_opts.add_common(extract);
  auto* evaluate = app.add_subcommand("evaluate", "score an extraction file against gold labels");
  evaluate_opts.add_common(evaluate);
  auto* stats = app.add_subcommand("stats", "per-group text length statistics (CSV)");
  stats_opts.add_common(stats);
  auto* translate = app.add_subcommand("translate", "translate a Polish corpus to English");
  translate_opts.add_common(translate);

  CLI11_PARSE(app, argc, argv);

  try {
    if (extract->parsed()) return finish(epitext::pipeline::run_extract(extract_opts.resolve()));
    if (evaluate->parsed()) {
      epitext::pipeline::run_evaluate(evaluate_opts.resolve());
      return 0;
    }
    if (stats->parsed()) {
      epitext::pipeline::run_stats(stats_opts.resolve());
      return 0;
    }
    if (translate->parsed()) return finish(epitext::pipeline::run_translate(translate_opts.resolve()));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 2;
}
