#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "epitext/corpus.hpp"
#include "epitext/rule_extract.hpp"
#include "epitext/types.hpp"

namespace epitext::llm {

struct Message {
  std::string role;  // "system" or "user"
  std::string content;
};

/// Prompt configuration. The template carries {{keys}}, {{example}} and
/// {{context}} placeholders; a line consisting of "---" separates the system
/// part from the user part. Without a separator the user message is the
/// record text verbatim.
struct PromptSpec {
  std::string template_text;
  std::vector<std::string> keys;
  std::string example;  // must itself parse as a <key=value | ...> block

  /// All four default keys: age, sex, drugs, skin_changes.
  static PromptSpec defaults();
  static PromptSpec for_keys(std::vector<std::string> keys);
  static PromptSpec from_template_file(const std::filesystem::path& path,
                                       std::vector<std::string> keys);
  /// The built-in template; the shipped template file carries the same bytes.
  static const std::string& default_template();
  static const std::vector<std::string>& default_keys();
};

/// Renders the system + user message pair. The user message carries the
/// record text verbatim; escaping is the parser's problem, not the builder's.
std::vector<Message> build_prompt(const corpus::EpicrisisRecord& record, const PromptSpec& spec);

enum class ParseStatus { Ok, Partial, Unparseable };

const char* to_string(ParseStatus status);

/// Keyed values recovered from a model response. `values` holds only the
/// expected keys that were found; a key answered as "None" (or empty) maps to
/// nullopt. Status is Ok iff every expected key was found.
struct ParsedLlmOutput {
  std::map<std::string, std::optional<std::string>> values;
  ParseStatus status = ParseStatus::Unparseable;
  std::string raw;
};

/// Locates the last <...> block (ASCII or typographic angle brackets), splits
/// it on '|' and each segment on the first '='; keys are matched
/// case-insensitively after trimming. Without a usable block the whole text is
/// scanned for key=value pairs. Never throws, whatever the input bytes.
ParsedLlmOutput parse_llm_output(std::string_view response,
                                 std::span<const std::string> expected_keys);

/// Formats a key/value list as a <key=value | ...> block; absent values render
/// as None. The inverse of parse_llm_output for delimiter-free values.
std::string render_kv_block(
    std::span<const std::pair<std::string, std::optional<std::string>>> values,
    bool ascii_brackets = false);

struct LlmEndpointConfig {
  std::string base_url;  // "http://host:port" or "mock:[script.json]"
  std::string model = "mock";
  double temperature = 0.0;
  int timeout_ms = 30000;
  int max_retries = 2;
  std::string api_key_env;  // env var holding the bearer token, optional
};

void validate(const LlmEndpointConfig& config);

/// A chat-completion backend. Implementations are immutable and safe to share
/// across threads.
class ChatClient {
 public:
  virtual ~ChatClient() = default;
  virtual std::string complete(std::span<const Message> messages) const = 0;
  virtual const std::string& model() const = 0;
};

/// HTTP client for the POST {base}/v1/chat/completions JSON protocol, or the
/// in-process deterministic mock when base_url starts with "mock:".
std::unique_ptr<ChatClient> make_chat_client(const LlmEndpointConfig& config);

/// One request per record; the keyed response becomes an Extraction. Age
/// strings are re-parsed through the rule grammar, sex strings are normalized
/// to {M, F}, drug lists split on commas. Throws TransportError when the
/// endpoint fails after retries; parse failures never throw.
Extraction extract_via_llm(const corpus::EpicrisisRecord& record, const PromptSpec& spec,
                           const ChatClient& client, const rules::AgeGrammar& grammar = {});

/// Translates a Polish record; the result keeps doctor, icd10 and gold, gets
/// the id suffixed with "-en" and language EN. A record already in English or
/// an empty translation is an error.
corpus::EpicrisisRecord translate_record(const corpus::EpicrisisRecord& record,
                                         const ChatClient& client);

/// Instruction used for the translation flow.
const std::string& translation_instruction();

}  // namespace epitext::llm
