#include "epitext/llm_extract.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "epitext/error.hpp"
#include "epitext/mock_llm.hpp"
#include "epitext/utf8.hpp"
#include "httplib.h"
#include "json.hpp"

namespace epitext::llm {

using nlohmann::json;

namespace {

const std::string kDefaultTemplate =
    "You are a healthcare assistant designed to extract medical-related information from "
    "clinical text.\n"
    "The answer should be given only based on the context given.\n"
    "Extract the following keys: {{keys}}.\n"
    "Return every key in one line in this exact format:\n"
    "\xE2\x9F\xA8key1=value1 | key2=value2 | ... | keyN=valueN\xE2\x9F\xA9\n"
    "If the context does not contain the information for a key, return it as key=None.\n"
    "Example of the expected output:\n"
    "{{example}}\n"
    "---\n"
    "{{context}}\n";

const std::vector<std::string> kDefaultKeys = {"age", "sex", "drugs", "skin_changes"};

const std::string kTranslationInstruction =
    "Your goal is to translate every sentence from Polish to English.";

std::string sample_value(const std::string& key) {
  if (key == "age") return "5 i 4/12";
  if (key == "sex") return "F";
  if (key == "drugs") return "Zyrtec, Fenistil";
  if (key == "skin_changes") return "wysypka";
  return "None";
}

std::string replace_all(std::string text, std::string_view needle, std::string_view value) {
  std::size_t pos = 0;
  while ((pos = text.find(needle, pos)) != std::string::npos) {
    text.replace(pos, needle.size(), value);
    pos += value.size();
  }
  return text;
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (static_cast<unsigned char>(s[b]) <= ' ')) ++b;
  while (e > b && (static_cast<unsigned char>(s[e - 1]) <= ' ')) --e;
  return std::string(s.substr(b, e - b));
}

std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) {
    if (c >= 'A' && c <= 'Z') c += 0x20;
  }
  return out;
}

}  // namespace

const std::string& PromptSpec::default_template() { return kDefaultTemplate; }
const std::vector<std::string>& PromptSpec::default_keys() { return kDefaultKeys; }

PromptSpec PromptSpec::defaults() { return for_keys(kDefaultKeys); }

PromptSpec PromptSpec::for_keys(std::vector<std::string> keys) {
  PromptSpec spec;
  spec.template_text = kDefaultTemplate;
  spec.keys = std::move(keys);
  std::vector<std::pair<std::string, std::optional<std::string>>> example;
  example.reserve(spec.keys.size());
  for (const auto& key : spec.keys) example.emplace_back(key, sample_value(key));
  spec.example = render_kv_block(example);
  const auto check = parse_llm_output(spec.example, spec.keys);
  if (check.status != ParseStatus::Ok) {
    throw Error("prompt example does not parse back against its own keys");
  }
  return spec;
}

PromptSpec PromptSpec::from_template_file(const std::filesystem::path& path,
                                          std::vector<std::string> keys) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open prompt template: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  PromptSpec spec = for_keys(std::move(keys));
  spec.template_text = buffer.str();
  return spec;
}

std::vector<Message> build_prompt(const corpus::EpicrisisRecord& record, const PromptSpec& spec) {
  std::string keys_joined;
  for (const auto& key : spec.keys) {
    if (!keys_joined.empty()) keys_joined += ", ";
    keys_joined += key;
  }
  std::string rendered = replace_all(spec.template_text, "{{keys}}", keys_joined);
  rendered = replace_all(std::move(rendered), "{{example}}", spec.example);

  // Split at the first line that is exactly "---".
  std::string system_part = rendered;
  std::string user_part;
  bool has_user_part = false;
  std::size_t pos = 0;
  while (pos <= rendered.size()) {
    const std::size_t eol = rendered.find('\n', pos);
    const std::string_view line(rendered.data() + pos,
                                (eol == std::string::npos ? rendered.size() : eol) - pos);
    if (line == "---") {
      system_part = rendered.substr(0, pos);
      user_part = eol == std::string::npos ? std::string() : rendered.substr(eol + 1);
      has_user_part = true;
      break;
    }
    if (eol == std::string::npos) break;
    pos = eol + 1;
  }
  while (!system_part.empty() && system_part.back() == '\n') system_part.pop_back();

  std::string user = has_user_part ? replace_all(std::move(user_part), "{{context}}", record.text)
                                   : record.text;
  user = trim(user);
  if (user.empty()) user = record.text;
  return {Message{"system", std::move(system_part)}, Message{"user", std::move(user)}};
}

const char* to_string(ParseStatus status) {
  switch (status) {
    case ParseStatus::Ok: return "ok";
    case ParseStatus::Partial: return "partial";
    case ParseStatus::Unparseable: return "unparseable";
  }
  return "unparseable";
}

namespace {

constexpr std::string_view kOpenBracket = "\xE2\x9F\xA8";   // U+27E8
constexpr std::string_view kCloseBracket = "\xE2\x9F\xA9";  // U+27E9

struct Block {
  std::size_t begin;  // content byte range
  std::size_t end;
};

/// Byte positions of every ASCII/typographic opener and closer.
void scan_brackets(std::string_view text, std::vector<std::pair<std::size_t, std::size_t>>& openers,
                   std::vector<std::pair<std::size_t, std::size_t>>& closers) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '<') {
      openers.emplace_back(i, i + 1);
    } else if (text[i] == '>') {
      closers.emplace_back(i, i + 1);
    } else if (text.compare(i, kOpenBracket.size(), kOpenBracket) == 0) {
      openers.emplace_back(i, i + kOpenBracket.size());
    } else if (text.compare(i, kCloseBracket.size(), kCloseBracket) == 0) {
      closers.emplace_back(i, i + kCloseBracket.size());
    }
  }
}

std::optional<Block> find_last_block(std::string_view text) {
  std::vector<std::pair<std::size_t, std::size_t>> openers, closers;
  scan_brackets(text, openers, closers);
  for (auto open = openers.rbegin(); open != openers.rend(); ++open) {
    const auto close = std::find_if(closers.begin(), closers.end(),
                                    [&](const auto& c) { return c.first >= open->second; });
    if (close != closers.end()) return Block{open->second, close->first};
  }
  return std::nullopt;
}

std::optional<std::string> value_or_none(std::string_view raw) {
  const std::string value = trim(raw);
  if (value.empty() || ascii_lower(value) == "none") return std::nullopt;
  return value;
}

/// Matches `key` case-insensitively against the expected keys; returns the
/// canonical spelling.
std::optional<std::string> canonical_key(std::string_view key,
                                         std::span<const std::string> expected) {
  const std::string low = ascii_lower(trim(key));
  for (const auto& k : expected) {
    if (ascii_lower(k) == low) return k;
  }
  return std::nullopt;
}

void consume_segment(std::string_view segment, std::span<const std::string> expected,
                     std::map<std::string, std::optional<std::string>>& values) {
  const auto eq = segment.find('=');
  if (eq == std::string_view::npos) return;
  const auto key = canonical_key(segment.substr(0, eq), expected);
  if (!key || values.count(*key)) return;  // first occurrence wins
  values.emplace(*key, value_or_none(segment.substr(eq + 1)));
}

bool boundary_before(std::string_view text, std::size_t pos) {
  if (pos == 0) return true;
  const char c = text[pos - 1];
  return !((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_');
}

void fallback_scan(std::string_view text, std::span<const std::string> expected,
                   std::map<std::string, std::optional<std::string>>& values) {
  const std::string low = ascii_lower(text);
  for (const auto& key : expected) {
    if (values.count(key)) continue;
    const std::string key_low = ascii_lower(key);
    std::size_t pos = 0;
    while ((pos = low.find(key_low, pos)) != std::string::npos) {
      const std::size_t after = pos + key_low.size();
      if (!boundary_before(low, pos)) {
        pos = after;
        continue;
      }
      std::size_t i = after;
      while (i < text.size() && (text[i] == ' ' || text[i] == '\t')) ++i;
      if (i >= text.size() || text[i] != '=') {
        pos = after;
        continue;
      }
      ++i;
      std::size_t end = i;
      while (end < text.size() && text[end] != '|' && text[end] != '\n' && text[end] != '\r' &&
             text[end] != '<' && text[end] != '>' &&
             text.compare(end, kOpenBracket.size(), kOpenBracket) != 0 &&
             text.compare(end, kCloseBracket.size(), kCloseBracket) != 0) {
        ++end;
      }
      values.emplace(key, value_or_none(text.substr(i, end - i)));
      break;
    }
  }
}

}  // namespace

ParsedLlmOutput parse_llm_output(std::string_view response,
                                 std::span<const std::string> expected_keys) {
  ParsedLlmOutput out;
  out.raw = std::string(response);

  if (const auto block = find_last_block(response)) {
    std::string_view content = response.substr(block->begin, block->end - block->begin);
    std::size_t pos = 0;
    while (pos <= content.size()) {
      const std::size_t bar = content.find('|', pos);
      const std::size_t end = bar == std::string_view::npos ? content.size() : bar;
      consume_segment(content.substr(pos, end - pos), expected_keys, out.values);
      if (bar == std::string_view::npos) break;
      pos = bar + 1;
    }
  }
  if (out.values.empty()) fallback_scan(response, expected_keys, out.values);

  if (out.values.size() == expected_keys.size() && !expected_keys.empty()) {
    out.status = ParseStatus::Ok;
  } else if (!out.values.empty()) {
    out.status = ParseStatus::Partial;
  } else {
    out.status = ParseStatus::Unparseable;
  }
  return out;
}

std::string render_kv_block(
    std::span<const std::pair<std::string, std::optional<std::string>>> values,
    bool ascii_brackets) {
  std::string out(ascii_brackets ? "<" : std::string(kOpenBracket));
  bool first = true;
  for (const auto& [key, value] : values) {
    if (!first) out += " | ";
    first = false;
    out += key;
    out += '=';
    out += value ? *value : "None";
  }
  out += ascii_brackets ? ">" : std::string(kCloseBracket);
  return out;
}

void validate(const LlmEndpointConfig& config) {
  if (config.base_url.empty()) throw Error("endpoint base URL is required");
  if (config.temperature < 0) throw Error("temperature must be >= 0");
  if (config.timeout_ms <= 0) throw Error("timeout must be > 0");
  if (config.max_retries < 0) throw Error("max retries must be >= 0");
}

namespace {

class HttpChatClient final : public ChatClient {
 public:
  explicit HttpChatClient(LlmEndpointConfig config) : config_(std::move(config)) {}

  std::string complete(std::span<const Message> messages) const override {
    json body;
    body["model"] = config_.model;
    auto& msgs = body["messages"] = json::array();
    for (const auto& m : messages) msgs.push_back({{"role", m.role}, {"content", m.content}});
    body["temperature"] = config_.temperature;
    const std::string payload = body.dump();

    std::string bearer;
    if (!config_.api_key_env.empty()) {
      if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) bearer = key;
    }

    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
      httplib::Client client(config_.base_url);
      client.set_connection_timeout(0, config_.timeout_ms * 1000LL);
      client.set_read_timeout(config_.timeout_ms / 1000, (config_.timeout_ms % 1000) * 1000);
      if (!bearer.empty()) client.set_bearer_token_auth(bearer);

      auto res = client.Post("/v1/chat/completions", payload, "application/json");
      if (!res) {
        last_error = "connection failed (" + httplib::to_string(res.error()) + ")";
        continue;
      }
      if (res->status >= 500) {
        last_error = "server returned status " + std::to_string(res->status);
        continue;
      }
      if (res->status != 200) {
        throw TransportError("chat endpoint returned status " + std::to_string(res->status));
      }
      const json reply = json::parse(res->body, nullptr, /*allow_exceptions=*/false);
      if (reply.is_discarded() || !reply.contains("choices") || !reply["choices"].is_array() ||
          reply["choices"].empty() || !reply["choices"][0].contains("message") ||
          !reply["choices"][0]["message"].contains("content") ||
          !reply["choices"][0]["message"]["content"].is_string()) {
        throw TransportError("chat endpoint returned a malformed completion body");
      }
      return reply["choices"][0]["message"]["content"].get<std::string>();
    }
    throw TransportError("chat endpoint failed after " + std::to_string(config_.max_retries + 1) +
                         " attempts: " + last_error);
  }

  const std::string& model() const override { return config_.model; }

 private:
  LlmEndpointConfig config_;
};

}  // namespace

std::unique_ptr<ChatClient> make_chat_client(const LlmEndpointConfig& config) {
  validate(config);
  if (config.base_url.rfind("mock:", 0) == 0) {
    const std::string script = config.base_url.substr(5);
    ScriptedChatModel model =
        script.empty() ? ScriptedChatModel() : ScriptedChatModel::from_file(script);
    return std::make_unique<MockChatClient>(std::move(model), config.model);
  }
  return std::make_unique<HttpChatClient>(config);
}

namespace {

std::optional<Sex> normalize_sex_value(std::string_view value) {
  const std::string norm = textproc::normalize_token(value);
  if (norm == "m" || norm == "male" || norm == "m\xC4\x99\xC5\xBC\x63zyzna" ||  // mężczyzna
      norm == "mezczyzna" || norm == "ch\xC5\x82opiec" || norm == "chlopiec") {
    return Sex::M;
  }
  if (norm == "f" || norm == "female" || norm == "k" || norm == "kobieta" ||
      norm == "dziewczynka" || norm == "dziewczyna") {
    return Sex::F;
  }
  return std::nullopt;
}

std::vector<std::string> split_drug_list(std::string_view value) {
  std::vector<std::string> drugs;
  std::size_t pos = 0;
  while (pos <= value.size()) {
    const std::size_t comma = value.find(',', pos);
    const std::size_t end = comma == std::string_view::npos ? value.size() : comma;
    const std::string name = textproc::normalize_token(value.substr(pos, end - pos));
    if (!name.empty() && ascii_lower(name) != "none" &&
        std::find(drugs.begin(), drugs.end(), name) == drugs.end()) {
      drugs.push_back(name);
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  return drugs;
}

}  // namespace

Extraction extract_via_llm(const corpus::EpicrisisRecord& record, const PromptSpec& spec,
                           const ChatClient& client, const rules::AgeGrammar& grammar) {
  const auto messages = build_prompt(record, spec);
  const std::string content = client.complete(messages);
  const ParsedLlmOutput parsed = parse_llm_output(content, spec.keys);

  Extraction ex;
  ex.id = record.id;
  ex.method = "llm:" + client.model();

  if (parsed.status == ParseStatus::Unparseable) {
    ex.diagnostics.push_back({diag::kLlmParseUnparseable, parsed.raw});
    return ex;
  }
  if (parsed.status == ParseStatus::Partial) {
    std::string missing;
    for (const auto& key : spec.keys) {
      if (parsed.values.count(key)) continue;
      if (!missing.empty()) missing += ", ";
      missing += key;
    }
    ex.diagnostics.push_back({diag::kLlmParsePartial, "missing keys: " + missing});
  }

  const auto value_of = [&](const std::string& key) -> std::optional<std::string> {
    const auto it = parsed.values.find(key);
    if (it == parsed.values.end()) return std::nullopt;
    return it->second;
  };

  if (const auto age_str = value_of("age")) {
    ex.age = rules::parse_age_text(*age_str, grammar);
    if (!ex.age) ex.diagnostics.push_back({diag::kLlmAgeUnparsed, *age_str});
  }
  if (const auto sex_str = value_of("sex")) {
    ex.sex = normalize_sex_value(*sex_str);
    if (!ex.sex) ex.diagnostics.push_back({diag::kLlmSexUnrecognized, *sex_str});
  }
  if (const auto drugs_str = value_of("drugs")) {
    ex.drugs = split_drug_list(*drugs_str);
  }
  if (const auto lesion_str = value_of("skin_changes")) {
    ex.lesion = trim(*lesion_str);
  }
  return ex;
}

const std::string& translation_instruction() { return kTranslationInstruction; }

corpus::EpicrisisRecord translate_record(const corpus::EpicrisisRecord& record,
                                         const ChatClient& client) {
  if (record.language != Language::PL) {
    throw Error("translate: record '" + record.id + "' is not in Polish");
  }
  const std::vector<Message> messages = {Message{"system", kTranslationInstruction},
                                         Message{"user", record.text}};
  const std::string translated = trim(client.complete(messages));
  if (translated.empty()) {
    throw Error("translate: endpoint returned an empty translation for record '" + record.id + "'");
  }
  corpus::EpicrisisRecord out = record;
  out.id += "-en";
  out.language = Language::EN;
  out.text = translated;
  return out;
}

}  // namespace epitext::llm
