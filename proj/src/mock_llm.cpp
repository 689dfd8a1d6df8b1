#include "epitext/mock_llm.hpp"

#include <fstream>
#include <sstream>

#include "epitext/error.hpp"
#include "json.hpp"

namespace epitext::llm {

using nlohmann::json;

namespace {

std::string all_none_response() {
  std::vector<std::pair<std::string, std::optional<std::string>>> values;
  for (const auto& key : PromptSpec::default_keys()) values.emplace_back(key, std::nullopt);
  return render_kv_block(values);
}

}  // namespace

ScriptedChatModel::ScriptedChatModel() : default_response_(all_none_response()) {}

ScriptedChatModel::ScriptedChatModel(std::vector<MockRule> rules, std::string default_response)
    : rules_(std::move(rules)),
      default_response_(default_response.empty() ? all_none_response() : std::move(default_response)) {}

ScriptedChatModel ScriptedChatModel::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open mock script: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const json script = json::parse(buffer.str(), nullptr, /*allow_exceptions=*/false);
  if (script.is_discarded() || !script.is_object()) {
    throw ParseError("mock script is not a JSON object: " + path.string());
  }
  std::vector<MockRule> rules;
  if (script.contains("rules")) {
    if (!script["rules"].is_array()) throw ParseError("mock script 'rules' must be an array");
    for (const auto& rule : script["rules"]) {
      if (!rule.is_object() || !rule.contains("contains") || !rule.contains("response") ||
          !rule["contains"].is_string() || !rule["response"].is_string()) {
        throw ParseError("mock script rules need string 'contains' and 'response' fields");
      }
      rules.push_back({rule["contains"].get<std::string>(), rule["response"].get<std::string>()});
    }
  }
  std::string default_response;
  if (script.contains("default")) {
    if (!script["default"].is_string()) throw ParseError("mock script 'default' must be a string");
    default_response = script["default"].get<std::string>();
  }
  return ScriptedChatModel(std::move(rules), std::move(default_response));
}

std::string ScriptedChatModel::respond(std::span<const Message> messages) const {
  std::string_view user_content;
  for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
    if (it->role == "user") {
      user_content = it->content;
      break;
    }
  }
  for (const auto& rule : rules_) {
    if (!rule.contains.empty() && user_content.find(rule.contains) != std::string_view::npos) {
      return rule.response;
    }
  }
  return default_response_;
}

std::string handle_chat_completion_body(const ScriptedChatModel& model, const std::string& request_body) {
  const json request = json::parse(request_body, nullptr, /*allow_exceptions=*/false);
  std::vector<Message> messages;
  if (!request.is_discarded() && request.contains("messages") && request["messages"].is_array()) {
    for (const auto& m : request["messages"]) {
      if (m.is_object() && m.value("role", "") != "" && m.contains("content") &&
          m["content"].is_string()) {
        messages.push_back({m["role"].get<std::string>(), m["content"].get<std::string>()});
      }
    }
  }
  json reply;
  reply["id"] = "mock-completion";
  reply["object"] = "chat.completion";
  reply["model"] = request.is_discarded() ? "mock" : request.value("model", "mock");
  reply["choices"] = json::array({json{{"index", 0},
                                       {"message", {{"role", "assistant"},
                                                    {"content", model.respond(messages)}}},
                                       {"finish_reason", "stop"}}});
  return reply.dump();
}

MockChatClient::MockChatClient(ScriptedChatModel model, std::string model_name)
    : model_(std::move(model)), model_name_(std::move(model_name)) {}

std::string MockChatClient::complete(std::span<const Message> messages) const {
  return model_.respond(messages);
}

}  // namespace epitext::llm
