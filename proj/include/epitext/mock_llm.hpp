#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "epitext/llm_extract.hpp"

namespace epitext::llm {

/// Substring rule: when the last user message contains `contains`, the model
/// answers `response`.
struct MockRule {
  std::string contains;
  std::string response;
};

/// Deterministic scripted chat model. Rules are tried in order against the
/// last user message; without a hit the default response is returned (all
/// requested keys set to None unless configured otherwise).
class ScriptedChatModel {
 public:
  ScriptedChatModel();
  explicit ScriptedChatModel(std::vector<MockRule> rules, std::string default_response = "");

  /// JSON script: {"default": "...", "rules": [{"contains": "...", "response": "..."}]}
  static ScriptedChatModel from_file(const std::filesystem::path& path);

  std::string respond(std::span<const Message> messages) const;

 private:
  std::vector<MockRule> rules_;
  std::string default_response_;
};

/// Serves one chat-completion request body against the scripted model and
/// returns the JSON response body (the wire protocol of a real endpoint).
/// Useful for binding the mock behind an HTTP test server.
std::string handle_chat_completion_body(const ScriptedChatModel& model, const std::string& request_body);

/// In-process ChatClient over a scripted model.
class MockChatClient final : public ChatClient {
 public:
  explicit MockChatClient(ScriptedChatModel model, std::string model_name = "mock");

  std::string complete(std::span<const Message> messages) const override;
  const std::string& model() const override { return model_name_; }

 private:
  ScriptedChatModel model_;
  std::string model_name_;
};

}  // namespace epitext::llm
