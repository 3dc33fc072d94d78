#pragma once

#include <chrono>
#include <deque>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

namespace legalarg {

struct GenerationParams {
  int max_tokens = 1000;
  double temperature = 0.0;
  double top_p = 1.0;
  double frequency_penalty = 0.0;
  double presence_penalty = 0.0;

  // Fixed settings for the factor-extraction evaluator.
  static GenerationParams evaluator() { return GenerationParams{}; }
  bool operator==(const GenerationParams&) const = default;
};

struct ChatRequest {
  std::string system;
  std::string user;
  GenerationParams params;
};

// A chat-completion endpoint. Implementations must tolerate concurrent calls.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const ChatRequest& request) = 0;
  virtual const std::string& model() const = 0;
};

std::string complete(ChatBackend& backend, std::string system, std::string user,
                     const GenerationParams& params = {});

// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view data);

// Canonical JSON of a request (model, system, user, params); fixtures are
// keyed by its digest.
std::string canonical_request(std::string_view model, const ChatRequest& request);

struct HttpBackendConfig {
  std::string endpoint = "https://api.openai.com/v1";  // base URL; /chat/completions is appended
  std::string model;
  std::string api_key;
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::seconds timeout{120};
  std::size_t max_prompt_chars = 0;  // 0 disables the local length check
};

// OpenAI-compatible /chat/completions client. Transient failures (network
// errors, 429, 5xx) are retried with exponential backoff; 401/403 raise
// AuthenticationError, context-length rejections raise OverLengthError.
class HttpChatBackend final : public ChatBackend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  explicit HttpChatBackend(HttpBackendConfig config, Sleeper sleep = {});

  std::string complete(const ChatRequest& request) override;
  const std::string& model() const override { return config_.model; }

  std::string request_body(const ChatRequest& request) const;

 private:
  HttpBackendConfig config_;
  Sleeper sleep_;
  std::string scheme_host_;
  std::string base_path_;
};

// Replays responses stored as <dir>/<digest>.json. With an inner backend,
// misses are forwarded and recorded; without one a miss is a TransportError.
class FixtureBackend final : public ChatBackend {
 public:
  FixtureBackend(std::filesystem::path dir, std::string model,
                 std::shared_ptr<ChatBackend> record_through = nullptr);

  std::string complete(const ChatRequest& request) override;
  const std::string& model() const override { return model_; }

  std::filesystem::path fixture_path(const ChatRequest& request) const;
  void store(const ChatRequest& request, std::string_view response);

 private:
  std::filesystem::path dir_;
  std::string model_;
  std::shared_ptr<ChatBackend> inner_;
  std::mutex write_mutex_;
};

// Test double: answers from a queue (or a responder function) and keeps
// every request it saw.
class ScriptedBackend final : public ChatBackend {
 public:
  using Responder = std::function<std::string(const ChatRequest&)>;

  explicit ScriptedBackend(std::string model = "scripted");
  ScriptedBackend(std::string model, Responder responder);

  void push(std::string response);
  std::string complete(const ChatRequest& request) override;
  const std::string& model() const override { return model_; }

  std::vector<ChatRequest> requests() const;
  std::size_t call_count() const;

 private:
  std::string model_;
  Responder responder_;
  mutable std::mutex mutex_;
  std::deque<std::string> queue_;
  std::vector<ChatRequest> seen_;
};

}  // namespace legalarg
