#include "legalarg/backend.hpp"

#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>
#include <spdlog/spdlog.h>

#include "legalarg/error.hpp"

namespace legalarg {

using ojson = nlohmann::ordered_json;

std::string complete(ChatBackend& backend, std::string system, std::string user,
                     const GenerationParams& params) {
  return backend.complete(ChatRequest{std::move(system), std::move(user), params});
}

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xF]);
  }
  return out;
}

namespace {

ojson params_json(const GenerationParams& p) {
  ojson j;
  j["max_tokens"] = p.max_tokens;
  j["temperature"] = p.temperature;
  j["top_p"] = p.top_p;
  j["frequency_penalty"] = p.frequency_penalty;
  j["presence_penalty"] = p.presence_penalty;
  return j;
}

std::string short_digest(std::string_view data) { return sha256_hex(data).substr(0, 12); }

}  // namespace

std::string canonical_request(std::string_view model, const ChatRequest& request) {
  ojson j;
  j["model"] = model;
  j["system"] = request.system;
  j["user"] = request.user;
  j["params"] = params_json(request.params);
  return j.dump();
}

// ---------------------------------------------------------------------------
// HttpChatBackend

HttpChatBackend::HttpChatBackend(HttpBackendConfig config, Sleeper sleep)
    : config_(std::move(config)), sleep_(std::move(sleep)) {
  if (!sleep_) sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  static const std::regex url(R"(^(https?://[^/]+)(/.*)?$)", std::regex::icase);
  std::smatch m;
  if (!std::regex_match(config_.endpoint, m, url)) {
    throw TransportError("invalid endpoint URL: " + config_.endpoint);
  }
  scheme_host_ = m[1].str();
  base_path_ = m[2].matched ? m[2].str() : "";
  while (!base_path_.empty() && base_path_.back() == '/') base_path_.pop_back();
}

std::string HttpChatBackend::request_body(const ChatRequest& request) const {
  ojson body;
  body["model"] = config_.model;
  body["messages"] = ojson::array({
      ojson{{"role", "system"}, {"content", request.system}},
      ojson{{"role", "user"}, {"content", request.user}},
  });
  const ojson params = params_json(request.params);
  for (const auto& [key, value] : params.items()) body[key] = value;
  return body.dump();
}

std::string HttpChatBackend::complete(const ChatRequest& request) {
  if (config_.max_prompt_chars > 0 &&
      request.system.size() + request.user.size() > config_.max_prompt_chars) {
    throw OverLengthError("prompt of " +
                          std::to_string(request.system.size() + request.user.size()) +
                          " characters exceeds the configured limit of " +
                          std::to_string(config_.max_prompt_chars));
  }
  const std::string body = request_body(request);
  const std::string path = base_path_ + "/chat/completions";
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  std::string last_error;
  auto backoff = config_.initial_backoff;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      spdlog::warn("{}: retry {}/{} after {}", config_.model, attempt, config_.max_retries,
                   last_error);
      sleep_(backoff);
      backoff *= 2;
    }
    httplib::Client client(scheme_host_);
    client.set_connection_timeout(config_.timeout);
    client.set_read_timeout(config_.timeout);
    client.set_write_timeout(config_.timeout);
    auto result = client.Post(path, headers, body, "application/json");
    if (!result) {
      last_error = "transport failure: " + httplib::to_string(result.error());
      continue;
    }
    const int status = result->status;
    if (status == 401 || status == 403) {
      throw AuthenticationError(config_.model + ": HTTP " + std::to_string(status));
    }
    if (status == 400 || status == 413) {
      const std::string& b = result->body;
      if (status == 413 || b.find("context_length_exceeded") != std::string::npos ||
          b.find("maximum context length") != std::string::npos) {
        throw OverLengthError(config_.model + ": prompt exceeds the model context");
      }
      throw TransportError(config_.model + ": HTTP 400: " + b.substr(0, 200));
    }
    if (status == 429 || status >= 500) {
      last_error = "HTTP " + std::to_string(status);
      continue;
    }
    if (status != 200) {
      throw TransportError(config_.model + ": HTTP " + std::to_string(status));
    }
    std::string content;
    try {
      const auto reply = ojson::parse(result->body);
      content = reply.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const ojson::exception& e) {
      throw TransportError(config_.model + ": unexpected response shape: " + e.what());
    }
    spdlog::debug("{}: request {} -> response {}", config_.model, short_digest(body),
                  short_digest(content));
    return content;
  }
  throw TransportError(config_.model + ": giving up after " +
                       std::to_string(config_.max_retries + 1) + " attempts: " + last_error);
}

// ---------------------------------------------------------------------------
// FixtureBackend

FixtureBackend::FixtureBackend(std::filesystem::path dir, std::string model,
                               std::shared_ptr<ChatBackend> record_through)
    : dir_(std::move(dir)), model_(std::move(model)), inner_(std::move(record_through)) {}

std::filesystem::path FixtureBackend::fixture_path(const ChatRequest& request) const {
  return dir_ / (sha256_hex(canonical_request(model_, request)) + ".json");
}

void FixtureBackend::store(const ChatRequest& request, std::string_view response) {
  ojson record;
  record["request"] = ojson::parse(canonical_request(model_, request));
  record["response"] = response;
  const auto path = fixture_path(request);
  std::lock_guard lock(write_mutex_);
  std::filesystem::create_directories(dir_);
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out << record.dump(2) << '\n';
    if (!out) throw TransportError("cannot write fixture " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

std::string FixtureBackend::complete(const ChatRequest& request) {
  const auto path = fixture_path(request);
  if (std::ifstream in(path, std::ios::binary); in) {
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
      return ojson::parse(buf.str()).at("response").get<std::string>();
    } catch (const ojson::exception& e) {
      throw TransportError("corrupt fixture " + path.string() + ": " + e.what());
    }
  }
  if (!inner_) throw TransportError("no fixture for request " + path.filename().string());
  std::string response = inner_->complete(request);
  store(request, response);
  return response;
}

// ---------------------------------------------------------------------------
// ScriptedBackend

ScriptedBackend::ScriptedBackend(std::string model) : model_(std::move(model)) {}

ScriptedBackend::ScriptedBackend(std::string model, Responder responder)
    : model_(std::move(model)), responder_(std::move(responder)) {}

void ScriptedBackend::push(std::string response) {
  std::lock_guard lock(mutex_);
  queue_.push_back(std::move(response));
}

std::string ScriptedBackend::complete(const ChatRequest& request) {
  std::unique_lock lock(mutex_);
  seen_.push_back(request);
  if (!queue_.empty()) {
    std::string next = std::move(queue_.front());
    queue_.pop_front();
    return next;
  }
  if (responder_) {
    lock.unlock();
    return responder_(request);
  }
  throw TransportError("scripted backend has no response left");
}

std::vector<ChatRequest> ScriptedBackend::requests() const {
  std::lock_guard lock(mutex_);
  return seen_;
}

std::size_t ScriptedBackend::call_count() const {
  std::lock_guard lock(mutex_);
  return seen_.size();
}

}  // namespace legalarg
