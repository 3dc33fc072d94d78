#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <thread>

// Same configuration as the library's copy of the header.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "legalarg/backend.hpp"
#include "legalarg/error.hpp"

using namespace legalarg;
namespace fs = std::filesystem;

namespace {

// Local OpenAI-style endpoint answering from a list of (status, body) pairs.
class FakeServer {
 public:
  explicit FakeServer(std::vector<std::pair<int, std::string>> script) : script_(std::move(script)) {
    server_.Post("/v1/chat/completions", [this](const httplib::Request& req, httplib::Response& res) {
      const std::size_t i = hits_++;
      {
        std::lock_guard lock(mutex_);
        bodies_.push_back(req.body);
        auth_.push_back(req.get_header_value("Authorization"));
      }
      const auto& [status, body] = script_[std::min(i, script_.size() - 1)];
      res.status = status;
      res.set_content(body, "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~FakeServer() {
    server_.stop();
    thread_.join();
  }

  std::string endpoint() const { return "http://127.0.0.1:" + std::to_string(port_) + "/v1"; }
  std::size_t hits() const { return hits_; }
  std::vector<std::string> bodies() const {
    std::lock_guard lock(mutex_);
    return bodies_;
  }
  std::vector<std::string> auth() const {
    std::lock_guard lock(mutex_);
    return auth_;
  }

 private:
  std::vector<std::pair<int, std::string>> script_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<std::size_t> hits_{0};
  mutable std::mutex mutex_;
  std::vector<std::string> bodies_;
  std::vector<std::string> auth_;
};

std::string reply(const std::string& content) {
  return nlohmann::json{{"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}}.dump();
}

struct Backoffs {
  std::vector<std::chrono::milliseconds> seen;
  HttpChatBackend::Sleeper sleeper() {
    return [this](std::chrono::milliseconds d) { seen.push_back(d); };
  }
};

HttpBackendConfig config(const FakeServer& server, int retries = 3) {
  HttpBackendConfig c;
  c.endpoint = server.endpoint();
  c.model = "test-model";
  c.api_key = "sk-test";
  c.max_retries = retries;
  c.initial_backoff = std::chrono::milliseconds(10);
  c.timeout = std::chrono::seconds(5);
  return c;
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("legalarg_backend_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Sha256, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(HttpBackend, SendsChatCompletionRequest) {
  FakeServer server({{200, reply("hello")}});
  HttpChatBackend backend(config(server));
  GenerationParams p;
  p.max_tokens = 77;
  EXPECT_EQ(complete(backend, "sys", "usr", p), "hello");
  ASSERT_EQ(server.bodies().size(), 1u);
  const auto body = nlohmann::json::parse(server.bodies()[0]);
  EXPECT_EQ(body["model"], "test-model");
  EXPECT_EQ(body["messages"][0]["role"], "system");
  EXPECT_EQ(body["messages"][0]["content"], "sys");
  EXPECT_EQ(body["messages"][1]["content"], "usr");
  EXPECT_EQ(body["max_tokens"], 77);
  EXPECT_EQ(body["temperature"], 0.0);
  EXPECT_EQ(server.auth()[0], "Bearer sk-test");
}

TEST(HttpBackend, RetriesTransientFailuresWithExponentialBackoff) {
  FakeServer server({{500, "{}"}, {429, "{}"}, {200, reply("ok")}});
  Backoffs b;
  HttpChatBackend backend(config(server), b.sleeper());
  EXPECT_EQ(complete(backend, "s", "u"), "ok");
  EXPECT_EQ(server.hits(), 3u);
  ASSERT_EQ(b.seen.size(), 2u);
  EXPECT_EQ(b.seen[0], std::chrono::milliseconds(10));
  EXPECT_EQ(b.seen[1], std::chrono::milliseconds(20));
}

TEST(HttpBackend, GivesUpAfterMaxRetries) {
  FakeServer server({{503, "{}"}});
  Backoffs b;
  HttpChatBackend backend(config(server, 2), b.sleeper());
  EXPECT_THROW(complete(backend, "s", "u"), TransportError);
  EXPECT_EQ(server.hits(), 3u);
}

TEST(HttpBackend, AuthenticationFailureIsNotRetried) {
  FakeServer server({{401, "{\"error\":\"bad key\"}"}});
  Backoffs b;
  HttpChatBackend backend(config(server), b.sleeper());
  EXPECT_THROW(complete(backend, "s", "u"), AuthenticationError);
  EXPECT_EQ(server.hits(), 1u);
  EXPECT_TRUE(b.seen.empty());
}

TEST(HttpBackend, ContextLengthIsOverLength) {
  FakeServer server({{400, "{\"error\":{\"code\":\"context_length_exceeded\"}}"}});
  HttpChatBackend backend(config(server));
  EXPECT_THROW(complete(backend, "s", "u"), OverLengthError);
  HttpBackendConfig c = config(server);
  c.max_prompt_chars = 5;
  HttpChatBackend local(c);
  EXPECT_THROW(complete(local, "system", "user"), OverLengthError);
  EXPECT_EQ(server.hits(), 1u);
}

TEST(HttpBackend, UnexpectedShapeIsTransportError) {
  FakeServer server({{200, "{\"choices\": []}"}});
  HttpChatBackend backend(config(server));
  EXPECT_THROW(complete(backend, "s", "u"), TransportError);
}

TEST(HttpBackend, UnreachableHostRetriesThenFails) {
  HttpBackendConfig c;
  c.endpoint = "http://127.0.0.1:1/v1";
  c.model = "m";
  c.max_retries = 1;
  c.timeout = std::chrono::seconds(1);
  Backoffs b;
  HttpChatBackend backend(c, b.sleeper());
  EXPECT_THROW(complete(backend, "s", "u"), TransportError);
  EXPECT_EQ(b.seen.size(), 1u);
  c.endpoint = "not a url";
  EXPECT_THROW(HttpChatBackend{c}, TransportError);
}

TEST(FixtureBackend, RecordsThenReplays) {
  const fs::path dir = temp_dir("record");
  auto inner = std::make_shared<ScriptedBackend>("m");
  inner->push("first");
  FixtureBackend recording(dir, "m", inner);
  EXPECT_EQ(complete(recording, "s", "u"), "first");
  EXPECT_EQ(complete(recording, "s", "u"), "first");  // second call served from disk
  EXPECT_EQ(inner->call_count(), 1u);

  FixtureBackend replay(dir, "m");
  EXPECT_EQ(complete(replay, "s", "u"), "first");
  EXPECT_THROW(complete(replay, "s", "other"), TransportError);
  // The key covers the model and parameters too.
  FixtureBackend other_model(dir, "m2");
  EXPECT_THROW(complete(other_model, "s", "u"), TransportError);
  GenerationParams hot;
  hot.temperature = 0.7;
  EXPECT_THROW(complete(replay, "s", "u", hot), TransportError);
  fs::remove_all(dir);
}

TEST(FixtureBackend, FileNameIsDigestOfCanonicalRequest) {
  FixtureBackend f("/tmp/x", "m");
  const ChatRequest r{"s", "u", {}};
  EXPECT_EQ(f.fixture_path(r).filename().string(), sha256_hex(canonical_request("m", r)) + ".json");
}

TEST(ScriptedBackend, QueueThenResponder) {
  ScriptedBackend s("m", [](const ChatRequest& r) { return "echo " + r.user; });
  s.push("queued");
  EXPECT_EQ(complete(s, "a", "b"), "queued");
  EXPECT_EQ(complete(s, "a", "c"), "echo c");
  EXPECT_EQ(s.call_count(), 2u);
  ScriptedBackend empty;
  EXPECT_THROW(complete(empty, "a", "b"), TransportError);
}
