#pragma once

#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>

namespace proswitch {

struct GatewayRequest {
  std::string prompt;
  double temperature = 0.0;
  double top_p = 1.0;
  int max_tokens = 1024;
  std::string model_name = "default";

  // SHA-256 over a length-prefixed encoding of every field.
  std::string cache_key() const;
  void validate() const;
};

struct GatewayResponse {
  std::string text;
  bool from_cache = false;
  std::int64_t latency_ms = 0;
  int attempt = 0;  // 1-based provider attempt that succeeded; 0 on cache hit
};

// Raw outcome of a single provider call. status 200 is success, 429 signals
// rate limiting, 0 is a connection failure.
struct ProviderReply {
  int status = 0;
  std::string text;
  std::string error;
};

// Adapter for one chat-completion backend. Implementations must be safe to
// call from several threads at once. Only user-role content is ever sent.
class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  virtual ProviderReply send(const GatewayRequest& request) = 0;
  virtual std::string name() const = 0;
};

// Scripted responses keyed by prompt substring. The longest matching key wins
// (ties broken by byte order); the empty key acts as a catch-all. A prompt with
// no match gets status 404.
class MockProvider final : public ChatProvider {
 public:
  explicit MockProvider(std::map<std::string, std::string> script);
  // JSON object of substring -> response text.
  static std::shared_ptr<MockProvider> from_file(const std::filesystem::path& path);

  ProviderReply send(const GatewayRequest& request) override;
  std::string name() const override { return "mock"; }

 private:
  std::map<std::string, std::string> script_;
};

// OpenAI-style chat-completions endpoint:
//   POST <url>  {"model", "messages":[{"role":"user","content":...}], "temperature",
//                "top_p", "max_tokens"}
//   -> {"choices":[{"message":{"content": "..."}}]}
class HttpChatProvider final : public ChatProvider {
 public:
  HttpChatProvider(std::string url, std::string api_key,
                   std::chrono::seconds timeout = std::chrono::seconds(120));
  // Reads PROSWITCH_API_URL and PROSWITCH_API_KEY; nullptr when the URL is unset.
  static std::shared_ptr<HttpChatProvider> from_environment();

  ProviderReply send(const GatewayRequest& request) override;
  std::string name() const override { return "http"; }

  static std::string request_body(const GatewayRequest& request);
  // Extracts choices[0].message.content; throws ParseError on other shapes.
  static std::string parse_response_body(std::string_view body);

 private:
  std::string url_;
  std::string api_key_;
  std::chrono::seconds timeout_;
};

enum class CachePolicy {
  use,      // read on hit, write on miss
  refresh,  // skip the read, overwrite with the fresh reply
  bypass,   // neither read nor write
};

struct GatewayOptions {
  std::optional<std::filesystem::path> cache_dir;
  bool cache_enabled = false;
  std::size_t max_in_flight = 4;
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{1000};
  double backoff_factor = 2.0;
  // Injected so tests can observe backoff without sleeping.
  std::function<void(std::chrono::milliseconds)> sleep;
};

// Thread-safe completion client with content-addressed on-disk caching,
// exponential backoff and a bound on concurrent provider calls.
class Gateway {
 public:
  Gateway(std::shared_ptr<ChatProvider> provider, GatewayOptions options);

  GatewayResponse complete(const GatewayRequest& request, CachePolicy policy = CachePolicy::use);

  const GatewayOptions& options() const { return options_; }
  std::string provider_name() const { return provider_->name(); }

 private:
  std::optional<std::string> cache_read(const std::string& key) const;
  void cache_write(const std::string& key, const std::string& text) const;
  bool caching() const { return options_.cache_enabled && options_.cache_dir.has_value(); }

  std::shared_ptr<ChatProvider> provider_;
  GatewayOptions options_;

  std::mutex mu_;
  std::condition_variable cv_;
  std::size_t in_flight_ = 0;
};

}  // namespace proswitch
