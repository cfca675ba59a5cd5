#include "proswitch/llm_gateway.hpp"

#include <httplib.h>

#include <cstdio>
#include <cstdlib>
#include <json.hpp>
#include <thread>

#include "proswitch/errors.hpp"
#include "proswitch/text.hpp"

namespace proswitch {
namespace {

using json = nlohmann::json;

void put_field(std::string& out, std::string_view tag, std::string_view value) {
  out += tag;
  out += ':';
  out += std::to_string(value.size());
  out += ':';
  out += value;
  out += ';';
}

std::string format_real(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool retryable(int status) { return status == 0 || status == 408 || status == 429 || status >= 500; }

class InFlightSlot {
 public:
  InFlightSlot(std::mutex& mu, std::condition_variable& cv, std::size_t& count, std::size_t limit)
      : mu_(mu), cv_(cv), count_(count) {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return count_ < limit; });
    ++count_;
  }
  ~InFlightSlot() {
    {
      std::lock_guard lock(mu_);
      --count_;
    }
    cv_.notify_one();
  }
  InFlightSlot(const InFlightSlot&) = delete;
  InFlightSlot& operator=(const InFlightSlot&) = delete;

 private:
  std::mutex& mu_;
  std::condition_variable& cv_;
  std::size_t& count_;
};

}  // namespace

std::string GatewayRequest::cache_key() const {
  std::string enc;
  put_field(enc, "prompt", prompt);
  put_field(enc, "temperature", format_real(temperature));
  put_field(enc, "top_p", format_real(top_p));
  put_field(enc, "max_tokens", std::to_string(max_tokens));
  put_field(enc, "model", model_name);
  return text::sha256_hex(enc);
}

void GatewayRequest::validate() const {
  if (!(temperature >= 0.0)) throw Error(ErrorKind::input, "temperature must be >= 0");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw Error(ErrorKind::input, "top_p must be in (0, 1]");
  if (max_tokens <= 0) throw Error(ErrorKind::input, "max_tokens must be positive");
}

// ---------------------------------------------------------------------------
// MockProvider

MockProvider::MockProvider(std::map<std::string, std::string> script) : script_(std::move(script)) {}

std::shared_ptr<MockProvider> MockProvider::from_file(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(text::read_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(0, "mock script " + path.string() + ": " + e.what());
  }
  if (!doc.is_object()) throw Error(ErrorKind::input, "mock script must be a JSON object");
  std::map<std::string, std::string> script;
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_string())
      throw Error(ErrorKind::input, "mock script value for '" + key + "' is not a string");
    script.emplace(key, value.get<std::string>());
  }
  return std::make_shared<MockProvider>(std::move(script));
}

ProviderReply MockProvider::send(const GatewayRequest& request) {
  const std::string* best_key = nullptr;
  const std::string* best_value = nullptr;
  for (const auto& [key, value] : script_) {
    if (request.prompt.find(key) == std::string::npos) continue;
    if (!best_key || key.size() > best_key->size()) {
      best_key = &key;
      best_value = &value;
    }
  }
  if (!best_value) return {404, {}, "no scripted response matches the prompt"};
  return {200, *best_value, {}};
}

// ---------------------------------------------------------------------------
// HttpChatProvider

HttpChatProvider::HttpChatProvider(std::string url, std::string api_key, std::chrono::seconds timeout)
    : url_(std::move(url)), api_key_(std::move(api_key)), timeout_(timeout) {}

std::shared_ptr<HttpChatProvider> HttpChatProvider::from_environment() {
  const char* url = std::getenv("PROSWITCH_API_URL");
  if (!url || !*url) return nullptr;
  const char* key = std::getenv("PROSWITCH_API_KEY");
  return std::make_shared<HttpChatProvider>(url, key ? key : "");
}

std::string HttpChatProvider::request_body(const GatewayRequest& request) {
  nlohmann::ordered_json body;
  body["model"] = request.model_name;
  body["messages"] = json::array({{{"role", "user"}, {"content", request.prompt}}});
  body["temperature"] = request.temperature;
  body["top_p"] = request.top_p;
  body["max_tokens"] = request.max_tokens;
  return body.dump();
}

std::string HttpChatProvider::parse_response_body(std::string_view body) {
  json doc;
  try {
    doc = json::parse(body);
    const auto& content = doc.at("choices").at(0).at("message").at("content");
    if (!content.is_string()) throw ParseError(0, "message content is not a string");
    return content.get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(0, std::string("unexpected chat-completion response: ") + e.what());
  }
}

ProviderReply HttpChatProvider::send(const GatewayRequest& request) {
  // Split "scheme://host[:port]/path".
  auto scheme_end = url_.find("://");
  if (scheme_end == std::string::npos) return {0, {}, "malformed endpoint URL " + url_};
  auto path_begin = url_.find('/', scheme_end + 3);
  std::string origin = url_.substr(0, path_begin);
  std::string path = path_begin == std::string::npos ? "/" : url_.substr(path_begin);

  httplib::Client client(origin);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  httplib::Headers headers;
  if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);

  auto res = client.Post(path, headers, request_body(request), "application/json");
  if (!res) return {0, {}, "connection failed: " + httplib::to_string(res.error())};
  if (res->status != 200) return {res->status, {}, res->body.substr(0, 512)};
  try {
    return {200, parse_response_body(res->body), {}};
  } catch (const ParseError& e) {
    return {502, {}, e.what()};
  }
}

// ---------------------------------------------------------------------------
// Gateway

Gateway::Gateway(std::shared_ptr<ChatProvider> provider, GatewayOptions options)
    : provider_(std::move(provider)), options_(std::move(options)) {
  if (!provider_) throw Error(ErrorKind::input, "gateway needs a provider");
  if (options_.max_in_flight == 0) options_.max_in_flight = 1;
  if (options_.max_attempts < 1) options_.max_attempts = 1;
  if (!options_.sleep) options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (caching()) std::filesystem::create_directories(*options_.cache_dir);
}

std::optional<std::string> Gateway::cache_read(const std::string& key) const {
  auto path = *options_.cache_dir / (key + ".txt");
  std::error_code ec;
  if (!std::filesystem::exists(path, ec)) return std::nullopt;
  return text::read_file(path);
}

void Gateway::cache_write(const std::string& key, const std::string& value) const {
  text::write_file_atomic(*options_.cache_dir / (key + ".txt"), value);
}

GatewayResponse Gateway::complete(const GatewayRequest& request, CachePolicy policy) {
  request.validate();
  const auto started = std::chrono::steady_clock::now();
  auto elapsed_ms = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started)
        .count();
  };

  const bool use_cache = caching() && policy != CachePolicy::bypass;
  std::string key;
  if (use_cache) {
    key = request.cache_key();
    if (policy == CachePolicy::use)
      if (auto hit = cache_read(key)) return {std::move(*hit), true, elapsed_ms(), 0};
  }

  ProviderReply last;
  auto delay = options_.backoff_base;
  for (int attempt = 1; attempt <= options_.max_attempts; ++attempt) {
    {
      InFlightSlot slot(mu_, cv_, in_flight_, options_.max_in_flight);
      try {
        last = provider_->send(request);
      } catch (const std::exception& e) {
        last = {0, {}, e.what()};
      }
    }
    if (last.status == 200) {
      if (use_cache) cache_write(key, last.text);
      return {std::move(last.text), false, elapsed_ms(), attempt};
    }
    if (!retryable(last.status)) break;
    if (attempt < options_.max_attempts) {
      options_.sleep(delay);
      delay = std::chrono::milliseconds(
          static_cast<std::int64_t>(static_cast<double>(delay.count()) * options_.backoff_factor));
    }
  }
  throw TransportError(last.status, provider_->name() + " provider failed with status " +
                                        std::to_string(last.status) +
                                        (last.error.empty() ? "" : ": " + last.error));
}

}  // namespace proswitch
