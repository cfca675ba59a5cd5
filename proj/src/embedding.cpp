#include "proswitch/embedding.hpp"

#include <httplib.h>

#include <cstdint>
#include <json.hpp>

#include "proswitch/errors.hpp"
#include "proswitch/quality_metrics.hpp"
#include "proswitch/text.hpp"

namespace proswitch {
namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

HashedTrigramProvider::HashedTrigramProvider(std::size_t dimension) : dimension_(dimension) {
  if (dimension_ < 8) throw Error(ErrorKind::input, "embedding dimension must be >= 8");
}

std::string HashedTrigramProvider::name() const { return "hashed-trigram-" + std::to_string(dimension_); }

TokenVectors HashedTrigramProvider::embed(std::string_view input) {
  TokenVectors out;
  for (const auto& token : bleu_tokenize(text::to_lower(input))) {
    std::vector<double> v(dimension_, 0.0);
    std::string padded = "^" + token + "$";
    for (std::size_t i = 0; i + 3 <= padded.size(); ++i) {
      std::uint64_t h = fnv1a(std::string_view(padded).substr(i, 3));
      v[h % dimension_] += (h >> 63) ? -1.0 : 1.0;
    }
    out.push_back(std::move(v));
  }
  return out;
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string url, std::string token, std::chrono::seconds timeout)
    : url_(std::move(url)), token_(std::move(token)), timeout_(timeout) {}

TokenVectors HttpEmbeddingProvider::parse_response_body(std::string_view body) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw TransportError(200, std::string("embedding response is not JSON: ") + e.what());
  }
  const nlohmann::json* arr = &doc;
  if (doc.is_object() && doc.contains("embeddings")) arr = &doc["embeddings"];
  if (!arr->is_array()) throw TransportError(200, "embedding response has no token vector array");
  TokenVectors out;
  try {
    for (const auto& row : *arr) out.push_back(row.get<std::vector<double>>());
  } catch (const nlohmann::json::exception& e) {
    throw TransportError(200, std::string("malformed token vector: ") + e.what());
  }
  return out;
}

TokenVectors HttpEmbeddingProvider::embed(std::string_view input) {
  auto scheme_end = url_.find("://");
  if (scheme_end == std::string::npos) throw Error(ErrorKind::input, "malformed embedding URL " + url_);
  auto path_begin = url_.find('/', scheme_end + 3);
  httplib::Client client(url_.substr(0, path_begin));
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  httplib::Headers headers;
  if (!token_.empty()) headers.emplace("Authorization", "Bearer " + token_);
  nlohmann::json body = {{"text", std::string(input)}};
  auto res = client.Post(path_begin == std::string::npos ? "/" : url_.substr(path_begin), headers, body.dump(),
                         "application/json");
  if (!res) throw TransportError(0, "embedding endpoint unreachable: " + httplib::to_string(res.error()));
  if (res->status != 200) throw TransportError(res->status, "embedding endpoint returned " + std::to_string(res->status));
  return parse_response_body(res->body);
}

}  // namespace proswitch
