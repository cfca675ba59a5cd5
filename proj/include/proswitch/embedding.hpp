#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace proswitch {

using TokenVectors = std::vector<std::vector<double>>;

// Per-token vectors of a fixed dimension (>= 8). Must be deterministic for a
// fixed input and safe to call concurrently.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual TokenVectors embed(std::string_view text) = 0;
  virtual std::string name() const = 0;
};

// Offline provider: each token is the signed sum of its hashed character
// trigrams (with boundary markers). Not contextual; used by tests and when no
// embedding endpoint is configured.
class HashedTrigramProvider final : public EmbeddingProvider {
 public:
  explicit HashedTrigramProvider(std::size_t dimension = 64);
  TokenVectors embed(std::string_view text) override;
  std::string name() const override;

 private:
  std::size_t dimension_;
};

// POST <url> {"text": "..."} -> {"embeddings": [[...], ...]} (a bare array is
// also accepted). The token, when set, is sent as a bearer credential.
class HttpEmbeddingProvider final : public EmbeddingProvider {
 public:
  HttpEmbeddingProvider(std::string url, std::string token,
                        std::chrono::seconds timeout = std::chrono::seconds(60));
  TokenVectors embed(std::string_view text) override;
  std::string name() const override { return "http:" + url_; }

  static TokenVectors parse_response_body(std::string_view body);

 private:
  std::string url_;
  std::string token_;
  std::chrono::seconds timeout_;
};

}  // namespace proswitch
