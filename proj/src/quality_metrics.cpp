#include "proswitch/quality_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <unordered_map>

#include "proswitch/errors.hpp"
#include "proswitch/text.hpp"

namespace proswitch {
namespace {

bool is_ascii_punct(unsigned char c) {
  return (c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) || (c >= 123 && c <= 126);
}

using NgramCounts = std::unordered_map<std::string, std::size_t>;

NgramCounts count_ngrams(const std::vector<std::string>& tokens, std::size_t n) {
  NgramCounts counts;
  if (tokens.size() < n) return counts;
  for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
    std::string key = tokens[i];
    for (std::size_t k = 1; k < n; ++k) {
      key.push_back('\x1f');
      key += tokens[i + k];
    }
    ++counts[key];
  }
  return counts;
}

}  // namespace

std::vector<std::string> bleu_tokenize(std::string_view input) {
  std::string spaced;
  spaced.reserve(input.size() * 2);
  for (unsigned char c : input) {
    if (is_ascii_punct(c)) {
      spaced.push_back(' ');
      spaced.push_back(static_cast<char>(c));
      spaced.push_back(' ');
    } else {
      spaced.push_back(static_cast<char>(c));
    }
  }
  return text::split_whitespace(spaced);
}

BrevityMode parse_brevity_mode(std::string_view s) {
  if (s == "ratio") return BrevityMode::ratio;
  if (s == "exponential") return BrevityMode::exponential;
  throw Error(ErrorKind::input, "unknown brevity mode '" + std::string(s) + "'");
}

std::string_view to_string(BrevityMode m) { return m == BrevityMode::ratio ? "ratio" : "exponential"; }

double bleu(std::string_view candidate, std::span<const std::string> references, BleuOptions options) {
  if (options.max_n < 1) throw Error(ErrorKind::input, "BLEU order must be >= 1");
  if (references.empty()) throw Error(ErrorKind::input, "BLEU needs at least one reference");

  const auto cand = bleu_tokenize(candidate);
  if (cand.empty()) return 0.0;
  std::vector<std::vector<std::string>> refs;
  refs.reserve(references.size());
  for (const auto& r : references) refs.push_back(bleu_tokenize(r));

  const std::size_t c = cand.size();
  std::size_t r = refs.front().size();
  for (const auto& ref : refs) {
    auto d_new = std::llabs(static_cast<long long>(ref.size()) - static_cast<long long>(c));
    auto d_old = std::llabs(static_cast<long long>(r) - static_cast<long long>(c));
    if (d_new < d_old || (d_new == d_old && ref.size() < r)) r = ref.size();
  }

  double log_sum = 0.0;
  for (int n = 1; n <= options.max_n; ++n) {
    const auto un = static_cast<std::size_t>(n);
    if (c < un) return 0.0;
    NgramCounts cand_counts = count_ngrams(cand, un);
    NgramCounts max_ref;
    for (const auto& ref : refs)
      for (const auto& [gram, cnt] : count_ngrams(ref, un)) {
        auto& slot = max_ref[gram];
        slot = std::max(slot, cnt);
      }
    std::size_t clipped = 0;
    for (const auto& [gram, cnt] : cand_counts) {
      auto it = max_ref.find(gram);
      if (it != max_ref.end()) clipped += std::min(cnt, it->second);
    }
    if (clipped == 0) return 0.0;
    log_sum += std::log(static_cast<double>(clipped) / static_cast<double>(c - un + 1));
  }

  double brevity = 1.0;
  const auto cd = static_cast<double>(c), rd = static_cast<double>(r);
  if (options.brevity == BrevityMode::ratio) {
    if (r > 0) brevity = std::min(1.0, cd / rd);
  } else if (c <= r) {
    brevity = std::exp(1.0 - rd / cd);
  }
  return brevity * std::exp(log_sum / options.max_n);
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorKind::input, "vector dimensions differ");
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

BertScores bert_score_from_vectors(const TokenVectors& cand, const TokenVectors& ref) {
  if (cand.empty() || ref.empty()) throw TransportError(200, "embedding provider returned no token vectors");
  const std::size_t dim = cand.front().size();
  if (dim < 8) throw TransportError(200, "embedding dimension below 8");
  for (const auto* side : {&cand, &ref})
    for (const auto& v : *side)
      if (v.size() != dim) throw TransportError(200, "embedding provider returned mixed dimensions");

  std::vector<double> best_for_cand(cand.size(), -1.0), best_for_ref(ref.size(), -1.0);
  for (std::size_t i = 0; i < cand.size(); ++i)
    for (std::size_t j = 0; j < ref.size(); ++j) {
      double s = cosine_similarity(cand[i], ref[j]);
      best_for_cand[i] = std::max(best_for_cand[i], s);
      best_for_ref[j] = std::max(best_for_ref[j], s);
    }
  BertScores out;
  for (double s : best_for_cand) out.precision += s;
  for (double s : best_for_ref) out.recall += s;
  out.precision /= static_cast<double>(cand.size());
  out.recall /= static_cast<double>(ref.size());
  double denom = out.precision + out.recall;
  out.f = denom == 0.0 ? 0.0 : 2.0 * out.precision * out.recall / denom;
  return out;
}

BertScores bert_score(std::string_view candidate, std::string_view reference, EmbeddingProvider& provider) {
  if (text::trim(candidate).empty() || text::trim(reference).empty())
    throw Error(ErrorKind::input, "BERTScore needs non-empty candidate and reference");
  return bert_score_from_vectors(provider.embed(candidate), provider.embed(reference));
}

}  // namespace proswitch
