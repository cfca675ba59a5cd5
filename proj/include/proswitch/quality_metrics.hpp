#pragma once

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "proswitch/embedding.hpp"

namespace proswitch {

// Splits off every ASCII punctuation character as its own token, then splits
// on whitespace.
std::vector<std::string> bleu_tokenize(std::string_view text);

enum class BrevityMode {
  ratio,        // min(1, len_cand / len_ref)
  exponential,  // standard BLEU: 1 if c > r else exp(1 - r/c)
};

BrevityMode parse_brevity_mode(std::string_view s);
std::string_view to_string(BrevityMode m);

struct BleuOptions {
  int max_n = 4;
  BrevityMode brevity = BrevityMode::ratio;
};

// Sentence-level BLEU without smoothing: brevity term times the geometric mean
// of clipped 1..max_n-gram precisions against the per-n-gram maximum count over
// all references. The reference length is the one closest to the candidate
// (shorter wins ties). Any zero precision gives 0.
double bleu(std::string_view candidate, std::span<const std::string> references, BleuOptions options = {});

struct BertScores {
  double precision = 0.0;
  double recall = 0.0;
  double f = 0.0;
};

double cosine_similarity(std::span<const double> a, std::span<const double> b);

// Greedy token matching on cosine similarity.
BertScores bert_score(std::string_view candidate, std::string_view reference, EmbeddingProvider& provider);
BertScores bert_score_from_vectors(const TokenVectors& candidate, const TokenVectors& reference);

}  // namespace proswitch
