#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "proswitch/llm_gateway.hpp"
#include "proswitch/prompt_forge.hpp"
#include "proswitch/types.hpp"

namespace proswitch {

enum class ParseMode { marker, fallback_enumeration };

struct ReasoningTrace {
  std::string raw_decomposition;
  int step_count = 0;
  ParseMode parse_mode = ParseMode::marker;
};

inline constexpr std::string_view kStepMarker = "Total steps:";

// Integer after the last "Total steps:" marker; without a usable marker,
// counts lines that start with "<digits>.". Throws Error(unparseable_trace)
// when neither is present.
ReasoningTrace parse_step_count(std::string_view decomposition);

// Enumerated steps followed by the marker line; parses back to `step_count`.
std::string render_trace(int step_count);

// Sends the reasoning decomposition prompt and parses the reply, retrying up
// to twice when the reply is unparseable.
ReasoningTrace decompose_reasoning(std::string_view answer, std::string_view question, Gateway& gateway,
                                   const GatewayRequest& params,
                                   const TemplateSet& templates = TemplateSet::builtin());

enum class Combiner { AND, OR };
enum class LengthUnit { characters, whitespace_tokens };

Combiner parse_combiner(std::string_view s);
std::string_view to_string(Combiner c);
LengthUnit parse_length_unit(std::string_view s);
std::string_view to_string(LengthUnit u);

struct EvalConfig {
  int th_threshold = 1;
  int rs_threshold = 4;
  Combiner combiner = Combiner::AND;
  int runs = 3;
  LengthUnit length_unit = LengthUnit::characters;

  void validate() const;
};

// Code points or whitespace-separated tokens, per `unit`.
std::size_t text_length(std::string_view text, LengthUnit unit);

struct EvalRecord {
  std::string question_id;
  Style requested_style = Style::professional;
  std::string generated_text;
  int term_hits = 0;
  int reasoning_steps = 0;
  bool reasoning_parsed = true;  // false: trace unusable, excluded from RSG/Pro F1
  std::size_t text_length = 0;
  int run_index = 1;
  std::optional<double> bleu;
  std::optional<double> bert_f;
};

struct Gaps {
  double thg = 0.0;
  double rsg = 0.0;
};

// |mean(pro) - mean(non-pro)| for term hits and (parsed) reasoning steps.
Gaps compute_gaps(std::span<const EvalRecord> records);

Style classify_professionalism(int term_hits, int reasoning_steps, const EvalConfig& config);

// F1 with professional as the positive class.
double pro_f1(std::span<const Style> predictions, std::span<const Style> gold);

// avg_steps / avg_length (unrounded; render with round_to(x, 3)).
double reasoning_density(double avg_length, double avg_steps);

double round_to(double value, int decimals);

struct HumanEvalStats {
  double average_score = 0.0;  // AS
  double success_rate = 0.0;   // SR: share of ratings in {4, 5}
};

HumanEvalStats human_eval_stats(std::span<const int> ratings);

// "Model | AS | SR | AS | SR" with discrimination and fluency columns; absent
// groups render as "-".
std::string format_human_eval_row(std::string_view model, const std::optional<HumanEvalStats>& discrimination,
                                  const std::optional<HumanEvalStats>& fluency);

struct LabeledPoint {
  int term_hits = 0;
  int reasoning_steps = 0;
  Style label = Style::professional;
};

struct ThresholdFit {
  int th_threshold = 0;
  int rs_threshold = 0;
  double agreement = 0.0;  // accuracy of the fitted rule
  double auc = 0.0;        // ROC AUC of the fitted binary rule
};

// Exhaustive sweep over integer threshold pairs within the observed ranges;
// maximizes agreement, ties to the largest (th, rs) in lexicographic order.
ThresholdFit fit_thresholds(std::span<const LabeledPoint> labeled, Combiner combiner = Combiner::AND);

// ROC AUC of a binary classifier: 0.5 * (1 + TPR - FPR).
double binary_auc(std::span<const Style> predictions, std::span<const Style> gold);

}  // namespace proswitch
