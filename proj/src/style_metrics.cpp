#include "proswitch/style_metrics.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "proswitch/errors.hpp"
#include "proswitch/text.hpp"

namespace proswitch {
namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }

// Parses a non-negative integer at the start of `s` after spaces and markdown
// emphasis; nullopt if none.
std::optional<int> leading_integer(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '*' || s[i] == '_')) ++i;
  std::size_t j = i;
  long long v = 0;
  while (j < s.size() && is_digit(s[j])) {
    v = v * 10 + (s[j] - '0');
    if (v > std::numeric_limits<int>::max()) return std::nullopt;
    ++j;
  }
  if (j == i) return std::nullopt;
  return static_cast<int>(v);
}

double mean_of(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

struct Confusion {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;
};

Confusion confusion(std::span<const Style> predictions, std::span<const Style> gold) {
  if (predictions.size() != gold.size())
    throw Error(ErrorKind::input, "prediction and gold label counts differ");
  if (predictions.empty()) throw Error(ErrorKind::input, "no labels to score");
  Confusion c;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    bool p = predictions[i] == Style::professional;
    bool g = gold[i] == Style::professional;
    if (p && g) ++c.tp;
    else if (p) ++c.fp;
    else if (g) ++c.fn;
    else ++c.tn;
  }
  return c;
}

}  // namespace

ReasoningTrace parse_step_count(std::string_view decomposition) {
  ReasoningTrace trace;
  trace.raw_decomposition = std::string(decomposition);

  std::size_t pos = decomposition.rfind(kStepMarker);
  while (pos != std::string_view::npos) {
    if (auto n = leading_integer(decomposition.substr(pos + kStepMarker.size()))) {
      trace.step_count = *n;
      trace.parse_mode = ParseMode::marker;
      return trace;
    }
    if (pos == 0) break;
    pos = decomposition.rfind(kStepMarker, pos - 1);
  }

  int enumerated = 0;
  std::size_t start = 0;
  while (start < decomposition.size()) {
    auto nl = decomposition.find('\n', start);
    if (nl == std::string_view::npos) nl = decomposition.size();
    std::string_view line = decomposition.substr(start, nl - start);
    start = nl + 1;
    std::size_t i = 0;
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && is_digit(line[j])) ++j;
    if (j > i && j < line.size() && line[j] == '.') ++enumerated;
  }
  if (enumerated == 0)
    throw Error(ErrorKind::unparseable_trace, "reasoning trace has neither a step total nor enumerated steps");
  trace.step_count = enumerated;
  trace.parse_mode = ParseMode::fallback_enumeration;
  return trace;
}

std::string render_trace(int step_count) {
  std::string out;
  for (int i = 1; i <= step_count; ++i) out += std::to_string(i) + ". Step " + std::to_string(i) + "\n";
  out += std::string(kStepMarker) + " " + std::to_string(step_count);
  return out;
}

ReasoningTrace decompose_reasoning(std::string_view answer, std::string_view question, Gateway& gateway,
                                   const GatewayRequest& params, const TemplateSet& templates) {
  GatewayRequest req = params;
  req.prompt = reasoning_prompt(question, answer, templates);
  constexpr int kAttempts = 3;
  for (int attempt = 0;; ++attempt) {
    // Evaluation runs default to an uncached gateway; with a cache, retries
    // must not replay the unparseable reply.
    auto reply = gateway.complete(req, attempt == 0 ? CachePolicy::use : CachePolicy::refresh);
    try {
      return parse_step_count(reply.text);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::unparseable_trace || attempt + 1 >= kAttempts) throw;
    }
  }
}

Combiner parse_combiner(std::string_view s) {
  if (s == "AND" || s == "and") return Combiner::AND;
  if (s == "OR" || s == "or") return Combiner::OR;
  throw Error(ErrorKind::input, "unknown combiner '" + std::string(s) + "'");
}

std::string_view to_string(Combiner c) { return c == Combiner::AND ? "AND" : "OR"; }

LengthUnit parse_length_unit(std::string_view s) {
  if (s == "characters") return LengthUnit::characters;
  if (s == "whitespace_tokens") return LengthUnit::whitespace_tokens;
  throw Error(ErrorKind::input, "unknown length unit '" + std::string(s) + "'");
}

std::string_view to_string(LengthUnit u) {
  return u == LengthUnit::characters ? "characters" : "whitespace_tokens";
}

void EvalConfig::validate() const {
  if (th_threshold < 0 || rs_threshold < 0) throw Error(ErrorKind::input, "thresholds must be >= 0");
  if (runs < 1) throw Error(ErrorKind::input, "runs must be >= 1");
}

std::size_t text_length(std::string_view s, LengthUnit unit) {
  return unit == LengthUnit::characters ? text::codepoint_count(s) : text::split_whitespace(s).size();
}

Gaps compute_gaps(std::span<const EvalRecord> records) {
  std::vector<double> th_pro, th_np, rs_pro, rs_np;
  for (const auto& r : records) {
    bool pro = r.requested_style == Style::professional;
    (pro ? th_pro : th_np).push_back(r.term_hits);
    if (r.reasoning_parsed) (pro ? rs_pro : rs_np).push_back(r.reasoning_steps);
  }
  if (th_pro.empty() || th_np.empty())
    throw Error(ErrorKind::missing_style, "both professional and non-professional answers are required");
  if (rs_pro.empty() || rs_np.empty())
    throw Error(ErrorKind::missing_style, "a style group has no parseable reasoning traces");
  return {std::fabs(mean_of(th_pro) - mean_of(th_np)), std::fabs(mean_of(rs_pro) - mean_of(rs_np))};
}

Style classify_professionalism(int term_hits, int reasoning_steps, const EvalConfig& config) {
  bool terms = term_hits >= config.th_threshold;
  bool steps = reasoning_steps >= config.rs_threshold;
  bool pro = config.combiner == Combiner::AND ? (terms && steps) : (terms || steps);
  return pro ? Style::professional : Style::non_professional;
}

double pro_f1(std::span<const Style> predictions, std::span<const Style> gold) {
  Confusion c = confusion(predictions, gold);
  std::size_t denom = 2 * c.tp + c.fp + c.fn;
  if (c.tp == 0 || denom == 0) return 0.0;
  return 2.0 * static_cast<double>(c.tp) / static_cast<double>(denom);
}

double reasoning_density(double avg_length, double avg_steps) {
  if (!(avg_length > 0.0)) throw Error(ErrorKind::input, "average length must be positive");
  return avg_steps / avg_length;
}

double round_to(double value, int decimals) {
  double scale = std::pow(10.0, decimals);
  return std::round(value * scale) / scale;
}

HumanEvalStats human_eval_stats(std::span<const int> ratings) {
  if (ratings.empty()) throw Error(ErrorKind::input, "no ratings");
  double sum = 0.0;
  std::size_t success = 0;
  for (int r : ratings) {
    if (r < 1 || r > 5) throw Error(ErrorKind::input, "rating " + std::to_string(r) + " is outside 1..5");
    sum += r;
    if (r >= 4) ++success;
  }
  auto n = static_cast<double>(ratings.size());
  return {sum / n, static_cast<double>(success) / n};
}

std::string format_human_eval_row(std::string_view model, const std::optional<HumanEvalStats>& discrimination,
                                  const std::optional<HumanEvalStats>& fluency) {
  auto cell = [](const std::optional<HumanEvalStats>& s, bool as) {
    if (!s) return std::string("-");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", as ? s->average_score : s->success_rate);
    return std::string(buf);
  };
  std::string row(model);
  for (const auto* group : {&discrimination, &fluency}) {
    row += " | " + cell(*group, true);
    row += " | " + cell(*group, false);
  }
  return row;
}

double binary_auc(std::span<const Style> predictions, std::span<const Style> gold) {
  Confusion c = confusion(predictions, gold);
  if (c.tp + c.fn == 0 || c.fp + c.tn == 0) throw Error(ErrorKind::degenerate_data, "AUC needs both classes");
  double tpr = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  double fpr = static_cast<double>(c.fp) / static_cast<double>(c.fp + c.tn);
  return 0.5 * (1.0 + tpr - fpr);
}

ThresholdFit fit_thresholds(std::span<const LabeledPoint> labeled, Combiner combiner) {
  bool has_pro = false, has_np = false;
  int th_lo = std::numeric_limits<int>::max(), th_hi = std::numeric_limits<int>::min();
  int rs_lo = th_lo, rs_hi = th_hi;
  for (const auto& p : labeled) {
    (p.label == Style::professional ? has_pro : has_np) = true;
    th_lo = std::min(th_lo, p.term_hits);
    th_hi = std::max(th_hi, p.term_hits);
    rs_lo = std::min(rs_lo, p.reasoning_steps);
    rs_hi = std::max(rs_hi, p.reasoning_steps);
  }
  if (!has_pro || !has_np) throw Error(ErrorKind::degenerate_data, "threshold fitting needs both labels");

  std::vector<Style> gold;
  gold.reserve(labeled.size());
  for (const auto& p : labeled) gold.push_back(p.label);

  ThresholdFit best;
  std::size_t best_correct = 0;
  bool first = true;
  EvalConfig cfg;
  cfg.combiner = combiner;
  for (int th = th_lo; th <= th_hi; ++th) {
    for (int rs = rs_lo; rs <= rs_hi; ++rs) {
      cfg.th_threshold = th;
      cfg.rs_threshold = rs;
      std::size_t correct = 0;
      for (const auto& p : labeled)
        if (classify_professionalism(p.term_hits, p.reasoning_steps, cfg) == p.label) ++correct;
      // Ties go to the later, i.e. largest, pair of the th-major sweep.
      if (first || correct >= best_correct) {
        first = false;
        best_correct = correct;
        best.th_threshold = th;
        best.rs_threshold = rs;
      }
    }
  }
  cfg.th_threshold = best.th_threshold;
  cfg.rs_threshold = best.rs_threshold;
  std::vector<Style> preds;
  preds.reserve(labeled.size());
  for (const auto& p : labeled) preds.push_back(classify_professionalism(p.term_hits, p.reasoning_steps, cfg));
  best.agreement = static_cast<double>(best_correct) / static_cast<double>(labeled.size());
  best.auc = binary_auc(preds, gold);
  return best;
}

}  // namespace proswitch
