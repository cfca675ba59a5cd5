#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "proswitch/embedding.hpp"
#include "proswitch/lexicon.hpp"
#include "proswitch/llm_gateway.hpp"
#include "proswitch/prompt_forge.hpp"
#include "proswitch/quality_metrics.hpp"
#include "proswitch/style_metrics.hpp"

namespace proswitch {

struct EvalQuestion {
  std::string id;
  std::string question;
  std::optional<QuestionType> qtype;
  std::optional<std::string> snippet;
};

// JSON Lines {id, question, qtype?, snippet?}; extra fields are ignored.
std::vector<EvalQuestion> read_questions(const std::filesystem::path& path);

using ReferenceMap = std::map<std::string, std::vector<std::string>>;

// JSON Lines {id, references: [..]} or {id, reference: ".."}.
ReferenceMap read_references(const std::filesystem::path& path);

// Pre-generated answers: JSON Lines {question_id, style, run?, answer}. A row
// without `run` serves every run.
class AnswerTable {
 public:
  static AnswerTable load(const std::filesystem::path& path);
  void add(const std::string& question_id, Style style, std::optional<int> run, std::string answer);
  const std::string* find(const std::string& question_id, Style style, int run) const;

 private:
  std::map<std::tuple<std::string, Style, int>, std::string> rows_;  // run 0 = any
};

struct GenerationSettings {
  InstructionLevel level = InstructionLevel::basic;
  ModelProfile profile = ModelProfile::tuned;
  GatewayRequest params;
  TemplateSet templates = TemplateSet::builtin();
};

enum class QualityScope { professional_only, both_styles };

struct EvalOptions {
  std::string model_name = "model";
  std::string dataset_name = "dataset";
  EvalConfig config;
  BleuOptions bleu;
  QualityScope quality_scope = QualityScope::professional_only;
  std::size_t concurrency = 4;
  GatewayRequest judge_params;
  std::uint64_t seed = 0;
};

// Where answers come from and what judges them. Exactly one of `generator`
// or `answers` must be set.
struct EvalContext {
  const TermLexicon* lexicon = nullptr;
  Gateway* judge = nullptr;
  Gateway* generator = nullptr;
  const GenerationSettings* generation = nullptr;
  const AnswerTable* answers = nullptr;
  EmbeddingProvider* embeddings = nullptr;  // required when references are given
  TemplateSet judge_templates = TemplateSet::builtin();
};

struct EvalReport {
  std::string model_name;
  std::string dataset_name;
  double thg = 0.0;
  double rsg = 0.0;
  double pro_f1 = 0.0;
  std::optional<double> bleu;
  std::optional<double> bert_f;
  double rd_professional = 0.0;
  double avg_len = 0.0;  // professional answers
  double avg_rs = 0.0;   // professional answers with parsed traces
  int runs = 1;
  std::size_t questions = 0;
  std::size_t excluded = 0;
  nlohmann::ordered_json config = nlohmann::ordered_json::object();
};

struct EvalOutcome {
  EvalReport report;
  std::vector<EvalRecord> records;  // question order, professional first, run ascending
};

EvalOutcome run_evaluation(const std::vector<EvalQuestion>& questions, const std::optional<ReferenceMap>& references,
                           const EvalContext& context, const EvalOptions& options);

// Indicator aggregation over per-answer records. THG, RSG and Pro F1 are
// computed per run and averaged; BLEU/BERT and the length statistics are
// means over all matching records.
EvalReport aggregate_records(const std::vector<EvalRecord>& records, const EvalConfig& config, bool with_quality);

}  // namespace proswitch
