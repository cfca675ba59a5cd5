#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "proswitch/errors.hpp"
#include "proswitch/prompt_forge.hpp"
#include "proswitch/types.hpp"

namespace proswitch {

class Gateway;
struct GatewayRequest;

struct QARecord {
  std::string id;
  std::string question;
  std::string answer;
  Style style = Style::professional;
  std::optional<QuestionType> qtype;
  Source source = Source::synthetic;
  std::optional<std::string> snippet;

  friend bool operator==(const QARecord&, const QARecord&) = default;
};

nlohmann::ordered_json to_json(const QARecord& r);
// Generic record row: {id, question, answer, style?, qtype?, source?, snippet?}.
QARecord record_from_json(const nlohmann::json& j);

// One JSON object per line; sorted input order is preserved.
std::string records_to_jsonl(const std::vector<QARecord>& records);
std::vector<QARecord> read_records(const std::filesystem::path& path);
void write_records(const std::filesystem::path& path, const std::vector<QARecord>& records);

enum class SourceFormat { bioasq, pubmedqa, jsonl };
SourceFormat parse_source_format(std::string_view s);

struct RecordError {
  std::size_t index;  // 0-based position in the source
  std::string id;
  std::string message;
};

struct IngestResult {
  std::vector<QARecord> records;
  std::vector<RecordError> errors;
};

// Field mappings:
//   bioasq   {"questions":[{id, body, ideal_answer (string|[string]), type, snippets?:[{text}]}]}
//   pubmedqa {"<pmid>": {QUESTION, LONG_ANSWER, CONTEXTS?:[string]}}
//   jsonl    one generic record row per line
// Bad rows are collected in `errors`; throws Error(input) when no row survives.
IngestResult ingest_text(std::string_view contents, SourceFormat format);
IngestResult ingest(const std::filesystem::path& path, SourceFormat format);

// Closed-set label parsing for classifier replies. Accepts the four canonical
// names plus "summarize", "yes/no", "yes-no" and an optional "Output:" prefix.
std::optional<QuestionType> parse_type_label(std::string_view reply);

// Raised after retries; carries the last raw reply for the manual-review file.
class ClassificationError : public Error {
 public:
  ClassificationError(std::string record_id, std::string last_reply, const std::string& message)
      : Error(ErrorKind::classification, message),
        record_id_(std::move(record_id)),
        last_reply_(std::move(last_reply)) {}

  const std::string& record_id() const { return record_id_; }
  const std::string& last_reply() const { return last_reply_; }

 private:
  std::string record_id_;
  std::string last_reply_;
};

// Sends the classification prompt (up to 2 retries on an unusable label).
QuestionType classify_question_type(const QARecord& record, Gateway& gateway, const GatewayRequest& params);

// Rewrites the record into `target_style` through the gateway. The new id is
// `new_id` when given, else the source id with a style suffix.
QARecord augment(const QARecord& record, Style target_style, Gateway& gateway, const GatewayRequest& params,
                 const std::vector<FewShotExample>& few_shot = {}, std::optional<std::string> new_id = std::nullopt,
                 const TemplateSet& templates = TemplateSet::builtin());

std::string lineage_id(const std::string& source_id, Style target_style);

struct CellSummary {
  Style style;
  QuestionType qtype;
  std::size_t available = 0;
  std::size_t kept = 0;
  std::size_t deficit = 0;
};

struct AugmentationRequest {
  std::string source_id;
  Style target_style;
  QuestionType qtype;
  std::string new_id;
};

struct BalancePlan {
  std::uint64_t seed = 0;
  std::size_t target_total = 0;
  std::size_t quota = 0;
  std::vector<CellSummary> cells;  // style-major, qtype order list/summary/yesno/factoid
  std::vector<std::string> kept_ids;
  std::vector<AugmentationRequest> requests;
};

nlohmann::ordered_json to_json(const BalancePlan& plan);
BalancePlan plan_from_json(const nlohmann::json& j);

// Quota target_total / 8 per (style, qtype) cell. Surplus cells are
// down-sampled by a seeded shuffle; deficit cells are filled by rephrasing
// records of the twin cell (same qtype, other style).
BalancePlan balance_corpus(const std::vector<QARecord>& records, std::size_t target_total, std::uint64_t seed);

// Kept records plus one augmented record per request, sorted by id.
std::vector<QARecord> execute_plan(const std::vector<QARecord>& records, const BalancePlan& plan,
                                   Gateway& gateway, const GatewayRequest& params,
                                   std::size_t concurrency = 1,
                                   const TemplateSet& templates = TemplateSet::builtin());

// Seeded selection of `count` records, spread over question types round-robin.
std::vector<QARecord> select_test_split(const std::vector<QARecord>& records, std::size_t count,
                                        std::uint64_t seed);

struct InstructionExample {
  std::string instruction;
  std::string input;
  std::string output;
  InstructionLevel level;
  Style style;
  std::optional<QuestionType> qtype;
  std::string source_id;
};

InstructionExample make_instruction_example(const QARecord& record, InstructionLevel level,
                                            const TemplateSet& templates = TemplateSet::builtin());

// Alpaca-style JSON Lines, sorted by record id.
std::string render_training_set(const std::vector<QARecord>& records, InstructionLevel level,
                                const TemplateSet& templates = TemplateSet::builtin());
void emit_training_set(const std::vector<QARecord>& records, InstructionLevel level,
                       const std::filesystem::path& out,
                       const TemplateSet& templates = TemplateSet::builtin());

// Fisher-Yates with a portable bounded draw over mt19937_64, so plans are
// identical across standard libraries.
void seeded_shuffle(std::vector<std::size_t>& items, std::uint64_t seed);

}  // namespace proswitch
