#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "proswitch/types.hpp"

namespace proswitch {

struct QARecord;

enum class ModelProfile { chat_baseline, tuned, none };

ModelProfile parse_model_profile(std::string_view s);
std::string_view to_string(ModelProfile p);

// Replaces every `<name>` whose name is a key of `slots`, in a single left to
// right pass. Other angle-bracket text (e.g. `<number>`) is left untouched and
// substituted values are never rescanned.
std::string fill_slots(std::string_view tmpl, const std::map<std::string, std::string>& slots);

// Keyed prompt texts. Built-ins can be overridden from a template file:
//
//   # comment line
//   [instruction.type_based.professional.list]
//   Answer the question with a list of items ...
//
// A section runs until the next `[key]` line; trailing newlines are dropped.
class TemplateSet {
 public:
  static const TemplateSet& builtin();
  static TemplateSet load(const std::filesystem::path& path);
  // Built-ins with the sections in `contents` applied on top.
  static TemplateSet with_overrides(std::string_view contents);

  const std::string& get(const std::string& key) const;
  const std::map<std::string, std::string>& entries() const { return entries_; }
  // Serialized in the template file format (round-trips through with_overrides).
  std::string dump() const;

  static std::string instruction_key(Style style, InstructionLevel level,
                                     std::optional<QuestionType> qtype);
  static std::string answer_style_key(QuestionType qtype, Style style);

 private:
  std::map<std::string, std::string> entries_;
};

struct PromptBundle {
  std::string guide;
  std::string question;
  std::string limit;
  std::string rendered;  // guide "\n" question ["\n" limit]
};

struct FewShotExample {
  std::string question;
  std::string answer;
  Style style;
};

inline constexpr std::string_view kPromptSeparator = "\n";

// qtype is required for type_based; snippet for professional knowledge_enriched.
std::string build_instruction(Style style, InstructionLevel level,
                              std::optional<QuestionType> qtype = std::nullopt,
                              std::optional<std::string> snippet = std::nullopt,
                              const TemplateSet& templates = TemplateSet::builtin());

PromptBundle compose_prompt(const std::string& guide, const std::string& question, ModelProfile profile,
                            const TemplateSet& templates = TemplateSet::builtin());

std::string classification_prompt(std::string_view question,
                                  const TemplateSet& templates = TemplateSet::builtin());

std::string augmentation_prompt(const QARecord& record, Style target_style,
                                const std::vector<FewShotExample>& few_shot = {},
                                const TemplateSet& templates = TemplateSet::builtin());

std::string reasoning_prompt(std::string_view question, std::string_view answer,
                             const TemplateSet& templates = TemplateSet::builtin());

// "professional" / "non-professional" as written inside prompts.
std::string_view style_phrase(Style s);
// "list", "summary", "yes/no", "factoid".
std::string_view type_phrase(QuestionType t);

}  // namespace proswitch
