#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace proswitch {

enum class Style { professional, non_professional };

enum class QuestionType { list, summary, yesno, factoid };

enum class InstructionLevel { basic, type_based, knowledge_enriched };

enum class Source { bioasq, pubmedqa, icliniq, techqa, synthetic };

inline constexpr std::array<Style, 2> kAllStyles{Style::professional, Style::non_professional};
inline constexpr std::array<QuestionType, 4> kAllQuestionTypes{
    QuestionType::list, QuestionType::summary, QuestionType::yesno, QuestionType::factoid};
inline constexpr std::array<InstructionLevel, 3> kAllLevels{
    InstructionLevel::basic, InstructionLevel::type_based, InstructionLevel::knowledge_enriched};

std::string_view to_string(Style s);
std::string_view to_string(QuestionType t);
std::string_view to_string(InstructionLevel l);
std::string_view to_string(Source s);

// Canonical names only ("professional", "non_professional", ...).
std::optional<Style> parse_style(std::string_view s);
std::optional<QuestionType> parse_question_type(std::string_view s);
std::optional<InstructionLevel> parse_level(std::string_view s);
std::optional<Source> parse_source(std::string_view s);

// Throwing variants for file/CLI input.
Style require_style(std::string_view s);
QuestionType require_question_type(std::string_view s);
InstructionLevel require_level(std::string_view s);

inline Style opposite(Style s) {
  return s == Style::professional ? Style::non_professional : Style::professional;
}

}  // namespace proswitch
