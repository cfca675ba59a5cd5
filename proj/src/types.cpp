#include "proswitch/types.hpp"

#include "proswitch/errors.hpp"

namespace proswitch {

std::string_view to_string(Style s) {
  return s == Style::professional ? "professional" : "non_professional";
}

std::string_view to_string(QuestionType t) {
  switch (t) {
    case QuestionType::list: return "list";
    case QuestionType::summary: return "summary";
    case QuestionType::yesno: return "yesno";
    case QuestionType::factoid: return "factoid";
  }
  return "";
}

std::string_view to_string(InstructionLevel l) {
  switch (l) {
    case InstructionLevel::basic: return "basic";
    case InstructionLevel::type_based: return "type_based";
    case InstructionLevel::knowledge_enriched: return "knowledge_enriched";
  }
  return "";
}

std::string_view to_string(Source s) {
  switch (s) {
    case Source::bioasq: return "bioasq";
    case Source::pubmedqa: return "pubmedqa";
    case Source::icliniq: return "icliniq";
    case Source::techqa: return "techqa";
    case Source::synthetic: return "synthetic";
  }
  return "";
}

std::optional<Style> parse_style(std::string_view s) {
  for (Style v : kAllStyles)
    if (to_string(v) == s) return v;
  return std::nullopt;
}

std::optional<QuestionType> parse_question_type(std::string_view s) {
  for (QuestionType v : kAllQuestionTypes)
    if (to_string(v) == s) return v;
  return std::nullopt;
}

std::optional<InstructionLevel> parse_level(std::string_view s) {
  for (InstructionLevel v : kAllLevels)
    if (to_string(v) == s) return v;
  return std::nullopt;
}

std::optional<Source> parse_source(std::string_view s) {
  for (Source v : {Source::bioasq, Source::pubmedqa, Source::icliniq, Source::techqa,
                   Source::synthetic})
    if (to_string(v) == s) return v;
  return std::nullopt;
}

Style require_style(std::string_view s) {
  if (auto v = parse_style(s)) return *v;
  throw Error(ErrorKind::input, "unknown style '" + std::string(s) + "'");
}

QuestionType require_question_type(std::string_view s) {
  if (auto v = parse_question_type(s)) return *v;
  throw Error(ErrorKind::input, "unknown question type '" + std::string(s) + "'");
}

InstructionLevel require_level(std::string_view s) {
  if (auto v = parse_level(s)) return *v;
  throw Error(ErrorKind::input, "unknown instruction level '" + std::string(s) + "'");
}

}  // namespace proswitch
