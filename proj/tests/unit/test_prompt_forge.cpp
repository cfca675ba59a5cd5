#include <doctest.h>

#include "proswitch/data_prep.hpp"
#include "proswitch/prompt_forge.hpp"
#include "proswitch/text.hpp"
#include "support.hpp"

using namespace proswitch;
using testsupport::error_kind;
using testsupport::golden;

namespace {

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  for (std::size_t pos = 0; (pos = s.find(from, pos)) != std::string::npos; pos += to.size())
    s.replace(pos, from.size(), to);
  return s;
}

QARecord record(QuestionType t, Style s, std::string answer = "Original answer text.") {
  QARecord r;
  r.id = "r1";
  r.question = "What is the role of X?";
  r.answer = std::move(answer);
  r.style = s;
  r.qtype = t;
  return r;
}

}  // namespace

TEST_CASE("basic and knowledge instructions match the golden text") {
  CHECK(build_instruction(Style::professional, InstructionLevel::basic) ==
        golden("instruction_basic_professional.txt"));
  CHECK(build_instruction(Style::non_professional, InstructionLevel::basic) ==
        golden("instruction_basic_non_professional.txt"));
  CHECK(build_instruction(Style::non_professional, InstructionLevel::knowledge_enriched) ==
        golden("instruction_knowledge_non_professional.txt"));
  CHECK(build_instruction(Style::professional, InstructionLevel::basic) ==
        "Answer the question and explain the reason with detailed steps using technical professional expressions.");
  CHECK(build_instruction(Style::non_professional, InstructionLevel::knowledge_enriched)
            .starts_with("Knowledge: A non-professional answer is prone to use analogies and phrasal verbs"));
}

TEST_CASE("restrictive suffixes match the golden text") {
  auto chat = compose_prompt("G", "Q", ModelProfile::chat_baseline);
  auto tuned = compose_prompt("G", "Q", ModelProfile::tuned);
  CHECK(chat.limit == golden("limit_chat_baseline.txt"));
  CHECK(tuned.limit == golden("limit_tuned.txt"));
  CHECK(chat.rendered == "G\nQ\nAnswer the question directly with a single paragraph.");
  CHECK(chat.rendered.ends_with("single paragraph."));
  CHECK(tuned.rendered.ends_with("And why?"));
  auto none = compose_prompt("G", "Q", ModelProfile::none);
  CHECK(none.rendered == "G\nQ");
  CHECK(none.limit.empty());
  CHECK(error_kind([] { compose_prompt("", "Q", ModelProfile::tuned); }) == ErrorKind::input);
  CHECK(error_kind([] { compose_prompt("G", "", ModelProfile::tuned); }) == ErrorKind::input);
}

TEST_CASE("prompt templates match the golden files") {
  const auto& t = TemplateSet::builtin();
  CHECK(t.get("prompt.classification") == golden("classification_prompt.txt"));
  CHECK(t.get("prompt.reasoning") == golden("reasoning_prompt.txt"));
  CHECK(replace_all(t.get("prompt.augmentation"), "<few_shot_examples>", "") == golden("augmentation_prompt.txt"));
}

TEST_CASE("classification prompt carries the four demonstrations") {
  std::string p = classification_prompt("Is aspirin an NSAID?");
  CHECK(p == replace_all(golden("classification_prompt.txt"), "<question>", "Is aspirin an NSAID?"));
  CHECK(p.find("Question: Which DNA sequences are more prone for the formation of R-loops?\nOutput: list") !=
        std::string::npos);
  CHECK(p.find("Question: Are ultraconserved elements often transcribed?\nOutput: yesno") != std::string::npos);
  CHECK(p.find("Question: What is clathrin?\nOutput: summary") != std::string::npos);
  CHECK(p.find("Question: Which signaling pathway does sonidegib inhibit?\nOutput: factoid") != std::string::npos);
  CHECK(p.ends_with("Question: Is aspirin an NSAID?\nOutput:"));
}

TEST_CASE("reasoning prompt fills question and answer unchanged") {
  std::string p = reasoning_prompt("Why <is> it?", "Because of A & B.");
  std::string expected = replace_all(golden("reasoning_prompt.txt"), "<question>", "Why <is> it?");
  expected = replace_all(expected, "<answer>", "Because of A & B.");
  CHECK(p == expected);
}

TEST_CASE("augmentation prompt with no caller examples") {
  auto r = record(QuestionType::list, Style::non_professional);
  std::string p = augmentation_prompt(r, Style::professional, {});
  std::string expected = golden("augmentation_prompt.txt");
  expected = replace_all(expected, "<aim_style>", "professional");
  expected = replace_all(expected, "<style>", "non-professional");
  expected = replace_all(expected, "<type>", "list");
  expected = replace_all(expected, "<answer_style>",
                         "has a list of items and explains each item with reasons in detailed steps using "
                         "technical professional expressions");
  expected = replace_all(expected, "<question>", r.question);
  expected = replace_all(expected, "<original_answer>", r.answer);
  CHECK(p == expected);
  CHECK(p.find("rephrase") != std::string::npos);
  CHECK(p.find("Question: What is gingipain?") != std::string::npos);
}

TEST_CASE("augmentation prompt for yes/no non-professional target") {
  auto r = record(QuestionType::yesno, Style::professional);
  std::string p = augmentation_prompt(r, Style::non_professional, {});
  CHECK(p.find("Are reduced-nicotine cigarettes effective for smoking cessation?") != std::string::npos);
  CHECK(p.find("3. For a yes/no question, the non-professional answer usually starts with yes or no") !=
        std::string::npos);
  CHECK(p.find("Original professional answer: Original answer text.") != std::string::npos);
}

TEST_CASE("caller few-shot examples are inserted before the request") {
  auto r = record(QuestionType::factoid, Style::professional);
  std::vector<FewShotExample> shots = {{"Q1?", "A1.", Style::professional}, {"Q2?", "A2.", Style::non_professional}};
  std::string p = augmentation_prompt(r, Style::non_professional, shots);
  auto demo = p.find("Question: Q1?\nProfessional answer: A1.\n\nQuestion: Q2?\nNon-professional answer: A2.\n\n"
                     "Please give a non-professional answer");
  CHECK(demo != std::string::npos);
  CHECK(p.find("Question: What is gingipain?") < demo);
}

TEST_CASE("augmentation prompt preconditions") {
  auto unanswered = record(QuestionType::list, Style::non_professional, "");
  CHECK(error_kind([&] { augmentation_prompt(unanswered, Style::professional, {}); }) == ErrorKind::input);
  CHECK_NOTHROW(augmentation_prompt(unanswered, Style::non_professional, {}));
  auto untyped = record(QuestionType::list, Style::professional);
  untyped.qtype.reset();
  CHECK(error_kind([&] { augmentation_prompt(untyped, Style::non_professional, {}); }) == ErrorKind::input);
}

TEST_CASE("every (qtype, style) pair has an answer-style entry") {
  for (auto t : kAllQuestionTypes)
    for (auto s : kAllStyles) CHECK_FALSE(TemplateSet::builtin().get(TemplateSet::answer_style_key(t, s)).empty());
}

TEST_CASE("the instruction grid is total") {
  for (auto s : kAllStyles)
    for (auto l : kAllLevels)
      for (auto t : kAllQuestionTypes) {
        std::string text = build_instruction(s, l, t, std::string("Snippet text."));
        CHECK_FALSE(text.empty());
        CHECK(text.find('<') == std::string::npos);
      }
  CHECK(build_instruction(Style::professional, InstructionLevel::type_based, QuestionType::list)
            .find("a list of items") != std::string::npos);
}

TEST_CASE("instruction preconditions") {
  CHECK(error_kind([] { build_instruction(Style::professional, InstructionLevel::type_based); }) ==
        ErrorKind::input);
  CHECK(error_kind([] { build_instruction(Style::professional, InstructionLevel::knowledge_enriched); }) ==
        ErrorKind::input);
  CHECK(error_kind([] {
          build_instruction(Style::professional, InstructionLevel::knowledge_enriched, std::nullopt,
                            std::string("   "));
        }) == ErrorKind::input);
  // non-professional knowledge needs no snippet
  CHECK_NOTHROW(build_instruction(Style::non_professional, InstructionLevel::knowledge_enriched));
}

TEST_CASE("professional knowledge instruction embeds the snippet") {
  auto text = build_instruction(Style::professional, InstructionLevel::knowledge_enriched, std::nullopt,
                                std::string("  R-loops form at GC-skewed promoters. "));
  CHECK(text.starts_with("Knowledge: R-loops form at GC-skewed promoters. Answer the question following the style "
                         "of the knowledge provided and "));
}

TEST_CASE("compose_prompt keeps guide and question contiguous") {
  for (auto p : {ModelProfile::chat_baseline, ModelProfile::tuned, ModelProfile::none}) {
    auto b = compose_prompt("Guide line\nsecond", "What is <x>?", p);
    CHECK(b.rendered.find("Guide line\nsecond") != std::string::npos);
    CHECK(b.rendered.find("What is <x>?") != std::string::npos);
    CHECK(b.rendered.starts_with(b.guide + "\n" + b.question));
  }
  CHECK(parse_model_profile("chat_baseline") == ModelProfile::chat_baseline);
  CHECK(error_kind([] { parse_model_profile("base"); }) == ErrorKind::input);
}

TEST_CASE("fill_slots is single pass and keeps unknown slots") {
  CHECK(fill_slots("<a> and <b> <number>", {{"a", "<b>"}, {"b", "B"}}) == "<b> and B <number>");
  CHECK(fill_slots("x < y > z", {}) == "x < y > z");
  CHECK(fill_slots("<<a>>", {{"a", "1"}}) == "<1>");
}

TEST_CASE("template file overrides") {
  auto set = TemplateSet::with_overrides("# comment\n[limit.tuned]\nExplain why.\n\n[instruction.basic.professional]\n"
                                         "Line one\nline two\n\n\n");
  CHECK(set.get("limit.tuned") == "Explain why.");
  CHECK(set.get("instruction.basic.professional") == "Line one\nline two");
  CHECK(set.get("limit.chat_baseline") == TemplateSet::builtin().get("limit.chat_baseline"));

  try {
    TemplateSet::with_overrides("\n[no.such.key]\nx\n");
    FAIL("expected parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK(error_kind([] { TemplateSet::with_overrides("stray\n[limit.tuned]\nx\n"); }) == ErrorKind::parse);
  CHECK(error_kind([] { TemplateSet::with_overrides("[prompt.reasoning]\nQuestion: <question>\n"); }) ==
        ErrorKind::parse);
  CHECK(error_kind([] { TemplateSet::builtin().get("missing"); }) == ErrorKind::input);
}

TEST_CASE("shipped template file parses to the built-in set") {
  auto shipped = TemplateSet::load(std::filesystem::path(PROSWITCH_TEMPLATES) / "instructions.txt");
  CHECK(shipped.entries() == TemplateSet::builtin().entries());
  CHECK(TemplateSet::with_overrides(TemplateSet::builtin().dump()).entries() == TemplateSet::builtin().entries());
}
