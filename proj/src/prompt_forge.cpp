#include "proswitch/prompt_forge.hpp"

#include <sstream>

#include "proswitch/data_prep.hpp"
#include "proswitch/errors.hpp"
#include "proswitch/text.hpp"

namespace proswitch {
namespace {

constexpr std::string_view kProfessionalBasic =
    "Answer the question and explain the reason with detailed steps using technical professional "
    "expressions.";
constexpr std::string_view kNonProfessionalBasic =
    "Answer the question and explain the reason with a simple explanation using casual "
    "non-professional expressions.";

constexpr std::string_view kProfessionalKnowledge =
    "Knowledge: <article_snippet>. Answer the question following the style of the knowledge provided "
    "and explain the reason with detailed steps using technical professional expressions.";
constexpr std::string_view kNonProfessionalKnowledge =
    "Knowledge: A non-professional answer is prone to use analogies and phrasal verbs to explain the "
    "question with fewer technological and organizational expressions. Answer the question following "
    "the knowledge using non-professional expressions.";

constexpr std::string_view kClassificationPrompt =
    "You are tasked to classify a question into four types, following these guidelines:\n"
    "1. Output the type of the question based on its form of asking. Possible types are: yesno, list, "
    "factoid, summary.\n"
    "2. Just output one type without any descriptive information.\n"
    "3. Summary questions are usually more general, but factoid questions are more specific.\n"
    "4. You can infer the type according to the display forms of possible answers.\n"
    "Here are some examples:\n"
    "Question: Which DNA sequences are more prone for the formation of R-loops?\n"
    "Output: list\n"
    "Question: Are ultraconserved elements often transcribed?\n"
    "Output: yesno\n"
    "Question: What is clathrin?\n"
    "Output: summary\n"
    "Question: Which signaling pathway does sonidegib inhibit?\n"
    "Output: factoid\n"
    "Please output the type of the following question:\n"
    "Question: <question>\n"
    "Output:";

constexpr std::string_view kAugmentationPrompt =
    "You are tasked to answer the question with <aim_style> language, following these guidelines:\n"
    "1. You can refer to the provided examples to learn the differences between professional and "
    "non-professional answers.\n"
    "2. You can refer to the original <style> answer and rephrase into a different <aim_style> answer.\n"
    "3. For a <type> question, the <aim_style> answer usually <answer_style>.\n"
    "\n"
    "Here are examples of professional and non-professional answers:\n"
    "\n"
    "Question: What is gingipain?\n"
    "Professional answer: Porphyromonas gingivalis is a keystone periodontal pathogen that has been "
    "associated with autoimmune disorders. The cell surface proteases Lys-gingipain (Kgp) and "
    "Arg-gingipains (RgpA and RgpB) are major virulence factors, and their proteolytic activity is "
    "enhanced by small peptides such as glycylglycine (GlyGly).\n"
    "\n"
    "Question: Are reduced-nicotine cigarettes effective for smoking cessation?\n"
    "Non-professional answer: Yes, reduced-nicotine cigarettes are effective for smoking cessation.\n"
    "\n"
    "<few_shot_examples>"
    "Please give a <aim_style> answer for the following question:\n"
    "Question: <question>\n"
    "Original <style> answer: <original_answer>\n"
    "Output:";

constexpr std::string_view kReasoningPrompt =
    "You are an assistant to explain the reasoning path of the answer. Here are some requirements:\n"
    "1. Explain the reasoning path of the answer step by step with the content in both question and "
    "answer.\n"
    "2. Provide the total steps at the last line, with the format: Total steps: <number>.\n"
    "Here is the question and the answer:\n"
    "Question: <question>\n"
    "Answer: <answer>";

// Type-based wording. Only the list entry's opening phrase is fixed by the
// method; the rest follows the same pattern.
constexpr std::string_view kProfessionalTail =
    "using technical professional expressions.";
constexpr std::string_view kNonProfessionalTail =
    "using casual non-professional expressions.";

std::map<std::string, std::string> builtin_entries() {
  std::map<std::string, std::string> e;
  const std::string pro_tail(kProfessionalTail);
  const std::string np_tail(kNonProfessionalTail);

  e["instruction.basic.professional"] = std::string(kProfessionalBasic);
  e["instruction.basic.non_professional"] = std::string(kNonProfessionalBasic);
  e["instruction.knowledge_enriched.professional"] = std::string(kProfessionalKnowledge);
  e["instruction.knowledge_enriched.non_professional"] = std::string(kNonProfessionalKnowledge);

  e["instruction.type_based.professional.list"] =
      "Answer the question with a list of items and explain each item with reasons in detailed steps " +
      pro_tail;
  e["instruction.type_based.non_professional.list"] =
      "Answer the question with a list of items and explain each item with a simple explanation " +
      np_tail;
  e["instruction.type_based.professional.summary"] =
      "Answer the question with a comprehensive summary and explain the underlying mechanisms in "
      "detailed steps " + pro_tail;
  e["instruction.type_based.non_professional.summary"] =
      "Answer the question with a short summary and explain it with a simple explanation " + np_tail;
  e["instruction.type_based.professional.yesno"] =
      "Answer the question with yes or no first and explain the reason with detailed steps " + pro_tail;
  e["instruction.type_based.non_professional.yesno"] =
      "Answer the question with yes or no first and explain the reason with a simple explanation " +
      np_tail;
  e["instruction.type_based.professional.factoid"] =
      "Answer the question with the specific fact asked for and explain the reason with detailed steps " +
      pro_tail;
  e["instruction.type_based.non_professional.factoid"] =
      "Answer the question with the specific fact asked for and explain the reason with a simple "
      "explanation " + np_tail;

  e["answer_style.list.professional"] =
      "has a list of items and explains each item with reasons in detailed steps using technical "
      "professional expressions";
  e["answer_style.list.non_professional"] =
      "has a list of items and explains each item with a simple explanation using casual "
      "non-professional expressions";
  e["answer_style.summary.professional"] =
      "gives a comprehensive summary and explains the underlying mechanisms in detailed steps using "
      "technical professional expressions";
  e["answer_style.summary.non_professional"] =
      "gives a short summary with a simple explanation using casual non-professional expressions";
  e["answer_style.yesno.professional"] =
      "starts with yes or no and explains the reason in detailed steps using technical professional "
      "expressions";
  e["answer_style.yesno.non_professional"] =
      "starts with yes or no and explains the reason with a simple explanation using casual "
      "non-professional expressions";
  e["answer_style.factoid.professional"] =
      "states the specific fact and explains the reason in detailed steps using technical professional "
      "expressions";
  e["answer_style.factoid.non_professional"] =
      "states the specific fact and explains the reason with a simple explanation using casual "
      "non-professional expressions";

  e["limit.chat_baseline"] = "Answer the question directly with a single paragraph.";
  e["limit.tuned"] = "And why?";
  e["limit.none"] = "";

  e["prompt.classification"] = std::string(kClassificationPrompt);
  e["prompt.augmentation"] = std::string(kAugmentationPrompt);
  e["prompt.reasoning"] = std::string(kReasoningPrompt);
  return e;
}

// Slots each entry must keep when overridden.
std::vector<std::string> required_slots(const std::string& key) {
  if (key == "instruction.knowledge_enriched.professional") return {"<article_snippet>"};
  if (key == "prompt.classification") return {"<question>"};
  if (key == "prompt.reasoning") return {"<question>", "<answer>"};
  if (key == "prompt.augmentation")
    return {"<aim_style>", "<question>", "<original_answer>", "<few_shot_examples>"};
  return {};
}

}  // namespace

ModelProfile parse_model_profile(std::string_view s) {
  if (s == "chat_baseline") return ModelProfile::chat_baseline;
  if (s == "tuned") return ModelProfile::tuned;
  if (s == "none") return ModelProfile::none;
  throw Error(ErrorKind::input, "unknown model profile '" + std::string(s) + "'");
}

std::string_view to_string(ModelProfile p) {
  switch (p) {
    case ModelProfile::chat_baseline: return "chat_baseline";
    case ModelProfile::tuned: return "tuned";
    case ModelProfile::none: return "none";
  }
  return "";
}

std::string fill_slots(std::string_view tmpl, const std::map<std::string, std::string>& slots) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    auto lt = tmpl.find('<', i);
    if (lt == std::string_view::npos) {
      out.append(tmpl.substr(i));
      break;
    }
    out.append(tmpl.substr(i, lt - i));
    auto gt = tmpl.find('>', lt + 1);
    if (gt != std::string_view::npos) {
      auto it = slots.find(std::string(tmpl.substr(lt + 1, gt - lt - 1)));
      if (it != slots.end()) {
        out.append(it->second);
        i = gt + 1;
        continue;
      }
    }
    out.push_back('<');
    i = lt + 1;
  }
  return out;
}

const TemplateSet& TemplateSet::builtin() {
  static const TemplateSet set = [] {
    TemplateSet s;
    s.entries_ = builtin_entries();
    return s;
  }();
  return set;
}

TemplateSet TemplateSet::with_overrides(std::string_view contents) {
  TemplateSet set = builtin();
  std::optional<std::string> key;
  std::size_t key_line = 0;
  std::string body;
  auto flush = [&] {
    if (!key) return;
    while (!body.empty() && (body.back() == '\n' || body.back() == '\r')) body.pop_back();
    if (!set.entries_.count(*key)) throw ParseError(key_line, "unknown template key [" + *key + "]");
    for (const auto& slot : required_slots(*key))
      if (body.find(slot) == std::string::npos)
        throw ParseError(key_line, "template [" + *key + "] is missing slot " + slot);
    set.entries_[*key] = body;
    body.clear();
  };

  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < contents.size()) {
    auto nl = contents.find('\n', start);
    if (nl == std::string_view::npos) nl = contents.size();
    std::string_view line = contents.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty() && line.front() == '#') continue;
    if (line.size() >= 2 && line.front() == '[' && line.back() == ']') {
      flush();
      key = std::string(line.substr(1, line.size() - 2));
      key_line = line_no;
      continue;
    }
    if (!key) {
      if (!text::trim(line).empty()) throw ParseError(line_no, "text before the first [section]");
      continue;
    }
    body.append(line);
    body.push_back('\n');
  }
  flush();
  return set;
}

TemplateSet TemplateSet::load(const std::filesystem::path& path) {
  return with_overrides(text::read_file(path));
}

const std::string& TemplateSet::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw Error(ErrorKind::input, "no template named " + key);
  return it->second;
}

std::string TemplateSet::dump() const {
  std::ostringstream out;
  for (const auto& [key, value] : entries_) out << '[' << key << "]\n" << value << "\n\n";
  return out.str();
}

std::string TemplateSet::instruction_key(Style style, InstructionLevel level,
                                         std::optional<QuestionType> qtype) {
  std::string key = "instruction.";
  key += to_string(level);
  key += '.';
  key += to_string(style);
  if (level == InstructionLevel::type_based) {
    if (!qtype) throw Error(ErrorKind::input, "type_based instructions need a question type");
    key += '.';
    key += to_string(*qtype);
  }
  return key;
}

std::string TemplateSet::answer_style_key(QuestionType qtype, Style style) {
  return "answer_style." + std::string(to_string(qtype)) + "." + std::string(to_string(style));
}

std::string_view style_phrase(Style s) {
  return s == Style::professional ? "professional" : "non-professional";
}

std::string_view type_phrase(QuestionType t) {
  return t == QuestionType::yesno ? "yes/no" : to_string(t);
}

std::string build_instruction(Style style, InstructionLevel level, std::optional<QuestionType> qtype,
                              std::optional<std::string> snippet, const TemplateSet& templates) {
  const std::string& tmpl = templates.get(TemplateSet::instruction_key(style, level, qtype));
  if (level == InstructionLevel::knowledge_enriched && style == Style::professional) {
    if (!snippet || text::trim(*snippet).empty())
      throw Error(ErrorKind::input, "professional knowledge_enriched instructions need an article snippet");
    std::string trimmed = text::trim(*snippet);
    if (trimmed.back() == '.') trimmed.pop_back();  // the template supplies the period
    return fill_slots(tmpl, {{"article_snippet", trimmed}});
  }
  return tmpl;
}

PromptBundle compose_prompt(const std::string& guide, const std::string& question, ModelProfile profile,
                            const TemplateSet& templates) {
  if (guide.empty()) throw Error(ErrorKind::input, "prompt guide is empty");
  if (question.empty()) throw Error(ErrorKind::input, "prompt question is empty");
  PromptBundle b;
  b.guide = guide;
  b.question = question;
  b.limit = templates.get("limit." + std::string(to_string(profile)));
  b.rendered = guide;
  b.rendered += kPromptSeparator;
  b.rendered += question;
  if (!b.limit.empty()) {
    b.rendered += kPromptSeparator;
    b.rendered += b.limit;
  }
  return b;
}

std::string classification_prompt(std::string_view question, const TemplateSet& templates) {
  return fill_slots(templates.get("prompt.classification"), {{"question", std::string(question)}});
}

std::string augmentation_prompt(const QARecord& record, Style target_style,
                                const std::vector<FewShotExample>& few_shot, const TemplateSet& templates) {
  if (record.question.empty()) throw Error(ErrorKind::input, "record " + record.id + " has no question");
  if (!record.qtype) throw Error(ErrorKind::input, "record " + record.id + " has no question type");
  if (target_style == Style::professional && text::trim(record.answer).empty())
    throw Error(ErrorKind::input,
                "record " + record.id + ": professional augmentation rephrases an original answer, none given");

  std::string shots;
  for (const auto& ex : few_shot) {
    shots += "Question: " + ex.question + "\n";
    shots += ex.style == Style::professional ? "Professional answer: " : "Non-professional answer: ";
    shots += ex.answer + "\n\n";
  }
  return fill_slots(templates.get("prompt.augmentation"),
                    {{"aim_style", std::string(style_phrase(target_style))},
                     {"style", std::string(style_phrase(record.style))},
                     {"type", std::string(type_phrase(*record.qtype))},
                     {"answer_style", templates.get(TemplateSet::answer_style_key(*record.qtype, target_style))},
                     {"few_shot_examples", shots},
                     {"question", record.question},
                     {"original_answer", record.answer}});
}

std::string reasoning_prompt(std::string_view question, std::string_view answer, const TemplateSet& templates) {
  return fill_slots(templates.get("prompt.reasoning"),
                    {{"question", std::string(question)}, {"answer", std::string(answer)}});
}

}  // namespace proswitch
