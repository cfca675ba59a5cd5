#include "proswitch/eval_runner.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <sstream>
#include <tuple>

#include "proswitch/errors.hpp"
#include "proswitch/parallel.hpp"
#include "proswitch/text.hpp"

namespace proswitch {
namespace {

using json = nlohmann::json;

template <typename Fn>
void for_each_jsonl(const std::filesystem::path& path, Fn&& fn) {
  const std::string contents = text::read_file(path);
  std::istringstream in(contents);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      fn(json::parse(line));
    } catch (const json::exception& e) {
      throw ParseError(line_no, path.string() + ": " + e.what());
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::parse) throw;
      throw ParseError(line_no, path.string() + ": " + e.what());
    }
  }
}

std::string json_id(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw Error(ErrorKind::input, "id must be a string or integer");
}

double mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return xs.empty() ? 0.0 : s / static_cast<double>(xs.size());
}

}  // namespace

std::vector<EvalQuestion> read_questions(const std::filesystem::path& path) {
  std::vector<EvalQuestion> out;
  std::set<std::string> seen;
  for_each_jsonl(path, [&](const json& row) {
    EvalQuestion q;
    q.id = json_id(row.at("id"));
    q.question = row.at("question").get<std::string>();
    if (text::trim(q.question).empty()) throw Error(ErrorKind::input, "question " + q.id + " is empty");
    if (auto t = row.find("qtype"); t != row.end() && !t->is_null()) q.qtype = require_question_type(t->get<std::string>());
    if (auto s = row.find("snippet"); s != row.end() && s->is_string()) q.snippet = s->get<std::string>();
    if (!seen.insert(q.id).second) throw Error(ErrorKind::input, "duplicate question id " + q.id);
    out.push_back(std::move(q));
  });
  if (out.empty()) throw Error(ErrorKind::input, path.string() + " contains no questions");
  return out;
}

ReferenceMap read_references(const std::filesystem::path& path) {
  ReferenceMap out;
  for_each_jsonl(path, [&](const json& row) {
    std::string id = json_id(row.at("id"));
    std::vector<std::string> refs;
    if (auto r = row.find("references"); r != row.end()) refs = r->get<std::vector<std::string>>();
    else refs.push_back(row.at("reference").get<std::string>());
    if (refs.empty()) throw Error(ErrorKind::input, "question " + id + " has an empty reference list");
    if (!out.emplace(id, std::move(refs)).second) throw Error(ErrorKind::input, "duplicate references for " + id);
  });
  return out;
}

AnswerTable AnswerTable::load(const std::filesystem::path& path) {
  AnswerTable t;
  for_each_jsonl(path, [&](const json& row) {
    std::optional<int> run;
    if (auto r = row.find("run"); r != row.end() && !r->is_null()) run = r->get<int>();
    t.add(json_id(row.at("question_id")), require_style(row.at("style").get<std::string>()), run,
          row.at("answer").get<std::string>());
  });
  return t;
}

void AnswerTable::add(const std::string& question_id, Style style, std::optional<int> run, std::string answer) {
  if (run && *run < 1) throw Error(ErrorKind::input, "run index must be >= 1");
  if (!rows_.emplace(std::make_tuple(question_id, style, run.value_or(0)), std::move(answer)).second)
    throw Error(ErrorKind::input, "duplicate answer for question " + question_id);
}

const std::string* AnswerTable::find(const std::string& question_id, Style style, int run) const {
  if (auto it = rows_.find({question_id, style, run}); it != rows_.end()) return &it->second;
  if (auto it = rows_.find({question_id, style, 0}); it != rows_.end()) return &it->second;
  return nullptr;
}

EvalReport aggregate_records(const std::vector<EvalRecord>& records, const EvalConfig& config, bool with_quality) {
  if (records.empty()) throw Error(ErrorKind::input, "no evaluation records");
  EvalReport report;
  report.runs = config.runs;

  std::vector<double> thg, rsg, f1;
  for (int run = 1; run <= config.runs; ++run) {
    std::vector<EvalRecord> subset;
    std::vector<Style> preds, gold;
    for (const auto& r : records) {
      if (r.run_index != run) continue;
      subset.push_back(r);
      if (!r.reasoning_parsed) continue;
      preds.push_back(classify_professionalism(r.term_hits, r.reasoning_steps, config));
      gold.push_back(r.requested_style);
    }
    if (subset.empty()) throw Error(ErrorKind::missing_style, "run " + std::to_string(run) + " has no records");
    Gaps g = compute_gaps(subset);
    thg.push_back(g.thg);
    rsg.push_back(g.rsg);
    f1.push_back(pro_f1(preds, gold));
  }
  report.thg = mean(thg);
  report.rsg = mean(rsg);
  report.pro_f1 = mean(f1);

  std::vector<double> lens, steps, bleus, berts;
  std::set<std::string> questions;
  for (const auto& r : records) {
    questions.insert(r.question_id);
    if (!r.reasoning_parsed) ++report.excluded;
    if (r.bleu) bleus.push_back(*r.bleu);
    if (r.bert_f) berts.push_back(*r.bert_f);
    if (r.requested_style != Style::professional) continue;
    lens.push_back(static_cast<double>(r.text_length));
    if (r.reasoning_parsed) steps.push_back(r.reasoning_steps);
  }
  report.questions = questions.size();
  report.avg_len = mean(lens);
  report.avg_rs = mean(steps);
  report.rd_professional = report.avg_len > 0.0 ? reasoning_density(report.avg_len, report.avg_rs) : 0.0;
  if (with_quality) {
    if (bleus.empty() || berts.empty()) throw Error(ErrorKind::input, "references given but no quality scores");
    report.bleu = mean(bleus);
    report.bert_f = mean(berts);
  }
  return report;
}

EvalOutcome run_evaluation(const std::vector<EvalQuestion>& questions, const std::optional<ReferenceMap>& references,
                           const EvalContext& ctx, const EvalOptions& options) {
  options.config.validate();
  if (questions.empty()) throw Error(ErrorKind::input, "evaluation corpus is empty");
  if (!ctx.lexicon || !ctx.judge) throw Error(ErrorKind::input, "evaluation needs a lexicon and a judge gateway");
  if ((ctx.generator != nullptr) == (ctx.answers != nullptr))
    throw Error(ErrorKind::input, "exactly one answer source (gateway or answer file) is required");
  if (ctx.generator && !ctx.generation) throw Error(ErrorKind::input, "gateway generation needs settings");

  if (references) {
    if (!ctx.embeddings) throw Error(ErrorKind::input, "references given without an embedding provider");
    if (references->size() != questions.size())
      throw Error(ErrorKind::input, "reference count " + std::to_string(references->size()) +
                                        " does not match question count " + std::to_string(questions.size()));
    for (const auto& q : questions)
      if (!references->count(q.id)) throw Error(ErrorKind::input, "no references for question " + q.id);
  }

  // Prompts are built up front so input errors surface before any call.
  std::vector<std::array<std::string, 2>> prompts(questions.size());
  if (ctx.generator) {
    for (std::size_t qi = 0; qi < questions.size(); ++qi) {
      const auto& q = questions[qi];
      for (Style style : kAllStyles) {
        std::string guide = build_instruction(style, ctx.generation->level, q.qtype, q.snippet,
                                              ctx.generation->templates);
        prompts[qi][static_cast<std::size_t>(style)] =
            compose_prompt(guide, q.question, ctx.generation->profile, ctx.generation->templates).rendered;
      }
    }
  }

  const auto runs = static_cast<std::size_t>(options.config.runs);
  const std::size_t per_question = 2 * runs;
  std::vector<EvalRecord> records(questions.size() * per_question);

  parallel_for(records.size(), options.concurrency, [&](std::size_t task) {
    const std::size_t qi = task / per_question;
    const Style style = (task % per_question) < runs ? Style::professional : Style::non_professional;
    const int run = static_cast<int>(task % runs) + 1;
    const EvalQuestion& q = questions[qi];

    EvalRecord rec;
    rec.question_id = q.id;
    rec.requested_style = style;
    rec.run_index = run;
    if (ctx.generator) {
      GatewayRequest req = ctx.generation->params;
      req.prompt = prompts[qi][static_cast<std::size_t>(style)];
      rec.generated_text = ctx.generator->complete(req).text;
    } else {
      const std::string* answer = ctx.answers->find(q.id, style, run);
      if (!answer)
        throw Error(ErrorKind::missing_style, "no " + std::string(to_string(style)) + " answer for question " + q.id +
                                                  " run " + std::to_string(run));
      rec.generated_text = *answer;
    }

    rec.term_hits = static_cast<int>(ctx.lexicon->match(rec.generated_text).hit_count());
    rec.text_length = text_length(rec.generated_text, options.config.length_unit);
    try {
      ReasoningTrace trace =
          decompose_reasoning(rec.generated_text, q.question, *ctx.judge, options.judge_params, ctx.judge_templates);
      rec.reasoning_steps = trace.step_count;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::unparseable_trace) throw;
      rec.reasoning_parsed = false;
    }

    const bool scored = style == Style::professional || options.quality_scope == QualityScope::both_styles;
    if (references && scored) {
      const auto& refs = references->at(q.id);
      rec.bleu = bleu(rec.generated_text, refs, options.bleu);
      if (text::trim(rec.generated_text).empty()) {
        rec.bert_f = 0.0;
      } else {
        double best = 0.0;
        for (std::size_t k = 0; k < refs.size(); ++k) {
          double f = bert_score(rec.generated_text, refs[k], *ctx.embeddings).f;
          best = k == 0 ? f : std::max(best, f);
        }
        rec.bert_f = best;
      }
    }
    records[task] = std::move(rec);
  });

  EvalOutcome out;
  out.report = aggregate_records(records, options.config, references.has_value());
  out.report.model_name = options.model_name;
  out.report.dataset_name = options.dataset_name;

  auto& cfg = out.report.config;
  cfg["th_threshold"] = options.config.th_threshold;
  cfg["rs_threshold"] = options.config.rs_threshold;
  cfg["combiner"] = to_string(options.config.combiner);
  cfg["runs"] = options.config.runs;
  cfg["length_unit"] = to_string(options.config.length_unit);
  cfg["bleu_max_n"] = options.bleu.max_n;
  cfg["bleu_brevity"] = to_string(options.bleu.brevity);
  cfg["quality_scope"] = options.quality_scope == QualityScope::professional_only ? "professional" : "both";
  cfg["answer_source"] = ctx.generator ? "gateway" : "answer-files";
  if (ctx.generator) {
    cfg["instruction_level"] = to_string(ctx.generation->level);
    cfg["model_profile"] = to_string(ctx.generation->profile);
    cfg["generation_model"] = ctx.generation->params.model_name;
  }
  cfg["judge_model"] = options.judge_params.model_name;
  cfg["embedding_provider"] = references && ctx.embeddings ? ctx.embeddings->name() : "none";
  cfg["lexicon_domain"] = ctx.lexicon->domain_id();
  cfg["lexicon_digest"] = ctx.lexicon->source_digest();
  cfg["seed"] = options.seed;
  out.records = std::move(records);
  return out;
}

}  // namespace proswitch
