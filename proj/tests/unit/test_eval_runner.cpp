#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles/oracles.hpp"
#include "proswitch/embedding.hpp"
#include "proswitch/eval_runner.hpp"
#include "proswitch/lexicon.hpp"
#include "proswitch/llm_gateway.hpp"
#include "proswitch/report.hpp"
#include "proswitch/text.hpp"
#include "support.hpp"

using namespace proswitch;
using testsupport::error_kind;
using testsupport::fixture;

namespace {

struct Fixture8 {
  TermLexicon lexicon = build_lexicon(fixture("eval8/terms.txt"), LexiconFormat::plain_list, "medical");
  std::vector<EvalQuestion> questions = read_questions(fixture("eval8/questions.jsonl"));
  ReferenceMap references = read_references(fixture("eval8/references.jsonl"));
  Gateway gateway{MockProvider::from_file(fixture("eval8/mock.json")), GatewayOptions{}};
  HashedTrigramProvider embeddings;
  GenerationSettings generation;

  EvalContext gateway_context() {
    EvalContext ctx;
    ctx.lexicon = &lexicon;
    ctx.judge = &gateway;
    ctx.generator = &gateway;
    ctx.generation = &generation;
    ctx.embeddings = &embeddings;
    return ctx;
  }
};

EvalOptions options(int runs = 3) {
  EvalOptions o;
  o.config.runs = runs;
  o.concurrency = 4;
  return o;
}

}  // namespace

TEST_CASE("fixture readers") {
  Fixture8 f;
  CHECK(f.questions.size() == 8);
  CHECK(f.references.size() == 8);
  CHECK(f.references.at("q3").size() == 2);

  testsupport::TempDir dir;
  auto write = [&](const std::string& name, const std::string& body) {
    text::write_file_atomic(dir / name, body);
    return dir / name;
  };
  CHECK(error_kind([&] { read_questions(write("dup.jsonl", "{\"id\":\"a\",\"question\":\"x\"}\n{\"id\":\"a\",\"question\":\"y\"}\n")); }) ==
        ErrorKind::parse);
  CHECK(error_kind([&] { read_questions(write("empty.jsonl", "\n\n")); }) == ErrorKind::input);
  CHECK(error_kind([&] { read_questions(write("bad.jsonl", "{\"id\":\"a\",\"question\":\"x\"}\n{oops\n")); }) ==
        ErrorKind::parse);
  CHECK(error_kind([&] { read_references(write("r.jsonl", "{\"id\":\"a\",\"references\":[]}\n")); }) ==
        ErrorKind::parse);
  CHECK(error_kind([&] { read_questions(dir / "missing.jsonl"); }) == ErrorKind::input);

  auto refs = read_references(write("single.jsonl", "{\"id\":7,\"reference\":\"seven\"}\n"));
  CHECK(refs.at("7") == std::vector<std::string>{"seven"});
}

TEST_CASE("gateway and answer-file sources agree") {
  Fixture8 f;
  auto via_gateway = run_evaluation(f.questions, f.references, f.gateway_context(), options());

  AnswerTable answers = AnswerTable::load(fixture("eval8/answers.jsonl"));
  EvalContext ctx = f.gateway_context();
  ctx.generator = nullptr;
  ctx.generation = nullptr;
  ctx.answers = &answers;
  auto via_file = run_evaluation(f.questions, f.references, ctx, options());

  REQUIRE(via_gateway.records.size() == 8 * 2 * 3);
  CHECK(records_dump(via_gateway.records) == records_dump(via_file.records));
  CHECK(via_gateway.report.thg == via_file.report.thg);
  CHECK(via_file.report.config["answer_source"] == "answer-files");
  CHECK(via_gateway.report.config["answer_source"] == "gateway");
}

TEST_CASE("record layout: question order, professional first, run ascending") {
  Fixture8 f;
  auto out = run_evaluation(f.questions, f.references, f.gateway_context(), options());
  for (std::size_t i = 0; i < out.records.size(); ++i) {
    const auto& r = out.records[i];
    CHECK(r.question_id == f.questions[i / 6].id);
    CHECK(r.requested_style == ((i % 6) < 3 ? Style::professional : Style::non_professional));
    CHECK(r.run_index == static_cast<int>(i % 3) + 1);
  }
}

TEST_CASE("deterministic mock: one run equals three runs") {
  Fixture8 f;
  auto one = run_evaluation(f.questions, f.references, f.gateway_context(), options(1)).report;
  auto three = run_evaluation(f.questions, f.references, f.gateway_context(), options(3)).report;
  CHECK(one.thg == doctest::Approx(three.thg).epsilon(1e-12));
  CHECK(one.rsg == doctest::Approx(three.rsg).epsilon(1e-12));
  CHECK(one.pro_f1 == doctest::Approx(three.pro_f1).epsilon(1e-12));
  CHECK(*one.bleu == doctest::Approx(*three.bleu).epsilon(1e-12));
  CHECK(one.excluded * 3 == three.excluded);
}

TEST_CASE("unparseable traces are excluded and counted") {
  Fixture8 f;
  auto out = run_evaluation(f.questions, f.references, f.gateway_context(), options());
  std::size_t unparsed = 0;
  for (const auto& r : out.records) unparsed += r.reasoning_parsed ? 0 : 1;
  CHECK(unparsed == 3);
  CHECK(out.report.excluded == 3);
}

TEST_CASE("aggregates match an independent recomputation") {
  Fixture8 f;
  EvalOptions opt = options();
  auto out = run_evaluation(f.questions, f.references, f.gateway_context(), opt);
  const auto& recs = out.records;

  double thg = 0, rsg = 0, f1 = 0;
  for (int run = 1; run <= 3; ++run) {
    std::vector<double> tp, tn, sp, sn;
    std::vector<int> pred, gold;
    for (const auto& r : recs) {
      if (r.run_index != run) continue;
      bool pro = r.requested_style == Style::professional;
      (pro ? tp : tn).push_back(r.term_hits);
      if (!r.reasoning_parsed) continue;
      (pro ? sp : sn).push_back(r.reasoning_steps);
      pred.push_back(r.term_hits >= 1 && r.reasoning_steps >= 4 ? 1 : 0);
      gold.push_back(pro ? 1 : 0);
    }
    thg += oracle::mean(tp) - oracle::mean(tn);
    rsg += oracle::mean(sp) - oracle::mean(sn);
    f1 += oracle::f1_from_confusion(pred, gold);
  }
  std::vector<double> len, rs, bl, bf;
  for (const auto& r : recs) {
    if (r.bleu) bl.push_back(*r.bleu);
    if (r.bert_f) bf.push_back(*r.bert_f);
    if (r.requested_style != Style::professional) continue;
    len.push_back(static_cast<double>(r.text_length));
    if (r.reasoning_parsed) rs.push_back(r.reasoning_steps);
  }
  CHECK(out.report.thg == doctest::Approx(thg / 3).epsilon(1e-12));
  CHECK(out.report.rsg == doctest::Approx(rsg / 3).epsilon(1e-12));
  CHECK(out.report.pro_f1 == doctest::Approx(f1 / 3).epsilon(1e-12));
  CHECK(out.report.avg_len == doctest::Approx(oracle::mean(len)).epsilon(1e-12));
  CHECK(out.report.avg_rs == doctest::Approx(oracle::mean(rs)).epsilon(1e-12));
  CHECK(out.report.rd_professional == doctest::Approx(oracle::mean(rs) / oracle::mean(len)).epsilon(1e-12));
  CHECK(*out.report.bleu == doctest::Approx(oracle::mean(bl)).epsilon(1e-12));
  CHECK(*out.report.bert_f == doctest::Approx(oracle::mean(bf)).epsilon(1e-12));
  CHECK(bl.size() == 8 * 3);  // professional answers only by default
}

TEST_CASE("quality scope covers both styles on request") {
  Fixture8 f;
  EvalOptions opt = options(1);
  opt.quality_scope = QualityScope::both_styles;
  auto out = run_evaluation(f.questions, f.references, f.gateway_context(), opt);
  for (const auto& r : out.records) CHECK(r.bleu.has_value());
  CHECK(out.report.config["quality_scope"] == "both");
}

TEST_CASE("BERT uses the best reference") {
  Fixture8 f;
  auto out = run_evaluation(f.questions, f.references, f.gateway_context(), options(1));
  const auto& refs = f.references.at("q3");
  for (const auto& r : out.records) {
    if (r.question_id != "q3" || !r.bert_f) continue;
    double a = bert_score(r.generated_text, refs[0], f.embeddings).f;
    double b = bert_score(r.generated_text, refs[1], f.embeddings).f;
    CHECK(*r.bert_f == doctest::Approx(std::max(a, b)).epsilon(1e-12));
  }
}

TEST_CASE("no references means no quality fields") {
  Fixture8 f;
  auto out = run_evaluation(f.questions, std::nullopt, f.gateway_context(), options(1));
  CHECK_FALSE(out.report.bleu.has_value());
  CHECK_FALSE(out.report.bert_f.has_value());
  for (const auto& r : out.records) CHECK_FALSE(r.bleu.has_value());
  auto j = report_to_json(out.report);
  CHECK_FALSE(j.contains("bleu"));
  CHECK_FALSE(j.contains("bert_f"));
  CHECK(j["config"]["embedding_provider"] == "none");
}

TEST_CASE("input validation") {
  Fixture8 f;
  ReferenceMap short_refs = f.references;
  short_refs.erase("q8");
  CHECK(error_kind([&] { run_evaluation(f.questions, short_refs, f.gateway_context(), options(1)); }) ==
        ErrorKind::input);

  ReferenceMap renamed = short_refs;
  renamed["zz"] = {"text"};
  CHECK(error_kind([&] { run_evaluation(f.questions, renamed, f.gateway_context(), options(1)); }) ==
        ErrorKind::input);

  CHECK(error_kind([&] { run_evaluation({}, std::nullopt, f.gateway_context(), options(1)); }) == ErrorKind::input);

  EvalContext both = f.gateway_context();
  AnswerTable answers;
  both.answers = &answers;
  CHECK(error_kind([&] { run_evaluation(f.questions, std::nullopt, both, options(1)); }) == ErrorKind::input);

  EvalContext no_embed = f.gateway_context();
  no_embed.embeddings = nullptr;
  CHECK(error_kind([&] { run_evaluation(f.questions, f.references, no_embed, options(1)); }) == ErrorKind::input);

  EvalOptions bad = options(0);
  CHECK(error_kind([&] { run_evaluation(f.questions, std::nullopt, f.gateway_context(), bad); }) == ErrorKind::input);
}

TEST_CASE("missing answer raises missing_style") {
  Fixture8 f;
  AnswerTable answers;
  for (const auto& q : f.questions) answers.add(q.id, Style::professional, std::nullopt, "Some answer.");
  Gateway judge(std::make_shared<MockProvider>(std::map<std::string, std::string>{{"", "1. One step."}}), {});
  EvalContext ctx = f.gateway_context();
  ctx.judge = &judge;
  ctx.generator = nullptr;
  ctx.generation = nullptr;
  ctx.answers = &answers;
  CHECK(error_kind([&] { run_evaluation(f.questions, std::nullopt, ctx, options(1)); }) == ErrorKind::missing_style);
}

TEST_CASE("AnswerTable run lookup") {
  AnswerTable t;
  t.add("q", Style::professional, std::nullopt, "any");
  t.add("q", Style::professional, 2, "second");
  CHECK(*t.find("q", Style::professional, 1) == "any");
  CHECK(*t.find("q", Style::professional, 2) == "second");
  CHECK(t.find("q", Style::non_professional, 1) == nullptr);
  CHECK(error_kind([&] { t.add("q", Style::professional, 2, "again"); }) == ErrorKind::input);
  CHECK(error_kind([&] { t.add("q", Style::professional, 0, "zero"); }) == ErrorKind::input);
}

TEST_CASE("aggregate_records edge cases") {
  EvalConfig cfg;
  cfg.runs = 2;
  CHECK(error_kind([&] { aggregate_records({}, cfg, false); }) == ErrorKind::input);

  EvalRecord p;
  p.question_id = "a";
  p.run_index = 1;
  p.text_length = 10;
  EvalRecord n = p;
  n.requested_style = Style::non_professional;
  CHECK(error_kind([&] { aggregate_records({p, n}, cfg, false); }) == ErrorKind::missing_style);
  cfg.runs = 1;
  CHECK(error_kind([&] { aggregate_records({p}, cfg, false); }) == ErrorKind::missing_style);
  CHECK(error_kind([&] { aggregate_records({p, n}, cfg, true); }) == ErrorKind::input);
  CHECK_NOTHROW(aggregate_records({p, n}, cfg, false));
}

TEST_CASE("report is identical across concurrency levels") {
  Fixture8 f;
  EvalOptions serial = options();
  serial.concurrency = 1;
  EvalOptions wide = options();
  wide.concurrency = 16;
  auto a = run_evaluation(f.questions, f.references, f.gateway_context(), serial);
  auto b = run_evaluation(f.questions, f.references, f.gateway_context(), wide);
  CHECK(render_report(a.report, ReportFormat::json) == render_report(b.report, ReportFormat::json));
  CHECK(records_dump(a.records) == records_dump(b.records));
}
