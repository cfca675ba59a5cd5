#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <mutex>
#include <optional>
#include <sstream>

#include "proswitch/config.hpp"
#include "proswitch/data_prep.hpp"
#include "proswitch/errors.hpp"
#include "proswitch/eval_runner.hpp"
#include "proswitch/lexicon.hpp"
#include "proswitch/llm_gateway.hpp"
#include "proswitch/parallel.hpp"
#include "proswitch/report.hpp"
#include "proswitch/style_metrics.hpp"
#include "proswitch/text.hpp"

namespace proswitch::cli {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

struct GlobalOptions {
  std::string config_path;
  std::uint64_t seed = 0;
  std::string mock_path;
  std::string cache_dir = ".proswitch-cache";
  std::size_t concurrency = 4;
  bool no_cache = false;  // data commands cache by default
  bool cache = false;     // eval commands do not
};

// Settings resolved from --config and then overridden by flags.
struct Settings {
  std::map<std::string, std::string> kv;

  std::string get(const std::string& key, const std::string& fallback) const {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
  }
  int get_int(const std::string& key, int fallback) const {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
      std::size_t used = 0;
      int v = std::stoi(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument(key);
      return v;
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::input, "config key " + key + " expects an integer, got '" + it->second + "'");
    }
  }
  double get_real(const std::string& key, double fallback) const {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
      std::size_t used = 0;
      double v = std::stod(it->second, &used);
      if (used != it->second.size()) throw std::invalid_argument(key);
      return v;
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::input, "config key " + key + " expects a number, got '" + it->second + "'");
    }
  }
};

const std::vector<std::string> kKnownKeys = {
    "th_threshold", "rs_threshold", "combiner", "runs", "length_unit", "bleu_max_n", "bleu_brevity",
    "quality_scope", "instruction_level", "model_profile", "generation_model", "judge_model", "temperature",
    "top_p", "max_tokens", "judge_temperature", "judge_max_tokens", "concurrency", "seed", "embedding_url",
    "templates", "model_name", "dataset_name"};

Settings load_settings(const GlobalOptions& g) {
  Settings s;
  if (!g.config_path.empty()) s.kv = load_key_value(g.config_path);
  for (const auto& [k, v] : s.kv)
    if (std::find(kKnownKeys.begin(), kKnownKeys.end(), k) == kKnownKeys.end())
      throw Error(ErrorKind::input, "unknown config key '" + k + "'");
  return s;
}

void write_output(const std::string& path, const std::string& contents, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << contents;
  } else {
    text::write_file_atomic(path, contents);
  }
}

TemplateSet load_templates(const Settings& s, const std::string& flag) {
  std::string path = flag.empty() ? s.get("templates", "") : flag;
  return path.empty() ? TemplateSet::builtin() : TemplateSet::load(path);
}

std::shared_ptr<ChatProvider> make_provider(const GlobalOptions& g) {
  if (!g.mock_path.empty()) return MockProvider::from_file(g.mock_path);
  if (auto http = HttpChatProvider::from_environment()) return http;
  throw Error(ErrorKind::input, "no LLM provider: pass --mock <script> or set PROSWITCH_API_URL");
}

std::unique_ptr<Gateway> make_gateway(const GlobalOptions& g, const Settings& s, bool cache_by_default) {
  GatewayOptions opts;
  opts.cache_enabled = cache_by_default ? !g.no_cache : g.cache;
  if (opts.cache_enabled) opts.cache_dir = g.cache_dir;
  opts.max_in_flight = static_cast<std::size_t>(s.get_int("concurrency", static_cast<int>(g.concurrency)));
  return std::make_unique<Gateway>(make_provider(g), opts);
}

GatewayRequest generation_params(const Settings& s) {
  GatewayRequest r;
  r.model_name = s.get("generation_model", "default");
  r.temperature = s.get_real("temperature", 0.7);
  r.top_p = s.get_real("top_p", 1.0);
  r.max_tokens = s.get_int("max_tokens", 1024);
  return r;
}

GatewayRequest judge_params(const Settings& s) {
  GatewayRequest r;
  r.model_name = s.get("judge_model", "default");
  r.temperature = s.get_real("judge_temperature", 0.0);
  r.top_p = 1.0;
  r.max_tokens = s.get_int("judge_max_tokens", 1024);
  return r;
}

EvalConfig eval_config(const Settings& s) {
  EvalConfig c;
  c.th_threshold = s.get_int("th_threshold", c.th_threshold);
  c.rs_threshold = s.get_int("rs_threshold", c.rs_threshold);
  c.combiner = parse_combiner(s.get("combiner", "AND"));
  c.runs = s.get_int("runs", c.runs);
  c.length_unit = parse_length_unit(s.get("length_unit", "characters"));
  c.validate();
  return c;
}

std::vector<LabeledPoint> read_labeled(const std::string& path) {
  std::vector<LabeledPoint> out;
  std::istringstream in(text::read_file(path));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    try {
      if (t.front() == '{') {
        json j = json::parse(t);
        out.push_back({j.at("term_hits").get<int>(), j.at("reasoning_steps").get<int>(),
                       require_style(j.at("label").get<std::string>())});
        continue;
      }
      std::vector<std::string> cells;
      std::stringstream ss(t);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(text::trim(cell));
      if (cells.size() != 3) throw Error(ErrorKind::input, "expected term_hits,reasoning_steps,label");
      if (cells[0] == "term_hits") continue;  // header
      out.push_back({std::stoi(cells[0]), std::stoi(cells[1]), require_style(cells[2])});
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    } catch (const std::logic_error& e) {
      throw ParseError(line_no, std::string("bad labeled row: ") + e.what());
    }
  }
  return out;
}

std::vector<int> read_ratings(const std::string& path) {
  std::vector<int> out;
  std::string contents = text::read_file(path);
  std::replace(contents.begin(), contents.end(), ',', ' ');
  for (const auto& tok : text::split_whitespace(contents)) {
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(tok, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used != tok.size()) throw Error(ErrorKind::input, "rating '" + tok + "' is not an integer");
    out.push_back(v);
  }
  return out;
}

ordered_json fit_to_json(const ThresholdFit& f) {
  ordered_json j;
  j["th_threshold"] = f.th_threshold;
  j["rs_threshold"] = f.rs_threshold;
  j["agreement"] = f.agreement;
  j["auc"] = f.auc;
  return j;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Professional / non-professional style data preparation and evaluation"};
  app.name("proswitch");
  app.fallthrough();
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config_path, "key=value settings file");
  app.add_option("--seed", g.seed, "seed for sampling and plans");
  app.add_option("--mock", g.mock_path, "mock LLM script (JSON map of prompt substring -> reply)");
  app.add_option("--cache-dir", g.cache_dir, "gateway response cache directory");
  app.add_option("--concurrency", g.concurrency, "maximum concurrent LLM calls")->check(CLI::PositiveNumber);
  app.add_flag("--no-cache", g.no_cache, "disable the response cache for data commands");
  app.add_flag("--cache", g.cache, "enable the response cache for eval commands");

  std::function<void()> action;

  // lexicon build
  auto* lexicon = app.add_subcommand("lexicon", "domain term lexicons")->require_subcommand(1);
  std::string lex_input, lex_format = "plain-list", lex_domain = "default", lex_out;
  {
    auto* build = lexicon->add_subcommand("build", "build a lexicon cache file");
    build->add_option("--input", lex_input)->required();
    build->add_option("--format", lex_format, "mesh-xml or plain-list");
    build->add_option("--domain", lex_domain);
    build->add_option("--out", lex_out)->required();
    build->callback([&] {
      action = [&] {
        TermLexicon lex = build_lexicon(lex_input, parse_lexicon_format(lex_format), lex_domain);
        lex.save(lex_out);
        out << "lexicon " << lex.domain_id() << ": " << lex.size() << " terms, digest " << lex.source_digest()
            << "\n";
      };
    });
  }

  // data *
  auto* data = app.add_subcommand("data", "training data preparation")->require_subcommand(1);
  std::string d_input, d_out, d_format = "jsonl", d_errors, d_review, d_plan, d_target_style, d_level = "basic",
                           d_templates;
  std::size_t d_target = 0, d_count = 0;
  {
    auto* ingest_cmd = data->add_subcommand("ingest", "normalize a QA source into records");
    ingest_cmd->add_option("--input", d_input)->required();
    ingest_cmd->add_option("--format", d_format, "bioasq, pubmedqa or jsonl");
    ingest_cmd->add_option("--out", d_out)->required();
    ingest_cmd->add_option("--errors", d_errors, "JSON Lines file for rejected rows");
    ingest_cmd->callback([&] {
      action = [&] {
        IngestResult res = ingest(d_input, parse_source_format(d_format));
        std::sort(res.records.begin(), res.records.end(), [](auto& a, auto& b) { return a.id < b.id; });
        write_records(d_out, res.records);
        std::string errs;
        for (const auto& e : res.errors) {
          ordered_json j{{"index", e.index}, {"id", e.id}, {"error", e.message}};
          errs += j.dump() + "\n";
          err << "skipped row " << e.index << (e.id.empty() ? "" : " (" + e.id + ")") << ": " << e.message << "\n";
        }
        if (!d_errors.empty()) text::write_file_atomic(d_errors, errs);
        out << "ingested " << res.records.size() << " records, " << res.errors.size() << " rejected\n";
      };
    });

    auto* classify_cmd = data->add_subcommand("classify", "assign question types through the LLM");
    classify_cmd->add_option("--input", d_input)->required();
    classify_cmd->add_option("--out", d_out)->required();
    classify_cmd->add_option("--review", d_review, "manual-review JSON Lines output")->required();
    classify_cmd->callback([&] {
      action = [&] {
        Settings s = load_settings(g);
        auto records = read_records(d_input);
        auto gateway = make_gateway(g, s, true);
        GatewayRequest params = judge_params(s);
        std::vector<std::optional<QARecord>> done(records.size());
        std::vector<std::string> review(records.size());
        parallel_for(records.size(), gateway->options().max_in_flight, [&](std::size_t i) {
          QARecord r = records[i];
          if (!r.qtype) {
            try {
              r.qtype = classify_question_type(r, *gateway, params);
            } catch (const ClassificationError& e) {
              ordered_json j{{"id", r.id}, {"question", r.question}, {"last_reply", e.last_reply()},
                             {"error", e.what()}};
              review[i] = j.dump() + "\n";
              return;
            }
          }
          done[i] = std::move(r);
        });
        std::vector<QARecord> classified;
        std::string review_text;
        for (std::size_t i = 0; i < records.size(); ++i) {
          if (done[i]) classified.push_back(std::move(*done[i]));
          review_text += review[i];
        }
        write_records(d_out, classified);
        text::write_file_atomic(d_review, review_text);
        out << "classified " << classified.size() << " records, "
            << (records.size() - classified.size()) << " routed to manual review\n";
      };
    });

    auto* balance_cmd = data->add_subcommand("balance", "plan a style x type balanced corpus");
    balance_cmd->add_option("--input", d_input)->required();
    balance_cmd->add_option("--target", d_target, "total records, a multiple of 8")->required();
    balance_cmd->add_option("--out", d_out, "plan file")->required();
    balance_cmd->callback([&] {
      action = [&] {
        auto records = read_records(d_input);
        BalancePlan plan = balance_corpus(records, d_target, g.seed);
        text::write_file_atomic(d_out, to_json(plan).dump(2) + "\n");
        out << "quota " << plan.quota << " per cell; " << plan.kept_ids.size() << " kept, " << plan.requests.size()
            << " augmentation requests\n";
      };
    });

    auto* augment_cmd = data->add_subcommand("augment", "generate restyled twins through the LLM");
    augment_cmd->add_option("--input", d_input)->required();
    augment_cmd->add_option("--out", d_out)->required();
    auto* plan_opt = augment_cmd->add_option("--plan", d_plan, "execute a balance plan");
    auto* style_opt = augment_cmd->add_option("--target-style", d_target_style, "restyle every record");
    plan_opt->excludes(style_opt);
    augment_cmd->add_option("--templates", d_templates);
    augment_cmd->callback([&] {
      action = [&] {
        Settings s = load_settings(g);
        auto records = read_records(d_input);
        auto gateway = make_gateway(g, s, true);
        GatewayRequest params = generation_params(s);
        TemplateSet templates = load_templates(s, d_templates);
        std::vector<QARecord> result;
        if (!d_plan.empty()) {
          BalancePlan plan = plan_from_json(json::parse(text::read_file(d_plan)));
          result = execute_plan(records, plan, *gateway, params, gateway->options().max_in_flight, templates);
        } else if (!d_target_style.empty()) {
          Style target = require_style(d_target_style);
          result.resize(records.size());
          parallel_for(records.size(), gateway->options().max_in_flight, [&](std::size_t i) {
            result[i] = augment(records[i], target, *gateway, params, {}, std::nullopt, templates);
          });
        } else {
          throw Error(ErrorKind::input, "data augment needs --plan or --target-style");
        }
        write_records(d_out, result);
        out << "wrote " << result.size() << " records\n";
      };
    });

    auto* emit_cmd = data->add_subcommand("emit", "write an Alpaca-style instruction dataset");
    emit_cmd->add_option("--input", d_input)->required();
    emit_cmd->add_option("--level", d_level, "basic, type_based or knowledge_enriched");
    emit_cmd->add_option("--out", d_out)->required();
    emit_cmd->add_option("--templates", d_templates);
    emit_cmd->callback([&] {
      action = [&] {
        Settings s = load_settings(g);
        auto records = read_records(d_input);
        emit_training_set(records, require_level(d_level), d_out, load_templates(s, d_templates));
        out << "wrote " << records.size() << " instruction examples\n";
      };
    });

    auto* split_cmd = data->add_subcommand("split", "seeded test-question selection across types");
    split_cmd->add_option("--input", d_input)->required();
    split_cmd->add_option("--count", d_count)->required();
    split_cmd->add_option("--out", d_out)->required();
    split_cmd->callback([&] {
      action = [&] {
        auto selected = select_test_split(read_records(d_input), d_count, g.seed);
        write_records(d_out, selected);
        out << "selected " << selected.size() << " records\n";
      };
    });
  }

  // eval *
  auto* eval = app.add_subcommand("eval", "professionalism and quality evaluation")->require_subcommand(1);
  std::string e_questions, e_lexicon, e_answers, e_references, e_out, e_records, e_model, e_dataset, e_level,
      e_profile, e_format = "json";
  std::vector<std::string> e_inputs;
  {
    auto* run_cmd = eval->add_subcommand("run", "generate or load answers and compute all indicators");
    run_cmd->add_option("--questions", e_questions)->required();
    run_cmd->add_option("--lexicon", e_lexicon, "lexicon cache file")->required();
    run_cmd->add_option("--answers", e_answers, "pre-generated answers (otherwise generated via the gateway)");
    run_cmd->add_option("--references", e_references);
    run_cmd->add_option("--model-name", e_model);
    run_cmd->add_option("--dataset-name", e_dataset);
    run_cmd->add_option("--level", e_level, "instruction level for generation");
    run_cmd->add_option("--profile", e_profile, "chat_baseline, tuned or none");
    run_cmd->add_option("--out", e_out, "report JSON path")->required();
    run_cmd->add_option("--records", e_records, "per-record dump (default: <out>.records.jsonl)");
    run_cmd->callback([&] {
      action = [&] {
        Settings s = load_settings(g);
        TermLexicon lex = TermLexicon::load(e_lexicon);
        auto questions = read_questions(e_questions);
        std::optional<ReferenceMap> refs;
        if (!e_references.empty()) refs = read_references(e_references);

        auto gateway = make_gateway(g, s, false);
        std::optional<AnswerTable> answers;
        GenerationSettings gen;
        EvalContext ctx;
        ctx.lexicon = &lex;
        ctx.judge = gateway.get();
        if (!e_answers.empty()) {
          answers = AnswerTable::load(e_answers);
          ctx.answers = &*answers;
        } else {
          gen.level = require_level(e_level.empty() ? s.get("instruction_level", "basic") : e_level);
          gen.profile = parse_model_profile(e_profile.empty() ? s.get("model_profile", "tuned") : e_profile);
          gen.params = generation_params(s);
          gen.templates = load_templates(s, "");
          ctx.generator = gateway.get();
          ctx.generation = &gen;
        }
        std::unique_ptr<EmbeddingProvider> embeddings;
        if (std::string url = s.get("embedding_url", ""); !url.empty()) {
          const char* token = std::getenv("PROSWITCH_EMBED_KEY");
          embeddings = std::make_unique<HttpEmbeddingProvider>(url, token ? token : "");
        } else {
          embeddings = std::make_unique<HashedTrigramProvider>();
        }
        ctx.embeddings = embeddings.get();

        EvalOptions opts;
        opts.model_name = e_model.empty() ? s.get("model_name", "model") : e_model;
        opts.dataset_name = e_dataset.empty() ? s.get("dataset_name", "dataset") : e_dataset;
        opts.config = eval_config(s);
        opts.bleu.max_n = s.get_int("bleu_max_n", 4);
        opts.bleu.brevity = parse_brevity_mode(s.get("bleu_brevity", "ratio"));
        std::string scope = s.get("quality_scope", "professional");
        if (scope != "professional" && scope != "both")
          throw Error(ErrorKind::input, "quality_scope must be professional or both");
        opts.quality_scope = scope == "both" ? QualityScope::both_styles : QualityScope::professional_only;
        opts.concurrency = gateway->options().max_in_flight;
        opts.judge_params = judge_params(s);
        opts.seed = static_cast<std::uint64_t>(s.get_int("seed", static_cast<int>(g.seed)));

        EvalOutcome outcome = run_evaluation(questions, refs, ctx, opts);
        std::string records_path = e_records.empty() ? e_out + ".records.jsonl" : e_records;
        text::write_file_atomic(records_path, records_dump(outcome.records));
        text::write_file_atomic(e_out, render_report(outcome.report, ReportFormat::json));
        out << render_report(outcome.report, ReportFormat::table_text);
      };
    });

    auto* report_cmd = eval->add_subcommand("report", "render reports as json, csv or table-text");
    report_cmd->add_option("--input", e_inputs, "report JSON file(s)");
    report_cmd->add_option("--records", e_records, "per-record dump (for scatter-csv)");
    report_cmd->add_option("--format", e_format, "json, csv, table-text or scatter-csv");
    report_cmd->add_option("--out", e_out);
    report_cmd->callback([&] {
      action = [&] {
        if (e_format == "scatter-csv") {
          if (e_records.empty()) throw Error(ErrorKind::input, "scatter-csv needs --records");
          write_output(e_out, render_scatter_csv(parse_records_dump(text::read_file(e_records))), out);
          return;
        }
        ReportFormat fmt = parse_report_format(e_format);
        if (e_inputs.empty()) throw Error(ErrorKind::input, "eval report needs --input");
        std::vector<EvalReport> reports;
        for (const auto& p : e_inputs) {
          json doc;
          try {
            doc = json::parse(text::read_file(p));
          } catch (const json::parse_error& e) {
            throw ParseError(0, p + ": " + e.what());
          }
          reports.push_back(report_from_json(doc));
        }
        write_output(e_out, render_reports(reports, fmt), out);
      };
    });
  }

  // fit-thresholds
  std::string f_input;
  auto* fit_cmd = app.add_subcommand("fit-thresholds", "fit indicator thresholds to human labels");
  fit_cmd->add_option("--input", f_input, "JSON Lines or CSV: term_hits,reasoning_steps,label")->required();
  fit_cmd->callback([&] {
    action = [&] {
      Settings s = load_settings(g);
      auto points = read_labeled(f_input);
      ThresholdFit fit = fit_thresholds(points, parse_combiner(s.get("combiner", "AND")));
      out << fit_to_json(fit).dump(2) << "\n";
    };
  });

  // human-stats
  std::string h_disc, h_flu, h_model = "model";
  auto* human_cmd = app.add_subcommand("human-stats", "average score and success rate of 1-5 ratings");
  human_cmd->add_option("--discrimination", h_disc, "ratings file (integers 1..5)");
  human_cmd->add_option("--fluency", h_flu, "ratings file (integers 1..5)");
  human_cmd->add_option("--model", h_model);
  human_cmd->callback([&] {
    action = [&] {
      if (h_disc.empty() && h_flu.empty())
        throw Error(ErrorKind::input, "human-stats needs --discrimination and/or --fluency");
      std::optional<HumanEvalStats> disc, flu;
      ordered_json j;
      j["model"] = h_model;
      if (!h_disc.empty()) {
        disc = human_eval_stats(read_ratings(h_disc));
        j["discrimination"] = {{"as", disc->average_score}, {"sr", disc->success_rate}};
      }
      if (!h_flu.empty()) {
        flu = human_eval_stats(read_ratings(h_flu));
        j["fluency"] = {{"as", flu->average_score}, {"sr", flu->success_rate}};
      }
      out << j.dump(2) << "\n";
      out << "Model | Discrimination AS | Discrimination SR | Fluency AS | Fluency SR\n";
      out << format_human_eval_row(h_model, disc, flu) << "\n";
    };
  });

  // templates dump
  std::string t_out, t_templates;
  auto* templates_cmd = app.add_subcommand("templates", "prompt template utilities")->require_subcommand(1);
  auto* dump_cmd = templates_cmd->add_subcommand("dump", "write the effective template file");
  dump_cmd->add_option("--templates", t_templates, "override file to merge");
  dump_cmd->add_option("--out", t_out);
  dump_cmd->callback([&] {
    action = [&] {
      TemplateSet set = t_templates.empty() ? TemplateSet::builtin() : TemplateSet::load(t_templates);
      write_output(t_out, set.dump(), out);
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return e.get_exit_code() == 0 ? 0 : 2;
  }

  try {
    if (!action) throw Error(ErrorKind::input, "no command given");
    action();
    return 0;
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const json::exception& e) {
    err << "error (input error): " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace proswitch::cli
