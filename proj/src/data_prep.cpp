#include "proswitch/data_prep.hpp"

#include <algorithm>
#include <array>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "proswitch/errors.hpp"
#include "proswitch/llm_gateway.hpp"
#include "proswitch/parallel.hpp"
#include "proswitch/text.hpp"

namespace proswitch {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

std::size_t line_of_byte(std::string_view s, std::size_t byte) {
  byte = std::min(byte, s.size());
  return 1 + static_cast<std::size_t>(std::count(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(byte), '\n'));
}

json parse_document(std::string_view contents) {
  try {
    return json::parse(contents);
  } catch (const json::parse_error& e) {
    throw ParseError(line_of_byte(contents, e.byte), e.what());
  }
}

std::string id_string(const json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return std::to_string(v.get<long long>());
  throw Error(ErrorKind::input, "id must be a string or integer");
}

std::string required_text(const json& obj, const char* field) {
  auto it = obj.find(field);
  if (it == obj.end() || it->is_null()) throw Error(ErrorKind::input, std::string("missing field '") + field + "'");
  std::string value;
  if (it->is_string()) {
    value = it->get<std::string>();
  } else if (it->is_array()) {
    for (const auto& item : *it)
      if (item.is_string() && !text::trim(item.get<std::string>()).empty()) {
        value = item.get<std::string>();
        break;
      }
  } else {
    throw Error(ErrorKind::input, std::string("field '") + field + "' is not text");
  }
  if (text::trim(value).empty()) throw Error(ErrorKind::input, std::string("empty field '") + field + "'");
  return value;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::size_t cell_index(Style s, QuestionType t) {
  return (s == Style::professional ? 0 : 4) + static_cast<std::size_t>(t);
}

class IngestCollector {
 public:
  void add(std::size_t index, const std::string& id, const std::function<QARecord()>& make) {
    try {
      QARecord r = make();
      if (!ids_.insert(r.id).second) throw Error(ErrorKind::input, "duplicate id " + r.id);
      result_.records.push_back(std::move(r));
    } catch (const Error& e) {
      result_.errors.push_back({index, id, e.what()});
    } catch (const json::exception& e) {
      result_.errors.push_back({index, id, e.what()});
    }
  }

  IngestResult finish() {
    if (result_.records.empty()) {
      std::string msg = "no usable records";
      if (!result_.errors.empty()) msg += " (first error: " + result_.errors.front().message + ")";
      throw Error(ErrorKind::input, msg);
    }
    return std::move(result_);
  }

 private:
  IngestResult result_;
  std::set<std::string> ids_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Record serialization

ordered_json to_json(const QARecord& r) {
  ordered_json j;
  j["id"] = r.id;
  j["question"] = r.question;
  j["answer"] = r.answer;
  j["style"] = to_string(r.style);
  if (r.qtype) j["qtype"] = to_string(*r.qtype);
  j["source"] = to_string(r.source);
  if (r.snippet) j["snippet"] = *r.snippet;
  return j;
}

QARecord record_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::input, "record is not a JSON object");
  QARecord r;
  auto id = j.find("id");
  if (id == j.end()) throw Error(ErrorKind::input, "missing field 'id'");
  r.id = id_string(*id);
  if (r.id.empty()) throw Error(ErrorKind::input, "empty id");
  r.question = required_text(j, "question");
  r.answer = required_text(j, "answer");
  if (auto s = j.find("style"); s != j.end() && !s->is_null()) r.style = require_style(s->get<std::string>());
  if (auto q = j.find("qtype"); q != j.end() && !q->is_null()) {
    auto t = parse_type_label(q->get<std::string>());
    if (!t) throw Error(ErrorKind::input, "unknown qtype '" + q->get<std::string>() + "'");
    r.qtype = t;
  }
  if (auto s = j.find("source"); s != j.end() && !s->is_null()) {
    auto src = parse_source(s->get<std::string>());
    if (!src) throw Error(ErrorKind::input, "unknown source '" + s->get<std::string>() + "'");
    r.source = *src;
  }
  if (auto s = j.find("snippet"); s != j.end() && s->is_string()) r.snippet = s->get<std::string>();
  return r;
}

std::string records_to_jsonl(const std::vector<QARecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

std::vector<QARecord> read_records(const std::filesystem::path& path) {
  const std::string contents = text::read_file(path);
  std::vector<QARecord> out;
  std::istringstream in(contents);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(line_no, path.string() + ": " + e.what());
    } catch (const Error& e) {
      throw ParseError(line_no, path.string() + ": " + e.what());
    }
  }
  return out;
}

void write_records(const std::filesystem::path& path, const std::vector<QARecord>& records) {
  text::write_file_atomic(path, records_to_jsonl(records));
}

// ---------------------------------------------------------------------------
// Ingest

SourceFormat parse_source_format(std::string_view s) {
  if (s == "bioasq") return SourceFormat::bioasq;
  if (s == "pubmedqa") return SourceFormat::pubmedqa;
  if (s == "jsonl") return SourceFormat::jsonl;
  throw Error(ErrorKind::input, "unknown source format '" + std::string(s) + "'");
}

IngestResult ingest_text(std::string_view contents, SourceFormat format) {
  IngestCollector collect;
  switch (format) {
    case SourceFormat::bioasq: {
      json doc = parse_document(contents);
      auto qs = doc.find("questions");
      if (qs == doc.end() || !qs->is_array())
        throw Error(ErrorKind::input, "BioASQ file has no 'questions' array");
      for (std::size_t i = 0; i < qs->size(); ++i) {
        const json& row = (*qs)[i];
        std::string id = row.is_object() && row.contains("id") ? row["id"].dump() : "";
        collect.add(i, id, [&] {
          QARecord r;
          r.id = id_string(row.at("id"));
          r.question = required_text(row, "body");
          r.answer = required_text(row, "ideal_answer");
          r.style = Style::professional;
          r.source = Source::bioasq;
          std::string type = required_text(row, "type");
          auto t = parse_type_label(type);
          if (!t) throw Error(ErrorKind::input, "unknown BioASQ type '" + type + "'");
          r.qtype = t;
          if (auto sn = row.find("snippets"); sn != row.end() && sn->is_array() && !sn->empty()) {
            const json& first = sn->front();
            if (first.is_object() && first.contains("text") && first["text"].is_string())
              r.snippet = first["text"].get<std::string>();
          }
          return r;
        });
      }
      break;
    }
    case SourceFormat::pubmedqa: {
      json doc = parse_document(contents);
      if (!doc.is_object()) throw Error(ErrorKind::input, "PubMedQA file must be an object keyed by PMID");
      std::size_t i = 0;
      for (const auto& [pmid, row] : doc.items()) {
        collect.add(i++, pmid, [&] {
          if (!row.is_object()) throw Error(ErrorKind::input, "entry is not an object");
          QARecord r;
          r.id = pmid;
          r.question = required_text(row, "QUESTION");
          r.answer = required_text(row, "LONG_ANSWER");
          r.style = Style::professional;
          r.source = Source::pubmedqa;
          if (auto ctx = row.find("CONTEXTS"); ctx != row.end() && ctx->is_array() && !ctx->empty()) {
            std::string joined;
            for (const auto& c : *ctx)
              if (c.is_string()) {
                if (!joined.empty()) joined += ' ';
                joined += c.get<std::string>();
              }
            if (!joined.empty()) r.snippet = joined;
          }
          return r;
        });
      }
      break;
    }
    case SourceFormat::jsonl: {
      std::size_t start = 0, index = 0;
      while (start < contents.size()) {
        auto nl = contents.find('\n', start);
        if (nl == std::string_view::npos) nl = contents.size();
        std::string_view line = contents.substr(start, nl - start);
        start = nl + 1;
        if (text::trim(line).empty()) continue;
        collect.add(index++, "", [&] {
          json row;
          try {
            row = json::parse(line);
          } catch (const json::parse_error& e) {
            throw Error(ErrorKind::input, std::string("line ") + std::to_string(line_of_byte(contents, start - 1)) +
                                              ": " + e.what());
          }
          return record_from_json(row);
        });
      }
      break;
    }
  }
  return collect.finish();
}

IngestResult ingest(const std::filesystem::path& path, SourceFormat format) {
  return ingest_text(text::read_file(path), format);
}

// ---------------------------------------------------------------------------
// Classification

std::optional<QuestionType> parse_type_label(std::string_view reply) {
  std::string s = text::to_lower(text::trim(reply));
  if (s.rfind("output:", 0) == 0) s = text::trim(std::string_view(s).substr(7));
  auto words = text::split_whitespace(s);
  if (words.empty()) return std::nullopt;
  std::string w = words.front();
  auto strip = [](char c) {
    return c == '.' || c == ',' || c == '"' || c == '\'' || c == '*' || c == '`' || c == ':' || c == ';' ||
           c == '!';
  };
  while (!w.empty() && strip(w.back())) w.pop_back();
  while (!w.empty() && strip(w.front())) w.erase(w.begin());
  if (w == "list") return QuestionType::list;
  if (w == "summary" || w == "summarize") return QuestionType::summary;
  if (w == "yesno" || w == "yes/no" || w == "yes-no") return QuestionType::yesno;
  if (w == "factoid") return QuestionType::factoid;
  return std::nullopt;
}

QuestionType classify_question_type(const QARecord& record, Gateway& gateway, const GatewayRequest& params) {
  if (record.qtype) throw Error(ErrorKind::input, "record " + record.id + " already has a question type");
  GatewayRequest req = params;
  req.prompt = classification_prompt(record.question);
  std::string last;
  constexpr int kAttempts = 3;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    last = gateway.complete(req, attempt == 0 ? CachePolicy::use : CachePolicy::refresh).text;
    if (auto t = parse_type_label(last)) return *t;
  }
  throw ClassificationError(record.id, last,
                            "record " + record.id + ": classifier reply '" + text::trim(last).substr(0, 80) +
                                "' is not one of list/summary/yesno/factoid");
}

// ---------------------------------------------------------------------------
// Augmentation

std::string lineage_id(const std::string& source_id, Style target_style) {
  return source_id + (target_style == Style::professional ? "#p" : "#np");
}

QARecord augment(const QARecord& record, Style target_style, Gateway& gateway, const GatewayRequest& params,
                 const std::vector<FewShotExample>& few_shot, std::optional<std::string> new_id,
                 const TemplateSet& templates) {
  if (!record.qtype) throw Error(ErrorKind::input, "record " + record.id + " has no question type");
  GatewayRequest req = params;
  req.prompt = augmentation_prompt(record, target_style, few_shot, templates);
  std::string answer = text::trim(gateway.complete(req).text);
  if (answer.empty()) throw Error(ErrorKind::augmentation, "record " + record.id + ": empty augmentation reply");
  QARecord out = record;
  out.id = new_id ? *new_id : lineage_id(record.id, target_style);
  out.style = target_style;
  out.answer = std::move(answer);
  return out;
}

// ---------------------------------------------------------------------------
// Balancing

void seeded_shuffle(std::vector<std::size_t>& items, std::uint64_t seed) {
  std::mt19937_64 eng(seed);
  for (std::size_t i = items.size(); i > 1; --i) {
    const std::uint64_t range = i;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % range;
    std::uint64_t draw;
    do draw = eng();
    while (draw >= limit);
    std::swap(items[i - 1], items[static_cast<std::size_t>(draw % range)]);
  }
}

ordered_json to_json(const BalancePlan& plan) {
  ordered_json j;
  j["seed"] = plan.seed;
  j["target_total"] = plan.target_total;
  j["quota"] = plan.quota;
  j["cells"] = ordered_json::array();
  for (const auto& c : plan.cells)
    j["cells"].push_back({{"style", to_string(c.style)},
                          {"qtype", to_string(c.qtype)},
                          {"available", c.available},
                          {"kept", c.kept},
                          {"deficit", c.deficit}});
  j["kept_ids"] = plan.kept_ids;
  j["requests"] = ordered_json::array();
  for (const auto& r : plan.requests)
    j["requests"].push_back({{"source_id", r.source_id},
                             {"target_style", to_string(r.target_style)},
                             {"qtype", to_string(r.qtype)},
                             {"new_id", r.new_id}});
  return j;
}

BalancePlan plan_from_json(const json& j) {
  try {
    BalancePlan p;
    p.seed = j.at("seed").get<std::uint64_t>();
    p.target_total = j.at("target_total").get<std::size_t>();
    p.quota = j.at("quota").get<std::size_t>();
    for (const auto& c : j.at("cells"))
      p.cells.push_back({require_style(c.at("style").get<std::string>()),
                         require_question_type(c.at("qtype").get<std::string>()), c.at("available").get<std::size_t>(),
                         c.at("kept").get<std::size_t>(), c.at("deficit").get<std::size_t>()});
    p.kept_ids = j.at("kept_ids").get<std::vector<std::string>>();
    for (const auto& r : j.at("requests"))
      p.requests.push_back({r.at("source_id").get<std::string>(), require_style(r.at("target_style").get<std::string>()),
                            require_question_type(r.at("qtype").get<std::string>()), r.at("new_id").get<std::string>()});
    return p;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::input, std::string("malformed balance plan: ") + e.what());
  }
}

BalancePlan balance_corpus(const std::vector<QARecord>& records, std::size_t target_total, std::uint64_t seed) {
  if (target_total == 0 || target_total % 8 != 0)
    throw Error(ErrorKind::input, "target total must be a positive multiple of 8");

  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return records[a].id < records[b].id; });

  std::array<std::vector<std::size_t>, 8> cells;
  std::set<std::string> used_ids;
  for (auto i : order) {
    const QARecord& r = records[i];
    if (!r.qtype) throw Error(ErrorKind::input, "record " + r.id + " has no question type; classify first");
    if (!used_ids.insert(r.id).second) throw Error(ErrorKind::input, "duplicate record id " + r.id);
    cells[cell_index(r.style, *r.qtype)].push_back(i);
  }

  BalancePlan plan;
  plan.seed = seed;
  plan.target_total = target_total;
  plan.quota = target_total / 8;

  for (Style style : kAllStyles) {
    for (QuestionType qtype : kAllQuestionTypes) {
      const std::size_t ci = cell_index(style, qtype);
      std::vector<std::size_t> members = cells[ci];
      CellSummary summary{style, qtype, members.size(), 0, 0};
      if (members.size() >= plan.quota) {
        seeded_shuffle(members, splitmix64(seed + ci));
        members.resize(plan.quota);
        summary.kept = plan.quota;
        for (auto i : members) plan.kept_ids.push_back(records[i].id);
      } else {
        summary.kept = members.size();
        summary.deficit = plan.quota - members.size();
        for (auto i : members) plan.kept_ids.push_back(records[i].id);

        std::vector<std::size_t> twins = cells[cell_index(opposite(style), qtype)];
        if (twins.empty())
          throw Error(ErrorKind::unsatisfiable_plan,
                      "cell (" + std::string(to_string(style)) + ", " + std::string(to_string(qtype)) + ") needs " +
                          std::to_string(summary.deficit) + " records but its twin cell is empty");
        seeded_shuffle(twins, splitmix64(seed + ci + 0x100));
        for (std::size_t k = 0; k < summary.deficit; ++k) {
          const QARecord& src = records[twins[k % twins.size()]];
          std::size_t round = k / twins.size();
          std::string base = lineage_id(src.id, style);
          std::string id = round == 0 ? base : base + "." + std::to_string(round);
          while (!used_ids.insert(id).second) id = base + "." + std::to_string(++round);
          plan.requests.push_back({src.id, style, qtype, id});
        }
      }
      plan.cells.push_back(summary);
    }
  }
  std::sort(plan.kept_ids.begin(), plan.kept_ids.end());
  return plan;
}

std::vector<QARecord> execute_plan(const std::vector<QARecord>& records, const BalancePlan& plan, Gateway& gateway,
                                   const GatewayRequest& params, std::size_t concurrency,
                                   const TemplateSet& templates) {
  std::map<std::string, const QARecord*> by_id;
  for (const auto& r : records) by_id.emplace(r.id, &r);
  auto lookup = [&](const std::string& id) -> const QARecord& {
    auto it = by_id.find(id);
    if (it == by_id.end()) throw Error(ErrorKind::input, "plan references unknown record " + id);
    return *it->second;
  };

  std::vector<QARecord> out;
  out.reserve(plan.kept_ids.size() + plan.requests.size());
  for (const auto& id : plan.kept_ids) out.push_back(lookup(id));

  std::vector<QARecord> augmented(plan.requests.size());
  for (const auto& req : plan.requests) lookup(req.source_id);
  parallel_for(plan.requests.size(), concurrency, [&](std::size_t i) {
    const auto& req = plan.requests[i];
    augmented[i] = augment(lookup(req.source_id), req.target_style, gateway, params, {}, req.new_id, templates);
  });
  for (auto& r : augmented) out.push_back(std::move(r));
  std::sort(out.begin(), out.end(), [](const QARecord& a, const QARecord& b) { return a.id < b.id; });
  return out;
}

std::vector<QARecord> select_test_split(const std::vector<QARecord>& records, std::size_t count, std::uint64_t seed) {
  if (count > records.size())
    throw Error(ErrorKind::input, "split of " + std::to_string(count) + " requested from " +
                                      std::to_string(records.size()) + " records");
  std::vector<std::size_t> order(records.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return records[a].id < records[b].id; });

  std::array<std::vector<std::size_t>, 5> groups;  // four types, then untyped
  for (auto i : order) groups[records[i].qtype ? static_cast<std::size_t>(*records[i].qtype) : 4].push_back(i);
  for (std::size_t g = 0; g < groups.size(); ++g) seeded_shuffle(groups[g], splitmix64(seed + g));

  std::vector<QARecord> out;
  std::array<std::size_t, 5> cursor{};
  while (out.size() < count) {
    for (std::size_t g = 0; g < groups.size() && out.size() < count; ++g)
      if (cursor[g] < groups[g].size()) out.push_back(records[groups[g][cursor[g]++]]);
  }
  std::sort(out.begin(), out.end(), [](const QARecord& a, const QARecord& b) { return a.id < b.id; });
  return out;
}

// ---------------------------------------------------------------------------
// Emission

InstructionExample make_instruction_example(const QARecord& record, InstructionLevel level,
                                            const TemplateSet& templates) {
  if (!record.qtype) throw Error(ErrorKind::input, "record " + record.id + " has no question type");
  InstructionExample ex;
  ex.instruction = build_instruction(record.style, level,
                                     level == InstructionLevel::type_based ? record.qtype : std::nullopt,
                                     record.snippet, templates);
  ex.input = record.question;
  ex.output = record.answer;
  ex.level = level;
  ex.style = record.style;
  ex.qtype = record.qtype;
  ex.source_id = record.id;
  return ex;
}

std::string render_training_set(const std::vector<QARecord>& records, InstructionLevel level,
                                const TemplateSet& templates) {
  std::vector<const QARecord*> sorted;
  sorted.reserve(records.size());
  for (const auto& r : records) sorted.push_back(&r);
  std::stable_sort(sorted.begin(), sorted.end(), [](auto a, auto b) { return a->id < b->id; });

  std::string out;
  for (const QARecord* r : sorted) {
    InstructionExample ex = make_instruction_example(*r, level, templates);
    ordered_json j;
    j["instruction"] = ex.instruction;
    j["input"] = ex.input;
    j["output"] = ex.output;
    j["meta"] = {{"id", ex.source_id},
                 {"level", to_string(ex.level)},
                 {"style", to_string(ex.style)},
                 {"qtype", to_string(*ex.qtype)},
                 {"source", to_string(r->source)}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

void emit_training_set(const std::vector<QARecord>& records, InstructionLevel level,
                       const std::filesystem::path& out, const TemplateSet& templates) {
  text::write_file_atomic(out, render_training_set(records, level, templates));
}

}  // namespace proswitch
