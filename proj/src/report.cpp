#include "proswitch/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "proswitch/errors.hpp"
#include "proswitch/text.hpp"

namespace proswitch {
namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

constexpr std::string_view kSchema = "proswitch.eval_report/1";

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string optional_cell(const std::optional<double>& v, int decimals, std::string_view absent) {
  return v ? format_fixed(*v, decimals) : std::string(absent);
}

std::string render_table(const std::vector<std::string>& header, const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> width(header.size());
  for (std::size_t c = 0; c < header.size(); ++c) {
    width[c] = header[c].size();
    for (const auto& row : rows) width[c] = std::max(width[c], row[c].size());
  }
  auto line = [&](const std::vector<std::string>& cells) {
    std::string out;
    for (std::size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) out += " | ";
      out += cells[c];
      if (c + 1 < cells.size()) out.append(width[c] - cells[c].size(), ' ');
    }
    return out + "\n";
  };
  std::string out = line(header);
  for (const auto& row : rows) out += line(row);
  return out;
}

}  // namespace

ReportFormat parse_report_format(std::string_view s) {
  if (s == "json") return ReportFormat::json;
  if (s == "csv") return ReportFormat::csv;
  if (s == "table-text") return ReportFormat::table_text;
  throw Error(ErrorKind::input, "unknown report format '" + std::string(s) + "'");
}

std::string format_fixed(double value, int decimals) {
  // Round half away from zero at the requested precision, then print.
  double r = round_to(value, decimals);
  if (r == 0.0) r = 0.0;  // no "-0.00"
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, r);
  return buf;
}

ordered_json report_to_json(const EvalReport& r) {
  ordered_json j;
  j["schema"] = kSchema;
  j["model_name"] = r.model_name;
  j["dataset_name"] = r.dataset_name;
  j["thg"] = r.thg;
  j["rsg"] = r.rsg;
  j["pro_f1"] = r.pro_f1;
  if (r.bleu) j["bleu"] = *r.bleu;
  if (r.bert_f) j["bert_f"] = *r.bert_f;
  j["rd_professional"] = r.rd_professional;
  j["avg_len"] = r.avg_len;
  j["avg_rs"] = r.avg_rs;
  j["runs"] = r.runs;
  j["questions"] = r.questions;
  j["excluded"] = r.excluded;
  j["config"] = r.config;
  return j;
}

EvalReport report_from_json(const json& j) {
  try {
    if (j.at("schema").get<std::string>() != kSchema) throw Error(ErrorKind::input, "unsupported report schema");
    EvalReport r;
    r.model_name = j.at("model_name").get<std::string>();
    r.dataset_name = j.at("dataset_name").get<std::string>();
    r.thg = j.at("thg").get<double>();
    r.rsg = j.at("rsg").get<double>();
    r.pro_f1 = j.at("pro_f1").get<double>();
    if (j.contains("bleu")) r.bleu = j["bleu"].get<double>();
    if (j.contains("bert_f")) r.bert_f = j["bert_f"].get<double>();
    r.rd_professional = j.at("rd_professional").get<double>();
    r.avg_len = j.at("avg_len").get<double>();
    r.avg_rs = j.at("avg_rs").get<double>();
    r.runs = j.at("runs").get<int>();
    r.questions = j.at("questions").get<std::size_t>();
    r.excluded = j.at("excluded").get<std::size_t>();
    if (j.contains("config")) r.config = ordered_json::parse(j["config"].dump());
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::input, std::string("malformed report: ") + e.what());
  }
}

std::string render_reports(const std::vector<EvalReport>& reports, ReportFormat format) {
  if (reports.empty()) throw Error(ErrorKind::input, "no reports to render");
  switch (format) {
    case ReportFormat::json:
      return report_to_json(reports.front()).dump(2) + "\n";
    case ReportFormat::csv: {
      std::string out(kReportCsvHeader);
      out += '\n';
      for (const auto& r : reports) {
        out += csv_escape(r.model_name) + "," + csv_escape(r.dataset_name) + ",";
        out += format_fixed(r.thg, 2) + "," + format_fixed(r.rsg, 2) + "," + format_fixed(r.pro_f1, 2) + ",";
        out += optional_cell(r.bleu, 4, "") + "," + optional_cell(r.bert_f, 4, "") + ",";
        out += format_fixed(r.rd_professional, 3) + "," + format_fixed(r.avg_len, 1) + "," +
               format_fixed(r.avg_rs, 2) + ",";
        out += std::to_string(r.runs) + "," + std::to_string(r.questions) + "," + std::to_string(r.excluded) + "\n";
      }
      return out;
    }
    case ReportFormat::table_text: {
      std::vector<std::vector<std::string>> main_rows, rd_rows;
      for (const auto& r : reports) {
        main_rows.push_back({r.model_name, format_fixed(r.thg, 2), format_fixed(r.rsg, 2), format_fixed(r.pro_f1, 2),
                             optional_cell(r.bleu, 4, "-"), optional_cell(r.bert_f, 4, "-")});
        rd_rows.push_back(
            {r.model_name, format_fixed(r.avg_len, 1), format_fixed(r.avg_rs, 2), format_fixed(r.rd_professional, 3)});
      }
      return render_table({"Model", "THG", "RSG", "Pro F1", "BLEU Score", "BERT Score"}, main_rows) + "\n" +
             render_table({"Model", "Avg.Len", "Avg.RS", "RD"}, rd_rows);
    }
  }
  return {};
}

std::string render_report(const EvalReport& report, ReportFormat format) { return render_reports({report}, format); }

ordered_json record_to_json(const EvalRecord& r) {
  ordered_json j;
  j["question_id"] = r.question_id;
  j["style"] = to_string(r.requested_style);
  j["run"] = r.run_index;
  j["term_hits"] = r.term_hits;
  j["reasoning_steps"] = r.reasoning_steps;
  j["reasoning_parsed"] = r.reasoning_parsed;
  j["text_length"] = r.text_length;
  if (r.bleu) j["bleu"] = *r.bleu;
  if (r.bert_f) j["bert_f"] = *r.bert_f;
  j["text"] = r.generated_text;
  return j;
}

EvalRecord record_from_json_dump(const json& j) {
  EvalRecord r;
  r.question_id = j.at("question_id").get<std::string>();
  r.requested_style = require_style(j.at("style").get<std::string>());
  r.run_index = j.at("run").get<int>();
  r.term_hits = j.at("term_hits").get<int>();
  r.reasoning_steps = j.at("reasoning_steps").get<int>();
  r.reasoning_parsed = j.at("reasoning_parsed").get<bool>();
  r.text_length = j.at("text_length").get<std::size_t>();
  if (j.contains("bleu")) r.bleu = j["bleu"].get<double>();
  if (j.contains("bert_f")) r.bert_f = j["bert_f"].get<double>();
  r.generated_text = j.at("text").get<std::string>();
  return r;
}

std::string records_dump(const std::vector<EvalRecord>& records) {
  std::string out;
  for (const auto& r : records) out += record_to_json(r).dump() + "\n";
  return out;
}

std::vector<EvalRecord> parse_records_dump(std::string_view contents) {
  std::vector<EvalRecord> out;
  std::size_t start = 0, line_no = 0;
  while (start < contents.size()) {
    auto nl = contents.find('\n', start);
    if (nl == std::string_view::npos) nl = contents.size();
    std::string_view line = contents.substr(start, nl - start);
    start = nl + 1;
    ++line_no;
    if (text::trim(line).empty()) continue;
    try {
      out.push_back(record_from_json_dump(json::parse(line)));
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    }
  }
  return out;
}

std::string render_scatter_csv(const std::vector<EvalRecord>& records) {
  std::string out = "question_id,style,run,term_hits,reasoning_steps\n";
  for (const auto& r : records) {
    if (!r.reasoning_parsed) continue;
    out += csv_escape(r.question_id) + "," + std::string(to_string(r.requested_style)) + "," +
           std::to_string(r.run_index) + "," + std::to_string(r.term_hits) + "," + std::to_string(r.reasoning_steps) +
           "\n";
  }
  return out;
}

}  // namespace proswitch
