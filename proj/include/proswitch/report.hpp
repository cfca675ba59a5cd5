#pragma once

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "proswitch/eval_runner.hpp"

namespace proswitch {

enum class ReportFormat { json, csv, table_text };

ReportFormat parse_report_format(std::string_view s);

// Canonical schema; optional quality fields are omitted when absent.
nlohmann::ordered_json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

// json: one report per document (first report only); csv: header plus one row
// per report; table-text: indicator table in THG, RSG, Pro F1, BLEU Score,
// BERT Score order followed by the Avg.Len / Avg.RS / RD table.
std::string render_report(const EvalReport& report, ReportFormat format);
std::string render_reports(const std::vector<EvalReport>& reports, ReportFormat format);

inline constexpr std::string_view kReportCsvHeader =
    "model,dataset,thg,rsg,pro_f1,bleu,bert_f,rd_professional,avg_len,avg_rs,runs,questions,excluded";

// Fixed-precision cell text used by csv and table-text.
std::string format_fixed(double value, int decimals);

// Per-record dump written next to every report.
nlohmann::ordered_json record_to_json(const EvalRecord& r);
EvalRecord record_from_json_dump(const nlohmann::json& j);
std::string records_dump(const std::vector<EvalRecord>& records);
std::vector<EvalRecord> parse_records_dump(std::string_view contents);

// term_hits,reasoning_steps,style per record, for distribution plots.
std::string render_scatter_csv(const std::vector<EvalRecord>& records);

}  // namespace proswitch
