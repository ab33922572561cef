#pragma once

// Session export. One record per sample and per window estimate, tagged by
// "kind" (fsr, accel, battery, estimate). Timestamps are given both as
// integer milliseconds and as an ISO-8601 duration relative to session start
// ("PT12.340S").
//
// CSV columns (fixed order, empty when not applicable to the kind):
//   kind,t_rel,t_ms,code,force_n,status,x_mg,y_mg,z_mg,device_percent,
//   host_percent,charging,window_start_ms,window_end_ms,rate_bpm,
//   breath_count,excluded_breaths,confidence,artifact_fraction

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "respmon/pipeline.hpp"

namespace respmon {

enum class ExportFormat { Csv, Jsonl };

ExportFormat parse_export_format(const std::string& name);  // throws InvalidParameter

std::string iso_relative(double t_ms);

std::vector<nlohmann::json> export_records(const SessionSeries& series, const AnalysisSummary& summary);

const std::vector<std::string>& csv_columns();

void write_csv(std::ostream& out, const std::vector<nlohmann::json>& records);
void write_jsonl(std::ostream& out, const std::vector<nlohmann::json>& records);
std::vector<nlohmann::json> read_jsonl(std::istream& in);

// Summary document printed by `analyze`.
nlohmann::json summary_json(const SessionSeries& series, const AnalysisSummary& summary,
                            const wire::SplitResult* split = nullptr);

}  // namespace respmon
