#include "respmon/export.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>

#include "respmon/errors.hpp"

namespace respmon {

using nlohmann::json;

namespace {

std::string_view status_name(ForceStatus s) {
    switch (s) {
        case ForceStatus::Ok: return "ok";
        case ForceStatus::SaturatedLow: return "saturated-low";
        case ForceStatus::SaturatedHigh: return "saturated-high";
    }
    return "ok";
}

std::string csv_cell(const json& v) {
    if (v.is_null()) return "";
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "1" : "0";
    return v.dump();
}

}  // namespace

ExportFormat parse_export_format(const std::string& name) {
    if (name == "csv") return ExportFormat::Csv;
    if (name == "jsonl") return ExportFormat::Jsonl;
    throw InvalidParameter("unknown export format '" + name + "' (expected csv or jsonl)");
}

std::string iso_relative(double t_ms) {
    const auto ms = static_cast<long long>(std::llround(t_ms));
    const char* sign = ms < 0 ? "-" : "";
    const long long a = std::llabs(ms);
    char buf[48];
    std::snprintf(buf, sizeof buf, "%sPT%lld.%03lldS", sign, a / 1000, a % 1000);
    return buf;
}

std::vector<json> export_records(const SessionSeries& series, const AnalysisSummary& summary) {
    std::vector<json> out;
    out.reserve(series.fsr.size() + series.accel.size() + series.battery.size() + summary.windows.size());
    for (const auto& p : series.fsr) {
        json r = {{"kind", "fsr"}, {"t_rel", iso_relative(p.t_ms)}, {"t_ms", p.t_ms}, {"code", p.code},
                  {"status", std::string(status_name(p.force.status))}};
        r["force_n"] = p.force.status == ForceStatus::Ok ? json(p.force.force_n) : json(nullptr);
        out.push_back(std::move(r));
    }
    for (const auto& a : series.accel)
        out.push_back({{"kind", "accel"}, {"t_rel", iso_relative(a.t_ms)}, {"t_ms", a.t_ms},
                       {"x_mg", a.x_mg}, {"y_mg", a.y_mg}, {"z_mg", a.z_mg}});
    for (const auto& b : series.battery)
        out.push_back({{"kind", "battery"}, {"t_rel", iso_relative(b.t_ms)}, {"t_ms", b.t_ms},
                       {"code", b.code}, {"device_percent", b.device_percent},
                       {"host_percent", b.host_percent}, {"charging", b.charging}});
    for (const auto& e : summary.windows)
        out.push_back({{"kind", "estimate"}, {"t_rel", iso_relative(e.window_start_ms)},
                       {"window_start_ms", e.window_start_ms}, {"window_end_ms", e.window_end_ms},
                       {"rate_bpm", e.rate_bpm}, {"breath_count", e.breath_count},
                       {"excluded_breaths", e.excluded_breaths}, {"confidence", e.confidence},
                       {"artifact_fraction", e.artifact_fraction}});
    return out;
}

const std::vector<std::string>& csv_columns() {
    static const std::vector<std::string> cols = {
        "kind",           "t_rel",           "t_ms",           "code",       "force_n",
        "status",         "x_mg",            "y_mg",           "z_mg",       "device_percent",
        "host_percent",   "charging",        "window_start_ms", "window_end_ms", "rate_bpm",
        "breath_count",   "excluded_breaths", "confidence",     "artifact_fraction"};
    return cols;
}

void write_csv(std::ostream& out, const std::vector<json>& records) {
    const auto& cols = csv_columns();
    for (size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    for (const auto& r : records) {
        for (size_t i = 0; i < cols.size(); ++i) {
            if (i) out << ',';
            if (auto it = r.find(cols[i]); it != r.end()) out << csv_cell(*it);
        }
        out << '\n';
    }
    if (!out) throw IoError("csv write failed");
}

void write_jsonl(std::ostream& out, const std::vector<json>& records) {
    for (const auto& r : records) out << r.dump() << '\n';
    if (!out) throw IoError("jsonl write failed");
}

std::vector<json> read_jsonl(std::istream& in) {
    std::vector<json> out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) out.push_back(json::parse(line));
    return out;
}

json summary_json(const SessionSeries& series, const AnalysisSummary& summary, const wire::SplitResult* split) {
    json windows = json::array();
    for (const auto& e : summary.windows)
        windows.push_back({{"window_start_ms", e.window_start_ms}, {"window_end_ms", e.window_end_ms},
                           {"rate_bpm", e.rate_bpm}, {"breath_count", e.breath_count},
                           {"excluded_breaths", e.excluded_breaths}, {"confidence", e.confidence},
                           {"artifact_fraction", e.artifact_fraction}});
    json artifacts = json::array();
    for (const auto& iv : summary.artifacts.intervals)
        artifacts.push_back({{"start_ms", iv.start_ms}, {"end_ms", iv.end_ms}});
    json alerts = json::array();
    for (const auto& a : summary.alerts)
        alerts.push_back({{"type", "apnea"}, {"start_ms", a.start_ms}, {"end_ms", a.end_ms},
                          {"duration_s", (a.end_ms - a.start_ms) / 1000.0}});
    json battery = json::array();
    for (const auto& b : series.battery)
        battery.push_back({{"t_ms", b.t_ms}, {"percent", b.device_percent}, {"host_percent", b.host_percent},
                           {"charging", b.charging}});

    json s = {
        {"frames", series.frames},
        {"missing_frames", series.missing_frames},
        {"duplicate_frames", series.duplicate_frames},
        {"samples", {{"fsr", series.fsr.size()}, {"accel", series.accel.size()}, {"battery", series.battery.size()}}},
        {"windows", windows},
        {"median_rate_bpm", summary.median_rate_bpm ? json(*summary.median_rate_bpm) : json(nullptr)},
        {"breaths_detected", summary.breath_times_ms.size()},
        {"artifacts", artifacts},
        {"alerts", alerts},
        {"battery", battery},
        {"saturated_samples", summary.saturated_samples},
        {"percent_mismatches", summary.percent_mismatches},
    };
    if (summary.note) s["note"] = *summary.note;
    if (split) {
        json resyncs = json::array();
        for (const auto& r : split->resyncs) resyncs.push_back({{"offset", r.offset}, {"skipped_bytes", r.skipped_bytes}});
        s["resync_count"] = split->resyncs.size();
        s["resyncs"] = resyncs;
        s["pending_bytes"] = split->pending_bytes;
    }
    return s;
}

}  // namespace respmon
