#include <doctest.h>

#include <sstream>

#include "respmon/errors.hpp"
#include "respmon/export.hpp"
#include "respmon/session.hpp"
#include "respmon/session_config.hpp"

using namespace respmon;
using nlohmann::json;

namespace {

std::string parse_error_key(const std::string& text) {
    try {
        parse_session_config(text);
    } catch (const ConfigParseError& e) {
        return e.key();
    }
    return "<none>";
}

size_t count_lines(const std::string& s) { return static_cast<size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("minimal config") {
    const auto c = parse_session_config(R"({"duration_s": 60, "rate_bpm": 15})");
    CHECK(c.duration_s == 60.0);
    REQUIRE(c.scenario.rates.size() == 1);
    CHECK(c.scenario.rates[0].rate_bpm == 15.0);
    CHECK(c.scenario.duration_s == 60.0);
    CHECK(c.firmware.power.name == "abstract-claim");
    CHECK(c.pipeline.host.fsr_period_ms == 40);
}

TEST_CASE("malformed configs name the offending key") {
    CHECK(parse_error_key(R"({"duration_s": "long"})") == "duration_s");
    CHECK(parse_error_key(R"({"durration_s": 60})") == "durration_s");
    CHECK(parse_error_key(R"({"firmware": {"accel_batch": 100}})") == "firmware");
    CHECK(parse_error_key(R"({"firmware": {"fsr_batch": "five"}})") == "firmware.fsr_batch");
    CHECK(parse_error_key(R"({"scenario": {"postures": [{"start_s": 0, "posture": "running"}]}})") ==
          "scenario.postures[0].posture");
    CHECK(parse_error_key(R"({"scenario": {"rates": [{"start_s": 0, "bpm": 12}]}})") == "scenario.rates[0].bpm");
    CHECK(parse_error_key(R"({"power": {"preset": "nope"}})") == "power.preset");
    CHECK(parse_error_key(R"({"rate_bpm": 12, "scenario": {"rates": []}})") == "rate_bpm");
    CHECK(parse_error_key(R"({"battery": {"ocv": [[0, 3.3]]}})") == "battery.ocv");
    CHECK(parse_error_key(R"({"initial_soc": 2})") == "initial_soc");
    CHECK(parse_error_key("{ not json")  != "<none>");
}

TEST_CASE("config survives a JSON round trip") {
    const auto c = parse_session_config(R"({
        "seed": 42, "duration_s": 90,
        "scenario": {"rates": [{"start_s": 0, "rate_bpm": 10}, {"start_s": 45, "rate_bpm": 20}],
                     "postures": [{"start_s": 0, "posture": "still"}, {"start_s": 30, "posture": "walking"}],
                     "noise_sd_n": 0.05},
        "battery": {"ocv": [[0, 3.3], [0.2, 3.7], [1, 4.2]]},
        "power": {"preset": "intro-claim", "p_idle_uw": 10}
    })");
    CHECK(c.firmware.power.name == "custom");
    const auto back = SessionConfig::from_json(c.to_json());
    CHECK(back.to_json() == c.to_json());
}

TEST_CASE("csv export") {
    std::ostringstream empty;
    write_csv(empty, {});
    CHECK(count_lines(empty.str()) == 1);
    CHECK(empty.str().rfind("kind,t_rel,t_ms,", 0) == 0);

    const auto cfg = parse_session_config(R"({"duration_s": 60, "rate_bpm": 15})");
    const auto sim = simulate(cfg);
    const auto d = decode_session(sim.bytes, cfg.host_config());
    const auto summary = analyze(d.series, cfg.pipeline);
    const auto records = export_records(d.series, summary);

    size_t fsr = 0, accel = 0, battery = 0, estimate = 0;
    for (const auto& r : records) {
        const auto k = r["kind"].get<std::string>();
        fsr += k == "fsr";
        accel += k == "accel";
        battery += k == "battery";
        estimate += k == "estimate";
    }
    CHECK(fsr == 1500);
    CHECK(accel == 3000);
    CHECK(battery == 30);
    CHECK(estimate == 1);

    std::ostringstream csv;
    write_csv(csv, records);
    CHECK(count_lines(csv.str()) == 1 + records.size());
    CHECK(iso_relative(12'340.0) == "PT12.340S");
}

TEST_CASE("jsonl round trip") {
    const auto cfg = parse_session_config(R"({"duration_s": 20, "rate_bpm": 12})");
    const auto sim = simulate(cfg);
    const auto d = decode_session(sim.bytes, cfg.host_config());
    auto c2 = cfg;
    c2.pipeline.window_s = 10.0;
    const auto records = export_records(d.series, analyze(d.series, c2.pipeline));
    std::stringstream io;
    write_jsonl(io, records);
    CHECK(read_jsonl(io) == records);
}

TEST_CASE("export format names") {
    CHECK(parse_export_format("csv") == ExportFormat::Csv);
    CHECK(parse_export_format("jsonl") == ExportFormat::Jsonl);
    CHECK_THROWS_AS(parse_export_format("xml"), InvalidParameter);
}

TEST_CASE("ground truth sidecar") {
    const auto cfg = parse_session_config(R"({"duration_s": 60, "rate_bpm": 15})");
    const auto sim = simulate(cfg);
    const auto truth = ground_truth(cfg, sim);
    CHECK(truth["breath_times_ms"].size() == 15);
    CHECK(truth["frames_emitted"].get<uint64_t>() == 630);
    CHECK(truth.contains("soc_trajectory"));
    CHECK(truth.contains("postures"));
}

TEST_CASE("power audit") {
    auto cfg = parse_session_config(R"({"duration_s": 0})");
    const auto a = audit_power(cfg);
    CHECK(a.report.energy_mwh == 0.0);
    CHECK(a.projected_life_h == doctest::Approx(450.0 * 3.7 / 0.4));

    const auto claims = power_claims(cfg);
    REQUIRE(claims.size() == 2);
    CHECK(claims[0]["stated_power_uw"].get<double>() == 400.0);
    CHECK(claims[1]["stated_power_uw"].get<double>() == 4900.0);
}
