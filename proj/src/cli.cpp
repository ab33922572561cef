#include "respmon/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "respmon/errors.hpp"
#include "respmon/export.hpp"
#include "respmon/session.hpp"
#include "respmon/transport.hpp"

namespace respmon::cli {

namespace {

using nlohmann::json;

struct CommonOptions {
    std::string config_path;
    std::optional<uint64_t> seed;
    std::optional<double> duration;
};

SessionConfig load_config(const CommonOptions& o) {
    SessionConfig cfg = o.config_path.empty() ? SessionConfig::from_json(json::object())
                                              : load_session_config(o.config_path);
    if (o.seed) cfg.seed = *o.seed;
    if (o.duration) cfg.duration_s = *o.duration;
    cfg.finalize();
    return cfg;
}

std::filesystem::path sidecar_path(const std::filesystem::path& out) {
    std::filesystem::path p = out;
    return p.replace_extension(".truth.json");
}

json frame_json(const wire::TelemetryFrame& f) {
    json j = {{"seq", f.seq}, {"flags", f.flags}};
    if (const auto* p = std::get_if<wire::FsrBatchPayload>(&f.payload)) {
        j["kind"] = "fsr";
        j["t0_ms"] = p->t0_ms;
        j["codes"] = p->codes;
    } else if (const auto* a = std::get_if<wire::AccelBatchPayload>(&f.payload)) {
        j["kind"] = "accel";
        j["t0_ms"] = a->t0_ms;
        json samples = json::array();
        for (const auto& s : a->samples) samples.push_back({s.x_mg, s.y_mg, s.z_mg});
        j["samples"] = samples;
    } else {
        const auto& b = std::get<wire::BatteryStatusPayload>(f.payload);
        j["kind"] = "battery";
        j["t_ms"] = b.t_ms;
        j["adc_code"] = b.adc_code;
        j["percent"] = b.percent;
        j["charging"] = f.charging();
    }
    return j;
}

int cmd_simulate(const CommonOptions& o, const std::string& out_path, std::ostream& out) {
    const SessionConfig cfg = load_config(o);
    const Simulation sim = simulate(cfg);
    write_file(out_path, sim.bytes);
    const auto truth_path = sidecar_path(out_path);
    std::ofstream truth(truth_path);
    if (!truth) throw IoError("cannot write '" + truth_path.string() + "'");
    truth << ground_truth(cfg, sim).dump(2) << '\n';
    out << "wrote " << sim.run.final_state.frames_emitted << " frames (" << sim.bytes.size()
        << " bytes) to " << out_path << "; ground truth in " << truth_path.string() << '\n';
    return kOk;
}

int cmd_stream(const CommonOptions& o, const std::string& connect, const std::string& listen,
               const std::string& out_path, double speed, std::ostream& out) {
    if (!listen.empty()) {
        if (out_path.empty()) throw ConfigParseError("--out", "required with --listen");
        const auto [host, port] = net::parse_address(listen);
        net::Listener listener(port, host);
        out << "listening on " << host << ':' << listener.port() << std::endl;
        const auto r = net::receive_session(listener, out_path);
        out << "received " << r.bytes << " bytes, " << r.frames << " frames, " << r.resyncs
            << " resyncs, " << r.pending_bytes << " pending bytes" << '\n';
        return kOk;
    }
    if (connect.empty()) throw ConfigParseError("--connect", "one of --connect or --listen is required");
    const SessionConfig cfg = load_config(o);
    const auto [host, port] = net::parse_address(connect);
    const auto r = net::stream_session(cfg, host, port, speed);
    out << "sent " << r.frames_sent << " frames (" << r.bytes_sent << " bytes) in " << std::fixed
        << std::setprecision(3) << r.wall_s << " s" << '\n';
    return kOk;
}

int cmd_decode(const std::string& in_path, std::ostream& out, std::ostream& err) {
    const auto bytes = read_file(in_path);
    const auto split = wire::stream_split(bytes);
    for (const auto& f : split.frames) out << frame_json(f).dump() << '\n';
    for (const auto& r : split.resyncs)
        err << "resync at offset " << r.offset << ", skipped " << r.skipped_bytes << " bytes\n";
    if (split.pending_bytes) err << split.pending_bytes << " trailing bytes of an incomplete frame\n";
    if (!bytes.empty() && split.frames.empty()) {
        err << "no valid frames in " << in_path << '\n';
        return kProtocol;
    }
    return kOk;
}

int cmd_analyze(const CommonOptions& o, const std::string& in_path, const std::string& out_path,
                const std::string& format, std::ostream& out, std::ostream& err) {
    const SessionConfig cfg = load_config(o);
    const ExportFormat fmt = parse_export_format(format);
    const auto bytes = read_file(in_path);
    const DecodedSession d = decode_session(bytes, cfg.host_config());
    const AnalysisSummary summary = analyze(d.series, cfg.pipeline);

    if (!out_path.empty()) {
        std::ofstream f(out_path);
        if (!f) throw IoError("cannot write '" + out_path + "'");
        const auto records = export_records(d.series, summary);
        if (fmt == ExportFormat::Csv)
            write_csv(f, records);
        else
            write_jsonl(f, records);
    }
    out << summary_json(d.series, summary, &d.split).dump(2) << '\n';
    if (!d.split.resyncs.empty() || d.split.pending_bytes)
        err << "stream damage: " << d.split.resyncs.size() << " resyncs, " << d.split.pending_bytes
            << " trailing bytes\n";
    if (!bytes.empty() && d.split.frames.empty()) {
        err << "no valid frames in " << in_path << '\n';
        return kProtocol;
    }
    return kOk;
}

int cmd_power(CommonOptions o, const std::string& preset, const std::string& format, std::ostream& out) {
    SessionConfig cfg = load_config(o);
    if (!preset.empty()) {
        try {
            cfg.firmware.power = power_preset(preset);
        } catch (const InvalidParameter& e) {
            throw ConfigParseError("--preset", e.what());
        }
    }
    const PowerAudit a = audit_power(cfg);
    const json claims = power_claims(cfg);
    const char* note =
        "The published device description states two power figures, 400 uW (abstract) and "
        "4.9 mW (introduction); both are reported and neither is preferred.";

    if (format == "json") {
        json j = {{"preset", a.profile.name},
                  {"duration_s", a.report.duration_s},
                  {"energy_mwh", a.report.energy_mwh},
                  {"average_power_uw", a.report.average_power_uw},
                  {"projected_battery_life_h", a.projected_life_h},
                  {"capacity_mah", cfg.firmware.capacity_mah},
                  {"nominal_v", cfg.firmware.nominal_v},
                  {"published_claims", claims},
                  {"note", note}};
        out << j.dump(2) << '\n';
        return kOk;
    }
    if (format != "table") throw ConfigParseError("--format", "power supports table or json");
    out << std::fixed;
    out << "preset                 " << a.profile.name << '\n'
        << "duration_s             " << std::setprecision(3) << a.report.duration_s << '\n'
        << "energy_mwh             " << std::setprecision(6) << a.report.energy_mwh << '\n'
        << "average_power_uw       " << std::setprecision(3) << a.report.average_power_uw << '\n'
        << "projected_life_h       " << std::setprecision(1) << a.projected_life_h << '\n'
        << '\n'
        << "published claims (" << cfg.firmware.capacity_mah << " mAh @ " << std::setprecision(2)
        << cfg.firmware.nominal_v << " V):\n";
    for (const auto& c : claims)
        out << "  " << std::left << std::setw(16) << c["preset"].get<std::string>() << std::right
            << std::setw(8) << std::setprecision(0) << c["stated_power_uw"].get<double>() << " uW  -> "
            << std::setprecision(1) << c["projected_life_h"].get<double>() << " h  ("
            << c["stated_in"].get<std::string>() << ")\n";
    out << note << '\n';
    return kOk;
}

}  // namespace

int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"respmon: respiration sensor emulator, telemetry codec and host pipeline"};
    app.require_subcommand(1);

    CommonOptions common;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "session config (JSON)");
        sub->add_option("--seed", common.seed, "override the config seed");
        sub->add_option("--duration", common.duration, "override the session duration (s)");
    };

    std::string out_path, connect, listen, in_path, format = "csv", preset, power_format = "table";
    double speed = 1.0;

    auto* sim = app.add_subcommand("simulate", "write a raw-telemetry-frames file and ground-truth sidecar");
    add_common(sim);
    sim->add_option("--out", out_path, "output .rtf path")->required();

    auto* stream = app.add_subcommand("stream", "send a live session over TCP, or receive one");
    add_common(stream);
    stream->add_option("--connect", connect, "host:port of the receiver");
    stream->add_option("--listen", listen, "host:port to accept one session on");
    stream->add_option("--out", out_path, "file for received bytes (with --listen)");
    stream->add_option("--speed", speed, "time compression factor")->check(CLI::PositiveNumber);

    auto* dec = app.add_subcommand("decode", "print frames of an .rtf file as JSON lines");
    dec->add_option("file", in_path, "frames file")->required();

    auto* ana = app.add_subcommand("analyze", "estimate respiration, artifacts, battery and alerts");
    add_common(ana);
    ana->add_option("file", in_path, "frames file")->required();
    ana->add_option("--out", out_path, "export path");
    ana->add_option("--format", format, "export format")->check(CLI::IsMember({"csv", "jsonl"}));

    auto* pow = app.add_subcommand("power", "energy report and projected battery life");
    add_common(pow);
    pow->add_option("--preset", preset, "power preset")->check(CLI::IsMember(power_preset_names()));
    pow->add_option("--format", power_format, "table or json")->check(CLI::IsMember({"table", "json"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kOk : kUsage;
    }

    try {
        if (sim->parsed()) return cmd_simulate(common, out_path, out);
        if (stream->parsed()) return cmd_stream(common, connect, listen, out_path, speed, out);
        if (dec->parsed()) return cmd_decode(in_path, out, err);
        if (ana->parsed()) return cmd_analyze(common, in_path, out_path, format, out, err);
        if (pow->parsed()) return cmd_power(common, preset, power_format, out);
    } catch (const ConfigParseError& e) {
        err << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const InvalidParameter& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const InvalidConfig& e) {
        err << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const net::ConnectionRefused& e) {
        err << "connection-refused: " << e.what() << '\n';
        return kIo;
    } catch (const net::BrokenPipe& e) {
        err << "broken-pipe: " << e.what() << '\n';
        return kIo;
    } catch (const IoError& e) {
        err << "io error: " << e.what() << '\n';
        return kIo;
    }
    return kUsage;
}

}  // namespace respmon::cli
