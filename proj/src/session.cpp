#include "respmon/session.hpp"

#include <fstream>
#include <iterator>

#include "respmon/errors.hpp"

namespace respmon {

using nlohmann::json;

Simulation simulate(const SessionConfig& cfg, const FrameSink& sink) {
    Simulation sim;
    sim.signals = generate_scenario(cfg.scenario);
    SeriesStimulus source(sim.signals.force, sim.signals.accel);
    if (sink) {
        sim.run = run(cfg.firmware, source, cfg.duration_s, cfg.initial_soc,
                      [&](const wire::TelemetryFrame& f, uint32_t clock_ms) {
                          wire::encode_append(f, sim.bytes);
                          sink(f, clock_ms);
                      });
    } else {
        sim.run = run(cfg.firmware, source, cfg.duration_s, cfg.initial_soc);
        sim.bytes = encode_frames(sim.run.frames);
    }
    return sim;
}

json ground_truth(const SessionConfig& cfg, const Simulation& sim) {
    json postures = json::array();
    for (const auto& p : sim.signals.postures)
        postures.push_back({{"start_ms", p.start_ms}, {"end_ms", p.end_ms}, {"posture", std::string(to_string(p.posture))}});
    json rates = json::array();
    for (const auto& r : cfg.scenario.rates) rates.push_back({{"start_s", r.start_s}, {"rate_bpm", r.rate_bpm}});
    json soc = json::array();
    for (const auto& s : sim.run.soc_trajectory)
        soc.push_back({{"t_ms", s.t_ms}, {"soc", s.soc}, {"v_terminal", s.v_terminal}});

    const auto& fw = cfg.firmware;
    const auto dur_ms = static_cast<uint64_t>(std::llround(cfg.duration_s * 1000.0));
    const uint64_t fsr_samples = dur_ms / fw.fsr_period_ms();
    const uint64_t accel_samples = dur_ms / fw.accel_period_ms();
    const uint64_t battery_frames = dur_ms / fw.battery_period_ms;
    const uint64_t fsr_frames = (fsr_samples + fw.fsr_batch - 1) / fw.fsr_batch;
    const uint64_t accel_frames = (accel_samples + fw.accel_batch - 1) / fw.accel_batch;

    return {
        {"seed", cfg.seed},
        {"duration_s", cfg.duration_s},
        {"breath_times_ms", sim.signals.breath_times_ms},
        {"rate_schedule", rates},
        {"postures", postures},
        {"soc_trajectory", soc},
        {"final_soc", sim.run.final_state.battery.soc},
        {"energy_mwh", sim.run.energy_mwh},
        {"expected",
         {{"fsr_samples", fsr_samples},
          {"accel_samples", accel_samples},
          {"battery_frames", battery_frames},
          {"fsr_frames", fsr_frames},
          {"accel_frames", accel_frames},
          {"total_frames", fsr_frames + accel_frames + battery_frames}}},
        {"frames_emitted", sim.run.final_state.frames_emitted},
        {"config", cfg.to_json()},
    };
}

std::vector<uint8_t> encode_frames(std::span<const wire::TelemetryFrame> frames) {
    std::vector<uint8_t> out;
    for (const auto& f : frames) wire::encode_append(f, out);
    return out;
}

std::vector<uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, std::span<const uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for '" + path.string() + "'");
}

DecodedSession decode_session(std::span<const uint8_t> bytes, const HostConfig& host) {
    DecodedSession d;
    d.split = wire::stream_split(bytes);
    SessionAssembler assembler(host);
    assembler.add(d.split.frames);
    d.series = assembler.assemble();
    return d;
}

PowerAudit audit_power(const SessionConfig& cfg) {
    PowerAudit a;
    a.profile = cfg.firmware.power;
    const BatteryState battery = make_battery(1.0, cfg.firmware.capacity_mah, cfg.firmware.ocv);
    if (cfg.duration_s > 0.0) {
        const Simulation sim = simulate(cfg);
        a.report = accumulate(a.profile, sim.run.timeline, battery, cfg.firmware.nominal_v);
    }
    const double p_uw = a.report.average_power_uw > 0.0 ? a.report.average_power_uw : a.profile.nominal_uw();
    a.projected_life_h = battery_life_hours(p_uw, battery, cfg.firmware.nominal_v);
    a.report.projected_battery_life_h = a.projected_life_h;
    return a;
}

json power_claims(const SessionConfig& cfg) {
    const BatteryState battery = make_battery(1.0, cfg.firmware.capacity_mah, cfg.firmware.ocv);
    json claims = json::array();
    const std::pair<std::string_view, const char*> sources[] = {
        {kPresetAbstractClaim, "abstract"}, {kPresetIntroClaim, "introduction"}};
    for (const auto& [name, where] : sources) {
        const PowerProfile p = power_preset(name);
        claims.push_back({{"preset", std::string(name)},
                          {"stated_in", where},
                          {"stated_power_uw", p.nominal_uw()},
                          {"projected_life_h", battery_life_hours(p, battery, cfg.firmware.nominal_v)}});
    }
    return claims;
}

}  // namespace respmon
