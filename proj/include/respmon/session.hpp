#pragma once

// Glue used by the CLI and the integration tests: run a configured session
// through the generators and the firmware emulator, and decode frame files.

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include <json.hpp>

#include "respmon/firmware.hpp"
#include "respmon/generators.hpp"
#include "respmon/pipeline.hpp"
#include "respmon/session_config.hpp"
#include "respmon/wire.hpp"

namespace respmon {

struct Simulation {
    std::vector<uint8_t> bytes;  // concatenated encoded frames
    RunResult run;
    ScenarioSignals signals;
};

// Deterministic for a given config. When `sink` is set, frames are passed to
// it as they are produced (with the device clock) and not kept in run.frames.
Simulation simulate(const SessionConfig& cfg, const FrameSink& sink = {});

// Ground-truth sidecar: breath times, rate and posture schedules, battery
// trajectory and frame counts.
nlohmann::json ground_truth(const SessionConfig& cfg, const Simulation& sim);

std::vector<uint8_t> encode_frames(std::span<const wire::TelemetryFrame> frames);

std::vector<uint8_t> read_file(const std::filesystem::path& path);            // throws IoError
void write_file(const std::filesystem::path& path, std::span<const uint8_t> bytes);  // throws IoError

// Splits a raw-telemetry-frames byte stream and assembles it.
struct DecodedSession {
    wire::SplitResult split;
    SessionSeries series;
};

DecodedSession decode_session(std::span<const uint8_t> bytes, const HostConfig& host = {});

// Energy report for a configured session. The emulator's activity timeline
// for cfg.duration_s is accumulated under cfg.firmware.power; with a zero
// duration the projected life falls back to the profile's nominal power.
struct PowerAudit {
    PowerProfile profile;
    EnergyReport report;
    double projected_life_h = 0.0;
};

PowerAudit audit_power(const SessionConfig& cfg);

// The two published device power figures (400 uW in the abstract, 4.9 mW in
// the introduction) and what each projects for the configured battery.
nlohmann::json power_claims(const SessionConfig& cfg);

}  // namespace respmon
