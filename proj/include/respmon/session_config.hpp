#pragma once

// Session configuration document (JSON). Every field is optional; a minimal
// config is `{"duration_s": 60, "rate_bpm": 15}`. Unknown keys and wrongly
// typed values are rejected with a ConfigParseError naming the key path.

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "respmon/firmware.hpp"
#include "respmon/generators.hpp"
#include "respmon/pipeline.hpp"

namespace respmon {

struct SessionConfig {
    uint64_t seed = 1;
    double duration_s = 60.0;
    double initial_soc = 1.0;
    ScenarioParams scenario;
    FirmwareConfig firmware;
    PipelineConfig pipeline;

    // Copies shared values (seed, duration, rates, hardware) into the
    // sub-configs and validates them all. Throws ConfigParseError.
    void finalize();

    HostConfig host_config() const;

    static SessionConfig from_json(const nlohmann::json& doc);
    nlohmann::json to_json() const;
};

SessionConfig parse_session_config(const std::string& text);
SessionConfig load_session_config(const std::filesystem::path& path);

}  // namespace respmon
