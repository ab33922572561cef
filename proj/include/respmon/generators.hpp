#pragma once

// Seeded stimulus generators. Identical arguments give bit-identical output.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "respmon/sensor_model.hpp"

namespace respmon {

enum class Posture { Still, Walking, Shift };

std::string_view to_string(Posture p);
Posture parse_posture(std::string_view name);  // throws InvalidParameter

inline constexpr double kDefaultFsrRateHz = 25.0;
inline constexpr double kAccelRateHz = 50.0;
inline constexpr double kWalkingAmplitudeMg = 300.0;
inline constexpr double kWalkingStepHz = 2.0;

struct BreathingParams {
    double rate_bpm = 15.0;
    double amplitude_n = 1.0;
    double baseline_n = 2.0;
    double noise_sd_n = 0.0;
    double duration_s = 60.0;
    uint64_t seed = 1;
    double sample_rate_hz = kDefaultFsrRateHz;
};

// baseline + amplitude * sin(2*pi*rate/60*t) + N(0, noise_sd), clamped at 0,
// sampled at t = i / sample_rate for i in [0, duration * sample_rate).
std::vector<ForceSample> generate_breathing(const BreathingParams& p);

std::vector<AccelSample> generate_accel(Posture posture, double duration_s, uint64_t seed,
                                        double noise_sd_mg = 5.0);

struct RateSegment {
    double start_s = 0.0;
    double rate_bpm = 15.0;
};

struct PostureSegment {
    double start_s = 0.0;
    Posture posture = Posture::Still;
};

struct ScenarioParams {
    std::vector<RateSegment> rates{{0.0, 15.0}};
    std::vector<PostureSegment> postures{{0.0, Posture::Still}};
    double amplitude_n = 1.0;
    double baseline_n = 2.0;
    double noise_sd_n = 0.0;
    double accel_noise_mg = 5.0;
    double duration_s = 60.0;
    double fsr_rate_hz = kDefaultFsrRateHz;
    uint64_t seed = 1;

    void validate() const;
};

struct PostureInterval {
    uint32_t start_ms = 0;
    uint32_t end_ms = 0;
    Posture posture = Posture::Still;
};

struct ScenarioSignals {
    std::vector<ForceSample> force;
    std::vector<AccelSample> accel;
    // Ground truth: instants of maximum force (inhalation peaks) of the noiseless waveform.
    std::vector<double> breath_times_ms;
    std::vector<PostureInterval> postures;
};

// Piecewise-constant rate and posture schedules. The breathing phase is
// continuous across rate changes.
ScenarioSignals generate_scenario(const ScenarioParams& p);

}  // namespace respmon
