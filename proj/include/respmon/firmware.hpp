#pragma once

// Discrete-time emulation of the device firmware loop: after the
// accelerometer is configured, every tick advances a millisecond clock and
// fires each sampler whose period has elapsed. Samples are batched into
// telemetry frames and every tick drains the battery through the power model.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "respmon/power.hpp"
#include "respmon/sensor_model.hpp"
#include "respmon/wire.hpp"

namespace respmon {

struct FirmwareConfig {
    double fsr_rate_hz = 25.0;
    double accel_rate_hz = 50.0;
    uint32_t battery_period_ms = 2000;
    uint32_t fsr_batch = 5;
    uint32_t accel_batch = 10;
    uint32_t tick_ms = 1;

    FsrModel fsr;
    DividerConfig divider;
    AdcConfig adc;
    double battery_sense_ratio = kDefaultSenseRatio;
    double capacity_mah = 450.0;
    bool charging = false;
    OcvCurve ocv;
    PowerProfile power = power_preset(kPresetAbstractClaim);
    double nominal_v = kNominalCellVolts;

    uint32_t fsr_period_ms() const;
    uint32_t accel_period_ms() const;

    // Throws InvalidConfig when a period is not a whole number of ticks or a
    // batch would not fit in one frame.
    void validate() const;
};

struct DeviceState {
    uint32_t clock_ms = 0;
    uint16_t seq = 0;  // next sequence number to assign
    uint64_t frames_emitted = 0;
    BatteryState battery;
    bool accel_configured = false;
};

struct Stimulus {
    double force_n = 0.0;
    std::optional<AccelSample> accel;
};

struct SocPoint {
    uint32_t t_ms = 0;
    double soc = 0.0;
    double v_terminal = 0.0;
};

class Firmware {
public:
    // Configures the accelerometer and initial battery state. Throws
    // InvalidConfig / InvalidParameter.
    static Firmware boot(const FirmwareConfig& cfg, double initial_soc);

    // Advances the clock by one tick; `stim` is the physical input at the end
    // of the tick.
    std::vector<wire::TelemetryFrame> tick(const Stimulus& stim);

    // Emits partially filled batches flagged final-flush.
    std::vector<wire::TelemetryFrame> flush();

    const DeviceState& state() const { return state_; }
    const FirmwareConfig& config() const { return cfg_; }
    const ActivityTimeline& timeline() const { return timeline_; }
    double energy_consumed_mwh() const { return energy_mwh_; }
    const std::vector<SocPoint>& soc_trajectory() const { return soc_points_; }

private:
    Firmware(const FirmwareConfig& cfg, BatteryState battery);

    wire::TelemetryFrame next_frame(wire::Payload payload, uint8_t flags);
    void record_activity(uint32_t start_ms, uint32_t end_ms, PowerState s);

    FirmwareConfig cfg_;
    uint32_t fsr_period_ms_;
    uint32_t accel_period_ms_;
    DeviceState state_;
    BatteryState initial_battery_;
    wire::FsrBatchPayload fsr_pending_;
    wire::AccelBatchPayload accel_pending_;
    AccelSample last_accel_{0, 0, 0, 1000};
    double tx_remaining_ms_ = 0.0;
    double energy_mwh_ = 0.0;
    ActivityTimeline timeline_;
    std::vector<SocPoint> soc_points_;
};

// Physical input as a function of time.
class StimulusSource {
public:
    virtual ~StimulusSource() = default;
    virtual Stimulus at(uint32_t t_ms) = 0;
};

// Sample-and-hold over recorded or generated series. Queries must be
// non-decreasing in time.
class SeriesStimulus : public StimulusSource {
public:
    SeriesStimulus(std::vector<ForceSample> force, std::vector<AccelSample> accel);
    Stimulus at(uint32_t t_ms) override;

private:
    std::vector<ForceSample> force_;
    std::vector<AccelSample> accel_;
    size_t fi_ = 0;
    size_t ai_ = 0;
};

struct RunResult {
    std::vector<wire::TelemetryFrame> frames;
    DeviceState final_state;
    ActivityTimeline timeline;
    double energy_mwh = 0.0;
    std::vector<SocPoint> soc_trajectory;
};

// Called for each frame with the device clock at emission.
using FrameSink = std::function<void(const wire::TelemetryFrame&, uint32_t clock_ms)>;

// Boots, ticks for duration_s, then flushes. Frames go to `sink` when given,
// otherwise they are collected in RunResult::frames.
RunResult run(const FirmwareConfig& cfg, StimulusSource& source, double duration_s,
              double initial_soc = 1.0, const FrameSink& sink = {});

}  // namespace respmon
