#pragma once

// State-based energy accounting. Energy is tracked at a fixed nominal cell
// voltage rather than by coulomb counting.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "respmon/sensor_model.hpp"

namespace respmon {

inline constexpr double kNominalCellVolts = 3.7;

struct PowerProfile {
    std::string name = "custom";
    double p_active_uw = 400.0;
    double p_radio_uw = 400.0;
    double p_idle_uw = 400.0;
    double tx_ms_per_frame = 2.0;

    void validate() const;
    // Power used when no timeline is available (zero-duration reports).
    double nominal_uw() const { return p_active_uw; }
};

// The device's power figure as stated in two places of its published
// description: 400 uW and 4.9 mW. Each preset holds one figure in every state.
inline constexpr std::string_view kPresetAbstractClaim = "abstract-claim";
inline constexpr std::string_view kPresetIntroClaim = "intro-claim";

PowerProfile power_preset(std::string_view name);  // throws InvalidParameter
std::vector<std::string> power_preset_names();

enum class PowerState : uint8_t { Idle, Active, Radio };

struct ActivityInterval {
    double start_ms = 0.0;
    double end_ms = 0.0;
    PowerState state = PowerState::Idle;
};

using ActivityTimeline = std::vector<ActivityInterval>;

struct EnergyReport {
    double duration_s = 0.0;
    double energy_mwh = 0.0;
    double average_power_uw = 0.0;
    std::optional<double> projected_battery_life_h;  // empty when average power is zero
};

double state_power_uw(const PowerProfile& profile, PowerState state);

// Energy in mWh for `power_uw` sustained over `duration_ms`.
double energy_mwh(double power_uw, double duration_ms);

// Sums power x time over the timeline. duration_s is the summed interval
// length. Throws InvalidParameter on overlapping or unordered intervals.
EnergyReport accumulate(const PowerProfile& profile, const ActivityTimeline& timeline,
                        const BatteryState& battery = BatteryState{},
                        double nominal_v = kNominalCellVolts);

// Hours of operation: capacity_mah * nominal_v / (average_power_uw / 1000).
// Throws InvalidParameter for non-positive power.
double battery_life_hours(double average_power_uw, const BatteryState& battery,
                          double nominal_v = kNominalCellVolts);
double battery_life_hours(const PowerProfile& profile, const BatteryState& battery,
                          double nominal_v = kNominalCellVolts);

// Battery energy at full charge, mWh.
double battery_capacity_mwh(const BatteryState& battery, double nominal_v = kNominalCellVolts);

BatteryState drain(const BatteryState& battery, double energy_mwh,
                   double nominal_v = kNominalCellVolts, const OcvCurve& curve = OcvCurve{});

}  // namespace respmon
