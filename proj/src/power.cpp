#include "respmon/power.hpp"

#include <cmath>

#include "respmon/errors.hpp"

namespace respmon {

namespace {
constexpr double kUwPerMw = 1000.0;
constexpr double kMsPerHour = 3'600'000.0;
}  // namespace

void PowerProfile::validate() const {
    if (!(p_active_uw >= 0.0) || !(p_radio_uw >= 0.0) || !(p_idle_uw >= 0.0) ||
        !(tx_ms_per_frame >= 0.0))
        throw InvalidParameter("power profile: all fields must be >= 0");
}

PowerProfile power_preset(std::string_view name) {
    auto flat = [&](double uw) {
        PowerProfile p;
        p.name = std::string(name);
        p.p_active_uw = p.p_radio_uw = p.p_idle_uw = uw;
        return p;
    };
    if (name == kPresetAbstractClaim) return flat(400.0);
    if (name == kPresetIntroClaim) return flat(4900.0);
    throw InvalidParameter("unknown power preset '" + std::string(name) + "'");
}

std::vector<std::string> power_preset_names() {
    return {std::string(kPresetAbstractClaim), std::string(kPresetIntroClaim)};
}

double state_power_uw(const PowerProfile& profile, PowerState state) {
    switch (state) {
        case PowerState::Active: return profile.p_active_uw;
        case PowerState::Radio: return profile.p_radio_uw;
        case PowerState::Idle: return profile.p_idle_uw;
    }
    return profile.p_idle_uw;
}

double energy_mwh(double power_uw, double duration_ms) {
    return power_uw / kUwPerMw * duration_ms / kMsPerHour;
}

EnergyReport accumulate(const PowerProfile& profile, const ActivityTimeline& timeline,
                        const BatteryState& battery, double nominal_v) {
    EnergyReport r;
    double total_ms = 0.0;
    for (size_t i = 0; i < timeline.size(); ++i) {
        const auto& iv = timeline[i];
        if (!(iv.end_ms >= iv.start_ms))
            throw InvalidParameter("accumulate: interval ends before it starts");
        if (i > 0 && iv.start_ms < timeline[i - 1].end_ms)
            throw InvalidParameter("accumulate: overlapping-intervals");
        const double dt = iv.end_ms - iv.start_ms;
        total_ms += dt;
        r.energy_mwh += energy_mwh(state_power_uw(profile, iv.state), dt);
    }
    r.duration_s = total_ms / 1000.0;
    if (total_ms > 0.0) r.average_power_uw = r.energy_mwh * kUwPerMw * kMsPerHour / total_ms;
    if (r.average_power_uw > 0.0)
        r.projected_battery_life_h = battery_life_hours(r.average_power_uw, battery, nominal_v);
    return r;
}

double battery_capacity_mwh(const BatteryState& battery, double nominal_v) {
    return battery.capacity_mah * nominal_v;
}

double battery_life_hours(double average_power_uw, const BatteryState& battery,
                          double nominal_v) {
    if (!(average_power_uw > 0.0)) throw InvalidParameter("battery_life: zero-power");
    return battery_capacity_mwh(battery, nominal_v) / (average_power_uw / kUwPerMw);
}

double battery_life_hours(const PowerProfile& profile, const BatteryState& battery,
                          double nominal_v) {
    return battery_life_hours(profile.nominal_uw(), battery, nominal_v);
}

BatteryState drain(const BatteryState& battery, double energy, double nominal_v,
                   const OcvCurve& curve) {
    if (!(energy >= 0.0)) throw InvalidParameter("drain: energy must be >= 0");
    BatteryState out = battery;
    if (energy == 0.0) return out;
    out.soc = battery.soc - energy / battery_capacity_mwh(battery, nominal_v);
    if (out.soc <= 0.0) {
        out.soc = 0.0;
        out.depleted = true;
    }
    out.v_terminal = curve.voltage(out.soc);
    return out;
}

}  // namespace respmon
