#include "respmon/sensor_model.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "respmon/errors.hpp"

namespace respmon {

void FsrModel::validate() const {
    if (!(r_min_ohm > 0.0) || !(r_min_ohm < r_max_ohm))
        throw InvalidParameter("fsr: require 0 < r_min_ohm < r_max_ohm");
    if (!(k_ohm_n > 0.0)) throw InvalidParameter("fsr: k_ohm_n must be > 0");
    if (!(f_break_n >= 0.0)) throw InvalidParameter("fsr: f_break_n must be >= 0");
}

void DividerConfig::validate() const {
    if (!(r_fixed_ohm > 0.0)) throw InvalidParameter("divider: r_fixed_ohm must be > 0");
    if (!(v_dd > 0.0)) throw InvalidParameter("divider: v_dd must be > 0");
}

void AdcConfig::validate() const {
    if (bits < 1 || bits > 16) throw InvalidParameter("adc: bits must be in [1, 16]");
    if (!(v_ref > 0.0)) throw InvalidParameter("adc: v_ref must be > 0");
}

double fsr_resistance(double force_n, const FsrModel& model) {
    if (!(force_n >= 0.0)) throw InvalidParameter("fsr_resistance: force must be >= 0");
    if (force_n < model.f_break_n || force_n == 0.0) return model.r_max_ohm;
    return std::clamp(model.k_ohm_n / force_n, model.r_min_ohm, model.r_max_ohm);
}

double divider_voltage(double r_fsr_ohm, const DividerConfig& cfg) {
    if (!(r_fsr_ohm >= 0.0)) throw InvalidParameter("divider_voltage: resistance must be >= 0");
    return cfg.v_dd * cfg.r_fixed_ohm / (cfg.r_fixed_ohm + r_fsr_ohm);
}

uint32_t adc_quantize(double volts, const AdcConfig& cfg) {
    const double v = std::isnan(volts) ? 0.0 : std::clamp(volts, 0.0, cfg.v_ref);
    const double scaled = v / cfg.v_ref * static_cast<double>(cfg.full_scale());
    const auto code = static_cast<uint32_t>(std::floor(scaled + 0.5));
    return std::min(code, cfg.full_scale());
}

uint32_t force_to_code(double force_n, const FsrModel& fsr, const DividerConfig& div,
                       const AdcConfig& adc) {
    return adc_quantize(divider_voltage(fsr_resistance(force_n, fsr), div), adc);
}

OcvCurve::OcvCurve() : points_{{0.0, kBatteryEmptyVolts}, {1.0, kBatteryFullVolts}} {}

OcvCurve::OcvCurve(std::vector<std::pair<double, double>> points) : points_(std::move(points)) {
    if (points_.size() < 2) throw InvalidParameter("ocv curve: need at least two points");
    if (points_.front().first != 0.0 || points_.back().first != 1.0)
        throw InvalidParameter("ocv curve: soc must span 0..1");
    for (size_t i = 1; i < points_.size(); ++i) {
        if (!(points_[i].first > points_[i - 1].first))
            throw InvalidParameter("ocv curve: soc must be strictly increasing");
        if (points_[i].second < points_[i - 1].second)
            throw InvalidParameter("ocv curve: voltage must be non-decreasing");
    }
}

double OcvCurve::voltage(double soc) const {
    soc = std::clamp(soc, 0.0, 1.0);
    auto hi = std::lower_bound(points_.begin(), points_.end(), soc,
                               [](const auto& p, double s) { return p.first < s; });
    if (hi == points_.begin()) return hi->second;
    auto lo = std::prev(hi);
    const double frac = (soc - lo->first) / (hi->first - lo->first);
    return lo->second + frac * (hi->second - lo->second);
}

double OcvCurve::soc(double volts) const {
    if (volts <= points_.front().second) return 0.0;
    if (volts >= points_.back().second) return 1.0;
    for (size_t i = 1; i < points_.size(); ++i) {
        const auto& [s0, v0] = points_[i - 1];
        const auto& [s1, v1] = points_[i];
        if (volts <= v1) {
            if (v1 == v0) return s0;
            return s0 + (volts - v0) / (v1 - v0) * (s1 - s0);
        }
    }
    return 1.0;
}

double battery_voltage(const BatteryState& state, const OcvCurve& curve) {
    if (!(state.soc >= 0.0 && state.soc <= 1.0))
        throw InvalidParameter("battery_voltage: soc must be in [0, 1]");
    return curve.voltage(state.soc);
}

BatteryState make_battery(double soc, double capacity_mah, const OcvCurve& curve) {
    if (!(soc >= 0.0 && soc <= 1.0)) throw InvalidParameter("battery: soc must be in [0, 1]");
    if (!(capacity_mah > 0.0)) throw InvalidParameter("battery: capacity_mah must be > 0");
    BatteryState b;
    b.capacity_mah = capacity_mah;
    b.soc = soc;
    b.v_terminal = curve.voltage(soc);
    b.depleted = soc <= 0.0;
    return b;
}

double battery_sense_voltage(double v_batt, double ratio, double v_ref) {
    if (!(ratio > 0.0 && ratio < 1.0))
        throw InvalidParameter("battery_sense_voltage: ratio must be in (0, 1)");
    const double v = v_batt * ratio;
    if (v > v_ref)
        throw InvalidParameter("battery_sense_voltage: scaled voltage " + std::to_string(v) +
                               " V exceeds ADC reference");
    return v;
}

int percent_from_voltage(double v_batt) {
    const double pct = 100.0 * (v_batt - kBatteryEmptyVolts) /
                       (kBatteryFullVolts - kBatteryEmptyVolts);
    return static_cast<int>(std::lround(std::clamp(pct, 0.0, 100.0)));
}

}  // namespace respmon
