#pragma once

// Electrical chain of the respiration sensor: applied force -> FSR resistance
// -> divider voltage -> ADC code, plus the battery and its sense divider.

#include <cstdint>
#include <utility>
#include <vector>

namespace respmon {

struct ForceSample {
    uint32_t t_ms = 0;
    double force_n = 0.0;

    bool operator==(const ForceSample&) const = default;
};

struct AccelSample {
    uint32_t t_ms = 0;
    int16_t x_mg = 0;
    int16_t y_mg = 0;
    int16_t z_mg = 0;

    bool operator==(const AccelSample&) const = default;
};

inline constexpr int kAccelFullScaleMg = 2000;

// Inverse-law FSR: R = k / F, clamped to [r_min, r_max]; r_max below f_break.
struct FsrModel {
    double k_ohm_n = 100'000.0;
    double r_min_ohm = 1'000.0;
    double r_max_ohm = 10'000'000.0;
    double f_break_n = 0.01;

    void validate() const;
};

struct DividerConfig {
    double r_fixed_ohm = 499'000.0;
    double v_dd = 1.8;

    void validate() const;
};

enum class AdcRounding { HalfUp };

struct AdcConfig {
    int bits = 12;
    double v_ref = 1.8;
    AdcRounding rounding = AdcRounding::HalfUp;

    uint32_t full_scale() const { return (1u << bits) - 1u; }
    double lsb_volts() const { return v_ref / static_cast<double>(full_scale()); }
    void validate() const;
};

// Open-circuit voltage as a piecewise-linear function of state of charge.
// Points are (soc, volts), strictly increasing in soc and non-decreasing in
// volts, spanning soc 0..1.
class OcvCurve {
public:
    OcvCurve();  // linear 3.3 V .. 4.2 V
    explicit OcvCurve(std::vector<std::pair<double, double>> points);

    double voltage(double soc) const;
    // Inverse of voltage(); clamps to [0, 1] outside the curve's range.
    double soc(double volts) const;

    const std::vector<std::pair<double, double>>& points() const { return points_; }

private:
    std::vector<std::pair<double, double>> points_;
};

struct BatteryState {
    double capacity_mah = 450.0;
    double soc = 1.0;
    double v_terminal = 4.2;
    bool charging = false;
    bool depleted = false;
};

inline constexpr double kBatteryEmptyVolts = 3.3;
inline constexpr double kBatteryFullVolts = 4.2;
inline constexpr double kDefaultSenseRatio = 0.4;

double fsr_resistance(double force_n, const FsrModel& model);
double divider_voltage(double r_fsr_ohm, const DividerConfig& cfg);
uint32_t adc_quantize(double volts, const AdcConfig& cfg);

// Force -> code through the whole chain.
uint32_t force_to_code(double force_n, const FsrModel& fsr, const DividerConfig& div,
                       const AdcConfig& adc);

double battery_voltage(const BatteryState& state, const OcvCurve& curve = OcvCurve{});
BatteryState make_battery(double soc, double capacity_mah = 450.0,
                          const OcvCurve& curve = OcvCurve{});

// Battery voltage scaled into the ADC range. Throws InvalidParameter when the
// ratio is outside (0, 1) or the scaled voltage exceeds v_ref.
double battery_sense_voltage(double v_batt, double ratio, double v_ref = 1.8);

// Percentage on the linear 3.3..4.2 V map, rounded to the nearest integer.
int percent_from_voltage(double v_batt);

}  // namespace respmon
