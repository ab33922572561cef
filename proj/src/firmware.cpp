#include "respmon/firmware.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "respmon/errors.hpp"

namespace respmon {

namespace {

uint32_t period_from_rate(double rate_hz, const char* what) {
    if (!(rate_hz > 0.0)) throw InvalidConfig(std::string(what) + ": rate must be > 0");
    const double period = 1000.0 / rate_hz;
    const double rounded = std::round(period);
    if (rounded < 1.0 || std::abs(period - rounded) > 1e-9)
        throw InvalidConfig(std::string(what) + ": 1000/rate must be a whole number of ms");
    return static_cast<uint32_t>(rounded);
}

}  // namespace

uint32_t FirmwareConfig::fsr_period_ms() const { return period_from_rate(fsr_rate_hz, "fsr_rate_hz"); }

uint32_t FirmwareConfig::accel_period_ms() const {
    return period_from_rate(accel_rate_hz, "accel_rate_hz");
}

void FirmwareConfig::validate() const {
    if (tick_ms == 0) throw InvalidConfig("tick_ms must be >= 1");
    const uint32_t fsr_p = fsr_period_ms();
    const uint32_t acc_p = accel_period_ms();
    if (battery_period_ms == 0) throw InvalidConfig("battery_period_ms must be >= 1");
    for (uint32_t p : {fsr_p, acc_p, battery_period_ms})
        if (p % tick_ms != 0) throw InvalidConfig("sample periods must be multiples of tick_ms");
    if (fsr_batch < 1 || accel_batch < 1) throw InvalidConfig("batch sizes must be >= 1");

    const size_t fsr_bytes = wire::fsr_payload_size(fsr_batch);
    const size_t accel_bytes = wire::accel_payload_size(accel_batch);
    if (fsr_batch > 255 || fsr_bytes > wire::kMaxPayload)
        throw InvalidConfig("fsr_batch " + std::to_string(fsr_batch) + " gives payload " +
                            std::to_string(fsr_bytes) + " bytes > MTU " +
                            std::to_string(wire::kMaxPayload));
    if (accel_batch > 255 || accel_bytes > wire::kMaxPayload)
        throw InvalidConfig("accel_batch " + std::to_string(accel_batch) + " gives payload " +
                            std::to_string(accel_bytes) + " bytes > MTU " +
                            std::to_string(wire::kMaxPayload));

    try {
        fsr.validate();
        divider.validate();
        adc.validate();
        power.validate();
        battery_sense_voltage(kBatteryFullVolts, battery_sense_ratio, adc.v_ref);
    } catch (const InvalidParameter& e) {
        throw InvalidConfig(e.what());
    }
    if (!(capacity_mah > 0.0)) throw InvalidConfig("capacity_mah must be > 0");
    if (!(nominal_v > 0.0)) throw InvalidConfig("nominal_v must be > 0");
}

Firmware::Firmware(const FirmwareConfig& cfg, BatteryState battery)
    : cfg_(cfg), fsr_period_ms_(cfg.fsr_period_ms()), accel_period_ms_(cfg.accel_period_ms()) {
    state_.battery = battery;
    initial_battery_ = battery;
}

Firmware Firmware::boot(const FirmwareConfig& cfg, double initial_soc) {
    if (!(initial_soc >= 0.0 && initial_soc <= 1.0))
        throw InvalidParameter("boot: initial_soc must be in [0, 1]");
    cfg.validate();
    BatteryState battery = make_battery(initial_soc, cfg.capacity_mah, cfg.ocv);
    battery.charging = cfg.charging;
    Firmware fw(cfg, battery);
    // Accelerometer configuration over SPI precedes any sampling.
    fw.state_.accel_configured = true;
    return fw;
}

wire::TelemetryFrame Firmware::next_frame(wire::Payload payload, uint8_t flags) {
    wire::TelemetryFrame f;
    f.seq = state_.seq++;
    f.flags = flags;
    f.payload = std::move(payload);
    ++state_.frames_emitted;
    tx_remaining_ms_ += cfg_.power.tx_ms_per_frame;
    return f;
}

void Firmware::record_activity(uint32_t start_ms, uint32_t end_ms, PowerState s) {
    if (!timeline_.empty() && timeline_.back().state == s &&
        timeline_.back().end_ms == static_cast<double>(start_ms)) {
        timeline_.back().end_ms = end_ms;
        return;
    }
    timeline_.push_back({static_cast<double>(start_ms), static_cast<double>(end_ms), s});
}

std::vector<wire::TelemetryFrame> Firmware::tick(const Stimulus& stim) {
    std::vector<wire::TelemetryFrame> out;
    const uint32_t start = state_.clock_ms;
    const uint32_t now = start + cfg_.tick_ms;
    state_.clock_ms = now;

    // Transmission queued by earlier frames occupies this tick first.
    const bool transmitting = tx_remaining_ms_ > 0.0;
    if (transmitting) tx_remaining_ms_ = std::max(0.0, tx_remaining_ms_ - cfg_.tick_ms);

    const bool battery_due = now % cfg_.battery_period_ms == 0;
    const bool fsr_due = now % fsr_period_ms_ == 0;
    const bool accel_due = now % accel_period_ms_ == 0;

    // ADC channel 1: battery.
    if (battery_due) {
        const auto& b = state_.battery;
        const double v_sense = battery_sense_voltage(b.v_terminal, cfg_.battery_sense_ratio, cfg_.adc.v_ref);
        wire::BatteryStatusPayload p;
        p.t_ms = now;
        p.adc_code = static_cast<uint16_t>(adc_quantize(v_sense, cfg_.adc));
        p.percent = static_cast<uint8_t>(percent_from_voltage(b.v_terminal));
        soc_points_.push_back({now, b.soc, b.v_terminal});
        out.push_back(next_frame(p, b.charging ? wire::kFlagCharging : 0));
    }

    // ADC channel 2: FSR.
    if (fsr_due) {
        if (fsr_pending_.codes.empty()) fsr_pending_.t0_ms = now;
        const double force = std::max(stim.force_n, 0.0);
        fsr_pending_.codes.push_back(
            static_cast<uint16_t>(force_to_code(force, cfg_.fsr, cfg_.divider, cfg_.adc)));
        if (fsr_pending_.codes.size() == cfg_.fsr_batch)
            out.push_back(next_frame(std::exchange(fsr_pending_, {}), 0));
    }

    if (accel_due) {
        if (stim.accel) last_accel_ = *stim.accel;
        if (accel_pending_.samples.empty()) accel_pending_.t0_ms = now;
        accel_pending_.samples.push_back({last_accel_.x_mg, last_accel_.y_mg, last_accel_.z_mg});
        if (accel_pending_.samples.size() == cfg_.accel_batch)
            out.push_back(next_frame(std::exchange(accel_pending_, {}), 0));
    }

    PowerState ps = PowerState::Idle;
    if (transmitting)
        ps = PowerState::Radio;
    else if (battery_due || fsr_due || accel_due)
        ps = PowerState::Active;
    record_activity(start, now, ps);

    const double e = energy_mwh(state_power_uw(cfg_.power, ps), cfg_.tick_ms);
    energy_mwh_ += e;
    // Drained from the boot state in one step so the state of charge carries
    // a single rounding rather than one per tick.
    const bool charging = state_.battery.charging;
    state_.battery = drain(initial_battery_, energy_mwh_, cfg_.nominal_v, cfg_.ocv);
    state_.battery.charging = charging;
    return out;
}

std::vector<wire::TelemetryFrame> Firmware::flush() {
    std::vector<wire::TelemetryFrame> out;
    if (!fsr_pending_.codes.empty())
        out.push_back(next_frame(std::exchange(fsr_pending_, {}), wire::kFlagFinalFlush));
    if (!accel_pending_.samples.empty())
        out.push_back(next_frame(std::exchange(accel_pending_, {}), wire::kFlagFinalFlush));
    return out;
}

SeriesStimulus::SeriesStimulus(std::vector<ForceSample> force, std::vector<AccelSample> accel)
    : force_(std::move(force)), accel_(std::move(accel)) {}

Stimulus SeriesStimulus::at(uint32_t t_ms) {
    Stimulus s;
    while (fi_ + 1 < force_.size() && force_[fi_ + 1].t_ms <= t_ms) ++fi_;
    while (ai_ + 1 < accel_.size() && accel_[ai_ + 1].t_ms <= t_ms) ++ai_;
    if (!force_.empty()) s.force_n = force_[fi_].force_n;
    if (!accel_.empty()) s.accel = accel_[ai_];
    return s;
}

RunResult run(const FirmwareConfig& cfg, StimulusSource& source, double duration_s,
              double initial_soc, const FrameSink& sink) {
    if (!(duration_s >= 0.0)) throw InvalidParameter("run: duration_s must be >= 0");
    Firmware fw = Firmware::boot(cfg, initial_soc);
    RunResult result;
    auto emit = [&](std::vector<wire::TelemetryFrame>&& frames) {
        for (auto& f : frames) {
            if (sink)
                sink(f, fw.state().clock_ms);
            else
                result.frames.push_back(std::move(f));
        }
    };

    const auto ticks = static_cast<uint64_t>(std::llround(duration_s * 1000.0 / cfg.tick_ms));
    for (uint64_t i = 0; i < ticks; ++i)
        emit(fw.tick(source.at(fw.state().clock_ms + cfg.tick_ms)));
    emit(fw.flush());

    result.final_state = fw.state();
    result.timeline = fw.timeline();
    result.energy_mwh = fw.energy_consumed_mwh();
    result.soc_trajectory = fw.soc_trajectory();
    return result;
}

}  // namespace respmon
