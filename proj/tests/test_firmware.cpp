#include <doctest.h>

#include <cmath>

#include "prop.hpp"
#include "respmon/errors.hpp"
#include "respmon/firmware.hpp"
#include "respmon/generators.hpp"

using namespace respmon;
using namespace respmon::wire;

namespace {

struct Constant : StimulusSource {
    double force = 2.0;
    Stimulus at(uint32_t) override { return {force, AccelSample{0, 0, 0, 1000}}; }
};

struct Counts {
    size_t fsr_frames = 0, accel_frames = 0, battery_frames = 0;
    size_t fsr_samples = 0, accel_samples = 0;
};

Counts count(const std::vector<TelemetryFrame>& frames) {
    Counts c;
    for (const auto& f : frames) {
        if (const auto* p = std::get_if<FsrBatchPayload>(&f.payload)) {
            ++c.fsr_frames;
            c.fsr_samples += p->codes.size();
        } else if (const auto* a = std::get_if<AccelBatchPayload>(&f.payload)) {
            ++c.accel_frames;
            c.accel_samples += a->samples.size();
        } else {
            ++c.battery_frames;
        }
    }
    return c;
}

std::vector<uint8_t> bytes_of(const std::vector<TelemetryFrame>& frames) {
    std::vector<uint8_t> out;
    for (const auto& f : frames) encode_append(f, out);
    return out;
}

}  // namespace

TEST_CASE("boot") {
    const FirmwareConfig cfg;
    const auto fw = Firmware::boot(cfg, 1.0);
    CHECK(fw.state().battery.v_terminal == doctest::Approx(4.2));
    CHECK(fw.state().accel_configured);
    CHECK(fw.state().clock_ms == 0);
    CHECK(fw.state().seq == 0);

    CHECK_THROWS_AS(Firmware::boot(cfg, 1.5), InvalidParameter);
    auto big = cfg;
    big.accel_batch = 100;
    CHECK_THROWS_AS(Firmware::boot(big, 1.0), InvalidConfig);
    big = cfg;
    big.fsr_rate_hz = 30.0;  // 33.3 ms period
    CHECK_THROWS_AS(Firmware::boot(big, 1.0), InvalidConfig);
    big = cfg;
    big.fsr_batch = 0;
    CHECK_THROWS_AS(Firmware::boot(big, 1.0), InvalidConfig);
}

TEST_CASE("two seconds at defaults") {
    Constant src;
    const auto r = run(FirmwareConfig{}, src, 2.0);
    const auto c = count(r.frames);
    CHECK(c.battery_frames == 1);
    CHECK(c.fsr_frames == 10);
    CHECK(c.accel_frames == 10);
    CHECK(c.fsr_samples == 50);
    CHECK(c.accel_samples == 100);
}

TEST_CASE("zero duration emits nothing") {
    Constant src;
    CHECK(run(FirmwareConfig{}, src, 0.0).frames.empty());
}

TEST_CASE("sixty seconds at defaults") {
    Constant src;
    const auto r = run(FirmwareConfig{}, src, 60.0);
    const auto c = count(r.frames);
    CHECK(c.battery_frames == 30);
    CHECK(c.accel_samples == 3000);
    CHECK(c.fsr_samples == 1500);
    CHECK(r.frames.size() == 630);
}

TEST_CASE("cadence over random durations and rates") {
    prop::Gen g(41);
    const double rates[] = {10.0, 20.0, 25.0, 40.0, 50.0, 100.0};
    for (int i = 0; i < 40; ++i) {
        FirmwareConfig cfg;
        cfg.fsr_rate_hz = rates[g.integer(0, 5)];
        cfg.fsr_batch = static_cast<uint32_t>(g.integer(1, 50));
        cfg.accel_batch = static_cast<uint32_t>(g.integer(1, 39));
        const auto t_s = static_cast<int>(g.integer(1, 30));
        Constant src;
        const auto r = run(cfg, src, t_s);
        const auto c = count(r.frames);
        REQUIRE(c.fsr_samples == static_cast<size_t>(std::llround(cfg.fsr_rate_hz * t_s)));
        REQUIRE(c.accel_samples == static_cast<size_t>(50 * t_s));
        REQUIRE(c.battery_frames == static_cast<size_t>(t_s * 1000 / 2000));

        // Sequence integrity and batch timestamps.
        for (size_t k = 0; k < r.frames.size(); ++k) REQUIRE(r.frames[k].seq == k);
        uint32_t next_fsr = cfg.fsr_period_ms(), next_acc = cfg.accel_period_ms();
        for (const auto& f : r.frames) {
            if (const auto* p = std::get_if<FsrBatchPayload>(&f.payload)) {
                REQUIRE(p->t0_ms == next_fsr);
                next_fsr += static_cast<uint32_t>(p->codes.size()) * cfg.fsr_period_ms();
            } else if (const auto* a = std::get_if<AccelBatchPayload>(&f.payload)) {
                REQUIRE(a->t0_ms == next_acc);
                next_acc += static_cast<uint32_t>(a->samples.size()) * cfg.accel_period_ms();
            }
        }
    }
}

TEST_CASE("partial batches are flushed with the final flag") {
    FirmwareConfig cfg;
    cfg.fsr_batch = 7;
    Constant src;
    const auto r = run(cfg, src, 1.0);  // 25 FSR samples, 50 accel samples
    std::vector<const TelemetryFrame*> fsr;
    for (const auto& f : r.frames)
        if (f.kind() == FrameKind::FsrBatch) fsr.push_back(&f);
    REQUIRE(fsr.size() == 4);
    CHECK(std::get<FsrBatchPayload>(fsr.back()->payload).codes.size() == 4);
    CHECK(fsr.back()->final_flush());
    CHECK_FALSE(fsr.front()->final_flush());
}

TEST_CASE("output is deterministic") {
    ScenarioParams p;
    p.noise_sd_n = 0.1;
    p.seed = 9;
    p.duration_s = 20.0;
    p.postures = {{0.0, Posture::Still}, {5.0, Posture::Walking}};
    const auto s = generate_scenario(p);
    SeriesStimulus a(s.force, s.accel), b(s.force, s.accel);
    CHECK(bytes_of(run(FirmwareConfig{}, a, 20.0).frames) == bytes_of(run(FirmwareConfig{}, b, 20.0).frames));
}

TEST_CASE("stimulus reaches the codes") {
    Constant src;
    src.force = 1.0;
    const auto r = run(FirmwareConfig{}, src, 1.0);
    const uint32_t expected = force_to_code(1.0, FsrModel{}, DividerConfig{}, AdcConfig{});
    for (const auto& f : r.frames)
        if (const auto* p = std::get_if<FsrBatchPayload>(&f.payload))
            for (auto c : p->codes) REQUIRE(c == expected);
}

TEST_CASE("battery frames report the battery channel") {
    Constant src;
    FirmwareConfig cfg;
    cfg.charging = true;
    const auto r = run(cfg, src, 2.0);
    for (const auto& f : r.frames)
        if (const auto* b = std::get_if<BatteryStatusPayload>(&f.payload)) {
            CHECK(b->t_ms == 2000);
            CHECK(b->adc_code == adc_quantize(4.2 * 0.4, AdcConfig{}));
            CHECK(b->percent == 100);
            CHECK(f.charging());
        }
}

TEST_CASE("state of charge never rises and energy is conserved") {
    prop::Gen g(42);
    for (int i = 0; i < 10; ++i) {
        FirmwareConfig cfg;
        cfg.power = power_preset(g.coin() ? kPresetIntroClaim : kPresetAbstractClaim);
        cfg.power.p_idle_uw = g.uniform(0.0, 1000.0);
        cfg.power.p_radio_uw = g.uniform(1000.0, 20000.0);
        cfg.capacity_mah = g.uniform(0.5, 500.0);
        const double soc0 = g.uniform(0.2, 1.0);
        Constant src;
        const auto r = run(cfg, src, 60.0, soc0);

        for (size_t k = 1; k < r.soc_trajectory.size(); ++k)
            REQUIRE(r.soc_trajectory[k].soc <= r.soc_trajectory[k - 1].soc);

        const double capacity_mwh = cfg.capacity_mah * cfg.nominal_v;
        const double decrement = (soc0 - r.final_state.battery.soc) * capacity_mwh;
        const auto report = accumulate(cfg.power, r.timeline);
        REQUIRE(decrement == doctest::Approx(report.energy_mwh).epsilon(1e-9));
        REQUIRE(r.energy_mwh == doctest::Approx(report.energy_mwh).epsilon(1e-9));
        REQUIRE(report.duration_s == doctest::Approx(60.0));
    }
}

TEST_CASE("radio time follows emitted frames") {
    FirmwareConfig cfg;
    cfg.power.p_active_uw = 0.0;
    cfg.power.p_idle_uw = 0.0;
    cfg.power.p_radio_uw = 1000.0;
    Constant src;
    const auto r = run(cfg, src, 10.0);
    double radio_ms = 0.0;
    for (const auto& iv : r.timeline)
        if (iv.state == PowerState::Radio) radio_ms += iv.end_ms - iv.start_ms;
    // Each frame holds the radio for 2 ms from the next tick on. The three
    // frames completed at t = 10 s would transmit after the run ends.
    CHECK(r.frames.size() == 105);
    CHECK(radio_ms == doctest::Approx(2.0 * (105 - 3)));
}
