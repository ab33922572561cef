#include "respmon/generators.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "respmon/errors.hpp"

namespace respmon {

namespace {

constexpr uint64_t kAccelStreamSalt = 0x9E3779B97F4A7C15ull;
constexpr double kTiltCos = 0.70710678118654752;  // 45 degree posture change

void check_rate(double rate_bpm) {
    if (!(rate_bpm > 0.0 && rate_bpm <= 60.0))
        throw InvalidParameter("breathing rate must be in (0, 60] BPM");
}

template <typename Segment>
void check_schedule(const std::vector<Segment>& segs, const char* what) {
    if (segs.empty()) throw InvalidParameter(std::string(what) + ": schedule is empty");
    if (segs.front().start_s != 0.0)
        throw InvalidParameter(std::string(what) + ": first segment must start at 0");
    for (size_t i = 1; i < segs.size(); ++i)
        if (!(segs[i].start_s > segs[i - 1].start_s))
            throw InvalidParameter(std::string(what) + ": segment starts must increase");
}

// Breathing phase in cycles, continuous across segments.
class PhaseTrack {
public:
    explicit PhaseTrack(const std::vector<RateSegment>& segs) : segs_(segs) {
        start_phase_.resize(segs_.size(), 0.0);
        for (size_t i = 1; i < segs_.size(); ++i)
            start_phase_[i] = start_phase_[i - 1] +
                              segs_[i - 1].rate_bpm / 60.0 * (segs_[i].start_s - segs_[i - 1].start_s);
    }

    double at(double t_s) const {
        size_t i = segment_index(t_s);
        return start_phase_[i] + segs_[i].rate_bpm / 60.0 * (t_s - segs_[i].start_s);
    }

    std::vector<double> peak_times_ms(double duration_s) const {
        std::vector<double> out;
        for (size_t i = 0; i < segs_.size(); ++i) {
            const double seg_start = segs_[i].start_s;
            if (seg_start >= duration_s) break;
            const double seg_end =
                i + 1 < segs_.size() ? std::min(segs_[i + 1].start_s, duration_s) : duration_s;
            const double cps = segs_[i].rate_bpm / 60.0;
            const double phase0 = start_phase_[i];
            const double phase1 = phase0 + cps * (seg_end - seg_start);
            for (double k = std::ceil(phase0 - 0.25); 0.25 + k < phase1; k += 1.0) {
                const double t = seg_start + (0.25 + k - phase0) / cps;
                if (t >= seg_start && t < seg_end) out.push_back(t * 1000.0);
            }
        }
        return out;
    }

private:
    size_t segment_index(double t_s) const {
        size_t i = 0;
        while (i + 1 < segs_.size() && segs_[i + 1].start_s <= t_s) ++i;
        return i;
    }

    const std::vector<RateSegment>& segs_;
    std::vector<double> start_phase_;
};

std::vector<ForceSample> force_series(const std::vector<RateSegment>& rates, double amplitude_n,
                                      double baseline_n, double noise_sd_n, double duration_s,
                                      double sample_rate_hz, uint64_t seed) {
    const PhaseTrack phase(rates);
    const auto n = static_cast<size_t>(std::llround(duration_s * sample_rate_hz));
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_sd_n > 0.0 ? noise_sd_n : 1.0);

    std::vector<ForceSample> out;
    out.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        const double t_s = static_cast<double>(i) / sample_rate_hz;
        double f = baseline_n + amplitude_n * std::sin(2.0 * std::numbers::pi * phase.at(t_s));
        if (noise_sd_n > 0.0) f += noise(rng);
        out.push_back({static_cast<uint32_t>(std::llround(t_s * 1000.0)), std::max(f, 0.0)});
    }
    return out;
}

int16_t to_mg(double v) {
    return static_cast<int16_t>(
        std::lround(std::clamp(v, -double(kAccelFullScaleMg), double(kAccelFullScaleMg))));
}

std::vector<AccelSample> accel_series(const std::vector<PostureSegment>& postures,
                                      double duration_s, double noise_sd_mg, uint64_t seed) {
    const auto n = static_cast<size_t>(std::llround(duration_s * kAccelRateHz));
    std::mt19937_64 rng(seed ^ kAccelStreamSalt);
    std::normal_distribution<double> noise(0.0, noise_sd_mg > 0.0 ? noise_sd_mg : 1.0);

    // Instants at which the gravity vector tilts (each Shift segment's midpoint).
    std::vector<double> shift_times;
    for (size_t i = 0; i < postures.size(); ++i) {
        if (postures[i].posture != Posture::Shift) continue;
        const double end = i + 1 < postures.size() ? postures[i + 1].start_s : duration_s;
        shift_times.push_back(0.5 * (postures[i].start_s + std::min(end, duration_s)));
    }

    std::vector<AccelSample> out;
    out.reserve(n);
    size_t seg = 0;
    for (size_t i = 0; i < n; ++i) {
        const double t_s = static_cast<double>(i) / kAccelRateHz;
        while (seg + 1 < postures.size() && postures[seg + 1].start_s <= t_s) ++seg;

        const auto shifts = std::count_if(shift_times.begin(), shift_times.end(),
                                          [&](double s) { return s <= t_s; });
        const bool tilted = shifts % 2 == 1;
        double x = tilted ? 1000.0 * kTiltCos : 0.0;
        double y = 0.0;
        double z = tilted ? 1000.0 * kTiltCos : 1000.0;

        if (postures[seg].posture == Posture::Walking)
            z += kWalkingAmplitudeMg * std::sin(2.0 * std::numbers::pi * kWalkingStepHz * t_s);

        if (noise_sd_mg > 0.0) {
            x += noise(rng);
            y += noise(rng);
            z += noise(rng);
        }
        out.push_back({static_cast<uint32_t>(std::llround(t_s * 1000.0)), to_mg(x), to_mg(y),
                       to_mg(z)});
    }
    return out;
}

}  // namespace

std::string_view to_string(Posture p) {
    switch (p) {
        case Posture::Still: return "still";
        case Posture::Walking: return "walking";
        case Posture::Shift: return "shift";
    }
    return "still";
}

Posture parse_posture(std::string_view name) {
    if (name == "still") return Posture::Still;
    if (name == "walking") return Posture::Walking;
    if (name == "shift") return Posture::Shift;
    throw InvalidParameter("unknown posture '" + std::string(name) + "'");
}

std::vector<ForceSample> generate_breathing(const BreathingParams& p) {
    check_rate(p.rate_bpm);
    if (!(p.amplitude_n >= 0.0) || !(p.amplitude_n <= p.baseline_n))
        throw InvalidParameter("generate_breathing: require 0 <= amplitude_n <= baseline_n");
    if (!(p.noise_sd_n >= 0.0)) throw InvalidParameter("generate_breathing: noise_sd_n < 0");
    if (!(p.duration_s >= 0.0)) throw InvalidParameter("generate_breathing: duration_s < 0");
    if (!(p.sample_rate_hz > 0.0)) throw InvalidParameter("generate_breathing: sample_rate_hz <= 0");
    return force_series({{0.0, p.rate_bpm}}, p.amplitude_n, p.baseline_n, p.noise_sd_n,
                        p.duration_s, p.sample_rate_hz, p.seed);
}

std::vector<AccelSample> generate_accel(Posture posture, double duration_s, uint64_t seed,
                                        double noise_sd_mg) {
    if (!(duration_s > 0.0)) throw InvalidParameter("generate_accel: duration_s must be > 0");
    if (!(noise_sd_mg >= 0.0)) throw InvalidParameter("generate_accel: noise_sd_mg < 0");
    return accel_series({{0.0, posture}}, duration_s, noise_sd_mg, seed);
}

void ScenarioParams::validate() const {
    check_schedule(rates, "rates");
    check_schedule(postures, "postures");
    for (const auto& r : rates) check_rate(r.rate_bpm);
    if (!(amplitude_n >= 0.0) || !(amplitude_n <= baseline_n))
        throw InvalidParameter("scenario: require 0 <= amplitude_n <= baseline_n");
    if (!(noise_sd_n >= 0.0)) throw InvalidParameter("scenario: noise_sd_n < 0");
    if (!(accel_noise_mg >= 0.0)) throw InvalidParameter("scenario: accel_noise_mg < 0");
    if (!(duration_s >= 0.0)) throw InvalidParameter("scenario: duration_s < 0");
    if (!(fsr_rate_hz > 0.0)) throw InvalidParameter("scenario: fsr_rate_hz <= 0");
}

ScenarioSignals generate_scenario(const ScenarioParams& p) {
    p.validate();
    ScenarioSignals s;
    s.force = force_series(p.rates, p.amplitude_n, p.baseline_n, p.noise_sd_n, p.duration_s,
                           p.fsr_rate_hz, p.seed);
    s.accel = accel_series(p.postures, p.duration_s, p.accel_noise_mg, p.seed);
    s.breath_times_ms = PhaseTrack(p.rates).peak_times_ms(p.duration_s);
    for (size_t i = 0; i < p.postures.size(); ++i) {
        const double start = p.postures[i].start_s;
        if (start >= p.duration_s) break;
        const double end = i + 1 < p.postures.size() ? std::min(p.postures[i + 1].start_s, p.duration_s)
                                                    : p.duration_s;
        s.postures.push_back({static_cast<uint32_t>(std::llround(start * 1000.0)),
                              static_cast<uint32_t>(std::llround(end * 1000.0)),
                              p.postures[i].posture});
    }
    return s;
}

}  // namespace respmon
