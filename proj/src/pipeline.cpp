#include "respmon/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <numeric>

#include "respmon/errors.hpp"

namespace respmon {

namespace {

constexpr uint64_t kSeqModulus = 1u << 16;

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Centred moving average of odd width, truncated at the edges.
std::vector<double> moving_average(const std::vector<double>& x, size_t width) {
    const size_t n = x.size();
    const size_t half = width / 2;
    std::vector<double> prefix(n + 1, 0.0);
    for (size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x[i];
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i) {
        const size_t lo = i >= half ? i - half : 0;
        const size_t hi = std::min(n, i + half + 1);
        out[i] = (prefix[hi] - prefix[lo]) / static_cast<double>(hi - lo);
    }
    return out;
}

// Centred sliding extreme over [i - half, i + half].
template <typename Better>
std::vector<double> sliding_extreme(const std::vector<double>& x, size_t half, Better better) {
    const size_t n = x.size();
    std::vector<double> out(n);
    std::deque<size_t> dq;
    size_t next = 0;
    for (size_t i = 0; i < n; ++i) {
        const size_t hi = std::min(n - 1, i + half);
        for (; next <= hi; ++next) {
            while (!dq.empty() && !better(x[dq.back()], x[next])) dq.pop_back();
            dq.push_back(next);
        }
        while (dq.front() + half < i) dq.pop_front();
        out[i] = x[dq.front()];
    }
    return out;
}

size_t odd_width(double seconds, double fs) {
    auto w = static_cast<size_t>(std::llround(seconds * fs));
    w = std::max<size_t>(w, 1);
    return w % 2 == 0 ? w + 1 : w;
}

}  // namespace

ForceReconstruction reconstruct_force(uint32_t code, const AdcConfig& adc, const DividerConfig& div,
                                      const FsrModel& fsr) {
    const uint32_t fs = adc.full_scale();
    if (code == 0) return {ForceStatus::SaturatedLow, 0.0};
    if (code >= fs) return {ForceStatus::SaturatedHigh, 0.0};
    const double v = static_cast<double>(code) / static_cast<double>(fs) * adc.v_ref;
    if (v >= div.v_dd) return {ForceStatus::SaturatedHigh, 0.0};
    const double r_fsr = div.r_fixed_ohm * (div.v_dd - v) / v;
    if (r_fsr >= fsr.r_max_ohm) return {ForceStatus::Ok, 0.0};
    if (r_fsr <= fsr.r_min_ohm) return {ForceStatus::Ok, fsr.k_ohm_n / fsr.r_min_ohm};
    return {ForceStatus::Ok, fsr.k_ohm_n / r_fsr};
}

int battery_percent(uint32_t code, const AdcConfig& adc, double divider_ratio) {
    const double v_sense = static_cast<double>(code) / static_cast<double>(adc.full_scale()) * adc.v_ref;
    return percent_from_voltage(v_sense / divider_ratio);
}

void SessionAssembler::add(const wire::TelemetryFrame& frame) {
    uint64_t u = frame.seq;
    if (last_seq_) {
        // Pick the unwrapped value nearest the previous frame.
        const uint64_t base = *last_seq_ - (*last_seq_ % kSeqModulus);
        u = base + frame.seq;
        if (u + kSeqModulus / 2 < *last_seq_)
            u += kSeqModulus;
        else if (u > *last_seq_ + kSeqModulus / 2 && u >= kSeqModulus)
            u -= kSeqModulus;
    }
    last_seq_ = u;
    frames_.emplace_back(u, frame);
}

void SessionAssembler::add(std::span<const wire::TelemetryFrame> frames) {
    for (const auto& f : frames) add(f);
}

SessionSeries SessionAssembler::assemble() const {
    SessionSeries s;
    auto ordered = frames_;
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });

    std::optional<uint64_t> prev;
    for (const auto& [seq, frame] : ordered) {
        if (prev && seq == *prev) {
            ++s.duplicate_frames;
            continue;
        }
        if (prev && seq > *prev + 1) s.missing_frames += seq - *prev - 1;
        prev = seq;
        ++s.frames;

        if (const auto* f = std::get_if<wire::FsrBatchPayload>(&frame.payload)) {
            for (size_t i = 0; i < f->codes.size(); ++i) {
                const uint16_t code = f->codes[i];
                s.fsr.push_back({f->t0_ms + static_cast<uint32_t>(i) * cfg_.fsr_period_ms, code,
                                 reconstruct_force(code, cfg_.adc, cfg_.divider, cfg_.fsr)});
            }
        } else if (const auto* a = std::get_if<wire::AccelBatchPayload>(&frame.payload)) {
            for (size_t i = 0; i < a->samples.size(); ++i) {
                const auto& t = a->samples[i];
                s.accel.push_back({a->t0_ms + static_cast<uint32_t>(i) * cfg_.accel_period_ms,
                                   t.x_mg, t.y_mg, t.z_mg});
            }
        } else {
            const auto& b = std::get<wire::BatteryStatusPayload>(frame.payload);
            s.battery.push_back({b.t_ms, b.adc_code, b.percent,
                                 battery_percent(b.adc_code, cfg_.adc, cfg_.battery_sense_ratio),
                                 frame.charging()});
        }
    }

    auto by_time = [](const auto& a, const auto& b) { return a.t_ms < b.t_ms; };
    std::stable_sort(s.fsr.begin(), s.fsr.end(), by_time);
    std::stable_sort(s.accel.begin(), s.accel.end(), by_time);
    std::stable_sort(s.battery.begin(), s.battery.end(), by_time);
    return s;
}

std::vector<double> detect_breaths(std::span<const ForceSample> series, const BreathParams& p) {
    const size_t n = series.size();
    if (n < 2) throw InsufficientData("detect_breaths: need at least two samples");
    const double dt_ms =
        static_cast<double>(series.back().t_ms - series.front().t_ms) / static_cast<double>(n - 1);
    if (!(dt_ms > 0.0)) throw InsufficientData("detect_breaths: timestamps do not advance");
    const double fs = 1000.0 / dt_ms;
    if (fs < 10.0) throw InsufficientData("detect_breaths: sampling rate below 10 Hz");
    if (static_cast<double>(n) * dt_ms < p.detrend_window_s * 1000.0)
        throw InsufficientData("detect_breaths: series shorter than the detrend window");

    std::vector<double> x(n);
    std::transform(series.begin(), series.end(), x.begin(), [](const ForceSample& s) { return s.force_n; });

    const auto smooth = moving_average(x, odd_width(p.smooth_window_s, fs));
    const size_t wd = odd_width(p.detrend_window_s, fs);
    const auto trend = moving_average(smooth, wd);
    std::vector<double> d(n);
    for (size_t i = 0; i < n; ++i) d[i] = smooth[i] - trend[i];

    const auto hi = sliding_extreme(d, wd / 2, std::greater<>{});
    const auto lo = sliding_extreme(d, wd / 2, std::less<>{});

    // A breath is an excursion above +band that is bracketed by dips below
    // -band. Its time is the midpoint of the interpolated up- and
    // down-crossings of +band, which is far less noise-sensitive than argmax.
    std::vector<double> peaks;
    const double refractory_ms = p.min_peak_distance_s * 1000.0 - 0.5 * dt_ms;
    auto crossing = [&](size_t i, double level) {
        const double t0 = series[i - 1].t_ms, t1 = series[i].t_ms;
        const double den = d[i] - d[i - 1];
        const double frac = den != 0.0 ? std::clamp((level - d[i - 1]) / den, 0.0, 1.0) : 0.0;
        return t0 + frac * (t1 - t0);
    };

    bool armed = true;
    bool in_peak = false;
    double t_rise = 0.0;
    double t_fall = 0.0;
    double prev_band = INFINITY;
    for (size_t i = 0; i < n; ++i) {
        const double range = hi[i] - lo[i];
        const double scale = 1e-9 * (1.0 + std::abs(trend[i]));
        const double band = range > scale ? 0.5 * p.hysteresis_fraction * range : INFINITY;
        if (in_peak) {
            if (d[i - 1] >= prev_band && d[i] < band) t_fall = crossing(i, band);
            if (d[i] < -band) {
                const double t = 0.5 * (t_rise + t_fall);
                if (peaks.empty() || t - peaks.back() >= refractory_ms) peaks.push_back(t);
                in_peak = false;
                armed = true;
            }
        } else if (d[i] < -band) {
            armed = true;
        } else if (armed && d[i] > band) {
            armed = false;
            // The rise must be observed; an excursion already in progress at
            // the start of the series is skipped.
            if (i > 0 && d[i - 1] <= prev_band) {
                in_peak = true;
                t_rise = crossing(i, band);
                t_fall = series[i].t_ms;
            }
        }
        prev_band = band;
    }
    return peaks;
}

bool ArtifactMask::contains(double t_ms) const {
    return std::any_of(intervals.begin(), intervals.end(), [&](const Interval& iv) { return iv.contains(t_ms); });
}

double ArtifactMask::covered_ms(double start_ms, double end_ms) const {
    double total = 0.0;
    for (const auto& iv : intervals) total += std::max(0.0, std::min(end_ms, iv.end_ms) - std::max(start_ms, iv.start_ms));
    return total;
}

ArtifactMask detect_motion_artifacts(std::span<const AccelSample> accel, const ArtifactParams& p) {
    std::vector<Interval> runs;
    for (const auto& s : accel) {
        const double mag = std::sqrt(double(s.x_mg) * s.x_mg + double(s.y_mg) * s.y_mg + double(s.z_mg) * s.z_mg);
        if (std::abs(mag - 1000.0) <= p.threshold_mg) continue;
        const double t = s.t_ms;
        if (!runs.empty() && t - runs.back().end_ms <= p.max_gap_ms)
            runs.back().end_ms = t + p.sample_period_ms;
        else
            runs.push_back({t, t + p.sample_period_ms});
    }
    ArtifactMask mask;
    for (const auto& r : runs)
        if (r.end_ms - r.start_ms >= p.min_duration_ms) mask.intervals.push_back(r);
    return mask;
}

RespirationEstimate estimate_rate(std::span<const double> breath_times_ms, double window_start_ms,
                                  double window_end_ms, const ArtifactMask& mask) {
    if (!(window_end_ms > window_start_ms)) throw InsufficientData("estimate_rate: empty window");
    RespirationEstimate e;
    e.window_start_ms = window_start_ms;
    e.window_end_ms = window_end_ms;

    std::vector<double> in_window;
    std::vector<bool> kept;
    for (double t : breath_times_ms) {
        if (t < window_start_ms || t >= window_end_ms) continue;
        in_window.push_back(t);
        kept.push_back(!mask.contains(t));
    }
    std::sort(in_window.begin(), in_window.end());
    if (in_window.empty()) return e;

    e.breath_count = static_cast<int>(std::count(kept.begin(), kept.end(), true));
    e.excluded_breaths = static_cast<int>(in_window.size()) - e.breath_count;
    e.artifact_fraction = static_cast<double>(e.excluded_breaths) / static_cast<double>(in_window.size());

    std::vector<double> usable;
    for (size_t i = 1; i < in_window.size(); ++i)
        if (kept[i] && kept[i - 1]) usable.push_back(in_window[i] - in_window[i - 1]);
    if (e.breath_count >= 3 && !usable.empty())
        e.rate_bpm = 60'000.0 / median(usable);
    else
        e.rate_bpm = e.breath_count * 60'000.0 / (window_end_ms - window_start_ms);

    // Regularity is judged on every detected breath so that masking can only
    // lower confidence.
    double regularity = 0.25;
    if (in_window.size() >= 3) {
        std::vector<double> all;
        for (size_t i = 1; i < in_window.size(); ++i) all.push_back(in_window[i] - in_window[i - 1]);
        const double mean = std::accumulate(all.begin(), all.end(), 0.0) / static_cast<double>(all.size());
        double var = 0.0;
        for (double v : all) var += (v - mean) * (v - mean);
        var /= static_cast<double>(all.size());
        regularity = std::clamp(1.0 - std::sqrt(var) / mean, 0.0, 1.0);
    }
    e.confidence = std::clamp(regularity * (1.0 - e.artifact_fraction), 0.0, 1.0);
    return e;
}

std::vector<ApneaAlert> find_apnea(std::span<const double> breath_times_ms, double series_start_ms,
                                   double series_end_ms, double apnea_s) {
    std::vector<ApneaAlert> alerts;
    const double limit = apnea_s * 1000.0;
    double prev = series_start_ms;
    for (double t : breath_times_ms) {
        if (t - prev >= limit) alerts.push_back({prev, t});
        prev = t;
    }
    if (series_end_ms - prev >= limit) alerts.push_back({prev, series_end_ms});
    return alerts;
}

AnalysisSummary analyze(const SessionSeries& series, const PipelineConfig& cfg) {
    AnalysisSummary out;
    if (series.fsr.empty()) {
        out.note = "no FSR samples";
    } else {
        std::vector<ForceSample> force;
        force.reserve(series.fsr.size());
        const double f_high = cfg.host.fsr.k_ohm_n / cfg.host.fsr.r_min_ohm;
        for (const auto& pt : series.fsr) {
            double f = pt.force.force_n;
            if (pt.force.status != ForceStatus::Ok) {
                ++out.saturated_samples;
                f = pt.force.status == ForceStatus::SaturatedHigh ? f_high : 0.0;
            }
            force.push_back({pt.t_ms, f});
        }
        out.series_start_ms = static_cast<double>(series.fsr.front().t_ms) - cfg.host.fsr_period_ms;
        out.series_end_ms = series.fsr.back().t_ms;

        out.artifacts = detect_motion_artifacts(series.accel, cfg.artifact);

        try {
            out.breath_times_ms = detect_breaths(force, cfg.breath);
            out.alerts = find_apnea(out.breath_times_ms, out.series_start_ms, out.series_end_ms, cfg.apnea_s);
        } catch (const InsufficientData& e) {
            out.note = e.what();
        }

        const double w = cfg.window_s * 1000.0;
        if (!out.note) {
            for (double s = out.series_start_ms; s + w <= out.series_end_ms + 1e-6; s += w)
                out.windows.push_back(estimate_rate(out.breath_times_ms, s, s + w, out.artifacts));
            if (out.windows.empty()) out.note = "session shorter than the analysis window";
        }
        if (!out.windows.empty()) {
            std::vector<double> rates;
            for (const auto& e : out.windows) rates.push_back(e.rate_bpm);
            out.median_rate_bpm = median(rates);
        }
    }
    for (const auto& b : series.battery)
        if (std::abs(b.device_percent - b.host_percent) > 1) ++out.percent_mismatches;
    return out;
}

}  // namespace respmon
