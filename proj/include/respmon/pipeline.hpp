#pragma once

// Receiver side: frames -> time series -> force, breaths, respiration rate,
// motion artifacts, battery percentage and alerts.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "respmon/sensor_model.hpp"
#include "respmon/wire.hpp"

namespace respmon {

enum class ForceStatus { Ok, SaturatedLow, SaturatedHigh };

struct ForceReconstruction {
    ForceStatus status = ForceStatus::Ok;
    double force_n = 0.0;  // meaningful only when status is Ok
};

// Inverts the divider and the inverse-law FSR curve. Codes at the ADC
// endpoints are reported as saturation. Resistances at or above r_max give
// 0 N; at or below r_min give k / r_min.
ForceReconstruction reconstruct_force(uint32_t code, const AdcConfig& adc, const DividerConfig& div,
                                      const FsrModel& fsr);

struct FsrPoint {
    uint32_t t_ms = 0;
    uint16_t code = 0;
    ForceReconstruction force;
};

struct BatteryPoint {
    uint32_t t_ms = 0;
    uint16_t code = 0;
    int device_percent = 0;
    int host_percent = 0;
    bool charging = false;
};

// Decoded session in sample order.
struct SessionSeries {
    std::vector<FsrPoint> fsr;
    std::vector<AccelSample> accel;
    std::vector<BatteryPoint> battery;
    uint64_t frames = 0;
    uint64_t missing_frames = 0;    // gaps in the sequence numbers
    uint64_t duplicate_frames = 0;  // repeated sequence numbers (ignored)
};

struct HostConfig {
    AdcConfig adc;
    DividerConfig divider;
    FsrModel fsr;
    double battery_sense_ratio = kDefaultSenseRatio;
    uint32_t fsr_period_ms = 40;
    uint32_t accel_period_ms = 20;
};

// Percent on the linear 3.3..4.2 V map from a raw battery-channel code.
int battery_percent(uint32_t code, const AdcConfig& adc, double divider_ratio);

// Collects frames in any order; assemble() orders them by sequence number
// (unwrapping the 16-bit counter) and expands batches into samples.
class SessionAssembler {
public:
    explicit SessionAssembler(HostConfig cfg = {}) : cfg_(std::move(cfg)) {}

    void add(const wire::TelemetryFrame& frame);
    void add(std::span<const wire::TelemetryFrame> frames);
    SessionSeries assemble() const;

private:
    HostConfig cfg_;
    std::vector<std::pair<uint64_t, wire::TelemetryFrame>> frames_;
    std::optional<uint64_t> last_seq_;
};

struct BreathParams {
    double detrend_window_s = 10.0;
    double min_peak_distance_s = 1.5;
    double hysteresis_fraction = 0.2;
    double smooth_window_s = 0.2;
};

// Breath (inhalation peak) times in ms. The signal is smoothed, detrended by
// a centred moving average, and run through a Schmitt trigger whose band is
// hysteresis_fraction of the local peak-to-peak range. Peaks closer than
// min_peak_distance_s to the previous accepted peak are dropped. Throws
// InsufficientData when the series is shorter than the detrend window or
// sampled below 10 Hz.
std::vector<double> detect_breaths(std::span<const ForceSample> series, const BreathParams& p = {});

struct Interval {
    double start_ms = 0.0;
    double end_ms = 0.0;
    bool contains(double t) const { return t >= start_ms && t < end_ms; }
    bool operator==(const Interval&) const = default;
};

struct ArtifactMask {
    std::vector<Interval> intervals;  // disjoint, sorted
    bool contains(double t_ms) const;
    double covered_ms(double start_ms, double end_ms) const;
};

struct ArtifactParams {
    double threshold_mg = 250.0;
    double min_duration_ms = 500.0;
    // Flagged runs separated by less than this are one interval. Bridges the
    // sub-threshold phases of periodic motion.
    double max_gap_ms = 200.0;
    double sample_period_ms = 20.0;
};

// Intervals where | |a| - 1000 mg | exceeds the threshold for at least
// min_duration_ms.
ArtifactMask detect_motion_artifacts(std::span<const AccelSample> accel, const ArtifactParams& p = {});

struct RespirationEstimate {
    double window_start_ms = 0.0;
    double window_end_ms = 0.0;
    double rate_bpm = 0.0;
    int breath_count = 0;       // breaths used (outside artifacts)
    int excluded_breaths = 0;   // breaths inside artifact intervals
    double confidence = 0.0;
    double artifact_fraction = 0.0;  // excluded / detected in the window
};

// Rate over [window_start_ms, window_end_ms): 60 / median inter-breath
// interval with >= 3 usable breaths, otherwise the count scaled to the window.
// Throws InsufficientData for an empty window.
RespirationEstimate estimate_rate(std::span<const double> breath_times_ms, double window_start_ms,
                                  double window_end_ms, const ArtifactMask& mask = {});

struct ApneaAlert {
    double start_ms = 0.0;
    double end_ms = 0.0;
};

// Spans of at least apnea_s seconds without a detected breath, including the
// spans before the first and after the last breath.
std::vector<ApneaAlert> find_apnea(std::span<const double> breath_times_ms, double series_start_ms,
                                   double series_end_ms, double apnea_s = 30.0);

struct PipelineConfig {
    HostConfig host;
    BreathParams breath;
    ArtifactParams artifact;
    double window_s = 60.0;
    double apnea_s = 30.0;
};

struct AnalysisSummary {
    std::vector<RespirationEstimate> windows;
    std::vector<double> breath_times_ms;
    ArtifactMask artifacts;
    std::vector<ApneaAlert> alerts;
    std::optional<double> median_rate_bpm;
    std::optional<std::string> note;  // why no windows were produced, if none
    double series_start_ms = 0.0;
    double series_end_ms = 0.0;
    int saturated_samples = 0;
    int percent_mismatches = 0;  // battery frames with |device - host| > 1
};

AnalysisSummary analyze(const SessionSeries& series, const PipelineConfig& cfg = {});

}  // namespace respmon
