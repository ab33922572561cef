#include "respmon/session_config.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "respmon/errors.hpp"

namespace respmon {

using nlohmann::json;

namespace {

// Typed, path-aware access to one JSON object; finish() rejects keys that
// were never read.
class Section {
public:
    Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
        if (!j_.is_object()) throw ConfigParseError(path_.empty() ? "<root>" : path_, "expected an object");
    }

    std::string key_path(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
    bool has(const std::string& key) const { return j_.contains(key); }

    void get(const std::string& key, double& out) {
        if (const json* v = take(key)) {
            if (!v->is_number()) throw ConfigParseError(key_path(key), "expected a number");
            out = v->get<double>();
        }
    }

    template <typename Int>
        requires std::is_unsigned_v<Int>
    void get(const std::string& key, Int& out) {
        if (const json* v = take(key)) {
            if (!v->is_number_integer() || (!v->is_number_unsigned() && v->get<int64_t>() < 0))
                throw ConfigParseError(key_path(key), "expected a non-negative integer");
            const auto u = v->get<uint64_t>();
            if (u > std::numeric_limits<Int>::max()) throw ConfigParseError(key_path(key), "value out of range");
            out = static_cast<Int>(u);
        }
    }

    void get(const std::string& key, int& out) {
        if (const json* v = take(key)) {
            if (!v->is_number_integer()) throw ConfigParseError(key_path(key), "expected an integer");
            out = v->get<int>();
        }
    }

    void get(const std::string& key, bool& out) {
        if (const json* v = take(key)) {
            if (!v->is_boolean()) throw ConfigParseError(key_path(key), "expected true or false");
            out = v->get<bool>();
        }
    }

    void get(const std::string& key, std::string& out) {
        if (const json* v = take(key)) {
            if (!v->is_string()) throw ConfigParseError(key_path(key), "expected a string");
            out = v->get<std::string>();
        }
    }

    const json* array(const std::string& key) {
        const json* v = take(key);
        if (v && !v->is_array()) throw ConfigParseError(key_path(key), "expected an array");
        return v;
    }

    const json* object(const std::string& key) {
        const json* v = take(key);
        if (v && !v->is_object()) throw ConfigParseError(key_path(key), "expected an object");
        return v;
    }

    void finish() const {
        for (auto it = j_.begin(); it != j_.end(); ++it)
            if (!seen_.count(it.key())) throw ConfigParseError(key_path(it.key()), "unknown key");
    }

private:
    const json* take(const std::string& key) {
        seen_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    const json& j_;
    std::string path_;
    std::set<std::string> seen_;
};

template <typename Fn>
void with_key(const std::string& key, Fn&& fn) {
    try {
        fn();
    } catch (const InvalidParameter& e) {
        throw ConfigParseError(key, e.what());
    } catch (const InvalidConfig& e) {
        throw ConfigParseError(key, e.what());
    }
}

void parse_scenario(Section& s, ScenarioParams& sc) {
    s.get("amplitude_n", sc.amplitude_n);
    s.get("baseline_n", sc.baseline_n);
    s.get("noise_sd_n", sc.noise_sd_n);
    s.get("accel_noise_mg", sc.accel_noise_mg);
    if (const json* rates = s.array("rates")) {
        sc.rates.clear();
        for (size_t i = 0; i < rates->size(); ++i) {
            Section seg((*rates)[i], s.key_path("rates") + "[" + std::to_string(i) + "]");
            RateSegment r;
            seg.get("start_s", r.start_s);
            seg.get("rate_bpm", r.rate_bpm);
            seg.finish();
            sc.rates.push_back(r);
        }
    }
    if (const json* postures = s.array("postures")) {
        sc.postures.clear();
        for (size_t i = 0; i < postures->size(); ++i) {
            const std::string path = s.key_path("postures") + "[" + std::to_string(i) + "]";
            Section seg((*postures)[i], path);
            PostureSegment p;
            std::string name = "still";
            seg.get("start_s", p.start_s);
            seg.get("posture", name);
            seg.finish();
            with_key(path + ".posture", [&] { p.posture = parse_posture(name); });
            sc.postures.push_back(p);
        }
    }
    s.finish();
}

}  // namespace

HostConfig SessionConfig::host_config() const {
    HostConfig h;
    h.adc = firmware.adc;
    h.divider = firmware.divider;
    h.fsr = firmware.fsr;
    h.battery_sense_ratio = firmware.battery_sense_ratio;
    h.fsr_period_ms = firmware.fsr_period_ms();
    h.accel_period_ms = firmware.accel_period_ms();
    return h;
}

void SessionConfig::finalize() {
    if (!(duration_s >= 0.0)) throw ConfigParseError("duration_s", "must be >= 0");
    if (!(initial_soc >= 0.0 && initial_soc <= 1.0)) throw ConfigParseError("initial_soc", "must be in [0, 1]");
    with_key("firmware", [&] { firmware.validate(); });
    scenario.seed = seed;
    scenario.duration_s = duration_s;
    scenario.fsr_rate_hz = firmware.fsr_rate_hz;
    with_key("scenario", [&] { scenario.validate(); });
    pipeline.host = host_config();
    if (!(pipeline.window_s > 0.0)) throw ConfigParseError("pipeline.window_s", "must be > 0");
    if (!(pipeline.apnea_s > 0.0)) throw ConfigParseError("pipeline.apnea_s", "must be > 0");
    if (!(pipeline.breath.hysteresis_fraction >= 0.0 && pipeline.breath.hysteresis_fraction < 1.0))
        throw ConfigParseError("pipeline.hysteresis_fraction", "must be in [0, 1)");
}

SessionConfig SessionConfig::from_json(const json& doc) {
    SessionConfig c;
    Section root(doc, "");
    root.get("seed", c.seed);
    root.get("duration_s", c.duration_s);
    root.get("initial_soc", c.initial_soc);

    if (root.has("rate_bpm") && doc.contains("scenario") && doc["scenario"].is_object() &&
        doc["scenario"].contains("rates"))
        throw ConfigParseError("rate_bpm", "conflicts with scenario.rates");
    double rate = 0.0;
    if (root.has("rate_bpm")) {
        root.get("rate_bpm", rate);
        c.scenario.rates = {{0.0, rate}};
    }

    if (const json* j = root.object("scenario")) {
        Section s(*j, "scenario");
        parse_scenario(s, c.scenario);
    }
    if (const json* j = root.object("fsr")) {
        Section s(*j, "fsr");
        s.get("k_ohm_n", c.firmware.fsr.k_ohm_n);
        s.get("r_min_ohm", c.firmware.fsr.r_min_ohm);
        s.get("r_max_ohm", c.firmware.fsr.r_max_ohm);
        s.get("f_break_n", c.firmware.fsr.f_break_n);
        s.finish();
    }
    if (const json* j = root.object("divider")) {
        Section s(*j, "divider");
        s.get("r_fixed_ohm", c.firmware.divider.r_fixed_ohm);
        s.get("v_dd", c.firmware.divider.v_dd);
        s.finish();
    }
    if (const json* j = root.object("adc")) {
        Section s(*j, "adc");
        s.get("bits", c.firmware.adc.bits);
        s.get("v_ref", c.firmware.adc.v_ref);
        std::string rounding = "half-up";
        s.get("rounding", rounding);
        if (rounding != "half-up") throw ConfigParseError("adc.rounding", "only 'half-up' is supported");
        s.finish();
    }
    if (const json* j = root.object("battery")) {
        Section s(*j, "battery");
        s.get("capacity_mah", c.firmware.capacity_mah);
        s.get("sense_ratio", c.firmware.battery_sense_ratio);
        s.get("charging", c.firmware.charging);
        s.get("nominal_v", c.firmware.nominal_v);
        if (const json* ocv = s.array("ocv")) {
            std::vector<std::pair<double, double>> pts;
            for (const auto& p : *ocv) {
                if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number())
                    throw ConfigParseError("battery.ocv", "expected [[soc, volts], ...]");
                pts.emplace_back(p[0].get<double>(), p[1].get<double>());
            }
            with_key("battery.ocv", [&] { c.firmware.ocv = OcvCurve(std::move(pts)); });
        }
        s.finish();
    }
    if (const json* j = root.object("firmware")) {
        Section s(*j, "firmware");
        s.get("fsr_rate_hz", c.firmware.fsr_rate_hz);
        s.get("accel_rate_hz", c.firmware.accel_rate_hz);
        s.get("battery_period_ms", c.firmware.battery_period_ms);
        s.get("fsr_batch", c.firmware.fsr_batch);
        s.get("accel_batch", c.firmware.accel_batch);
        s.get("tick_ms", c.firmware.tick_ms);
        s.finish();
    }
    if (const json* j = root.object("pipeline")) {
        Section s(*j, "pipeline");
        auto& p = c.pipeline;
        s.get("window_s", p.window_s);
        s.get("apnea_s", p.apnea_s);
        s.get("detrend_window_s", p.breath.detrend_window_s);
        s.get("min_peak_distance_s", p.breath.min_peak_distance_s);
        s.get("hysteresis_fraction", p.breath.hysteresis_fraction);
        s.get("smooth_window_s", p.breath.smooth_window_s);
        s.get("artifact_threshold_mg", p.artifact.threshold_mg);
        s.get("artifact_min_duration_ms", p.artifact.min_duration_ms);
        s.get("artifact_max_gap_ms", p.artifact.max_gap_ms);
        s.finish();
    }
    if (const json* j = root.object("power")) {
        Section s(*j, "power");
        std::string preset;
        s.get("preset", preset);
        if (preset == "custom")
            c.firmware.power = PowerProfile{};
        else if (!preset.empty())
            with_key("power.preset", [&] { c.firmware.power = power_preset(preset); });
        auto& pw = c.firmware.power;
        s.get("p_active_uw", pw.p_active_uw);
        s.get("p_radio_uw", pw.p_radio_uw);
        s.get("p_idle_uw", pw.p_idle_uw);
        s.get("tx_ms_per_frame", pw.tx_ms_per_frame);
        // Overriding any state power turns a preset into a custom profile.
        const PowerProfile base = c.firmware.power.name == "custom" ? PowerProfile{} : power_preset(pw.name);
        if (pw.p_active_uw != base.p_active_uw || pw.p_radio_uw != base.p_radio_uw ||
            pw.p_idle_uw != base.p_idle_uw)
            pw.name = "custom";
        s.finish();
    }
    root.finish();
    c.finalize();
    return c;
}

json SessionConfig::to_json() const {
    json rates = json::array();
    for (const auto& r : scenario.rates) rates.push_back({{"start_s", r.start_s}, {"rate_bpm", r.rate_bpm}});
    json postures = json::array();
    for (const auto& p : scenario.postures)
        postures.push_back({{"start_s", p.start_s}, {"posture", std::string(to_string(p.posture))}});
    json ocv = json::array();
    for (const auto& [s, v] : firmware.ocv.points()) ocv.push_back({s, v});

    return {
        {"seed", seed},
        {"duration_s", duration_s},
        {"initial_soc", initial_soc},
        {"scenario",
         {{"rates", rates},
          {"postures", postures},
          {"amplitude_n", scenario.amplitude_n},
          {"baseline_n", scenario.baseline_n},
          {"noise_sd_n", scenario.noise_sd_n},
          {"accel_noise_mg", scenario.accel_noise_mg}}},
        {"fsr",
         {{"k_ohm_n", firmware.fsr.k_ohm_n},
          {"r_min_ohm", firmware.fsr.r_min_ohm},
          {"r_max_ohm", firmware.fsr.r_max_ohm},
          {"f_break_n", firmware.fsr.f_break_n}}},
        {"divider", {{"r_fixed_ohm", firmware.divider.r_fixed_ohm}, {"v_dd", firmware.divider.v_dd}}},
        {"adc", {{"bits", firmware.adc.bits}, {"v_ref", firmware.adc.v_ref}, {"rounding", "half-up"}}},
        {"battery",
         {{"capacity_mah", firmware.capacity_mah},
          {"sense_ratio", firmware.battery_sense_ratio},
          {"charging", firmware.charging},
          {"nominal_v", firmware.nominal_v},
          {"ocv", ocv}}},
        {"firmware",
         {{"fsr_rate_hz", firmware.fsr_rate_hz},
          {"accel_rate_hz", firmware.accel_rate_hz},
          {"battery_period_ms", firmware.battery_period_ms},
          {"fsr_batch", firmware.fsr_batch},
          {"accel_batch", firmware.accel_batch},
          {"tick_ms", firmware.tick_ms}}},
        {"pipeline",
         {{"window_s", pipeline.window_s},
          {"apnea_s", pipeline.apnea_s},
          {"detrend_window_s", pipeline.breath.detrend_window_s},
          {"min_peak_distance_s", pipeline.breath.min_peak_distance_s},
          {"hysteresis_fraction", pipeline.breath.hysteresis_fraction},
          {"smooth_window_s", pipeline.breath.smooth_window_s},
          {"artifact_threshold_mg", pipeline.artifact.threshold_mg},
          {"artifact_min_duration_ms", pipeline.artifact.min_duration_ms},
          {"artifact_max_gap_ms", pipeline.artifact.max_gap_ms}}},
        {"power",
         {{"preset", firmware.power.name},
          {"p_active_uw", firmware.power.p_active_uw},
          {"p_radio_uw", firmware.power.p_radio_uw},
          {"p_idle_uw", firmware.power.p_idle_uw},
          {"tx_ms_per_frame", firmware.power.tx_ms_per_frame}}},
    };
}

SessionConfig parse_session_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigParseError("", std::string("invalid JSON: ") + e.what());
    }
    return SessionConfig::from_json(doc);
}

SessionConfig load_session_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_session_config(ss.str());
}

}  // namespace respmon
