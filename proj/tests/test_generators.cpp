#include <doctest.h>

#include <cmath>

#include "respmon/errors.hpp"
#include "respmon/generators.hpp"

using namespace respmon;

namespace {

int count_local_maxima(const std::vector<ForceSample>& s) {
    int n = 0;
    for (size_t i = 1; i + 1 < s.size(); ++i)
        if (s[i].force_n > s[i - 1].force_n && s[i].force_n >= s[i + 1].force_n) ++n;
    return n;
}

}  // namespace

TEST_CASE("breathing waveform at 15 BPM") {
    BreathingParams p;
    const auto s = generate_breathing(p);
    REQUIRE(s.size() == 1500);
    CHECK(count_local_maxima(s) == 15);
    CHECK(s[0].t_ms == 0);
    CHECK(s[1].t_ms == 40);
    for (size_t i = 0; i < s.size(); ++i) {
        const double t = static_cast<double>(s[i].t_ms) / 1000.0;
        REQUIRE(s[i].force_n == doctest::Approx(2.0 + std::sin(2.0 * M_PI * 0.25 * t)).epsilon(1e-12));
    }
}

TEST_CASE("zero amplitude gives the baseline") {
    BreathingParams p;
    p.amplitude_n = 0.0;
    for (const auto& s : generate_breathing(p)) REQUIRE(s.force_n == 2.0);
}

TEST_CASE("generators are reproducible under a seed") {
    BreathingParams p;
    p.noise_sd_n = 0.2;
    p.seed = 77;
    CHECK(generate_breathing(p) == generate_breathing(p));
    auto q = p;
    q.seed = 78;
    CHECK(generate_breathing(p) != generate_breathing(q));
    CHECK(generate_accel(Posture::Walking, 10.0, 5) == generate_accel(Posture::Walking, 10.0, 5));
}

TEST_CASE("noisy force stays non-negative") {
    BreathingParams p;
    p.baseline_n = 0.1;
    p.amplitude_n = 0.1;
    p.noise_sd_n = 1.0;
    for (const auto& s : generate_breathing(p)) REQUIRE(s.force_n >= 0.0);
}

TEST_CASE("accelerometer postures") {
    const auto still = generate_accel(Posture::Still, 2.0, 1, 0.0);
    REQUIRE(still.size() == 100);
    for (const auto& a : still) {
        REQUIRE(a.x_mg == 0);
        REQUIRE(a.y_mg == 0);
        REQUIRE(a.z_mg == 1000);
    }
    CHECK(still[1].t_ms == 20);

    const auto walk = generate_accel(Posture::Walking, 10.0, 1, 0.0);
    int zmax = 0, zmin = 5000;
    for (const auto& a : walk) {
        zmax = std::max<int>(zmax, a.z_mg);
        zmin = std::min<int>(zmin, a.z_mg);
        REQUIRE(std::abs(a.x_mg) <= kAccelFullScaleMg);
    }
    CHECK(zmax == doctest::Approx(1300).epsilon(0.01));
    CHECK(zmin == doctest::Approx(700).epsilon(0.01));

    CHECK(parse_posture("walking") == Posture::Walking);
    CHECK(to_string(Posture::Shift) == "shift");
    CHECK_THROWS_AS(parse_posture("running"), InvalidParameter);
}

TEST_CASE("scenario ground truth follows the rate schedule") {
    ScenarioParams p;
    p.rates = {{0.0, 12.0}, {30.0, 24.0}};
    p.postures = {{0.0, Posture::Still}, {20.0, Posture::Walking}, {40.0, Posture::Still}};
    p.duration_s = 60.0;
    const auto s = generate_scenario(p);
    CHECK(s.force.size() == 1500);
    CHECK(s.accel.size() == 3000);
    // 30 s at 12 BPM then 30 s at 24 BPM.
    CHECK(s.breath_times_ms.size() == 6 + 12);
    CHECK(s.breath_times_ms.front() == doctest::Approx(1250.0));
    REQUIRE(s.postures.size() == 3);
    CHECK(s.postures[1].start_ms == 20000);
    CHECK(s.postures[1].end_ms == 40000);
    CHECK(s.postures[1].posture == Posture::Walking);
}

TEST_CASE("scenario validation") {
    ScenarioParams p;
    p.rates = {{5.0, 15.0}};
    CHECK_THROWS_AS(p.validate(), InvalidParameter);
    p.rates = {{0.0, -1.0}};
    CHECK_THROWS_AS(p.validate(), InvalidParameter);
}
