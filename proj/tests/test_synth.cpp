#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include <doctest.h>

#include "helpers.hpp"
#include "rppgkit/dsp.hpp"
#include "rppgkit/synth.hpp"

using namespace rppg;

TEST_CASE("rng and sub_seed are deterministic") {
    synth::Rng a(42);
    synth::Rng b(42);
    for (int i = 0; i < 200; ++i) {
        const double u = a.uniform();
        CHECK(u == b.uniform());
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
    synth::Rng c(42);
    synth::Rng d(43);
    bool differs = false;
    for (int i = 0; i < 10; ++i) differs = differs || c.gauss() != d.gauss();
    CHECK(differs);

    CHECK(synth::sub_seed(1, 2) == synth::sub_seed(1, 2));
    CHECK(synth::sub_seed(1, 2) != synth::sub_seed(1, 3));
    CHECK(synth::sub_seed(1, 2) != synth::sub_seed(2, 2));
}

TEST_CASE("rng gauss moments are sane") {
    synth::Rng rng(7);
    const int n = 20000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double g = rng.gauss();
        s += g;
        s2 += g * g;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    CHECK(std::abs(mean) < 0.03);
    CHECK(var == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("synth_ibis is reproducible and seed-sensitive") {
    synth::SynthSpec spec;
    const hrv::IbiSeries a = synth::synth_ibis(spec);
    const hrv::IbiSeries b = synth::synth_ibis(spec);
    CHECK(a.ibis_ms == b.ibis_ms);
    CHECK(a.onset_times_s == b.onset_times_s);

    spec.seed = 2;
    const hrv::IbiSeries c = synth::synth_ibis(spec);
    CHECK(a.ibis_ms != c.ibis_ms);
}

TEST_CASE("synth_ibis hits the requested mean rate and covers the duration") {
    synth::SynthSpec spec;
    spec.duration_s = 120.0;
    double mean_of_means = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        spec.seed = seed;
        const hrv::IbiSeries s = synth::synth_ibis(spec);
        CHECK(s.onset_times_s.front() == 0.0);
        CHECK(s.onset_times_s.back() + s.ibis_ms.back() / 1000.0 >= spec.duration_s);
        const double mean = dsp::mean(s.ibis_ms);
        CHECK(mean == doctest::Approx(60000.0 / 72.0).epsilon(0.03));
        mean_of_means += mean / 10.0;
        for (double ibi : s.ibis_ms) CHECK(ibi >= 100.0);
    }
    CHECK(mean_of_means == doctest::Approx(60000.0 / 72.0).epsilon(0.015));
}

TEST_CASE("synth_ibis realizes the target SDNN") {
    synth::SynthSpec spec;
    spec.duration_s = 120.0;
    double mean_sdnn = 0.0;
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        spec.seed = seed;
        const double s = hrv::sdnn(synth::synth_ibis(spec));
        CHECK(s == doctest::Approx(50.0).epsilon(0.35));
        mean_sdnn += s / 10.0;
    }
    CHECK(mean_sdnn == doctest::Approx(50.0).epsilon(0.10));
}

TEST_CASE("synth_ibis rejects modulation beyond the variance budget") {
    synth::SynthSpec spec;
    spec.sdnn_target_ms = 20.0;  // (30^2 + 20^2)/2 = 650 > 400
    CHECK_THROWS_AS(synth::synth_ibis(spec), Error);
    try {
        synth::synth_ibis(spec);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parameter);
    }
}

TEST_CASE("synth_ppg peak spacing equals the IBI sequence") {
    synth::SynthSpec spec;
    spec.duration_s = 40.0;
    spec.seed = 9;
    const hrv::IbiSeries ibis = synth::synth_ibis(spec);
    const synth::SynthPpg rendered = synth::synth_ppg(ibis, 30.0);

    REQUIRE(rendered.peaks.times_s.size() == ibis.size() + 1);
    for (std::size_t i = 0; i < ibis.size(); ++i) {
        const double gap_ms =
            (rendered.peaks.times_s[i + 1] - rendered.peaks.times_s[i]) * 1000.0;
        CHECK(std::abs(gap_ms - ibis.ibis_ms[i]) <= 1e-9);
    }
    for (double c : rendered.peaks.confidences) CHECK(c == 1.0);
}

TEST_CASE("synth_ppg output is z-normalized with maxima at the peak times") {
    synth::SynthSpec spec;
    spec.duration_s = 30.0;
    spec.seed = 3;
    const synth::SynthPpg rendered = synth::synth_ppg(synth::synth_ibis(spec), 30.0);

    CHECK(std::abs(dsp::mean(rendered.ppg.values)) <= 1e-9);
    CHECK(dsp::stddev_pop(rendered.ppg.values) == doctest::Approx(1.0).epsilon(1e-9));

    const double m = 60.0 / 72.0;
    for (double tp : rendered.peaks.times_s) {
        if (tp < rendered.ppg.t0 + 0.2 || tp > rendered.ppg.end_time() - 0.2) continue;
        const double at = dsp::value_at(rendered.ppg, tp);
        CHECK(at > dsp::value_at(rendered.ppg, tp - 0.08 * m));
        CHECK(at > dsp::value_at(rendered.ppg, tp + 0.08 * m));
    }
}

TEST_CASE("embed_in_rgb baseline, gains and pulse weights") {
    synth::SynthSpec spec;
    spec.duration_s = 30.0;
    spec.noise_sigma = 0.0;
    const synth::SynthPpg rendered = synth::synth_ppg(synth::synth_ibis(spec), 30.0);
    const RgbTrace trace = synth::embed_in_rgb(rendered.ppg, spec);

    REQUIRE(trace.r.size() == rendered.ppg.size());
    CHECK(trace.fs == 30.0);
    CHECK(dsp::mean(trace.r) == doctest::Approx(180.0).epsilon(0.01));
    CHECK(dsp::mean(trace.g) == doctest::Approx(120.0).epsilon(0.01));
    CHECK(dsp::mean(trace.b) == doctest::Approx(100.0).epsilon(0.01));

    // noise-free channels are affine in the pulse
    CHECK(dsp::pearson_r(trace.g, rendered.ppg.values) == doctest::Approx(1.0).epsilon(1e-9));

    // relative pulse strength per channel: amplitude ratio (g vs r) is
    // (120*0.77) / (180*0.33)
    const double amp_r = (*std::max_element(trace.r.begin(), trace.r.end()) -
                          *std::min_element(trace.r.begin(), trace.r.end()));
    const double amp_g = (*std::max_element(trace.g.begin(), trace.g.end()) -
                          *std::min_element(trace.g.begin(), trace.g.end()));
    CHECK(amp_g / amp_r == doctest::Approx((120.0 * 0.77) / (180.0 * 0.33)).epsilon(1e-6));

    synth::SynthSpec gained = spec;
    gained.gain_r = 2.0;
    gained.gain_b = 0.5;
    const RgbTrace scaled = synth::embed_in_rgb(rendered.ppg, gained);
    CHECK(dsp::mean(scaled.r) == doctest::Approx(360.0).epsilon(0.01));
    CHECK(dsp::mean(scaled.b) == doctest::Approx(50.0).epsilon(0.01));
}

TEST_CASE("embed_in_rgb noise and motion change the trace but keep the floor") {
    synth::SynthSpec spec;
    spec.duration_s = 20.0;
    spec.noise_sigma = 80.0;  // strong enough to push samples toward the floor
    spec.motion_amp = 40.0;
    const synth::SynthPpg rendered = synth::synth_ppg(synth::synth_ibis(spec), 30.0);
    const RgbTrace noisy = synth::embed_in_rgb(rendered.ppg, spec);

    spec.noise_sigma = 0.0;
    spec.motion_amp = 0.0;
    const RgbTrace clean = synth::embed_in_rgb(rendered.ppg, spec);

    CHECK(noisy.r != clean.r);
    CHECK(*std::min_element(noisy.b.begin(), noisy.b.end()) >= 1.0);
    CHECK(dsp::stddev_pop(noisy.g) > 4.0 * dsp::stddev_pop(clean.g));

    const RgbTrace again = synth::embed_in_rgb(rendered.ppg, spec);
    CHECK(again.r == clean.r);  // same spec, same bytes
}

TEST_CASE("synth_resp is a unit sinusoid at the requested rate") {
    const TimeSeries resp = synth::synth_resp(15.0, 30.0, 30.0);
    CHECK(resp.size() == 901);
    CHECK(resp.t0 == 0.0);
    CHECK(resp.fs == 30.0);
    const double amp = testutil::tone_amplitude(resp, 0.25, 0.0, 30.0);
    CHECK(amp == doctest::Approx(1.0).epsilon(0.02));
    for (double v : resp.values) CHECK(std::abs(v) <= 1.0 + 1e-12);

    CHECK_THROWS_AS(synth::synth_resp(60.0, 30.0, 30.0), Error);
    CHECK_THROWS_AS(synth::synth_resp(15.0, -2.0, 30.0), Error);
}

TEST_CASE("validate rejects nonsense specs") {
    synth::SynthSpec spec;
    spec.mean_hr_bpm = 0.0;
    CHECK_THROWS_AS(synth::validate(spec), Error);
    spec = synth::SynthSpec{};
    spec.duration_s = -1.0;
    CHECK_THROWS_AS(synth::validate(spec), Error);
    spec = synth::SynthSpec{};
    spec.noise_sigma = -0.1;
    CHECK_THROWS_AS(synth::validate(spec), Error);
    spec = synth::SynthSpec{};
    CHECK_NOTHROW(synth::validate(spec));
}
