#include <cmath>
#include <cstring>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <doctest.h>

#include "helpers.hpp"
#include "rppgkit/config.hpp"
#include "rppgkit/dsp.hpp"
#include "rppgkit/methods.hpp"
#include "rppgkit/pipeline.hpp"
#include "rppgkit/synth.hpp"

using namespace rppg;
using testutil::TestRng;

namespace {

RgbTrace random_pulsed_trace(TestRng& rng, double duration_s, double fs) {
    synth::SynthSpec spec;
    spec.mean_hr_bpm = rng.uniform(55.0, 110.0);
    spec.sdnn_target_ms = rng.uniform(20.0, 60.0);
    spec.lf_amp_ms = 0.5 * spec.sdnn_target_ms;
    spec.hf_amp_ms = 0.35 * spec.sdnn_target_ms;
    spec.duration_s = duration_s;
    spec.noise_sigma = rng.uniform(0.1, 0.5);
    spec.seed = rng.next();
    const synth::SynthPpg rendered = synth::synth_ppg(synth::synth_ibis(spec), fs);
    return synth::embed_in_rgb(rendered.ppg, spec);
}

RgbTrace with_gains(const RgbTrace& t, double gr, double gg, double gb) {
    RgbTrace out = t;
    for (double& v : out.r) v *= gr;
    for (double& v : out.g) v *= gg;
    for (double& v : out.b) v *= gb;
    return out;
}

double max_abs_diff(const TimeSeries& a, const TimeSeries& b) {
    REQUIRE(a.size() == b.size());
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a.values[i] - b.values[i]));
    return m;
}

bool bit_identical(const TimeSeries& a, const TimeSeries& b) {
    if (a.size() != b.size()) return false;
    return std::memcmp(a.values.data(), b.values.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("method names round-trip") {
    for (auto m : {methods::Method::G, methods::Method::CHROM, methods::Method::POS})
        CHECK(methods::method_from_string(methods::method_name(m)) == m);
    CHECK_THROWS_AS(methods::method_from_string("ica"), Error);
}

TEST_CASE("methods reject unusable inputs") {
    TestRng rng(7);
    const RgbTrace ok = random_pulsed_trace(rng, 20.0, 30.0);

    RgbTrace tiny = ok;
    const std::size_t n_short = static_cast<std::size_t>(4.0 * 30.0);
    tiny.r.resize(n_short);
    tiny.g.resize(n_short);
    tiny.b.resize(n_short);
    CHECK_THROWS_AS(methods::extract_g(tiny), Error);
    CHECK_THROWS_AS(methods::extract_chrom(tiny), Error);
    CHECK_THROWS_AS(methods::extract_pos(tiny), Error);

    CHECK_THROWS_AS(methods::extract_chrom(ok, 0.4), Error);   // window too short in seconds
    RgbTrace slow = ok;
    slow.fs = 10.0;
    CHECK_THROWS_AS(methods::extract_pos(slow, 0.6), Error);   // window under 8 samples
}

TEST_CASE("parallel kernels are bit-identical to the serial references") {
    TestRng rng(17);
    for (double duration : {5.1, 7.3, 20.0, 41.7}) {
        const RgbTrace trace = random_pulsed_trace(rng, duration, 30.0);
        const TimeSeries chrom_ref = methods::extract_chrom_reference(trace);
        const TimeSeries pos_ref = methods::extract_pos_reference(trace);
#ifdef _OPENMP
        for (int threads : {1, 2, 3}) {
            omp_set_num_threads(threads);
            CHECK(bit_identical(methods::extract_chrom(trace), chrom_ref));
            CHECK(bit_identical(methods::extract_pos(trace), pos_ref));
        }
#else
        CHECK(bit_identical(methods::extract_chrom(trace), chrom_ref));
        CHECK(bit_identical(methods::extract_pos(trace), pos_ref));
#endif
    }
}

TEST_CASE("chrom and pos are invariant under static channel gains") {
    TestRng rng(27);
    for (int rep = 0; rep < 20; ++rep) {
        const RgbTrace trace = random_pulsed_trace(rng, 12.0, 30.0);
        const RgbTrace gained = with_gains(trace, 1.7, 0.6, 2.3);
        CHECK(max_abs_diff(methods::extract_chrom(trace), methods::extract_chrom(gained)) <=
              1e-6);
        CHECK(max_abs_diff(methods::extract_pos(trace), methods::extract_pos(gained)) <= 1e-6);
    }
}

TEST_CASE("all methods recover the embedded pulse") {
    synth::SynthSpec spec;
    spec.duration_s = 40.0;
    spec.noise_sigma = 0.2;
    spec.seed = 99;
    const synth::SynthPpg rendered = synth::synth_ppg(synth::synth_ibis(spec), 30.0);
    const RgbTrace trace = synth::embed_in_rgb(rendered.ppg, spec);

    const Config cfg;
    TimeSeries gt = rendered.ppg;
    gt.values.resize(trace.size());
    const TimeSeries gt_chain = pipeline::preprocess_ppg(gt, cfg);

    // CHROM's projection (X=3Rn-2Gn) points away from the blood-volume
    // direction, so its waveform comes out sign-flipped; magnitude is what
    // the chrominance combinations guarantee.
    for (auto m : {methods::Method::G, methods::Method::CHROM, methods::Method::POS}) {
        const TimeSeries est = methods::extract(m, trace);
        REQUIRE(est.size() == gt_chain.size());
        CHECK(std::abs(dsp::pearson_r(est.values, gt_chain.values)) >= 0.85);
    }
    CHECK(dsp::pearson_r(methods::extract_pos(trace).values, gt_chain.values) >= 0.85);
    CHECK(dsp::pearson_r(methods::extract_g(trace).values, gt_chain.values) >= 0.85);
}

TEST_CASE("window bookkeeping") {
    TestRng rng(37);
    RgbTrace trace = random_pulsed_trace(rng, 20.0, 30.0);
    trace.r.resize(600);
    trace.g.resize(600);
    trace.b.resize(600);

    methods::MethodStats stats;
    (void)methods::extract_chrom(trace, 1.6, &stats);
    // len 48, hop 24, grid 0..552 ends flush with 600: 24 windows, no tail
    CHECK(stats.windows == 24);
    CHECK(stats.flagged_windows == 0);
    CHECK_FALSE(stats.zero_output);

    RgbTrace longer = random_pulsed_trace(rng, 20.4, 30.0);
    longer.r.resize(610);
    longer.g.resize(610);
    longer.b.resize(610);
    (void)methods::extract_chrom(longer, 1.6, &stats);
    CHECK(stats.windows == 25);  // 24 grid windows plus the flush-to-end tail

    (void)methods::extract_pos(trace, 1.6, &stats);
    CHECK(stats.windows == 600 - 48 + 1);
}

TEST_CASE("degenerate windows are flagged, not fatal") {
    TestRng rng(47);
    RgbTrace trace = random_pulsed_trace(rng, 10.0, 30.0);
    for (double& v : trace.b) v = 0.0;  // kills every chrom window

    methods::MethodStats stats;
    const TimeSeries out = methods::extract_chrom(trace, 1.6, &stats);
    CHECK(stats.flagged_windows == stats.windows);
    CHECK(stats.zero_output);
    for (double v : out.values) CHECK(v == 0.0);
}

TEST_CASE("constant channels give zero pos output") {
    RgbTrace trace;
    trace.fs = 30.0;
    trace.r.assign(300, 180.0);
    trace.g.assign(300, 120.0);
    trace.b.assign(300, 100.0);

    methods::MethodStats stats;
    const TimeSeries out = methods::extract_pos(trace, 1.6, &stats);
    CHECK(stats.flagged_windows == 0);  // means are positive, just no variance
    CHECK(stats.zero_output);
    for (double v : out.values) CHECK(v == 0.0);
}

TEST_CASE("chain parameters are honored") {
    TestRng rng(57);
    const RgbTrace trace = random_pulsed_trace(rng, 20.0, 30.0);
    const methods::ChainParams narrow{2.0, 0.9, 2.0};
    const TimeSeries wide = methods::extract_pos(trace, 1.6, nullptr);
    const TimeSeries tight = methods::extract_pos(trace, 1.6, nullptr, narrow);
    CHECK(max_abs_diff(wide, tight) > 1e-3);  // different band, different waveform
}
