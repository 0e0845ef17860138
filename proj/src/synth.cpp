#include <algorithm>
#include <cmath>
#include <numbers>

#include "rppgkit/dsp.hpp"
#include "rppgkit/synth.hpp"

namespace rppg::synth {

double Rng::uniform() {
    // 53-bit mantissa mapping, identical on every platform
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double Rng::gauss() {
    if (have_spare_) {
        have_spare_ = false;
        return spare_;
    }
    // Box-Muller on (0,1] x [0,1) uniforms
    const double u1 = static_cast<double>((eng_() >> 11) + 1) * 0x1.0p-53;
    const double u2 = static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
}

std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t tag) {
    // splitmix64 finalizer over seed+tag
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (tag + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

void validate(const SynthSpec& spec) {
    if (!(spec.duration_s > 0.0)) fail(ErrorKind::Parameter, "synth: duration_s must be > 0");
    if (!(spec.mean_hr_bpm >= 30.0 && spec.mean_hr_bpm <= 240.0))
        fail(ErrorKind::Parameter, "synth: mean_hr_bpm must be in [30, 240]");
    if (spec.sdnn_target_ms < 0.0 || spec.lf_amp_ms < 0.0 || spec.hf_amp_ms < 0.0 ||
        spec.noise_sigma < 0.0 || spec.motion_amp < 0.0)
        fail(ErrorKind::Parameter, "synth: amplitudes must be >= 0");
    if (!(spec.gain_r > 0.0 && spec.gain_g > 0.0 && spec.gain_b > 0.0))
        fail(ErrorKind::Parameter, "synth: channel gains must be > 0");
    if (!(spec.lf_freq_hz > 0.0 && spec.hf_freq_hz > 0.0))
        fail(ErrorKind::Parameter, "synth: modulation frequencies must be > 0");
}

hrv::IbiSeries synth_ibis(const SynthSpec& spec) {
    validate(spec);
    const double base_ms = 60000.0 / spec.mean_hr_bpm;

    // analytic SD budget: each sinusoid contributes amp/sqrt(2)
    const double mod_var = 0.5 * spec.lf_amp_ms * spec.lf_amp_ms +
                           0.5 * spec.hf_amp_ms * spec.hf_amp_ms;
    const double target_var = spec.sdnn_target_ms * spec.sdnn_target_ms;
    if (mod_var > target_var * (1.0 + 1e-12))
        fail(ErrorKind::Parameter, "synth_ibis: modulation exceeds sdnn_target budget");
    const double jitter_sd = std::sqrt(std::max(0.0, target_var - mod_var));

    Rng rng(sub_seed(spec.seed, 0x1b1));
    const double phi_lf = 2.0 * std::numbers::pi * rng.uniform();
    const double phi_hf = 2.0 * std::numbers::pi * rng.uniform();

    hrv::IbiSeries s;
    double onset = 0.0;
    while (onset < spec.duration_s) {
        // modulation phase runs on the nominal beat grid
        const double t_nom = static_cast<double>(s.ibis_ms.size()) * base_ms / 1000.0;
        double ibi = base_ms +
                     spec.lf_amp_ms * std::sin(2.0 * std::numbers::pi * spec.lf_freq_hz * t_nom + phi_lf) +
                     spec.hf_amp_ms * std::sin(2.0 * std::numbers::pi * spec.hf_freq_hz * t_nom + phi_hf) +
                     jitter_sd * rng.gauss();
        ibi = std::max(ibi, 100.0);  // keep intervals physical under extreme jitter
        s.ibis_ms.push_back(ibi);
        s.onset_times_s.push_back(onset);
        onset += ibi / 1000.0;
    }
    s.interpolated.assign(s.ibis_ms.size(), false);
    return s;
}

namespace {

struct PulseShape {
    double sigma_rise, sigma_decay, dicrotic_delay, sigma_dicrotic;
    double dicrotic_amp = 0.3;

    explicit PulseShape(double median_ibi_s)
        : sigma_rise(0.06 * median_ibi_s),
          sigma_decay(0.14 * median_ibi_s),
          dicrotic_delay(0.45 * median_ibi_s),
          sigma_dicrotic(0.08 * median_ibi_s) {}

    double eval(double tau) const {
        const double s = tau < 0.0 ? sigma_rise : sigma_decay;
        double v = std::exp(-tau * tau / (2.0 * s * s));
        const double d = tau - dicrotic_delay;
        v += dicrotic_amp * std::exp(-d * d / (2.0 * sigma_dicrotic * sigma_dicrotic));
        return v;
    }
};

}  // namespace

SynthPpg synth_ppg(const hrv::IbiSeries& ibis, double fs) {
    if (!(fs >= 10.0)) fail(ErrorKind::Parameter, "synth_ppg: fs must be >= 10 Hz");
    if (ibis.size() == 0) fail(ErrorKind::Parameter, "synth_ppg: empty IBI series");

    SynthPpg out;
    const std::size_t nb = ibis.size();
    out.peaks.times_s = ibis.onset_times_s;
    out.peaks.times_s.push_back(ibis.onset_times_s.back() + ibis.ibis_ms.back() / 1000.0);
    out.peaks.confidences.assign(nb + 1, 1.0);

    std::vector<double> sorted = ibis.ibis_ms;
    std::sort(sorted.begin(), sorted.end());
    const double median_ibi_s = sorted[sorted.size() / 2] / 1000.0;
    const PulseShape shape(median_ibi_s);

    const double t_end = out.peaks.times_s.back() + 0.5 * median_ibi_s;
    const auto n = static_cast<std::size_t>(std::floor(t_end * fs + 1e-9)) + 1;
    out.ppg.fs = fs;
    out.ppg.t0 = 0.0;
    out.ppg.values.assign(n, 0.0);

    const double support = 1.2 * median_ibi_s;
    for (double tp : out.peaks.times_s) {
        const auto lo = static_cast<std::size_t>(std::max(0.0, std::ceil((tp - support) * fs)));
        const auto hi = std::min(n - 1, static_cast<std::size_t>(std::floor((tp + support) * fs)));
        for (std::size_t i = lo; i <= hi; ++i)
            out.ppg.values[i] += shape.eval(static_cast<double>(i) / fs - tp);
    }
    out.ppg = dsp::znormalize(out.ppg, nullptr);
    return out;
}

RgbTrace embed_in_rgb(const TimeSeries& ppg, const SynthSpec& spec) {
    rppg::validate(ppg, "embed_in_rgb ppg");
    validate(spec);

    const std::size_t n = ppg.values.size();
    const double base[3] = {180.0 * spec.gain_r, 120.0 * spec.gain_g, 100.0 * spec.gain_b};
    const double weight[3] = {0.33, 0.77, 0.53};

    Rng noise(sub_seed(spec.seed, 0x2b2));
    Rng walk(sub_seed(spec.seed, 0x3b3));

    RgbTrace trace;
    trace.fs = ppg.fs;
    trace.t0 = ppg.t0;
    trace.r.resize(n);
    trace.g.resize(n);
    trace.b.resize(n);
    double motion = 0.0;
    const double step = 1.0 / std::sqrt(ppg.fs);  // Wiener-style increments
    for (std::size_t i = 0; i < n; ++i) {
        motion += walk.gauss() * step;
        const double common = spec.motion_amp * motion;
        double* ch[3] = {&trace.r[i], &trace.g[i], &trace.b[i]};
        for (int c = 0; c < 3; ++c) {
            double v = base[c] * (1.0 + 0.01 * weight[c] * ppg.values[i]) + common +
                       spec.noise_sigma * noise.gauss();
            *ch[c] = std::max(v, 1.0);  // cameras cannot report negative light
        }
    }
    return trace;
}

TimeSeries synth_resp(double rr_bpm, double duration_s, double fs) {
    if (!(rr_bpm >= 4.0 && rr_bpm <= 40.0))
        fail(ErrorKind::Parameter, "synth_resp: rr_bpm must be in [4, 40]");
    if (!(duration_s > 0.0)) fail(ErrorKind::Parameter, "synth_resp: duration_s must be > 0");
    if (!(fs > 0.0)) fail(ErrorKind::Parameter, "synth_resp: fs must be > 0");

    TimeSeries out;
    out.fs = fs;
    out.t0 = 0.0;
    const auto n = static_cast<std::size_t>(std::floor(duration_s * fs + 1e-9)) + 1;
    out.values.resize(n);
    const double w = 2.0 * std::numbers::pi * rr_bpm / 60.0;
    for (std::size_t i = 0; i < n; ++i)
        out.values[i] = std::sin(w * static_cast<double>(i) / fs);
    return out;
}

}  // namespace rppg::synth
