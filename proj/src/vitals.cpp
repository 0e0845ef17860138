#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

#include "rppgkit/dsp.hpp"
#include "rppgkit/vitals.hpp"

namespace rppg::vitals {

namespace {

// Parabolic refinement of a spectral peak on log power. Peak powers are
// normalized by the peak bin first so that rescaling the input waveform
// cannot perturb the result (log of equal ratios, not of scaled powers).
double refine_peak_hz(const dsp::Psd& psd, std::size_t k) {
    if (k == 0 || k + 1 >= psd.power.size()) return psd.freq_hz[k];
    const double c = psd.power[k];
    if (!(psd.power[k - 1] > 0.0) || !(psd.power[k + 1] > 0.0) || !(c > 0.0))
        return psd.freq_hz[k];
    const double l = std::log(psd.power[k - 1] / c);
    const double r = std::log(psd.power[k + 1] / c);
    const double denom = l + r;  // log center is 0 after normalization
    if (!(denom < 0.0)) return psd.freq_hz[k];
    double delta = 0.5 * (l - r) / denom;
    delta = std::clamp(delta, -0.5, 0.5);
    return (static_cast<double>(k) + delta) * psd.df;
}

}  // namespace

RateEstimate spectral_rate(const TimeSeries& x, double band_lo_hz, double band_hi_hz,
                           double welch_segment_s) {
    validate(x, "spectral_rate input");
    if (!(band_lo_hz > 0.0 && band_lo_hz < band_hi_hz))
        fail(ErrorKind::Parameter, "spectral_rate: need 0 < band_lo < band_hi");

    const dsp::Psd psd = dsp::welch_psd(x.values, x.fs, welch_segment_s, 0.5);

    double total = 0.0;
    for (double p : psd.power) total += p;
    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < psd.freq_hz.size(); ++k) {
        if (psd.freq_hz[k] < band_lo_hz || psd.freq_hz[k] > band_hi_hz) continue;
        if (!best || psd.power[k] > psd.power[*best]) best = k;
    }
    if (!best) fail(ErrorKind::Parameter, "spectral_rate: band contains no spectral bins");
    if (!(psd.power[*best] > 1e-12 * total) || total <= 0.0)
        fail(ErrorKind::NoSignal, "spectral_rate: flat spectrum in band");

    RateEstimate est;
    est.band_lo_hz = band_lo_hz;
    est.band_hi_hz = band_hi_hz;
    const double f = refine_peak_hz(psd, *best);
    est.bpm = std::clamp(60.0 * f, 60.0 * band_lo_hz, 60.0 * band_hi_hz);
    return est;
}

RateEstimate estimate_hr(const TimeSeries& ppg) {
    validate(ppg, "estimate_hr input");
    if (ppg.duration() < 10.0)
        fail(ErrorKind::InsufficientData, "estimate_hr: needs at least 10 s of signal");
    return spectral_rate(ppg, kHrBandLoHz, kHrBandHiHz, 10.0);
}

RateEstimate estimate_rr(const TimeSeries& resp) {
    validate(resp, "estimate_rr input");
    if (resp.duration() < 20.0)
        fail(ErrorKind::InsufficientData, "estimate_rr: needs at least 20 s of signal");
    return spectral_rate(resp, kRrBandLoHz, kRrBandHiHz, 10.0);
}

TimeSeries rolling_hr(const TimeSeries& ppg, double window_s, double step_s) {
    validate(ppg, "rolling_hr input");
    if (!(window_s >= 8.0)) fail(ErrorKind::Parameter, "rolling_hr: window_s must be >= 8 s");
    if (!(step_s > 0.0)) fail(ErrorKind::Parameter, "rolling_hr: step_s must be > 0");
    if (ppg.duration() < window_s)
        fail(ErrorKind::InsufficientData, "rolling_hr: series shorter than the window");

    const auto win = static_cast<std::size_t>(std::llround(window_s * ppg.fs));
    const auto hop = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(step_s * ppg.fs)));
    const std::size_t n = ppg.values.size();

    std::vector<double> centers;
    std::vector<double> bpm;
    std::vector<bool> ok;
    for (std::size_t start = 0; start + win <= n; start += hop) {
        TimeSeries seg;
        seg.fs = ppg.fs;
        seg.t0 = ppg.time_at(start);
        seg.values.assign(ppg.values.begin() + static_cast<std::ptrdiff_t>(start),
                          ppg.values.begin() + static_cast<std::ptrdiff_t>(start + win));
        centers.push_back(seg.t0 + 0.5 * window_s);
        try {
            bpm.push_back(spectral_rate(seg, kHrBandLoHz, kHrBandHiHz, 10.0).bpm);
            ok.push_back(true);
        } catch (const Error&) {
            bpm.push_back(std::numeric_limits<double>::quiet_NaN());
            ok.push_back(false);
        }
    }

    // failed windows inherit the nearest valid window's value
    bool any_ok = false;
    for (bool b : ok) any_ok = any_ok || b;
    if (!any_ok) fail(ErrorKind::NoSignal, "rolling_hr: every window failed estimation");
    for (std::size_t i = 0; i < bpm.size(); ++i) {
        if (ok[i]) continue;
        std::size_t best = bpm.size();
        for (std::size_t j = 0; j < bpm.size(); ++j) {
            if (!ok[j]) continue;
            if (best == bpm.size() ||
                std::llabs(static_cast<long long>(j) - static_cast<long long>(i)) <
                    std::llabs(static_cast<long long>(best) - static_cast<long long>(i)))
                best = j;
        }
        bpm[i] = bpm[best];
    }

    TimeSeries out;
    out.fs = ppg.fs;
    out.t0 = ppg.t0;
    out.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = ppg.time_at(i);
        if (t <= centers.front()) {
            out.values[i] = bpm.front();
        } else if (t >= centers.back()) {
            out.values[i] = bpm.back();
        } else {
            auto it = std::upper_bound(centers.begin(), centers.end(), t);
            const auto j = static_cast<std::size_t>(it - centers.begin());
            const double frac = (t - centers[j - 1]) / (centers[j] - centers[j - 1]);
            out.values[i] = bpm[j - 1] * (1.0 - frac) + bpm[j] * frac;
        }
    }
    return out;
}

double snr_db(const TimeSeries& waveform, double ref_rate_bpm, double band_lo_hz,
              double band_hi_hz, double template_hz) {
    validate(waveform, "snr input");
    if (waveform.duration() < 10.0)
        fail(ErrorKind::InsufficientData, "snr: needs at least 10 s of signal");
    const double f = ref_rate_bpm / 60.0;
    if (!(f >= band_lo_hz && f <= band_hi_hz))
        fail(ErrorKind::Parameter, "snr: reference rate outside the band");
    if (!(template_hz > 0.0)) fail(ErrorKind::Parameter, "snr: template width must be > 0");

    // single full-length periodogram: 10 s Welch segments would smear the
    // template peak past +-0.1 Hz and undercount narrowband signals
    const dsp::Psd psd = dsp::periodogram(waveform.values, waveform.fs);

    double p_template = 0.0, p_rest = 0.0;
    for (std::size_t k = 0; k < psd.freq_hz.size(); ++k) {
        const double fk = psd.freq_hz[k];
        if (fk < band_lo_hz || fk > band_hi_hz) continue;
        const bool in_template =
            std::abs(fk - f) <= template_hz || std::abs(fk - 2.0 * f) <= template_hz;
        (in_template ? p_template : p_rest) += psd.power[k];
    }
    if (!(p_rest > 0.0)) fail(ErrorKind::Quality, "snr: degenerate spectrum (no rest power)");
    if (!(p_template > 0.0)) fail(ErrorKind::Quality, "snr: no power at the reference rate");
    return 10.0 * std::log10(p_template / p_rest);
}

}  // namespace rppg::vitals
