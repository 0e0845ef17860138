#include <algorithm>
#include <cmath>
#include <numbers>

#include "rppgkit/dsp.hpp"
#include "rppgkit/methods.hpp"

namespace rppg::methods {

namespace {

constexpr double kMinDurationS = 5.0;

void check_trace(const RgbTrace& trace, double window_s, bool windowed) {
    validate(trace, "rppg method input");
    if (trace.duration() < kMinDurationS)
        fail(ErrorKind::InsufficientData, "rppg method: trace shorter than 5 s");
    if (windowed) {
        if (!(window_s > 0.5))
            fail(ErrorKind::Parameter, "rppg method: window_s must exceed 0.5 s");
        if (window_s * trace.fs < 8.0)
            fail(ErrorKind::Parameter, "rppg method: window shorter than 8 samples");
    }
}

// Shared tail of every method: detrend, band-limit to the pulse band,
// z-normalize. A flat result is zeroed and flagged instead of failing.
TimeSeries finish(TimeSeries assembled, MethodStats* stats, const ChainParams& chain) {
    TimeSeries out = dsp::detrend(assembled, chain.detrend_window_s);
    out = dsp::bandpass(out, chain.band_lo_hz, chain.band_hi_hz);
    bool flat = false;
    out = dsp::znormalize(out, &flat);
    if (stats) stats->zero_output = flat;
    return out;
}

std::size_t window_samples(double window_s, double fs, std::size_t n) {
    auto len = static_cast<std::size_t>(std::llround(window_s * fs));
    return std::min(len, n);
}

struct ChromWindow {
    double mu_r = 0.0, mu_g = 0.0, mu_b = 0.0;
    double alpha = 0.0;
    double seg_mean = 0.0;
    bool degenerate = false;  // zero channel mean or sigmaY == 0
};

double chrom_x(double rn, double gn) { return 3.0 * rn - 2.0 * gn; }
double chrom_y(double rn, double gn, double bn) { return 1.5 * rn + gn - 1.5 * bn; }

ChromWindow chrom_window_stats(const RgbTrace& t, std::size_t start, std::size_t len) {
    ChromWindow w;
    double sr = 0.0, sg = 0.0, sb = 0.0;
    for (std::size_t i = start; i < start + len; ++i) {
        sr += t.r[i];
        sg += t.g[i];
        sb += t.b[i];
    }
    const auto dn = static_cast<double>(len);
    w.mu_r = sr / dn;
    w.mu_g = sg / dn;
    w.mu_b = sb / dn;
    if (w.mu_r <= 0.0 || w.mu_g <= 0.0 || w.mu_b <= 0.0) {
        w.degenerate = true;
        return w;
    }
    double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = start; i < start + len; ++i) {
        const double x = chrom_x(t.r[i] / w.mu_r, t.g[i] / w.mu_g);
        const double y = chrom_y(t.r[i] / w.mu_r, t.g[i] / w.mu_g, t.b[i] / w.mu_b);
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
    }
    const double var_x = std::max(0.0, sxx / dn - (sx / dn) * (sx / dn));
    const double var_y = std::max(0.0, syy / dn - (sy / dn) * (sy / dn));
    if (var_y <= 0.0) {
        w.degenerate = true;
        return w;
    }
    w.alpha = std::sqrt(var_x) / std::sqrt(var_y);
    double ssum = 0.0;
    for (std::size_t i = start; i < start + len; ++i) {
        const double rn = t.r[i] / w.mu_r, gn = t.g[i] / w.mu_g, bn = t.b[i] / w.mu_b;
        ssum += chrom_x(rn, gn) - w.alpha * chrom_y(rn, gn, bn);
    }
    w.seg_mean = ssum / dn;
    return w;
}

double chrom_value(const RgbTrace& t, const ChromWindow& w, std::size_t i) {
    if (w.degenerate) return 0.0;
    const double rn = t.r[i] / w.mu_r, gn = t.g[i] / w.mu_g, bn = t.b[i] / w.mu_b;
    return chrom_x(rn, gn) - w.alpha * chrom_y(rn, gn, bn) - w.seg_mean;
}

// periodic Hann taper for overlap-add; endpoint weights are zero so the
// accumulated weight sum is used to renormalize
double hann_ola(std::size_t j, std::size_t len) {
    return 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(j) /
                                static_cast<double>(len));
}

// Window start offsets: a 50% grid plus, when the grid does not land on the
// end of the trace, one extra window flush with the end.
std::vector<std::size_t> chrom_starts(std::size_t n, std::size_t len, std::size_t hop) {
    std::vector<std::size_t> starts;
    std::size_t s = 0;
    for (; s + len <= n; s += hop) starts.push_back(s);
    if (starts.empty() || starts.back() + len < n) starts.push_back(n - len);
    return starts;
}

struct PosWindow {
    double mu_r = 0.0, mu_g = 0.0, mu_b = 0.0;
    double alpha = 0.0;
    double h_mean = 0.0;
    bool degenerate = false;  // zero channel mean; sigmaS2 == 0 only zeroes alpha
};

PosWindow pos_window_stats(const RgbTrace& t, std::size_t start, std::size_t len) {
    PosWindow w;
    double sr = 0.0, sg = 0.0, sb = 0.0;
    for (std::size_t i = start; i < start + len; ++i) {
        sr += t.r[i];
        sg += t.g[i];
        sb += t.b[i];
    }
    const auto dn = static_cast<double>(len);
    w.mu_r = sr / dn;
    w.mu_g = sg / dn;
    w.mu_b = sb / dn;
    if (w.mu_r <= 0.0 || w.mu_g <= 0.0 || w.mu_b <= 0.0) {
        w.degenerate = true;
        return w;
    }
    double s1 = 0.0, s2 = 0.0, s11 = 0.0, s22 = 0.0;
    for (std::size_t i = start; i < start + len; ++i) {
        const double rn = t.r[i] / w.mu_r, gn = t.g[i] / w.mu_g, bn = t.b[i] / w.mu_b;
        const double a = gn - bn;
        const double b = gn + bn - 2.0 * rn;
        s1 += a;
        s2 += b;
        s11 += a * a;
        s22 += b * b;
    }
    const double var1 = std::max(0.0, s11 / dn - (s1 / dn) * (s1 / dn));
    const double var2 = std::max(0.0, s22 / dn - (s2 / dn) * (s2 / dn));
    w.alpha = var2 > 0.0 ? std::sqrt(var1) / std::sqrt(var2) : 0.0;
    double hsum = 0.0;
    for (std::size_t i = start; i < start + len; ++i) {
        const double rn = t.r[i] / w.mu_r, gn = t.g[i] / w.mu_g, bn = t.b[i] / w.mu_b;
        hsum += (gn - bn) + w.alpha * (gn + bn - 2.0 * rn);
    }
    w.h_mean = hsum / dn;
    return w;
}

double pos_value(const RgbTrace& t, const PosWindow& w, std::size_t i) {
    if (w.degenerate) return 0.0;
    const double rn = t.r[i] / w.mu_r, gn = t.g[i] / w.mu_g, bn = t.b[i] / w.mu_b;
    return (gn - bn) + w.alpha * (gn + bn - 2.0 * rn) - w.h_mean;
}

}  // namespace

Method method_from_string(const std::string& name) {
    if (name == "g") return Method::G;
    if (name == "chrom") return Method::CHROM;
    if (name == "pos") return Method::POS;
    fail(ErrorKind::Parameter, "unknown method '" + name + "' (expected g|chrom|pos)");
}

std::string method_name(Method m) {
    switch (m) {
        case Method::G: return "g";
        case Method::CHROM: return "chrom";
        case Method::POS: return "pos";
    }
    fail(ErrorKind::Parameter, "invalid method enum");
}

TimeSeries extract_g(const RgbTrace& trace, MethodStats* stats, const ChainParams& chain) {
    check_trace(trace, 0.0, false);
    if (stats) *stats = {};
    TimeSeries raw;
    raw.values = trace.g;
    raw.fs = trace.fs;
    raw.t0 = trace.t0;
    return finish(std::move(raw), stats, chain);
}

TimeSeries extract_chrom_reference(const RgbTrace& trace, double window_s, MethodStats* stats,
                                   const ChainParams& chain) {
    check_trace(trace, window_s, true);
    const std::size_t n = trace.size();
    const std::size_t len = window_samples(window_s, trace.fs, n);
    const std::size_t hop = std::max<std::size_t>(1, len / 2);
    const auto starts = chrom_starts(n, len, hop);

    MethodStats st;
    st.windows = starts.size();
    std::vector<double> acc(n, 0.0), wsum(n, 0.0);
    for (std::size_t s : starts) {
        const ChromWindow w = chrom_window_stats(trace, s, len);
        if (w.degenerate) ++st.flagged_windows;
        for (std::size_t j = 0; j < len; ++j) {
            const double taper = hann_ola(j, len);
            acc[s + j] += taper * chrom_value(trace, w, s + j);
            wsum[s + j] += taper;
        }
    }
    TimeSeries raw;
    raw.fs = trace.fs;
    raw.t0 = trace.t0;
    raw.values.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        raw.values[i] = wsum[i] > 0.0 ? acc[i] / wsum[i] : 0.0;

    TimeSeries out = finish(std::move(raw), &st, chain);
    if (stats) *stats = st;
    return out;
}

TimeSeries extract_chrom(const RgbTrace& trace, double window_s, MethodStats* stats,
                         const ChainParams& chain) {
    check_trace(trace, window_s, true);
    const std::size_t n = trace.size();
    const std::size_t len = window_samples(window_s, trace.fs, n);
    const std::size_t hop = std::max<std::size_t>(1, len / 2);
    const auto starts = chrom_starts(n, len, hop);
    const auto nwin = static_cast<std::ptrdiff_t>(starts.size());

    std::vector<ChromWindow> wins(starts.size());
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < nwin; ++k)
        wins[static_cast<std::size_t>(k)] =
            chrom_window_stats(trace, starts[static_cast<std::size_t>(k)], len);

    MethodStats st;
    st.windows = starts.size();
    for (const ChromWindow& w : wins)
        if (w.degenerate) ++st.flagged_windows;

    // Accumulate per output sample, always iterating covering windows in
    // ascending start order: the float sum is identical to the serial
    // reference no matter how many threads run.
    TimeSeries raw;
    raw.fs = trace.fs;
    raw.t0 = trace.t0;
    raw.values.resize(n);
    const auto ni = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ip = 0; ip < ni; ++ip) {
        const auto i = static_cast<std::size_t>(ip);
        // grid windows covering i: start in (i - len, i], start on the hop grid
        double acc = 0.0, wsumi = 0.0;
        const std::size_t k_lo = i + 1 > len ? (i + 1 - len + hop - 1) / hop : 0;
        for (std::size_t k = k_lo; k < starts.size(); ++k) {
            const std::size_t s = starts[k];
            if (s > i) break;
            if (i - s >= len) continue;  // tail window may restart below grid
            const double taper = hann_ola(i - s, len);
            acc += taper * chrom_value(trace, wins[k], i);
            wsumi += taper;
        }
        raw.values[i] = wsumi > 0.0 ? acc / wsumi : 0.0;
    }

    TimeSeries out = finish(std::move(raw), &st, chain);
    if (stats) *stats = st;
    return out;
}

TimeSeries extract_pos_reference(const RgbTrace& trace, double window_s, MethodStats* stats,
                                 const ChainParams& chain) {
    check_trace(trace, window_s, true);
    const std::size_t n = trace.size();
    const std::size_t len = window_samples(window_s, trace.fs, n);
    const std::size_t nwin = n - len + 1;

    MethodStats st;
    st.windows = nwin;
    TimeSeries raw;
    raw.fs = trace.fs;
    raw.t0 = trace.t0;
    raw.values.assign(n, 0.0);
    for (std::size_t s = 0; s < nwin; ++s) {
        const PosWindow w = pos_window_stats(trace, s, len);
        if (w.degenerate) ++st.flagged_windows;
        for (std::size_t j = 0; j < len; ++j) raw.values[s + j] += pos_value(trace, w, s + j);
    }

    TimeSeries out = finish(std::move(raw), &st, chain);
    if (stats) *stats = st;
    return out;
}

TimeSeries extract_pos(const RgbTrace& trace, double window_s, MethodStats* stats,
                       const ChainParams& chain) {
    check_trace(trace, window_s, true);
    const std::size_t n = trace.size();
    const std::size_t len = window_samples(window_s, trace.fs, n);
    const std::size_t nwin = n - len + 1;

    std::vector<PosWindow> wins(nwin);
    const auto nw = static_cast<std::ptrdiff_t>(nwin);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t k = 0; k < nw; ++k)
        wins[static_cast<std::size_t>(k)] =
            pos_window_stats(trace, static_cast<std::size_t>(k), len);

    MethodStats st;
    st.windows = nwin;
    for (const PosWindow& w : wins)
        if (w.degenerate) ++st.flagged_windows;

    TimeSeries raw;
    raw.fs = trace.fs;
    raw.t0 = trace.t0;
    raw.values.resize(n);
    const auto ni = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t ip = 0; ip < ni; ++ip) {
        const auto i = static_cast<std::size_t>(ip);
        const std::size_t s_lo = i + 1 > len ? i + 1 - len : 0;
        const std::size_t s_hi = std::min(i, nwin - 1);
        double acc = 0.0;
        for (std::size_t s = s_lo; s <= s_hi; ++s) acc += pos_value(trace, wins[s], i);
        raw.values[i] = acc;
    }

    TimeSeries out = finish(std::move(raw), &st, chain);
    if (stats) *stats = st;
    return out;
}

TimeSeries extract(Method m, const RgbTrace& trace, MethodStats* stats,
                   const ChainParams& chain) {
    switch (m) {
        case Method::G: return extract_g(trace, stats, chain);
        case Method::CHROM: return extract_chrom(trace, 1.6, stats, chain);
        case Method::POS: return extract_pos(trace, 1.6, stats, chain);
    }
    fail(ErrorKind::Parameter, "invalid method enum");
}

}  // namespace rppg::methods
