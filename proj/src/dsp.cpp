#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "rppgkit/dsp.hpp"

namespace rppg::dsp {

double mean(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v;
    return x.empty() ? 0.0 : s / static_cast<double>(x.size());
}

double stddev_pop(std::span<const double> x) {
    if (x.empty()) return 0.0;
    const double m = mean(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(x.size()));
}

double pearson_r(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        fail(ErrorKind::Parameter, "pearson_r: length mismatch");
    if (a.size() < 2)
        fail(ErrorKind::Parameter, "pearson_r: needs at least 2 samples");
    const double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa == 0.0 || sbb == 0.0)
        fail(ErrorKind::UndefinedCorrelation, "pearson_r: zero-variance input");
    return std::clamp(sab / std::sqrt(saa * sbb), -1.0, 1.0);
}

TimeSeries znormalize(const TimeSeries& x, bool* zero_variance) {
    TimeSeries out = x;
    const double m = mean(x.values);
    const double sd = stddev_pop(x.values);
    if (sd < 1e-300) {
        std::fill(out.values.begin(), out.values.end(), 0.0);
        if (zero_variance) *zero_variance = true;
        return out;
    }
    for (double& v : out.values) v = (v - m) / sd;
    if (zero_variance) *zero_variance = false;
    return out;
}

// ---------------------------------------------------------------------------
// detrend
// ---------------------------------------------------------------------------

TimeSeries detrend(const TimeSeries& x, double window_s) {
    validate(x, "detrend input");
    if (!(window_s > 2.0 / x.fs))
        fail(ErrorKind::Parameter, "detrend: window must exceed 2 samples");

    const std::size_t n = x.values.size();
    // odd width keeps the window symmetric about each sample
    std::size_t w = static_cast<std::size_t>(std::llround(window_s * x.fs));
    if (w % 2 == 0) ++w;
    const std::size_t half = w / 2;

    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + x.values[i];

    TimeSeries out = x;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t lo = i >= half ? i - half : 0;
        const std::size_t hi = std::min(n - 1, i + half);
        const double m = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
        out.values[i] = x.values[i] - m;
    }
    return out;
}

// ---------------------------------------------------------------------------
// bandpass: 4th-order Butterworth HP + LP cascade, forward-backward
// ---------------------------------------------------------------------------

namespace {

struct Biquad {
    double b0, b1, b2, a1, a2;
};

// RBJ cookbook sections; Q values place the poles of a 4th-order Butterworth.
std::array<Biquad, 2> butter4(double fc, double fs, bool highpass) {
    const double q[2] = {0.54119610014619698, 1.3065629648763764};
    const double w0 = 2.0 * std::numbers::pi * fc / fs;
    const double cw = std::cos(w0), sw = std::sin(w0);
    std::array<Biquad, 2> sec{};
    for (int i = 0; i < 2; ++i) {
        const double alpha = sw / (2.0 * q[i]);
        const double a0 = 1.0 + alpha;
        double b0, b1, b2;
        if (highpass) {
            b0 = (1.0 + cw) / 2.0;
            b1 = -(1.0 + cw);
            b2 = b0;
        } else {
            b0 = (1.0 - cw) / 2.0;
            b1 = 1.0 - cw;
            b2 = b0;
        }
        sec[i] = {b0 / a0, b1 / a0, b2 / a0, (-2.0 * cw) / a0, (1.0 - alpha) / a0};
    }
    return sec;
}

// state of a transposed direct-form-II biquad for a unit-step input,
// scaled by the first sample to suppress startup transients
struct BiquadState {
    double s1 = 0.0, s2 = 0.0;
};

BiquadState step_state(const Biquad& q) {
    const double g = (q.b0 + q.b1 + q.b2) / (1.0 + q.a1 + q.a2);
    BiquadState st;
    st.s2 = q.b2 - q.a2 * g;
    st.s1 = q.b1 + q.b2 - (q.a1 + q.a2) * g;
    return st;
}

void run_cascade(std::vector<double>& x, std::span<const Biquad> sections) {
    for (const Biquad& q : sections) {
        BiquadState init = step_state(q);
        double s1 = init.s1 * x[0], s2 = init.s2 * x[0];
        for (double& v : x) {
            const double y = q.b0 * v + s1;
            s1 = q.b1 * v - q.a1 * y + s2;
            s2 = q.b2 * v - q.a2 * y;
            v = y;
        }
    }
}

std::vector<double> filtfilt(std::span<const double> x, std::span<const Biquad> sections,
                             std::size_t padlen) {
    const std::size_t n = x.size();
    padlen = std::min(padlen, n - 1);
    std::vector<double> ext;
    ext.reserve(n + 2 * padlen);
    for (std::size_t i = 0; i < padlen; ++i) ext.push_back(2.0 * x[0] - x[padlen - i]);
    ext.insert(ext.end(), x.begin(), x.end());
    for (std::size_t i = 0; i < padlen; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 2 - i]);

    run_cascade(ext, sections);
    std::reverse(ext.begin(), ext.end());
    run_cascade(ext, sections);
    std::reverse(ext.begin(), ext.end());

    return {ext.begin() + static_cast<std::ptrdiff_t>(padlen),
            ext.begin() + static_cast<std::ptrdiff_t>(padlen + n)};
}

}  // namespace

TimeSeries bandpass(const TimeSeries& x, double lo_hz, double hi_hz) {
    validate(x, "bandpass input");
    if (!(lo_hz > 0.0 && lo_hz < hi_hz && hi_hz < x.fs / 2.0))
        fail(ErrorKind::Parameter, "bandpass: need 0 < lo < hi < fs/2");
    if (x.values.size() < 2) fail(ErrorKind::Parameter, "bandpass: series too short");

    const auto hp = butter4(lo_hz, x.fs, true);
    const auto lp = butter4(hi_hz, x.fs, false);
    std::array<Biquad, 4> chain = {hp[0], hp[1], lp[0], lp[1]};

    // padding long enough for the slow high-pass corner to settle
    const auto padlen = static_cast<std::size_t>(std::ceil(3.0 * x.fs / lo_hz));

    TimeSeries out = x;
    out.values = filtfilt(x.values, chain, padlen);
    return out;
}

// ---------------------------------------------------------------------------
// resample
// ---------------------------------------------------------------------------

TimeSeries resample(const TimeSeries& x, double fs_out) {
    validate(x, "resample input");
    if (!(fs_out > 0.0)) fail(ErrorKind::Parameter, "resample: fs_out must be > 0");

    const std::size_t n = x.values.size();
    const double dur = x.duration();
    const auto m = static_cast<std::size_t>(std::floor(dur * fs_out + 1e-9)) + 1;
    const double ratio = x.fs / fs_out;

    TimeSeries out;
    out.fs = fs_out;
    out.t0 = x.t0;
    out.values.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double pos = static_cast<double>(k) * ratio;
        auto i = static_cast<std::size_t>(pos);
        if (i >= n - 1) {
            out.values[k] = x.values[n - 1];
            continue;
        }
        const double frac = pos - static_cast<double>(i);
        out.values[k] = x.values[i] * (1.0 - frac) + x.values[i + 1] * frac;
    }
    return out;
}

double value_at(const TimeSeries& x, double t) {
    const double pos = (t - x.t0) * x.fs;
    if (pos <= 0.0) return x.values.front();
    const std::size_t n = x.values.size();
    if (pos >= static_cast<double>(n - 1)) return x.values.back();
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return x.values[i] * (1.0 - frac) + x.values[i + 1] * frac;
}

// ---------------------------------------------------------------------------
// spectral estimation
// ---------------------------------------------------------------------------

namespace {

// Hann-windowed one-sided PSD of one segment, accumulated into acc.
// nfft >= seg length; window values supplied by caller.
void accumulate_segment_psd(std::span<const double> seg, std::span<const double> window,
                            std::size_t nfft, double fs, std::vector<double>& acc) {
    const std::size_t len = seg.size();
    const double m = mean(seg);
    std::vector<std::complex<double>> buf(nfft, {0.0, 0.0});
    double wss = 0.0;
    for (std::size_t i = 0; i < len; ++i) {
        buf[i] = {(seg[i] - m) * window[i], 0.0};
        wss += window[i] * window[i];
    }
    fft_inplace(buf);
    const double scale = 1.0 / (fs * wss);
    const std::size_t half = nfft / 2;
    for (std::size_t k = 0; k <= half; ++k) {
        double p = std::norm(buf[k]) * scale;
        if (k != 0 && k != half) p *= 2.0;
        acc[k] += p;
    }
}

std::vector<double> hann_window(std::size_t len) {
    std::vector<double> w(len);
    if (len == 1) {
        w[0] = 1.0;
        return w;
    }
    for (std::size_t i = 0; i < len; ++i)
        w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                    static_cast<double>(len - 1));
    return w;
}

Psd finish_psd(std::vector<double> acc, std::size_t nseg, std::size_t nfft, double fs) {
    Psd psd;
    psd.df = fs / static_cast<double>(nfft);
    const std::size_t half = nfft / 2;
    psd.freq_hz.resize(half + 1);
    psd.power.resize(half + 1);
    for (std::size_t k = 0; k <= half; ++k) {
        psd.freq_hz[k] = psd.df * static_cast<double>(k);
        psd.power[k] = acc[k] / static_cast<double>(nseg);
    }
    return psd;
}

}  // namespace

Psd periodogram(std::span<const double> x, double fs) {
    if (x.size() < 2) fail(ErrorKind::Parameter, "periodogram: series too short");
    const std::size_t nfft = 4 * next_pow2(x.size());
    std::vector<double> acc(nfft / 2 + 1, 0.0);
    const auto window = hann_window(x.size());
    accumulate_segment_psd(x, window, nfft, fs, acc);
    return finish_psd(std::move(acc), 1, nfft, fs);
}

Psd welch_psd(std::span<const double> x, double fs, double segment_s, double overlap) {
    if (x.size() < 2) fail(ErrorKind::Parameter, "welch_psd: series too short");
    if (!(overlap >= 0.0 && overlap < 1.0))
        fail(ErrorKind::Parameter, "welch_psd: overlap must be in [0, 1)");

    std::size_t seg = static_cast<std::size_t>(std::llround(segment_s * fs));
    seg = std::clamp<std::size_t>(seg, 2, x.size());
    const auto hop = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(static_cast<double>(seg) * (1.0 - overlap))));

    const std::size_t nfft = 4 * next_pow2(seg);
    const auto window = hann_window(seg);
    std::vector<double> acc(nfft / 2 + 1, 0.0);
    std::size_t nseg = 0;
    for (std::size_t start = 0; start + seg <= x.size(); start += hop) {
        accumulate_segment_psd(x.subspan(start, seg), window, nfft, fs, acc);
        ++nseg;
    }
    return finish_psd(std::move(acc), nseg, nfft, fs);
}

double band_power(const Psd& psd, double lo_hz, double hi_hz) {
    double p = 0.0;
    for (std::size_t k = 0; k < psd.freq_hz.size(); ++k)
        if (psd.freq_hz[k] >= lo_hz && psd.freq_hz[k] < hi_hz) p += psd.power[k] * psd.df;
    return p;
}

}  // namespace rppg::dsp
