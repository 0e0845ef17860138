#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>

#include "rppgkit/dsp.hpp"
#include "rppgkit/hrv.hpp"
#include "rppgkit/vitals.hpp"

namespace rppg::hrv {

namespace {

double median_of(std::vector<double> v) {
    const std::size_t n = v.size();
    auto mid = v.begin() + static_cast<std::ptrdiff_t>(n / 2);
    std::nth_element(v.begin(), mid, v.end());
    if (n % 2 == 1) return *mid;
    const double hi = *mid;
    const double lo = *std::max_element(v.begin(), mid);
    return 0.5 * (lo + hi);
}

// MAD-based robust amplitude over a window centered on index i.
double robust_amplitude(const std::vector<double>& x, std::size_t i, std::size_t half) {
    const std::size_t lo = i >= half ? i - half : 0;
    const std::size_t hi = std::min(x.size() - 1, i + half);
    std::vector<double> win(x.begin() + static_cast<std::ptrdiff_t>(lo),
                            x.begin() + static_cast<std::ptrdiff_t>(hi + 1));
    const double med = median_of(win);
    for (double& v : win) v = std::abs(v - med);
    return 1.4826 * median_of(win);
}

// rises 0->1 over [lo, flat_lo], 1 on [flat_lo, flat_hi], falls 1->0 over
// [flat_hi, hi]; 0 outside
double trapezoid(double v, double lo, double flat_lo, double flat_hi, double hi) {
    if (v <= lo || v >= hi) return 0.0;
    if (v < flat_lo) return (v - lo) / (flat_lo - lo);
    if (v > flat_hi) return (hi - v) / (hi - flat_hi);
    return 1.0;
}

struct Candidate {
    std::size_t idx;
    double time_s;  // sub-sample refined
};

// Local maxima with plateau handling (plateau midpoint); sub-sample peak
// time by parabolic fit, which keeps timing stable under amplitude scaling.
std::vector<Candidate> local_maxima(const TimeSeries& x) {
    std::vector<Candidate> out;
    const auto& v = x.values;
    const std::size_t n = v.size();
    for (std::size_t i = 1; i + 1 < n;) {
        if (v[i] <= v[i - 1]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j + 1 < n && v[j + 1] == v[i]) ++j;
        if (j + 1 >= n) break;
        if (v[j + 1] < v[i]) {
            const std::size_t p = (i + j) / 2;
            double delta = 0.0;
            if (i == j) {  // strict peak: parabola through the three samples
                const double denom = v[p - 1] - 2.0 * v[p] + v[p + 1];
                if (denom < 0.0)
                    delta = std::clamp(0.5 * (v[p - 1] - v[p + 1]) / denom, -0.5, 0.5);
            }
            out.push_back({p, x.t0 + (static_cast<double>(p) + delta) / x.fs});
        }
        i = j + 1;
    }
    return out;
}

struct Prominence {
    double value;
    std::size_t left_base, right_base;
};

// scipy-style prominence: walk out on each side until a strictly higher
// sample (or the boundary), base = minimum over the walked stretch.
Prominence prominence_at(const std::vector<double>& x, std::size_t p) {
    const double h = x[p];
    std::size_t lb = p;
    double lmin = h;
    for (std::size_t i = p; i-- > 0;) {
        if (x[i] > h) break;
        if (x[i] < lmin) {
            lmin = x[i];
            lb = i;
        }
    }
    std::size_t rb = p;
    double rmin = h;
    for (std::size_t i = p + 1; i < x.size(); ++i) {
        if (x[i] > h) break;
        if (x[i] < rmin) {
            rmin = x[i];
            rb = i;
        }
    }
    return {h - std::max(lmin, rmin), lb, rb};
}

// interpolated width (in samples) at half prominence, bounded by the bases
double width_at_half_prominence(const std::vector<double>& x, std::size_t p,
                                const Prominence& prom) {
    const double h = x[p] - 0.5 * prom.value;
    double left = static_cast<double>(prom.left_base);
    for (std::size_t i = p; i-- > prom.left_base;) {
        if (x[i] <= h) {
            left = static_cast<double>(i) + (h - x[i]) / (x[i + 1] - x[i]);
            break;
        }
    }
    double right = static_cast<double>(prom.right_base);
    for (std::size_t i = p + 1; i <= prom.right_base; ++i) {
        if (x[i] <= h) {
            right = static_cast<double>(i) - (h - x[i]) / (x[i - 1] - x[i]);
            break;
        }
    }
    return right - left;
}

std::string fmt_num(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace

double IbiSeries::interpolated_fraction() const {
    if (ibis_ms.empty()) return 0.0;
    std::size_t k = 0;
    for (bool f : interpolated) k += f ? 1 : 0;
    return static_cast<double>(k) / static_cast<double>(ibis_ms.size());
}

std::size_t IbiSeries::valid_beats() const {
    if (ibis_ms.empty()) return 0;
    std::size_t k = 0;
    for (bool f : interpolated) k += f ? 0 : 1;
    return k + 1;
}

PeakTrain detect_peaks(const TimeSeries& ppg, const TimeSeries& rolling_hr_bpm,
                       const PeakConfig& cfg) {
    validate(ppg, "detect_peaks waveform");
    validate(rolling_hr_bpm, "detect_peaks rolling HR");
    if (ppg.duration() < 10.0)
        fail(ErrorKind::InsufficientData, "detect_peaks: needs at least 10 s of signal");
    const double eps = 0.5 / ppg.fs;
    if (rolling_hr_bpm.t0 > ppg.t0 + eps || rolling_hr_bpm.end_time() < ppg.end_time() - eps)
        fail(ErrorKind::Parameter, "detect_peaks: rolling HR does not cover the waveform");

    const auto& x = ppg.values;
    const auto half =
        static_cast<std::size_t>(std::llround(0.5 * cfg.robust_window_s * ppg.fs));
    const double t_min = ppg.t0 + cfg.edge_exclude_s;
    const double t_max = ppg.end_time() - cfg.edge_exclude_s;

    PeakTrain train;
    double last_time = 0.0;
    bool has_last = false;
    for (const Candidate& c : local_maxima(ppg)) {
        if (c.time_s < t_min || c.time_s > t_max) continue;

        const Prominence prom = prominence_at(x, c.idx);
        const double amp = robust_amplitude(x, c.idx, half);
        if (!(amp > 0.0)) continue;
        const double ratio = prom.value / amp;
        if (ratio < cfg.prominence_ratio) continue;
        const double s_prom = std::clamp(
            (ratio - cfg.prominence_ratio) / (cfg.prominence_saturation - cfg.prominence_ratio),
            0.0, 1.0);

        const double bpm = dsp::value_at(rolling_hr_bpm, c.time_s);
        if (!(bpm > 0.0)) continue;
        const double period = 60.0 / bpm;
        const double width_s = width_at_half_prominence(x, c.idx, prom) / ppg.fs;
        const double wr = width_s / period;
        if (wr < cfg.width_lo || wr > cfg.width_hi) continue;
        const double s_width =
            trapezoid(wr, cfg.width_lo, cfg.width_flat_lo, cfg.width_flat_hi, cfg.width_hi);

        double s_dist = 1.0;
        if (has_last) {
            const double dr = (c.time_s - last_time) / period;
            if (dr < cfg.dist_lo) continue;  // too close: likely noise or dicrotic bump
            if (dr <= cfg.dist_hi) {
                s_dist =
                    trapezoid(dr, cfg.dist_lo, cfg.dist_flat_lo, cfg.dist_flat_hi, cfg.dist_hi);
            }
            // beyond dist_hi the previous run has a gap (missed beats); the
            // peak re-anchors a new run with full distance score and the long
            // interval is left for IBI cleaning to interpolate
        }

        train.times_s.push_back(c.time_s);
        train.confidences.push_back(s_prom * s_width * s_dist);
        last_time = c.time_s;
        has_last = true;
    }
    return train;
}

PeakTrain filter_peaks(const PeakTrain& train, double min_confidence) {
    const double thr = std::clamp(min_confidence, 0.0, 1.0);
    PeakTrain out;
    for (std::size_t i = 0; i < train.times_s.size(); ++i) {
        if (train.confidences[i] >= thr) {
            out.times_s.push_back(train.times_s[i]);
            out.confidences.push_back(train.confidences[i]);
        }
    }
    return out;
}

IbiSeries compute_ibis(const PeakTrain& train) {
    if (train.times_s.size() < 2)
        fail(ErrorKind::InsufficientBeats, "compute_ibis: needs at least 2 peaks");
    IbiSeries s;
    const std::size_t n = train.times_s.size() - 1;
    s.ibis_ms.resize(n);
    s.onset_times_s.resize(n);
    s.interpolated.assign(n, false);
    for (std::size_t k = 0; k < n; ++k) {
        s.ibis_ms[k] = 1000.0 * (train.times_s[k + 1] - train.times_s[k]);
        s.onset_times_s[k] = train.times_s[k];
        if (!(s.ibis_ms[k] > 0.0))
            fail(ErrorKind::Parameter, "compute_ibis: peak times not strictly increasing");
    }
    return s;
}

IbiSeries clean_ibis(const IbiSeries& series, const HrvConfig& cfg) {
    const std::size_t n = series.size();
    if (n < 3) fail(ErrorKind::InsufficientData, "clean_ibis: needs at least 3 intervals");
    if (series.onset_times_s.size() != n)
        fail(ErrorKind::Parameter, "clean_ibis: onset/ibi length mismatch");

    // Previously interpolated intervals are not observations: they stay
    // invalid, which makes cleaning exactly idempotent.
    std::vector<bool> valid(n);
    for (std::size_t i = 0; i < n; ++i) {
        const bool flagged = i < series.interpolated.size() && series.interpolated[i];
        valid[i] = !flagged && series.ibis_ms[i] >= cfg.ibi_lo_ms &&
                   series.ibis_ms[i] <= cfg.ibi_hi_ms;
    }

    const auto count_valid = [&] {
        std::size_t k = 0;
        for (bool b : valid) k += b ? 1 : 0;
        return k;
    };
    if (count_valid() == 0)
        fail(ErrorKind::Uncleanable, "clean_ibis: every interval is an outlier");

    // Jacobi sweeps against the median of the nearest valid neighbors until
    // the valid set stops shrinking.
    while (true) {
        std::vector<std::size_t> marks;
        for (std::size_t i = 0; i < n; ++i) {
            if (!valid[i]) continue;
            std::vector<double> nb;
            for (std::size_t d = 1; d < n && nb.size() < static_cast<std::size_t>(cfg.median_neighbors); ++d) {
                if (i >= d && valid[i - d]) nb.push_back(series.ibis_ms[i - d]);
                if (nb.size() >= static_cast<std::size_t>(cfg.median_neighbors)) break;
                if (i + d < n && valid[i + d]) nb.push_back(series.ibis_ms[i + d]);
            }
            if (nb.empty()) continue;
            const double med = median_of(std::move(nb));
            if (std::abs(series.ibis_ms[i] - med) > cfg.rel_outlier_frac * med)
                marks.push_back(i);
        }
        if (marks.empty()) break;
        for (std::size_t i : marks) valid[i] = false;
        if (count_valid() == 0)
            fail(ErrorKind::Uncleanable, "clean_ibis: every interval is an outlier");
    }

    std::vector<std::size_t> anchors;
    for (std::size_t i = 0; i < n; ++i)
        if (valid[i]) anchors.push_back(i);

    IbiSeries out;
    out.ibis_ms = series.ibis_ms;
    out.onset_times_s = series.onset_times_s;
    out.interpolated.assign(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (valid[i]) continue;
        const auto it = std::lower_bound(anchors.begin(), anchors.end(), i);
        double v;
        if (it == anchors.begin()) {
            v = series.ibis_ms[anchors.front()];
        } else if (it == anchors.end()) {
            v = series.ibis_ms[anchors.back()];
        } else {
            const std::size_t q = *it, p = *(it - 1);
            const double frac =
                static_cast<double>(i - p) / static_cast<double>(q - p);
            v = series.ibis_ms[p] + (series.ibis_ms[q] - series.ibis_ms[p]) * frac;
        }
        out.ibis_ms[i] = v;
        out.interpolated[i] = true;
    }
    out.low_quality = out.interpolated_fraction() > cfg.low_quality_fraction;
    return out;
}

double sdnn(const IbiSeries& series, bool population) {
    const std::size_t n = series.size();
    if (n < 2) fail(ErrorKind::InsufficientBeats, "sdnn: needs at least 2 intervals");
    const double m = dsp::mean(series.ibis_ms);
    double s = 0.0;
    for (double v : series.ibis_ms) s += (v - m) * (v - m);
    return std::sqrt(s / static_cast<double>(population ? n : n - 1));
}

double rmssd(const IbiSeries& series) {
    const std::size_t n = series.size();
    if (n < 2) fail(ErrorKind::InsufficientBeats, "rmssd: needs at least 2 intervals");
    double s = 0.0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double d = series.ibis_ms[k + 1] - series.ibis_ms[k];
        s += d * d;
    }
    return std::sqrt(s / static_cast<double>(n - 1));
}

double lf_hf(const IbiSeries& series, const HrvConfig& cfg) {
    const std::size_t n = series.size();
    if (n < 3) fail(ErrorKind::InsufficientData, "lf_hf: needs at least 3 intervals");
    const double span = series.onset_times_s.back() - series.onset_times_s.front();
    if (!(span >= 2.0 / cfg.tachogram_fs))
        fail(ErrorKind::InsufficientData, "lf_hf: tachogram span too short");

    // IBI tachogram on a uniform grid
    const auto m = static_cast<std::size_t>(std::floor(span * cfg.tachogram_fs + 1e-9)) + 1;
    std::vector<double> tach(m);
    std::size_t k = 0;
    for (std::size_t j = 0; j < m; ++j) {
        const double t = series.onset_times_s.front() + static_cast<double>(j) / cfg.tachogram_fs;
        while (k + 2 < n && series.onset_times_s[k + 1] <= t) ++k;
        const double t0 = series.onset_times_s[k], t1 = series.onset_times_s[k + 1];
        const double frac = std::clamp((t - t0) / (t1 - t0), 0.0, 1.0);
        tach[j] = series.ibis_ms[k] * (1.0 - frac) + series.ibis_ms[k + 1] * frac;
    }
    const double tmean = dsp::mean(tach);
    for (double& v : tach) v -= tmean;

    const dsp::Psd psd = dsp::welch_psd(tach, cfg.tachogram_fs, cfg.welch_segment_s, 0.5);
    const double lf = dsp::band_power(psd, cfg.lf_lo_hz, cfg.lf_hi_hz);
    const double hf = dsp::band_power(psd, cfg.hf_lo_hz, cfg.hf_hi_hz);
    if (!(hf > 1e-15)) fail(ErrorKind::Quality, "lf_hf: degenerate spectrum (no HF power)");
    return lf / hf;
}

std::optional<std::string> hrv_gate(double duration_s, int n_valid_beats,
                                    double interpolated_fraction, GateMetric metric,
                                    const HrvConfig& cfg) {
    const bool freq = metric == GateMetric::LfHf;
    const double min_dur = freq ? cfg.lfhf_min_duration_s : cfg.sdnn_min_duration_s;
    const int min_beats = freq ? cfg.lfhf_min_beats : cfg.sdnn_min_beats;
    if (duration_s < min_dur) return "duration < " + fmt_num(min_dur) + " s";
    if (n_valid_beats < min_beats) return "beats < " + std::to_string(min_beats);
    if (interpolated_fraction > cfg.max_interp_fraction)
        return "interpolated fraction > " + fmt_num(cfg.max_interp_fraction);
    return std::nullopt;
}

}  // namespace rppg::hrv
