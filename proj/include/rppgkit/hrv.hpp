#pragma once

// HRV calculation pipeline: peak detection with prominence/width/periodicity
// gating, confidence filtering, IBI extraction, outlier interpolation, and
// SDNN/RMSSD/LF-HF with duration/beat-count gates.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rppgkit/types.hpp"

namespace rppg::hrv {

struct PeakTrain {
    std::vector<double> times_s;      // strictly increasing peak instants
    std::vector<double> confidences;  // in [0,1], same length
};

struct IbiSeries {
    std::vector<double> ibis_ms;        // successive inter-beat intervals
    std::vector<double> onset_times_s;  // start time of each interval
    std::vector<bool> interpolated;     // true where cleaning replaced the value
    bool low_quality = false;           // > 20% of intervals interpolated

    std::size_t size() const { return ibis_ms.size(); }
    double interpolated_fraction() const;
    // beats backed by observed (non-interpolated) intervals
    std::size_t valid_beats() const;
};

struct HrvResult {
    std::optional<double> sdnn_ms;
    std::optional<double> rmssd_ms;
    std::optional<double> lf_hf;
    // metric name ("sdnn"|"rmssd"|"lf_hf") -> gate or failure reason
    std::map<std::string, std::string> gate_reasons;
};

// Peak acceptance thresholds and confidence scoring shape. Sub-scores are
// trapezoids: 0 at the accept-range edges, 1 on the flat middle.
struct PeakConfig {
    double prominence_ratio = 0.3;       // accept: prominence >= ratio * robust amplitude
    double prominence_saturation = 1.5;  // score reaches 1 at this ratio
    double robust_window_s = 10.0;       // MAD window for the robust amplitude
    double width_lo = 0.1;               // accept range for width / expected period
    double width_flat_lo = 0.2;
    double width_flat_hi = 0.45;
    double width_hi = 0.6;
    double dist_lo = 0.5;  // accept range for distance / expected period
    double dist_flat_lo = 0.7;
    double dist_flat_hi = 1.3;
    double dist_hi = 1.8;  // beyond this the peak re-anchors a new run
    double edge_exclude_s = 1.0;
    double min_confidence = 0.5;  // default threshold for filter_peaks
};

struct HrvConfig {
    double ibi_lo_ms = 250.0;  // physiologically plausible IBI range
    double ibi_hi_ms = 2000.0;
    double rel_outlier_frac = 0.3;  // deviation vs. median of nearest valid
    int median_neighbors = 5;
    double low_quality_fraction = 0.2;
    double sdnn_min_duration_s = 20.0;
    int sdnn_min_beats = 15;
    double lfhf_min_duration_s = 55.0;
    int lfhf_min_beats = 30;
    double max_interp_fraction = 0.2;
    bool sdnn_population = false;  // default: sample (n-1) estimator
    double tachogram_fs = 4.0;
    double welch_segment_s = 32.0;
    double lf_lo_hz = 0.04;
    double lf_hi_hz = 0.15;
    double hf_lo_hz = 0.15;
    double hf_hi_hz = 0.40;
};

// Local maxima gated on prominence vs. a rolling robust amplitude, width at
// half prominence, and spacing relative to the rolling HR's expected period.
// rolling_hr_bpm must cover ppg's span (see vitals::rolling_hr).
PeakTrain detect_peaks(const TimeSeries& ppg, const TimeSeries& rolling_hr_bpm,
                       const PeakConfig& cfg = {});

// Subsequence with confidence >= min_confidence (clamped to [0,1]).
PeakTrain filter_peaks(const PeakTrain& train, double min_confidence);

// ibis_ms[k] = 1000 * (times[k+1] - times[k]); needs >= 2 peaks.
IbiSeries compute_ibis(const PeakTrain& train);

// Marks intervals outside [ibi_lo, ibi_hi] ms or deviating more than
// rel_outlier_frac from the median of the median_neighbors nearest valid
// intervals, then replaces them by linear interpolation between valid
// neighbors. Incoming interpolated flags are kept invalid, which makes the
// operation exactly idempotent. Needs >= 3 intervals.
IbiSeries clean_ibis(const IbiSeries& series, const HrvConfig& cfg = {});

// Standard deviation of IBIs; sample (n-1) divisor unless population is set.
double sdnn(const IbiSeries& series, bool population = false);

// Root mean square of successive IBI differences.
double rmssd(const IbiSeries& series);

// LF/HF power ratio of the 4 Hz-resampled IBI tachogram (Welch, 32 s
// segments, 50% overlap); LF = [0.04, 0.15) Hz, HF = [0.15, 0.40) Hz.
double lf_hf(const IbiSeries& series, const HrvConfig& cfg = {});

enum class GateMetric { Sdnn, Rmssd, LfHf };

// nullopt = pass; otherwise a machine-readable gate reason.
std::optional<std::string> hrv_gate(double duration_s, int n_valid_beats,
                                    double interpolated_fraction, GateMetric metric,
                                    const HrvConfig& cfg = {});

}  // namespace rppg::hrv
