#pragma once

// Rate estimation and waveform-quality metrics: spectral HR/RR from Welch
// periodograms, a rolling frequency estimate for peak gating, and the
// template SNR metric.

#include "rppgkit/types.hpp"

namespace rppg::vitals {

inline constexpr double kHrBandLoHz = 0.66;  // 40 bpm
inline constexpr double kHrBandHiHz = 4.0;   // 240 bpm
inline constexpr double kRrBandLoHz = 0.066;  // ~4 bpm
inline constexpr double kRrBandHiHz = 0.65;   // 39 bpm

struct RateEstimate {
    double bpm = 0.0;
    double band_lo_hz = 0.0;
    double band_hi_hz = 0.0;
};

// Spectral peak rate in an arbitrary band; shared machinery for HR and RR.
// Welch periodogram (Hann segments of welch_segment_s or the full series if
// shorter, 50% overlap), argmax within the band, parabolic refinement on log
// power. No duration gate — callers add their own.
RateEstimate spectral_rate(const TimeSeries& x, double band_lo_hz, double band_hi_hz,
                           double welch_segment_s = 10.0);

// Heart rate in [0.66, 4.0] Hz. Requires >= 10 s of signal.
RateEstimate estimate_hr(const TimeSeries& ppg);

// Respiratory rate in [0.066, 0.65] Hz. Requires >= 20 s of signal.
RateEstimate estimate_rr(const TimeSeries& resp);

// estimate over sliding windows (window_s >= 8 s, hop step_s), linearly
// interpolated back to one bpm value per input sample. Windows where the
// estimator fails inherit the nearest valid window's value.
TimeSeries rolling_hr(const TimeSeries& ppg, double window_s = 10.0, double step_s = 1.0);

// Template SNR in dB: power within +-template_hz of the reference rate's
// fundamental and second harmonic vs. the remaining in-band power, measured
// on a single full-length periodogram.
double snr_db(const TimeSeries& waveform, double ref_rate_bpm, double band_lo_hz,
              double band_hi_hz, double template_hz = 0.1);

}  // namespace rppg::vitals
