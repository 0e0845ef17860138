#ifndef RPPGKIT_DSP_HPP
#define RPPGKIT_DSP_HPP

#include <complex>
#include <span>
#include <vector>

#include "rppgkit/types.hpp"

namespace rppg::dsp {

// ---------------------------------------------------------------------------
// Basic statistics
// ---------------------------------------------------------------------------

double mean(std::span<const double> x);
double stddev_pop(std::span<const double> x);

/// Sample Pearson correlation of two equal-length sequences.
/// Throws UndefinedCorrelation if either input has zero variance.
double pearson_r(std::span<const double> a, std::span<const double> b);

/// Zero-mean unit-variance normalization (population std). Returns a zero
/// series and sets *zero_variance when the input has no spread.
TimeSeries znormalize(const TimeSeries& x, bool* zero_variance = nullptr);

// ---------------------------------------------------------------------------
// Time-domain primitives
// ---------------------------------------------------------------------------

/// Subtract a centered moving average of width round(window_s * fs), forced
/// odd for symmetry. Edge windows are truncated.
TimeSeries detrend(const TimeSeries& x, double window_s);

/// Zero-phase band-pass: 4th-order Butterworth high-pass at lo_hz cascaded
/// with 4th-order low-pass at hi_hz, applied forward-backward over an
/// odd-reflected padding. Requires 0 < lo_hz < hi_hz < fs/2.
TimeSeries bandpass(const TimeSeries& x, double lo_hz, double hi_hz);

/// Linear-interpolation resample onto a uniform grid at fs_out spanning
/// [t0, t0 + duration]; output length = floor(duration * fs_out) + 1.
TimeSeries resample(const TimeSeries& x, double fs_out);

/// Value of the series at time t (clamped linear interpolation).
double value_at(const TimeSeries& x, double t);

// ---------------------------------------------------------------------------
// Spectral estimation
// ---------------------------------------------------------------------------

/// In-place iterative radix-2 FFT; a.size() must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& a);

std::size_t next_pow2(std::size_t n);

struct Psd {
    std::vector<double> freq_hz;
    std::vector<double> power;  // one-sided density
    double df = 0.0;
};

/// Single-segment Hann periodogram of the full series (mean removed,
/// zero-padded for a fine frequency grid).
Psd periodogram(std::span<const double> x, double fs);

/// Welch PSD: Hann-windowed segments of segment_s seconds (clamped to the
/// series length) with fractional overlap, per-segment mean removal.
Psd welch_psd(std::span<const double> x, double fs, double segment_s, double overlap);

/// Integrated PSD power over [lo_hz, hi_hz) using bin sums.
double band_power(const Psd& psd, double lo_hz, double hi_hz);

}  // namespace rppg::dsp

#endif
