#pragma once

// Chunk-level orchestration: shared waveform preprocessing and the combined
// vitals + HRV estimate used by both the CLI and the benchmark harness.

#include <map>
#include <optional>
#include <string>

#include "rppgkit/config.hpp"
#include "rppgkit/hrv.hpp"
#include "rppgkit/types.hpp"

namespace rppg::pipeline {

struct VitalsEstimate {
    std::optional<double> hr_bpm;           // spectral, canonical
    std::optional<double> hr_from_ibi_bpm;  // secondary diagnostic
    std::optional<double> rr_bpm;           // present only with a RESP waveform
    hrv::HrvResult hrv;
    hrv::PeakTrain peaks;  // retained high-confidence peaks
    hrv::IbiSeries ibis;   // cleaned IBI series (may be empty)
    // "hr"/"rr" estimation failures; HRV reasons live in hrv.gate_reasons
    std::map<std::string, std::string> errors;
};

// Detrend + band-pass to the pulse band + z-normalize (the same chain the
// rppg methods apply), for raw reference waveforms.
TimeSeries preprocess_ppg(const TimeSeries& raw, const Config& cfg, bool* flat = nullptr);

// Band-pass to the respiratory band + z-normalize. No moving-average detrend:
// a window sized for the pulse band would erase respiration itself.
TimeSeries preprocess_resp(const TimeSeries& raw, const Config& cfg, bool* flat = nullptr);

// Full estimate from a preprocessed PPG (and optional RESP) waveform.
// trust_peaks forces detected peak confidences to 1 (used for ground-truth
// waveforms, where gating should not discard beats).
VitalsEstimate estimate_vitals(const TimeSeries& ppg, const std::optional<TimeSeries>& resp,
                               const Config& cfg, bool trust_peaks = false);

}  // namespace rppg::pipeline
