#pragma once

// Tunable-parameter tree with defaults, strict JSON loading (unknown keys
// rejected), canonical dumping, and dotted-path overrides for CLI flags.

#include <string>

#include "rppgkit/hrv.hpp"

namespace rppg {

struct MethodConfig {
    double window_s = 1.6;  // CHROM/POS overlap-add window
};

struct PreprocessConfig {
    double detrend_window_s = 2.0;
    double resample_fs = 30.0;  // common rate for waveform comparison
};

struct VitalsConfig {
    double hr_band_lo_hz = 0.66;
    double hr_band_hi_hz = 4.0;
    double rr_band_lo_hz = 0.066;
    double rr_band_hi_hz = 0.65;
    double welch_segment_s = 10.0;
    double snr_template_hz = 0.1;
    double rolling_window_s = 10.0;
    double rolling_step_s = 1.0;
};

struct Config {
    MethodConfig method;
    PreprocessConfig preprocess;
    VitalsConfig vitals;
    hrv::PeakConfig peaks;
    hrv::HrvConfig hrv;
};

// Parse with strict key checking; context names the source for error messages.
Config config_from_json_text(const std::string& text, const std::string& context);
Config load_config(const std::string& path);

// Canonical textual form; dump -> load -> dump is a fixed point.
std::string dump_config(const Config& cfg);

// Applies "section.key=value"; unknown paths are rejected.
void apply_override(Config& cfg, const std::string& assignment);

}  // namespace rppg
