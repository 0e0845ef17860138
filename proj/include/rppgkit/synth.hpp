#pragma once

// Synthetic ground truth: IBI sequences with controlled SDNN and LF/HF
// modulation, PPG/RESP waveforms rendered from them, and pulse-embedded RGB
// traces with controllable noise, gain, and motion artifacts. Everything is
// a pure function of the spec (including its seed).

#include <cstdint>
#include <random>

#include "rppgkit/hrv.hpp"
#include "rppgkit/types.hpp"

namespace rppg::synth {

// Deterministic RNG: mt19937_64 with explicit uniform/gauss mappings so the
// stream is identical across platforms and build modes.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}
    double uniform();  // [0, 1)
    double gauss();    // standard normal (Box-Muller)

  private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// Mixes a tag into a seed so sub-streams (jitter, noise, motion) stay
// independent but reproducible.
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t tag);

struct SynthSpec {
    double mean_hr_bpm = 72.0;
    double sdnn_target_ms = 50.0;
    double lf_freq_hz = 0.1;
    double lf_amp_ms = 30.0;
    double hf_freq_hz = 0.25;
    double hf_amp_ms = 20.0;
    double rr_bpm = 15.0;
    double duration_s = 60.0;
    double noise_sigma = 0.3;
    double gain_r = 1.0, gain_g = 1.0, gain_b = 1.0;
    double motion_amp = 0.0;
    std::uint64_t seed = 1;
};

void validate(const SynthSpec& spec);

// IBIs = 60000/mean_hr + LF sinusoid + HF sinusoid + white jitter, the
// jitter sigma chosen so the analytic process SD equals sdnn_target.
// Cumulative time covers at least duration_s.
hrv::IbiSeries synth_ibis(const SynthSpec& spec);

struct SynthPpg {
    TimeSeries ppg;         // z-normalized waveform
    hrv::PeakTrain peaks;   // exact systolic peak times, confidence 1
};

// Renders each beat as an asymmetric pulse (fast rise ~0.15 IBI, slow decay,
// dicrotic bump at 0.45 IBI) using the median IBI as the common shape scale,
// so systolic maxima land exactly on the constructed peak times.
SynthPpg synth_ppg(const hrv::IbiSeries& ibis, double fs);

// Baseline (180, 120, 100) x channel_gains; the pulse enters with relative
// strengths (0.33, 0.77, 0.53) on (R, G, B) at 1% of each channel's
// baseline; plus white noise and a common-mode random-walk motion artifact.
RgbTrace embed_in_rgb(const TimeSeries& ppg, const SynthSpec& spec);

// Unit-amplitude sinusoid at rr_bpm / 60 Hz.
TimeSeries synth_resp(double rr_bpm, double duration_s, double fs);

}  // namespace rppg::synth
