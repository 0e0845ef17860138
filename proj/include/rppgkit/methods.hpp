#pragma once

// Handcrafted rPPG pulse extraction methods. Each maps a per-frame RGB trace
// to a pulse waveform at the same sampling rate. All three share one
// postprocessing chain (detrend 2 s, band-pass 0.66-4.0 Hz, z-normalize) so
// their outputs are directly comparable.

#include <string>
#include <vector>

#include "rppgkit/types.hpp"

namespace rppg::methods {

enum class Method { G, CHROM, POS };

Method method_from_string(const std::string& name);
std::string method_name(Method m);

struct MethodStats {
    std::size_t windows = 0;          // overlap-add windows processed
    std::size_t flagged_windows = 0;  // zero-variance / degenerate windows
    bool zero_output = false;         // whole output collapsed to zeros
};

// Knobs of the shared postprocessing chain.
struct ChainParams {
    double detrend_window_s = 2.0;
    double band_lo_hz = 0.66;
    double band_hi_hz = 4.0;
};

// Green channel through the shared postprocessing chain.
TimeSeries extract_g(const RgbTrace& trace, MethodStats* stats = nullptr,
                     const ChainParams& chain = {});

// Chrominance method: per Hann-weighted window (50% overlap) channels are
// normalized by their window means, X = 3Rn - 2Gn, Y = 1.5Rn + Gn - 1.5Bn,
// segment = X - (sigmaX/sigmaY) * Y, mean-removed, overlap-added.
TimeSeries extract_chrom(const RgbTrace& trace, double window_s = 1.6,
                         MethodStats* stats = nullptr, const ChainParams& chain = {});

// Plane-orthogonal-to-skin: sliding window (stride one sample), Cn = C/muC,
// S1 = Gn - Bn, S2 = Gn + Bn - 2Rn, h = S1 + (sigmaS1/sigmaS2) * S2,
// mean-removed h accumulated into the output.
TimeSeries extract_pos(const RgbTrace& trace, double window_s = 1.6,
                       MethodStats* stats = nullptr, const ChainParams& chain = {});

TimeSeries extract(Method m, const RgbTrace& trace, MethodStats* stats = nullptr,
                   const ChainParams& chain = {});

// Plain serial implementations kept as ground truth for the parallel kernels;
// must produce bit-identical output.
TimeSeries extract_chrom_reference(const RgbTrace& trace, double window_s = 1.6,
                                   MethodStats* stats = nullptr,
                                   const ChainParams& chain = {});
TimeSeries extract_pos_reference(const RgbTrace& trace, double window_s = 1.6,
                                 MethodStats* stats = nullptr,
                                 const ChainParams& chain = {});

}  // namespace rppg::methods
