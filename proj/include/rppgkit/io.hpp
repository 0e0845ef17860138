#pragma once

// File formats: RGB trace and ground-truth waveform files (CSV and a framed
// binary variant), the evaluation manifest, and shortest-round-trip number
// formatting shared by every writer.

#include <optional>
#include <string>
#include <vector>

#include "rppgkit/types.hpp"

namespace rppg::io {

// Shortest decimal representation that parses back to the same double; used
// everywhere so outputs are byte-identical across runs.
std::string fmt_double(double v);

struct GroundTruth {
    TimeSeries ppg;
    std::optional<TimeSeries> resp;
};

// A chunk entry in the evaluation manifest.
struct ChunkRecord {
    std::string chunk_id;
    std::string participant_id;
    std::string dataset;
    std::string trace_path;
    std::string gt_path;
    double duration_s = 0.0;
    std::optional<int> skin_type;       // Fitzpatrick 1-6
    std::optional<double> motion_score;
    // optional precomputed ground-truth vitals; take precedence when present
    std::optional<double> gt_hr_bpm, gt_rr_bpm, gt_sdnn_ms, gt_rmssd_ms, gt_lf_hf;
};

// Readers detect the framed binary format by magic and fall back to CSV.
// CSV headers are exact: "t,r,g,b" for traces, "t,ppg[,resp]" for GT.
RgbTrace read_trace(const std::string& path);
GroundTruth read_gt(const std::string& path);

void write_trace_csv(const std::string& path, const RgbTrace& trace);
void write_trace_binary(const std::string& path, const RgbTrace& trace);
void write_gt_csv(const std::string& path, const TimeSeries& ppg,
                  const std::optional<TimeSeries>& resp);
void write_gt_binary(const std::string& path, const TimeSeries& ppg,
                     const std::optional<TimeSeries>& resp);

// Manifest: JSON array of chunk records; relative paths are resolved against
// the manifest's directory on read.
std::vector<ChunkRecord> read_manifest(const std::string& path);
void write_manifest(const std::string& path, const std::vector<ChunkRecord>& records);

}  // namespace rppg::io
