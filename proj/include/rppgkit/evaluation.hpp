#pragma once

// Benchmark harness: per-chunk metric rows, two-stage per-individual
// aggregation, dataset/movement-tercile/skin-type breakdowns, and CSV report
// emission.

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rppgkit/config.hpp"
#include "rppgkit/io.hpp"
#include "rppgkit/methods.hpp"
#include "rppgkit/pipeline.hpp"
#include "rppgkit/types.hpp"

namespace rppg::eval {

// metric column order used across rows, reports, and CSVs
const std::vector<std::string>& metric_names();

struct MetricsRow {
    std::string chunk_id;
    std::string participant_id;
    std::string dataset;
    std::optional<double> hr_mae, rr_mae, sdnn_mae, rmssd_mae, lfhf_mae;
    std::optional<double> ppg_r, ppg_snr, resp_r, resp_snr;
    // raw per-chunk values kept for the scatter files
    std::optional<double> gt_hr, est_hr, gt_rr, est_rr, gt_sdnn, est_sdnn;
    std::map<std::string, std::string> reasons;  // metric -> absence reason
    std::optional<double> motion_score;
    std::optional<int> skin_type;
    bool failed = false;  // chunk-level failure; no metrics
    std::string error;

    std::optional<double> metric(const std::string& name) const;
};

struct GroupStats {
    std::string key;
    std::map<std::string, double> values;        // metric -> aggregated value
    std::map<std::string, std::size_t> counts;   // metric -> contributing participants
};

struct Report {
    std::vector<GroupStats> per_individual;  // keyed by participant id
    GroupStats overall;
    std::vector<GroupStats> by_dataset;
    std::vector<GroupStats> by_movement;   // "Low", "Medium", "High"
    std::vector<GroupStats> by_skin_type;  // "1".."6", always six rows
    std::size_t n_rows = 0;
    std::size_t n_failed = 0;
    std::size_t n_participants = 0;
    std::vector<std::string> warnings;
};

// Waveform + vitals comparison shared by evaluate_chunk and tests. gtv acts
// as the reference; est_resp is absent for the handcrafted methods.
MetricsRow compare_estimates(const TimeSeries& est_ppg,
                             const std::optional<TimeSeries>& est_resp,
                             const pipeline::VitalsEstimate& est, const TimeSeries& gt_ppg,
                             const std::optional<TimeSeries>& gt_resp,
                             const pipeline::VitalsEstimate& gtv, const Config& cfg);

// Motion proxy: mean absolute frame-to-frame change of the baseline-
// normalized common-mode channel.
double motion_proxy(const RgbTrace& trace);

// Runs one chunk end to end. IO or pipeline failures produce a failed row
// rather than throwing.
MetricsRow evaluate_chunk(const io::ChunkRecord& record, methods::Method method,
                          const Config& cfg);

// Two-stage aggregation: chunk -> participant mean -> unweighted mean over
// participants; same rule inside every partition.
Report aggregate(const std::vector<MetricsRow>& rows);

// Participants sorted by motion score (ties by id), split at ceil(n/3) and
// ceil(2n/3) into Low/Medium/High.
std::array<std::vector<std::string>, 3> bin_terciles(
    const std::map<std::string, double>& motion_by_participant);

// Writes results_main.csv, results_by_dataset.csv, scatter_{hr,rr,sdnn}.csv,
// robustness_{movement,skin_type}.csv into out_dir.
void emit_report(const Report& report, const std::vector<MetricsRow>& rows,
                 const std::string& out_dir, const std::string& method_name);

// Evaluates all records with a deterministic parallel pool (jobs <= 0 means
// use the default); row order matches the manifest.
std::vector<MetricsRow> evaluate_manifest(const std::vector<io::ChunkRecord>& records,
                                          methods::Method method, const Config& cfg,
                                          int jobs = 0);

}  // namespace rppg::eval
