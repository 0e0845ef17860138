#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rppgkit/dsp.hpp"
#include "rppgkit/evaluation.hpp"
#include "rppgkit/vitals.hpp"

namespace rppg::eval {

namespace {

// samples both series on a shared grid over their overlapping span
struct AlignedPair {
    TimeSeries a, b;
};

AlignedPair align(const TimeSeries& a, const TimeSeries& b, double fs) {
    const double t_start = std::max(a.t0, b.t0);
    const double t_end = std::min(a.end_time(), b.end_time());
    if (!(t_end > t_start)) fail(ErrorKind::Parameter, "align: no overlapping span");
    const auto n = static_cast<std::size_t>(std::floor((t_end - t_start) * fs + 1e-9)) + 1;
    if (n < 2) fail(ErrorKind::Parameter, "align: overlap shorter than 2 samples");
    AlignedPair out;
    out.a.fs = out.b.fs = fs;
    out.a.t0 = out.b.t0 = t_start;
    out.a.values.resize(n);
    out.b.values.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = t_start + static_cast<double>(i) / fs;
        out.a.values[i] = dsp::value_at(a, t);
        out.b.values[i] = dsp::value_at(b, t);
    }
    return out;
}

std::string reason_or(const std::map<std::string, std::string>& reasons, const std::string& key,
                      const std::string& fallback) {
    const auto it = reasons.find(key);
    return it == reasons.end() ? fallback : it->second;
}

void mae_metric(MetricsRow& row, const std::string& name, std::optional<double>& slot,
                const std::optional<double>& est_v, const std::optional<double>& gt_v,
                const std::string& est_reason, const std::string& gt_reason) {
    if (est_v && gt_v) {
        slot = std::abs(*est_v - *gt_v);
    } else if (!est_v) {
        row.reasons[name] = est_reason;
    } else {
        row.reasons[name] = gt_reason;
    }
}

std::ofstream open_csv(const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Io, "cannot write file: " + path);
    return out;
}

// canonical row order: aggregation results must not depend on input order
std::vector<std::size_t> canonical_order(const std::vector<MetricsRow>& rows) {
    std::vector<std::size_t> idx(rows.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&rows](std::size_t a, std::size_t b) {
        const MetricsRow& ra = rows[a];
        const MetricsRow& rb = rows[b];
        if (ra.participant_id != rb.participant_id) return ra.participant_id < rb.participant_id;
        if (ra.chunk_id != rb.chunk_id) return ra.chunk_id < rb.chunk_id;
        return ra.dataset < rb.dataset;
    });
    return idx;
}

// two-stage mean over an explicit subset of rows (canonical order)
GroupStats two_stage(const std::vector<MetricsRow>& rows, const std::vector<std::size_t>& subset,
                     std::string key) {
    GroupStats g;
    g.key = std::move(key);
    std::vector<std::pair<std::string, std::vector<std::size_t>>> participants;
    for (std::size_t i : subset) {
        const std::string& pid = rows[i].participant_id;
        if (participants.empty() || participants.back().first != pid)
            participants.push_back({pid, {}});
        participants.back().second.push_back(i);
    }
    for (const std::string& metric : metric_names()) {
        double sum = 0.0;
        std::size_t n_participants = 0;
        for (const auto& [pid, chunk_idx] : participants) {
            double psum = 0.0;
            std::size_t pn = 0;
            for (std::size_t i : chunk_idx) {
                if (const auto v = rows[i].metric(metric)) {
                    psum += *v;
                    ++pn;
                }
            }
            if (pn > 0) {
                sum += psum / static_cast<double>(pn);
                ++n_participants;
            }
        }
        if (n_participants > 0) {
            g.values[metric] = sum / static_cast<double>(n_participants);
            g.counts[metric] = n_participants;
        }
    }
    return g;
}

}  // namespace

const std::vector<std::string>& metric_names() {
    static const std::vector<std::string> names = {"hr_mae",  "rr_mae",  "sdnn_mae",
                                                   "rmssd_mae", "lfhf_mae", "ppg_r",
                                                   "ppg_snr", "resp_r",  "resp_snr"};
    return names;
}

std::optional<double> MetricsRow::metric(const std::string& name) const {
    if (name == "hr_mae") return hr_mae;
    if (name == "rr_mae") return rr_mae;
    if (name == "sdnn_mae") return sdnn_mae;
    if (name == "rmssd_mae") return rmssd_mae;
    if (name == "lfhf_mae") return lfhf_mae;
    if (name == "ppg_r") return ppg_r;
    if (name == "ppg_snr") return ppg_snr;
    if (name == "resp_r") return resp_r;
    if (name == "resp_snr") return resp_snr;
    fail(ErrorKind::Parameter, "unknown metric '" + name + "'");
}

double motion_proxy(const RgbTrace& trace) {
    validate(trace, "motion_proxy");
    const std::size_t n = trace.size();
    std::vector<double> common(n);
    for (std::size_t i = 0; i < n; ++i)
        common[i] = (trace.r[i] + trace.g[i] + trace.b[i]) / 3.0;
    const double m = dsp::mean(common);
    if (!(m > 0.0)) return 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) acc += std::abs(common[i + 1] - common[i]) / m;
    return acc / static_cast<double>(n - 1);
}

MetricsRow compare_estimates(const TimeSeries& est_ppg,
                             const std::optional<TimeSeries>& est_resp,
                             const pipeline::VitalsEstimate& est, const TimeSeries& gt_ppg,
                             const std::optional<TimeSeries>& gt_resp,
                             const pipeline::VitalsEstimate& gtv, const Config& cfg) {
    MetricsRow row;
    row.est_hr = est.hr_bpm;
    row.gt_hr = gtv.hr_bpm;
    row.est_rr = est.rr_bpm;
    row.gt_rr = gtv.rr_bpm;
    row.est_sdnn = est.hrv.sdnn_ms;
    row.gt_sdnn = gtv.hrv.sdnn_ms;

    mae_metric(row, "hr_mae", row.hr_mae, est.hr_bpm, gtv.hr_bpm,
               reason_or(est.errors, "hr", "estimation failed"),
               "gt: " + reason_or(gtv.errors, "hr", "no ground truth HR"));
    mae_metric(row, "sdnn_mae", row.sdnn_mae, est.hrv.sdnn_ms, gtv.hrv.sdnn_ms,
               reason_or(est.hrv.gate_reasons, "sdnn", "estimation failed"),
               "gt: " + reason_or(gtv.hrv.gate_reasons, "sdnn", "no ground truth SDNN"));
    mae_metric(row, "rmssd_mae", row.rmssd_mae, est.hrv.rmssd_ms, gtv.hrv.rmssd_ms,
               reason_or(est.hrv.gate_reasons, "rmssd", "estimation failed"),
               "gt: " + reason_or(gtv.hrv.gate_reasons, "rmssd", "no ground truth RMSSD"));
    mae_metric(row, "lfhf_mae", row.lfhf_mae, est.hrv.lf_hf, gtv.hrv.lf_hf,
               reason_or(est.hrv.gate_reasons, "lf_hf", "estimation failed"),
               "gt: " + reason_or(gtv.hrv.gate_reasons, "lf_hf", "no ground truth LF/HF"));

    // respiration: needs ground truth RESP and an estimated RESP waveform
    // (the handcrafted methods emit PPG only)
    if (!gt_resp) {
        row.reasons["rr_mae"] = "no ground truth RESP";
        row.reasons["resp_r"] = "no ground truth RESP";
        row.reasons["resp_snr"] = "no ground truth RESP";
    } else if (!est_resp) {
        row.reasons["rr_mae"] = "method produces no RESP";
        row.reasons["resp_r"] = "method produces no RESP";
        row.reasons["resp_snr"] = "method produces no RESP";
    } else {
        mae_metric(row, "rr_mae", row.rr_mae, est.rr_bpm, gtv.rr_bpm,
                   reason_or(est.errors, "rr", "estimation failed"),
                   "gt: " + reason_or(gtv.errors, "rr", "no ground truth RR"));
        try {
            const AlignedPair pair = align(*est_resp, *gt_resp, cfg.preprocess.resample_fs);
            row.resp_r = dsp::pearson_r(pair.a.values, pair.b.values);
        } catch (const Error& e) {
            row.reasons["resp_r"] = e.what();
        }
        if (gtv.rr_bpm) {
            try {
                const AlignedPair pair = align(*est_resp, *gt_resp, cfg.preprocess.resample_fs);
                row.resp_snr =
                    vitals::snr_db(pair.a, *gtv.rr_bpm, cfg.vitals.rr_band_lo_hz,
                                   cfg.vitals.rr_band_hi_hz, cfg.vitals.snr_template_hz);
            } catch (const Error& e) {
                row.reasons["resp_snr"] = e.what();
            }
        } else {
            row.reasons["resp_snr"] = "gt: " + reason_or(gtv.errors, "rr", "no ground truth RR");
        }
    }

    try {
        const AlignedPair pair = align(est_ppg, gt_ppg, cfg.preprocess.resample_fs);
        row.ppg_r = dsp::pearson_r(pair.a.values, pair.b.values);
    } catch (const Error& e) {
        row.reasons["ppg_r"] = e.what();
    }
    if (gtv.hr_bpm) {
        try {
            const AlignedPair pair = align(est_ppg, gt_ppg, cfg.preprocess.resample_fs);
            row.ppg_snr = vitals::snr_db(pair.a, *gtv.hr_bpm, cfg.vitals.hr_band_lo_hz,
                                         cfg.vitals.hr_band_hi_hz, cfg.vitals.snr_template_hz);
        } catch (const Error& e) {
            row.reasons["ppg_snr"] = e.what();
        }
    } else {
        row.reasons["ppg_snr"] = "gt: " + reason_or(gtv.errors, "hr", "no ground truth HR");
    }
    return row;
}

MetricsRow evaluate_chunk(const io::ChunkRecord& record, methods::Method method,
                          const Config& cfg) {
    MetricsRow row;
    row.chunk_id = record.chunk_id;
    row.participant_id = record.participant_id;
    row.dataset = record.dataset;
    row.skin_type = record.skin_type;
    try {
        const RgbTrace trace = io::read_trace(record.trace_path);
        const io::GroundTruth gt = io::read_gt(record.gt_path);

        row.motion_score =
            record.motion_score ? *record.motion_score : motion_proxy(trace);

        methods::MethodStats stats;
        const methods::ChainParams chain{cfg.preprocess.detrend_window_s,
                                         cfg.vitals.hr_band_lo_hz, cfg.vitals.hr_band_hi_hz};
        TimeSeries est_ppg;
        switch (method) {
            case methods::Method::G:
                est_ppg = methods::extract_g(trace, &stats, chain);
                break;
            case methods::Method::CHROM:
                est_ppg = methods::extract_chrom(trace, cfg.method.window_s, &stats, chain);
                break;
            case methods::Method::POS:
                est_ppg = methods::extract_pos(trace, cfg.method.window_s, &stats, chain);
                break;
        }

        const pipeline::VitalsEstimate est =
            pipeline::estimate_vitals(est_ppg, std::nullopt, cfg, false);

        const TimeSeries gt_ppg = pipeline::preprocess_ppg(gt.ppg, cfg);
        std::optional<TimeSeries> gt_resp;
        if (gt.resp) gt_resp = pipeline::preprocess_resp(*gt.resp, cfg);
        pipeline::VitalsEstimate gtv = pipeline::estimate_vitals(gt_ppg, gt_resp, cfg, true);

        // manifest-supplied ground-truth vitals take precedence
        if (record.gt_hr_bpm) {
            gtv.hr_bpm = record.gt_hr_bpm;
            gtv.errors.erase("hr");
        }
        if (record.gt_rr_bpm) {
            gtv.rr_bpm = record.gt_rr_bpm;
            gtv.errors.erase("rr");
        }
        if (record.gt_sdnn_ms) {
            gtv.hrv.sdnn_ms = record.gt_sdnn_ms;
            gtv.hrv.gate_reasons.erase("sdnn");
        }
        if (record.gt_rmssd_ms) {
            gtv.hrv.rmssd_ms = record.gt_rmssd_ms;
            gtv.hrv.gate_reasons.erase("rmssd");
        }
        if (record.gt_lf_hf) {
            gtv.hrv.lf_hf = record.gt_lf_hf;
            gtv.hrv.gate_reasons.erase("lf_hf");
        }

        MetricsRow computed =
            compare_estimates(est_ppg, std::nullopt, est, gt_ppg, gt_resp, gtv, cfg);
        computed.chunk_id = row.chunk_id;
        computed.participant_id = row.participant_id;
        computed.dataset = row.dataset;
        computed.skin_type = row.skin_type;
        computed.motion_score = row.motion_score;
        return computed;
    } catch (const std::exception& e) {
        row.failed = true;
        row.error = e.what();
        return row;
    }
}

Report aggregate(const std::vector<MetricsRow>& rows) {
    if (rows.empty()) fail(ErrorKind::Parameter, "aggregate: no rows");

    Report report;
    report.n_rows = rows.size();
    std::vector<std::size_t> ok;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].failed) {
            ++report.n_failed;
        } else {
            ok.push_back(i);
        }
    }
    if (ok.empty()) fail(ErrorKind::Parameter, "aggregate: every row failed");

    const std::vector<std::size_t> order = canonical_order(rows);
    std::vector<std::size_t> canon;
    for (std::size_t i : order)
        if (!rows[i].failed) canon.push_back(i);

    // per-individual rows
    std::vector<std::pair<std::string, std::vector<std::size_t>>> participants;
    for (std::size_t i : canon) {
        const std::string& pid = rows[i].participant_id;
        if (participants.empty() || participants.back().first != pid)
            participants.push_back({pid, {}});
        participants.back().second.push_back(i);
    }
    report.n_participants = participants.size();
    for (const auto& [pid, idx] : participants) {
        GroupStats g;
        g.key = pid;
        for (const std::string& metric : metric_names()) {
            double sum = 0.0;
            std::size_t n = 0;
            for (std::size_t i : idx) {
                if (const auto v = rows[i].metric(metric)) {
                    sum += *v;
                    ++n;
                }
            }
            if (n > 0) {
                g.values[metric] = sum / static_cast<double>(n);
                g.counts[metric] = n;
            }
        }
        report.per_individual.push_back(std::move(g));
    }

    // overall is by construction the unweighted mean of per-individual values
    report.overall.key = "overall";
    for (const std::string& metric : metric_names()) {
        double sum = 0.0;
        std::size_t n = 0;
        for (const GroupStats& g : report.per_individual) {
            const auto it = g.values.find(metric);
            if (it != g.values.end()) {
                sum += it->second;
                ++n;
            }
        }
        if (n > 0) {
            report.overall.values[metric] = sum / static_cast<double>(n);
            report.overall.counts[metric] = n;
        }
    }

    // dataset partition
    std::set<std::string> datasets;
    for (std::size_t i : canon) datasets.insert(rows[i].dataset);
    for (const std::string& ds : datasets) {
        std::vector<std::size_t> subset;
        for (std::size_t i : canon)
            if (rows[i].dataset == ds) subset.push_back(i);
        report.by_dataset.push_back(two_stage(rows, subset, ds));
    }

    // movement terciles over per-participant mean motion
    std::map<std::string, double> motion;
    for (const auto& [pid, idx] : participants) {
        double sum = 0.0;
        std::size_t n = 0;
        for (std::size_t i : idx) {
            if (rows[i].motion_score) {
                sum += *rows[i].motion_score;
                ++n;
            }
        }
        if (n > 0) {
            motion[pid] = sum / static_cast<double>(n);
        } else {
            report.warnings.push_back("participant " + pid +
                                      " has no motion score; excluded from movement terciles");
        }
    }
    if (!motion.empty()) {
        const auto bins = bin_terciles(motion);
        const char* names[3] = {"Low", "Medium", "High"};
        for (int b = 0; b < 3; ++b) {
            std::set<std::string> members(bins[static_cast<std::size_t>(b)].begin(),
                                          bins[static_cast<std::size_t>(b)].end());
            std::vector<std::size_t> subset;
            for (std::size_t i : canon)
                if (members.count(rows[i].participant_id)) subset.push_back(i);
            report.by_movement.push_back(two_stage(rows, subset, names[b]));
        }
    }

    // skin-type partition, always six rows
    std::map<std::string, int> skin;
    for (const auto& [pid, idx] : participants) {
        for (std::size_t i : idx) {
            if (!rows[i].skin_type) continue;
            const auto it = skin.find(pid);
            if (it == skin.end()) {
                skin[pid] = *rows[i].skin_type;
            } else if (it->second != *rows[i].skin_type) {
                report.warnings.push_back("participant " + pid +
                                          " has conflicting skin types; using the first");
            }
        }
    }
    for (int type = 1; type <= 6; ++type) {
        std::vector<std::size_t> subset;
        for (std::size_t i : canon) {
            const auto it = skin.find(rows[i].participant_id);
            if (it != skin.end() && it->second == type) subset.push_back(i);
        }
        report.by_skin_type.push_back(two_stage(rows, subset, std::to_string(type)));
    }
    return report;
}

std::array<std::vector<std::string>, 3> bin_terciles(
    const std::map<std::string, double>& motion_by_participant) {
    std::vector<std::pair<double, std::string>> order;
    order.reserve(motion_by_participant.size());
    for (const auto& [pid, score] : motion_by_participant) order.push_back({score, pid});
    std::sort(order.begin(), order.end());

    const std::size_t n = order.size();
    const std::size_t c1 = (n + 2) / 3;            // ceil(n/3)
    const std::size_t c2 = (2 * n + 2) / 3;        // ceil(2n/3)
    std::array<std::vector<std::string>, 3> bins;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t b = i < c1 ? 0 : (i < c2 ? 1 : 2);
        bins[b].push_back(order[i].second);
    }
    return bins;
}

void emit_report(const Report& report, const std::vector<MetricsRow>& rows,
                 const std::string& out_dir, const std::string& method_name) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    const auto path = [&out_dir](const char* name) { return (fs::path(out_dir) / name).string(); };

    {
        std::ofstream out = open_csv(path("results_main.csv"));
        out << "method,hrmae,hrppgcor,hrppgsnr,rrmae,rrrespcor,rrrespsnr,"
               "hrvsdnnmae,hrvrmssdmae,hrvlfhfmae\n";
        const auto cell = [&report](const char* metric) {
            const auto it = report.overall.values.find(metric);
            return it == report.overall.values.end() ? std::string() : io::fmt_double(it->second);
        };
        out << method_name << ',' << cell("hr_mae") << ',' << cell("ppg_r") << ','
            << cell("ppg_snr") << ',' << cell("rr_mae") << ',' << cell("resp_r") << ','
            << cell("resp_snr") << ',' << cell("sdnn_mae") << ',' << cell("rmssd_mae") << ','
            << cell("lfhf_mae") << '\n';
        if (!out) fail(ErrorKind::Io, "write failed: results_main.csv");
    }
    {
        std::ofstream out = open_csv(path("results_by_dataset.csv"));
        out << "source_dataset,hr_mae,rr_mae,sdnn_mae\n";
        for (const GroupStats& g : report.by_dataset) {
            const auto cell = [&g](const char* metric) {
                const auto it = g.values.find(metric);
                return it == g.values.end() ? std::string() : io::fmt_double(it->second);
            };
            out << g.key << ',' << cell("hr_mae") << ',' << cell("rr_mae") << ','
                << cell("sdnn_mae") << '\n';
        }
        if (!out) fail(ErrorKind::Io, "write failed: results_by_dataset.csv");
    }

    const std::vector<std::size_t> order = canonical_order(rows);
    const auto scatter = [&](const char* name, auto truth, auto est) {
        std::ofstream out = open_csv(path(name));
        out << "x_true,y_est\n";
        for (std::size_t i : order) {
            if (rows[i].failed) continue;
            const auto t = truth(rows[i]);
            const auto e = est(rows[i]);
            if (t && e) out << io::fmt_double(*t) << ',' << io::fmt_double(*e) << '\n';
        }
        if (!out) fail(ErrorKind::Io, std::string("write failed: ") + name);
    };
    scatter("scatter_hr.csv", [](const MetricsRow& r) { return r.gt_hr; },
            [](const MetricsRow& r) { return r.est_hr; });
    scatter("scatter_rr.csv", [](const MetricsRow& r) { return r.gt_rr; },
            [](const MetricsRow& r) { return r.est_rr; });
    scatter("scatter_sdnn.csv", [](const MetricsRow& r) { return r.gt_sdnn; },
            [](const MetricsRow& r) { return r.est_sdnn; });

    const auto robustness = [&](const char* name, const std::vector<GroupStats>& groups) {
        std::ofstream out = open_csv(path(name));
        out << "bin,method,mae\n";
        for (const GroupStats& g : groups) {
            const auto it = g.values.find("sdnn_mae");
            out << g.key << ',' << method_name << ','
                << (it == g.values.end() ? std::string() : io::fmt_double(it->second)) << '\n';
        }
        if (!out) fail(ErrorKind::Io, std::string("write failed: ") + name);
    };
    robustness("robustness_movement.csv", report.by_movement);
    robustness("robustness_skin_type.csv", report.by_skin_type);
}

std::vector<MetricsRow> evaluate_manifest(const std::vector<io::ChunkRecord>& records,
                                          methods::Method method, const Config& cfg, int jobs) {
    std::vector<MetricsRow> rows(records.size());
    const auto n = static_cast<std::ptrdiff_t>(records.size());
#ifdef _OPENMP
    const int threads = jobs > 0 ? jobs : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::ptrdiff_t i = 0; i < n; ++i)
        rows[static_cast<std::size_t>(i)] =
            evaluate_chunk(records[static_cast<std::size_t>(i)], method, cfg);
#else
    (void)jobs;
    for (std::ptrdiff_t i = 0; i < n; ++i)
        rows[static_cast<std::size_t>(i)] =
            evaluate_chunk(records[static_cast<std::size_t>(i)], method, cfg);
#endif
    return rows;
}

}  // namespace rppg::eval
