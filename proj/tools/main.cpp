// Command-line front end: estimate vitals from a trace, run manifest
// benchmarks, generate synthetic datasets, and emit waveform comparisons.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rppgkit/config.hpp"
#include "rppgkit/dsp.hpp"
#include "rppgkit/evaluation.hpp"
#include "rppgkit/io.hpp"
#include "rppgkit/methods.hpp"
#include "rppgkit/pipeline.hpp"
#include "rppgkit/synth.hpp"
#include "rppgkit/types.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace rppg;

namespace {

// exit codes: 0 success, 1 partial/empty results, 2 usage or IO errors
constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitUsage = 2;

int exit_code_for(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::Io:
        case ErrorKind::Parse:
        case ErrorKind::Parameter:
            return kExitUsage;
        default:
            return kExitPartial;
    }
}

Config make_config(const std::string& config_path, const std::vector<std::string>& sets) {
    Config cfg = config_path.empty() ? Config{} : load_config(config_path);
    for (const std::string& assignment : sets) apply_override(cfg, assignment);
    return cfg;
}

methods::ChainParams chain_params(const Config& cfg) {
    return {cfg.preprocess.detrend_window_s, cfg.vitals.hr_band_lo_hz, cfg.vitals.hr_band_hi_hz};
}

TimeSeries run_method(methods::Method method, const RgbTrace& trace, const Config& cfg,
                      methods::MethodStats* stats) {
    const methods::ChainParams chain = chain_params(cfg);
    switch (method) {
        case methods::Method::G:
            return methods::extract_g(trace, stats, chain);
        case methods::Method::CHROM:
            return methods::extract_chrom(trace, cfg.method.window_s, stats, chain);
        case methods::Method::POS:
            return methods::extract_pos(trace, cfg.method.window_s, stats, chain);
    }
    fail(ErrorKind::Parameter, "invalid method enum");
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) fail(ErrorKind::Io, "cannot write file: " + path);
    return out;
}

void finish_out(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

ordered_json opt_json(const std::optional<double>& v) {
    return v ? ordered_json(*v) : ordered_json(nullptr);
}

std::string csv_cell(std::string s) {
    for (char& c : s) {
        if (c == ',') c = ';';
        if (c == '\n' || c == '\r') c = ' ';
    }
    return s;
}

std::string opt_cell(const std::optional<double>& v) {
    return v ? io::fmt_double(*v) : std::string();
}

// ---------------------------------------------------------------------------
// estimate
// ---------------------------------------------------------------------------

struct EstimateOpts {
    std::string trace_file;
    std::string method = "pos";
    std::string config_path;
    std::vector<std::string> sets;
    std::string out_dir = ".";
};

int cmd_estimate(const EstimateOpts& opts) {
    const Config cfg = make_config(opts.config_path, opts.sets);
    const methods::Method method = methods::method_from_string(opts.method);
    const RgbTrace trace = io::read_trace(opts.trace_file);

    methods::MethodStats stats;
    const TimeSeries ppg = run_method(method, trace, cfg, &stats);
    const pipeline::VitalsEstimate est = pipeline::estimate_vitals(ppg, std::nullopt, cfg);

    fs::create_directories(opts.out_dir);

    ordered_json vitals;
    vitals["method"] = opts.method;
    vitals["hr_bpm"] = opt_json(est.hr_bpm);
    vitals["rr_bpm"] = opt_json(est.rr_bpm);
    vitals["sdnn_ms"] = opt_json(est.hrv.sdnn_ms);
    vitals["rmssd_ms"] = opt_json(est.hrv.rmssd_ms);
    vitals["lf_hf"] = opt_json(est.hrv.lf_hf);
    vitals["hr_from_ibi_bpm"] = opt_json(est.hr_from_ibi_bpm);

    ordered_json reasons = ordered_json::object();
    if (!est.hr_bpm) reasons["hr"] = est.errors.count("hr") ? est.errors.at("hr") : "unavailable";
    reasons["rr"] = "method produces no RESP";
    for (const char* metric : {"sdnn", "rmssd", "lf_hf"}) {
        const auto it = est.hrv.gate_reasons.find(metric);
        if (it != est.hrv.gate_reasons.end()) reasons[metric] = it->second;
    }
    vitals["gate_reasons"] = reasons;

    ordered_json diag;
    diag["peaks"] = est.peaks.times_s.size();
    diag["ibis"] = est.ibis.size();
    diag["interpolated_fraction"] = est.ibis.interpolated_fraction();
    diag["low_quality"] = est.ibis.low_quality;
    diag["windows"] = stats.windows;
    diag["flagged_windows"] = stats.flagged_windows;
    diag["zero_output"] = stats.zero_output;
    vitals["diagnostics"] = diag;

    const std::string vitals_path = (fs::path(opts.out_dir) / "vitals.json").string();
    {
        std::ofstream out = open_out(vitals_path);
        out << vitals.dump(2) << "\n";
        finish_out(out, vitals_path);
    }
    const std::string wave_path = (fs::path(opts.out_dir) / "waveform.csv").string();
    io::write_gt_csv(wave_path, ppg, std::nullopt);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// evaluate
// ---------------------------------------------------------------------------

struct EvaluateOpts {
    std::string manifest;
    std::string method = "pos";
    std::string config_path;
    std::vector<std::string> sets;
    std::string out_dir = ".";
    int jobs = 0;
};

void write_rows_csv(const std::string& path, const std::vector<eval::MetricsRow>& rows) {
    std::ofstream out = open_out(path);
    out << "chunk_id,participant_id,dataset,motion_score,skin_type,failed,"
           "hr_mae,rr_mae,sdnn_mae,rmssd_mae,lfhf_mae,ppg_r,ppg_snr,resp_r,resp_snr,"
           "gt_hr,est_hr,gt_rr,est_rr,gt_sdnn,est_sdnn,reasons,error\n";
    for (const eval::MetricsRow& r : rows) {
        std::string reasons;
        for (const auto& [metric, reason] : r.reasons) {
            if (!reasons.empty()) reasons += "; ";
            reasons += metric + "=" + reason;
        }
        out << csv_cell(r.chunk_id) << ',' << csv_cell(r.participant_id) << ','
            << csv_cell(r.dataset) << ',' << opt_cell(r.motion_score) << ','
            << (r.skin_type ? std::to_string(*r.skin_type) : std::string()) << ','
            << (r.failed ? "1" : "0") << ',' << opt_cell(r.hr_mae) << ',' << opt_cell(r.rr_mae)
            << ',' << opt_cell(r.sdnn_mae) << ',' << opt_cell(r.rmssd_mae) << ','
            << opt_cell(r.lfhf_mae) << ',' << opt_cell(r.ppg_r) << ',' << opt_cell(r.ppg_snr)
            << ',' << opt_cell(r.resp_r) << ',' << opt_cell(r.resp_snr) << ','
            << opt_cell(r.gt_hr) << ',' << opt_cell(r.est_hr) << ',' << opt_cell(r.gt_rr) << ','
            << opt_cell(r.est_rr) << ',' << opt_cell(r.gt_sdnn) << ',' << opt_cell(r.est_sdnn)
            << ',' << csv_cell(reasons) << ',' << csv_cell(r.error) << '\n';
    }
    finish_out(out, path);
}

int cmd_evaluate(const EvaluateOpts& opts) {
    const Config cfg = make_config(opts.config_path, opts.sets);
    const methods::Method method = methods::method_from_string(opts.method);
    const std::vector<io::ChunkRecord> records = io::read_manifest(opts.manifest);
    if (records.empty()) {
        std::cerr << "error: manifest has no chunks: " << opts.manifest << "\n";
        return kExitPartial;
    }

    const std::vector<eval::MetricsRow> rows =
        eval::evaluate_manifest(records, method, cfg, opts.jobs);

    fs::create_directories(opts.out_dir);
    write_rows_csv((fs::path(opts.out_dir) / "rows.csv").string(), rows);

    std::size_t n_failed = 0;
    for (const eval::MetricsRow& r : rows) {
        if (!r.failed) continue;
        ++n_failed;
        std::cerr << "chunk " << r.chunk_id << " failed: " << r.error << "\n";
    }

    ordered_json summary;
    summary["manifest"] = opts.manifest;
    summary["method"] = opts.method;
    summary["chunks"] = rows.size();
    summary["succeeded"] = rows.size() - n_failed;
    summary["failed"] = n_failed;

    const std::string summary_path = (fs::path(opts.out_dir) / "summary.json").string();
    if (n_failed == rows.size()) {
        summary["participants"] = 0;
        std::ofstream out = open_out(summary_path);
        out << summary.dump(2) << "\n";
        finish_out(out, summary_path);
        std::cerr << "error: every chunk failed\n";
        return kExitPartial;
    }

    const eval::Report report = eval::aggregate(rows);
    eval::emit_report(report, rows, opts.out_dir, opts.method);

    summary["participants"] = report.n_participants;
    ordered_json overall = ordered_json::object();
    ordered_json counts = ordered_json::object();
    for (const std::string& metric : eval::metric_names()) {
        const auto it = report.overall.values.find(metric);
        overall[metric] = it == report.overall.values.end() ? ordered_json(nullptr)
                                                            : ordered_json(it->second);
        const auto cit = report.overall.counts.find(metric);
        counts[metric] = cit == report.overall.counts.end() ? 0 : cit->second;
    }
    summary["overall"] = overall;
    summary["participants_per_metric"] = counts;

    std::map<std::string, std::size_t> reason_counts;
    for (const eval::MetricsRow& r : rows)
        for (const auto& [metric, reason] : r.reasons) ++reason_counts[metric + ": " + reason];
    ordered_json gates = ordered_json::object();
    for (const auto& [reason, count] : reason_counts) gates[reason] = count;
    summary["gate_counts"] = gates;

    ordered_json warnings = ordered_json::array();
    for (const std::string& w : report.warnings) warnings.push_back(w);
    summary["warnings"] = warnings;

    std::ofstream out = open_out(summary_path);
    out << summary.dump(2) << "\n";
    finish_out(out, summary_path);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthOpts {
    std::string spec_path;
    std::string out_dir;
    std::string dataset = "synth";
    int chunks = 20;
    int participants = 10;
    std::uint64_t seed = 1;
    double duration_min_s = 20.0, duration_max_s = 60.0;
    double hr_min_bpm = 55.0, hr_max_bpm = 110.0;
    double sdnn_min_ms = 20.0, sdnn_max_ms = 80.0;
    double noise_sigma = 0.3;
    double motion_max = 0.0;
    double resp_fraction = 0.4;
    double fs = 30.0;
    bool binary = false;
};

void load_synth_spec(SynthOpts& opts, const CLI::App& cmd) {
    std::ifstream in(opts.spec_path);
    if (!in) fail(ErrorKind::Io, "cannot open file: " + opts.spec_path);
    ordered_json root;
    try {
        root = ordered_json::parse(in);
    } catch (const std::exception& e) {
        fail(ErrorKind::Parse, opts.spec_path + ": " + e.what());
    }
    if (!root.is_object()) fail(ErrorKind::Parse, opts.spec_path + ": expected a JSON object");

    // CLI flags win over spec-file values
    const auto flag_given = [&cmd](const std::string& flag) { return cmd.count(flag) > 0; };
    const auto set_num = [&](const char* key, const char* flag, auto& slot) {
        if (root.contains(key) && !flag_given(flag)) {
            if (!root[key].is_number())
                fail(ErrorKind::Parse, opts.spec_path + ": key '" + key + "' must be a number");
            slot = root[key].get<std::decay_t<decltype(slot)>>();
        }
    };
    set_num("chunks", "--chunks", opts.chunks);
    set_num("participants", "--participants", opts.participants);
    set_num("seed", "--seed", opts.seed);
    set_num("duration_min_s", "--duration-min", opts.duration_min_s);
    set_num("duration_max_s", "--duration-max", opts.duration_max_s);
    set_num("hr_min_bpm", "--hr-min", opts.hr_min_bpm);
    set_num("hr_max_bpm", "--hr-max", opts.hr_max_bpm);
    set_num("sdnn_min_ms", "--sdnn-min", opts.sdnn_min_ms);
    set_num("sdnn_max_ms", "--sdnn-max", opts.sdnn_max_ms);
    set_num("noise_sigma", "--noise", opts.noise_sigma);
    set_num("motion_max", "--motion-max", opts.motion_max);
    set_num("resp_fraction", "--resp-fraction", opts.resp_fraction);
    set_num("fs", "--fs", opts.fs);
    if (root.contains("dataset") && !flag_given("--dataset")) {
        if (!root["dataset"].is_string())
            fail(ErrorKind::Parse, opts.spec_path + ": key 'dataset' must be a string");
        opts.dataset = root["dataset"].get<std::string>();
    }
    if (root.contains("binary") && !flag_given("--binary")) {
        if (!root["binary"].is_boolean())
            fail(ErrorKind::Parse, opts.spec_path + ": key 'binary' must be a boolean");
        opts.binary = root["binary"].get<bool>();
    }
    static const char* known[] = {"chunks", "participants", "seed", "duration_min_s",
                                  "duration_max_s", "hr_min_bpm", "hr_max_bpm", "sdnn_min_ms",
                                  "sdnn_max_ms", "noise_sigma", "motion_max", "resp_fraction",
                                  "fs", "dataset", "binary"};
    for (const auto& [key, value] : root.items()) {
        (void)value;
        if (std::find_if(std::begin(known), std::end(known),
                         [&key](const char* k) { return key == k; }) == std::end(known))
            fail(ErrorKind::Parse, opts.spec_path + ": unknown key '" + key + "'");
    }
}

struct ChunkPlan {
    std::string chunk_id;
    std::string participant_id;
    int skin_type = 1;
    bool with_resp = false;
    double duration_s = 0.0;
    synth::SynthSpec spec;
};

std::string zero_pad(int value, int width) {
    std::string s = std::to_string(value);
    while (static_cast<int>(s.size()) < width) s.insert(s.begin(), '0');
    return s;
}

int cmd_synth(const SynthOpts& opts) {
    if (opts.chunks < 1) fail(ErrorKind::Parameter, "synth: chunks must be >= 1");
    if (opts.participants < 1) fail(ErrorKind::Parameter, "synth: participants must be >= 1");
    if (!(opts.duration_min_s > 0.0) || opts.duration_max_s < opts.duration_min_s)
        fail(ErrorKind::Parameter, "synth: invalid duration range");
    if (!(opts.hr_min_bpm > 0.0) || opts.hr_max_bpm < opts.hr_min_bpm)
        fail(ErrorKind::Parameter, "synth: invalid hr range");
    if (!(opts.sdnn_min_ms >= 0.0) || opts.sdnn_max_ms < opts.sdnn_min_ms)
        fail(ErrorKind::Parameter, "synth: invalid sdnn range");
    if (opts.noise_sigma < 0.0) fail(ErrorKind::Parameter, "synth: noise_sigma must be >= 0");
    if (opts.motion_max < 0.0) fail(ErrorKind::Parameter, "synth: motion_max must be >= 0");
    if (opts.resp_fraction < 0.0 || opts.resp_fraction > 1.0)
        fail(ErrorKind::Parameter, "synth: resp_fraction must be in [0, 1]");
    if (!(opts.fs > 0.0)) fail(ErrorKind::Parameter, "synth: fs must be > 0");

    // plan (and validate) every chunk before writing anything
    synth::Rng plan_rng(synth::sub_seed(opts.seed, 0x504c414eULL));
    std::vector<ChunkPlan> plans(static_cast<std::size_t>(opts.chunks));
    for (int i = 0; i < opts.chunks; ++i) {
        ChunkPlan& plan = plans[static_cast<std::size_t>(i)];
        const int pidx = i % opts.participants;
        plan.chunk_id = opts.dataset + "_c" + zero_pad(i, 3);
        plan.participant_id = "p" + zero_pad(pidx, 3);
        plan.skin_type = pidx % 6 + 1;

        synth::SynthSpec& spec = plan.spec;
        spec.mean_hr_bpm =
            opts.hr_min_bpm + plan_rng.uniform() * (opts.hr_max_bpm - opts.hr_min_bpm);
        spec.sdnn_target_ms =
            opts.sdnn_min_ms + plan_rng.uniform() * (opts.sdnn_max_ms - opts.sdnn_min_ms);
        spec.lf_amp_ms = 0.6 * spec.sdnn_target_ms;
        spec.hf_amp_ms = 0.4 * spec.sdnn_target_ms;
        plan.duration_s = opts.duration_min_s +
                          plan_rng.uniform() * (opts.duration_max_s - opts.duration_min_s);
        spec.duration_s = plan.duration_s;
        spec.rr_bpm = 12.0 + plan_rng.uniform() * 6.0;
        spec.noise_sigma = opts.noise_sigma;
        spec.motion_amp = opts.motion_max * plan_rng.uniform();
        plan.with_resp = plan_rng.uniform() < opts.resp_fraction;
        spec.seed = synth::sub_seed(opts.seed, 0x4348554eULL + static_cast<std::uint64_t>(i));
        synth::validate(spec);
    }

    fs::create_directories(opts.out_dir);
    std::vector<io::ChunkRecord> records;
    records.reserve(plans.size());
    for (const ChunkPlan& plan : plans) {
        const hrv::IbiSeries ibis = synth::synth_ibis(plan.spec);
        const synth::SynthPpg rendered = synth::synth_ppg(ibis, opts.fs);
        const RgbTrace full_trace = synth::embed_in_rgb(rendered.ppg, plan.spec);

        // trim everything to the requested duration so manifest durations
        // stay within the configured range
        const std::size_t n_keep = std::min(
            rendered.ppg.size(),
            static_cast<std::size_t>(std::floor(plan.duration_s * opts.fs + 1e-9)) + 1);
        TimeSeries gt_ppg = rendered.ppg;
        gt_ppg.values.resize(n_keep);
        RgbTrace trace = full_trace;
        trace.r.resize(n_keep);
        trace.g.resize(n_keep);
        trace.b.resize(n_keep);
        const double duration = gt_ppg.duration();

        std::optional<TimeSeries> gt_resp;
        if (plan.with_resp) {
            gt_resp = synth::synth_resp(plan.spec.rr_bpm, duration, opts.fs);
            gt_resp->values.resize(std::min(gt_resp->size(), n_keep));
        }

        const std::string stem = plan.chunk_id;
        const char* trace_ext = opts.binary ? ".bin" : ".csv";
        const std::string trace_name = stem + "_trace" + trace_ext;
        const std::string gt_name = stem + "_gt" + trace_ext;
        const std::string trace_path = (fs::path(opts.out_dir) / trace_name).string();
        const std::string gt_path = (fs::path(opts.out_dir) / gt_name).string();
        if (opts.binary) {
            io::write_trace_binary(trace_path, trace);
            io::write_gt_binary(gt_path, gt_ppg, gt_resp);
        } else {
            io::write_trace_csv(trace_path, trace);
            io::write_gt_csv(gt_path, gt_ppg, gt_resp);
        }

        const std::string peaks_path = (fs::path(opts.out_dir) / (stem + "_peaks.csv")).string();
        {
            std::ofstream out = open_out(peaks_path);
            out << "t\n";
            for (double t : rendered.peaks.times_s)
                if (t <= duration + 1e-9) out << io::fmt_double(t) << "\n";
            finish_out(out, peaks_path);
        }
        const std::string ibis_path = (fs::path(opts.out_dir) / (stem + "_ibis.csv")).string();
        {
            std::ofstream out = open_out(ibis_path);
            out << "onset_s,ibi_ms\n";
            for (std::size_t k = 0; k < ibis.size(); ++k) {
                if (ibis.onset_times_s[k] + ibis.ibis_ms[k] / 1000.0 > duration + 1e-9) break;
                out << io::fmt_double(ibis.onset_times_s[k]) << ','
                    << io::fmt_double(ibis.ibis_ms[k]) << "\n";
            }
            finish_out(out, ibis_path);
        }

        io::ChunkRecord rec;
        rec.chunk_id = plan.chunk_id;
        rec.participant_id = plan.participant_id;
        rec.dataset = opts.dataset;
        rec.trace_path = trace_name;  // relative to the manifest
        rec.gt_path = gt_name;
        rec.duration_s = duration;
        rec.skin_type = plan.skin_type;
        records.push_back(std::move(rec));
    }

    io::write_manifest((fs::path(opts.out_dir) / "manifest.json").string(), records);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

struct CompareOpts {
    std::string trace_file;
    std::string gt_file;
    std::vector<std::string> methods;
    std::string config_path;
    std::vector<std::string> sets;
    std::string out = "compare.csv";
};

int cmd_compare(const CompareOpts& opts) {
    const Config cfg = make_config(opts.config_path, opts.sets);
    const RgbTrace trace = io::read_trace(opts.trace_file);
    const io::GroundTruth gt = io::read_gt(opts.gt_file);

    const TimeSeries gt_ppg = pipeline::preprocess_ppg(gt.ppg, cfg);
    std::optional<TimeSeries> gt_resp;
    if (gt.resp) gt_resp = pipeline::preprocess_resp(*gt.resp, cfg);

    std::vector<std::pair<std::string, TimeSeries>> columns;
    columns.push_back({"gt_ppg", gt_ppg});
    if (gt_resp) columns.push_back({"gt_resp", *gt_resp});
    for (const std::string& name : opts.methods) {
        const methods::Method method = methods::method_from_string(name);
        columns.push_back({name + "_ppg", run_method(method, trace, cfg, nullptr)});
    }

    double t_start = columns.front().second.t0;
    double t_end = columns.front().second.end_time();
    for (const auto& [name, series] : columns) {
        t_start = std::max(t_start, series.t0);
        t_end = std::min(t_end, series.end_time());
    }
    if (!(t_end > t_start)) fail(ErrorKind::Parameter, "compare: no overlapping span");
    const double fs = cfg.preprocess.resample_fs;
    const auto n = static_cast<std::size_t>(std::floor((t_end - t_start) * fs + 1e-9)) + 1;

    // sample every column on the common grid, then z-normalize each
    std::vector<std::vector<double>> sampled(columns.size(), std::vector<double>(n));
    for (std::size_t c = 0; c < columns.size(); ++c) {
        TimeSeries col;
        col.fs = fs;
        col.t0 = t_start;
        col.values.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            col.values[i] = dsp::value_at(columns[c].second, t_start + static_cast<double>(i) / fs);
        sampled[c] = dsp::znormalize(col).values;
    }

    std::ofstream out = open_out(opts.out);
    out << "time";
    for (const auto& [name, series] : columns) out << ',' << name;
    out << '\n';
    for (std::size_t i = 0; i < n; ++i) {
        out << io::fmt_double(t_start + static_cast<double>(i) / fs);
        for (std::size_t c = 0; c < columns.size(); ++c) out << ',' << io::fmt_double(sampled[c][i]);
        out << '\n';
    }
    finish_out(out, opts.out);
    return kExitOk;
}

// ---------------------------------------------------------------------------
// config dump
// ---------------------------------------------------------------------------

struct ConfigDumpOpts {
    std::string config_path;
    std::vector<std::string> sets;
    std::string out;
};

int cmd_config_dump(const ConfigDumpOpts& opts) {
    const Config cfg = make_config(opts.config_path, opts.sets);
    const std::string text = dump_config(cfg);
    if (opts.out.empty()) {
        std::cout << text;
    } else {
        std::ofstream out = open_out(opts.out);
        out << text;
        finish_out(out, opts.out);
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Pulse and vitals estimation from RGB face traces"};
    app.require_subcommand(1);

    EstimateOpts est_opts;
    CLI::App* est = app.add_subcommand("estimate", "Estimate vitals from one trace file");
    est->add_option("trace", est_opts.trace_file, "Trace file (CSV t,r,g,b or binary)")
        ->required();
    est->add_option("--method", est_opts.method, "Extraction method: g|chrom|pos")
        ->default_val("pos");
    est->add_option("--config", est_opts.config_path, "Config JSON file");
    est->add_option("--set", est_opts.sets, "Override, e.g. --set hrv.sdnn_min_beats=10");
    est->add_option("--out", est_opts.out_dir, "Output directory")->default_val(".");

    EvaluateOpts eval_opts;
    CLI::App* evaluate = app.add_subcommand("evaluate", "Run the benchmark over a manifest");
    evaluate->add_option("manifest", eval_opts.manifest, "Manifest JSON file")->required();
    evaluate->add_option("--method", eval_opts.method, "Extraction method: g|chrom|pos")
        ->default_val("pos");
    evaluate->add_option("--config", eval_opts.config_path, "Config JSON file");
    evaluate->add_option("--set", eval_opts.sets, "Override, e.g. --set method.window_s=2");
    evaluate->add_option("--out-dir", eval_opts.out_dir, "Report directory")->default_val(".");
    evaluate->add_option("--jobs", eval_opts.jobs, "Parallel chunk workers (0 = default)");

    SynthOpts synth_opts;
    CLI::App* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset + manifest");
    synth_cmd->add_option("--spec", synth_opts.spec_path, "Spec JSON file (flags override)");
    synth_cmd->add_option("--out-dir", synth_opts.out_dir, "Dataset directory")->required();
    synth_cmd->add_option("--dataset", synth_opts.dataset, "Dataset name")->default_val("synth");
    synth_cmd->add_option("--chunks", synth_opts.chunks, "Number of chunks")->default_val(20);
    synth_cmd->add_option("--participants", synth_opts.participants, "Number of participants")
        ->default_val(10);
    synth_cmd->add_option("--seed", synth_opts.seed, "Master seed")->default_val(1);
    synth_cmd->add_option("--duration-min", synth_opts.duration_min_s, "Min duration (s)")
        ->default_val(20.0);
    synth_cmd->add_option("--duration-max", synth_opts.duration_max_s, "Max duration (s)")
        ->default_val(60.0);
    synth_cmd->add_option("--hr-min", synth_opts.hr_min_bpm, "Min HR (bpm)")->default_val(55.0);
    synth_cmd->add_option("--hr-max", synth_opts.hr_max_bpm, "Max HR (bpm)")->default_val(110.0);
    synth_cmd->add_option("--sdnn-min", synth_opts.sdnn_min_ms, "Min SDNN (ms)")
        ->default_val(20.0);
    synth_cmd->add_option("--sdnn-max", synth_opts.sdnn_max_ms, "Max SDNN (ms)")
        ->default_val(80.0);
    synth_cmd->add_option("--noise", synth_opts.noise_sigma, "RGB noise sigma")
        ->default_val(0.3);
    synth_cmd->add_option("--motion-max", synth_opts.motion_max, "Max motion amplitude")
        ->default_val(0.0);
    synth_cmd->add_option("--resp-fraction", synth_opts.resp_fraction,
                          "Fraction of chunks with RESP ground truth")
        ->default_val(0.4);
    synth_cmd->add_option("--fs", synth_opts.fs, "Sampling rate (Hz)")->default_val(30.0);
    synth_cmd->add_flag("--binary", synth_opts.binary, "Write framed binary trace/GT files");

    CompareOpts cmp_opts;
    CLI::App* compare = app.add_subcommand("compare", "Aligned estimated-vs-GT waveform CSV");
    compare->add_option("trace", cmp_opts.trace_file, "Trace file")->required();
    compare->add_option("gt", cmp_opts.gt_file, "Ground-truth waveform file")->required();
    compare->add_option("--methods", cmp_opts.methods, "Comma-separated methods")
        ->delimiter(',');
    compare->add_option("--config", cmp_opts.config_path, "Config JSON file");
    compare->add_option("--set", cmp_opts.sets, "Override, e.g. --set vitals.hr_band_hi_hz=3");
    compare->add_option("--out", cmp_opts.out, "Output CSV path")->default_val("compare.csv");

    ConfigDumpOpts dump_opts;
    CLI::App* config_cmd = app.add_subcommand("config", "Config utilities");
    config_cmd->require_subcommand(1);
    CLI::App* dump = config_cmd->add_subcommand("dump", "Print the effective config");
    dump->add_option("--config", dump_opts.config_path, "Config JSON file");
    dump->add_option("--set", dump_opts.sets, "Override, e.g. --set peaks.min_confidence=0.6");
    dump->add_option("--out", dump_opts.out, "Write to file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (est->parsed()) return cmd_estimate(est_opts);
        if (evaluate->parsed()) return cmd_evaluate(eval_opts);
        if (synth_cmd->parsed()) {
            if (!synth_opts.spec_path.empty()) load_synth_spec(synth_opts, *synth_cmd);
            return cmd_synth(synth_opts);
        }
        if (compare->parsed()) return cmd_compare(cmp_opts);
        if (config_cmd->parsed() && dump->parsed()) return cmd_config_dump(dump_opts);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitPartial;
    }
    return kExitUsage;
}
