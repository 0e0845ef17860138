#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rppgkit/io.hpp"

namespace rppg::io {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr char kTraceMagic[4] = {'R', 'P', 'G', 'B'};
constexpr char kGtMagic[4] = {'R', 'P', 'G', 'T'};

[[noreturn]] void fail_at(const std::string& path, std::size_t line, const std::string& msg) {
    fail(ErrorKind::Parse, path + ":" + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& path, std::size_t line, std::string_view field) {
    double v = 0.0;
    const char* first = field.data();
    const char* last = field.data() + field.size();
    auto res = std::from_chars(first, last, v);
    if (res.ec != std::errc{} || res.ptr != last)
        fail_at(path, line, "not a number: '" + std::string(field) + "'");
    return v;
}

std::vector<std::string_view> split_line(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(',', start);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
}

struct Columns {
    std::vector<std::vector<double>> cols;
    std::size_t rows = 0;
};

Columns read_csv(const std::string& path, std::istream& in,
                 const std::vector<std::string>& accepted_headers, std::size_t& header_index) {
    std::string line;
    std::size_t lineno = 0;
    if (!std::getline(in, line)) fail_at(path, 1, "empty file");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    header_index = accepted_headers.size();
    for (std::size_t i = 0; i < accepted_headers.size(); ++i)
        if (line == accepted_headers[i]) header_index = i;
    if (header_index == accepted_headers.size()) {
        std::string expect;
        for (const auto& h : accepted_headers) expect += (expect.empty() ? "'" : " or '") + h + "'";
        fail_at(path, 1, "bad header '" + line + "' (expected " + expect + ")");
    }

    const std::size_t ncols = split_line(accepted_headers[header_index]).size();
    Columns out;
    out.cols.resize(ncols);
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_line(line);
        if (fields.size() != ncols)
            fail_at(path, lineno,
                    "expected " + std::to_string(ncols) + " fields, got " +
                        std::to_string(fields.size()));
        for (std::size_t c = 0; c < ncols; ++c)
            out.cols[c].push_back(parse_double(path, lineno, fields[c]));
        ++out.rows;
    }
    return out;
}

// time column -> (fs, t0); rejects non-uniform sampling
double derive_fs(const std::string& path, const std::vector<double>& t) {
    if (t.size() < 2) fail(ErrorKind::Parse, path + ": needs at least 2 samples");
    const double span = t.back() - t.front();
    if (!(span > 0.0)) fail(ErrorKind::Parse, path + ": time column must be increasing");
    const double fs = static_cast<double>(t.size() - 1) / span;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double expected = t.front() + static_cast<double>(i) / fs;
        if (std::abs(t[i] - expected) > 0.25 / fs)
            fail(ErrorKind::Parse,
                 path + ":" + std::to_string(i + 2) + ": non-uniform sampling at t=" +
                     fmt_double(t[i]));
    }
    return fs;
}

bool has_magic(std::istream& in, const char magic[4]) {
    char buf[4] = {};
    in.read(buf, 4);
    const bool ok = in.gcount() == 4 && std::memcmp(buf, magic, 4) == 0;
    in.clear();
    in.seekg(0);
    return ok;
}

template <typename T>
void write_raw(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_raw(const std::string& path, std::istream& in) {
    T v{};
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) fail(ErrorKind::Parse, path + ": truncated binary file");
    return v;
}

void write_column(std::ostream& out, const std::vector<double>& col) {
    out.write(reinterpret_cast<const char*>(col.data()),
              static_cast<std::streamsize>(col.size() * sizeof(double)));
}

std::vector<double> read_column(const std::string& path, std::istream& in, std::size_t n) {
    std::vector<double> col(n);
    in.read(reinterpret_cast<char*>(col.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!in) fail(ErrorKind::Parse, path + ": truncated binary file");
    return col;
}

std::ofstream open_out(const std::string& path, bool binary) {
    std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
    if (!out) fail(ErrorKind::Io, "cannot write file: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open file: " + path);
    return in;
}

}  // namespace

std::string fmt_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

RgbTrace read_trace(const std::string& path) {
    std::ifstream in = open_in(path);
    RgbTrace trace;
    if (has_magic(in, kTraceMagic)) {
        in.ignore(4);
        const auto version = read_raw<std::uint32_t>(path, in);
        if (version != 1)
            fail(ErrorKind::Parse, path + ": unsupported trace format version " +
                                       std::to_string(version));
        const auto n = read_raw<std::uint64_t>(path, in);
        trace.fs = read_raw<double>(path, in);
        trace.t0 = read_raw<double>(path, in);
        trace.r = read_column(path, in, n);
        trace.g = read_column(path, in, n);
        trace.b = read_column(path, in, n);
    } else {
        std::size_t which = 0;
        const Columns cols = read_csv(path, in, {"t,r,g,b"}, which);
        trace.fs = derive_fs(path, cols.cols[0]);
        trace.t0 = cols.cols[0].front();
        trace.r = cols.cols[1];
        trace.g = cols.cols[2];
        trace.b = cols.cols[3];
    }
    validate(trace, path.c_str());
    return trace;
}

GroundTruth read_gt(const std::string& path) {
    std::ifstream in = open_in(path);
    GroundTruth gt;
    if (has_magic(in, kGtMagic)) {
        in.ignore(4);
        const auto version = read_raw<std::uint32_t>(path, in);
        if (version != 1)
            fail(ErrorKind::Parse,
                 path + ": unsupported gt format version " + std::to_string(version));
        const auto ncols = read_raw<std::uint32_t>(path, in);
        if (ncols != 1 && ncols != 2)
            fail(ErrorKind::Parse, path + ": gt file must have 1 or 2 waveform columns");
        const auto n = read_raw<std::uint64_t>(path, in);
        gt.ppg.fs = read_raw<double>(path, in);
        gt.ppg.t0 = read_raw<double>(path, in);
        gt.ppg.values = read_column(path, in, n);
        if (ncols == 2) {
            TimeSeries resp;
            resp.fs = gt.ppg.fs;
            resp.t0 = gt.ppg.t0;
            resp.values = read_column(path, in, n);
            gt.resp = std::move(resp);
        }
    } else {
        std::size_t which = 0;
        const Columns cols = read_csv(path, in, {"t,ppg", "t,ppg,resp"}, which);
        gt.ppg.fs = derive_fs(path, cols.cols[0]);
        gt.ppg.t0 = cols.cols[0].front();
        gt.ppg.values = cols.cols[1];
        if (which == 1) {
            TimeSeries resp;
            resp.fs = gt.ppg.fs;
            resp.t0 = gt.ppg.t0;
            resp.values = cols.cols[2];
            gt.resp = std::move(resp);
        }
    }
    validate(gt.ppg, path.c_str());
    if (gt.resp) validate(*gt.resp, path.c_str());
    return gt;
}

void write_trace_csv(const std::string& path, const RgbTrace& trace) {
    validate(trace, "write_trace_csv");
    std::ofstream out = open_out(path, false);
    out << "t,r,g,b\n";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        const double t = trace.t0 + static_cast<double>(i) / trace.fs;
        out << fmt_double(t) << ',' << fmt_double(trace.r[i]) << ',' << fmt_double(trace.g[i])
            << ',' << fmt_double(trace.b[i]) << '\n';
    }
    if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

void write_trace_binary(const std::string& path, const RgbTrace& trace) {
    validate(trace, "write_trace_binary");
    std::ofstream out = open_out(path, true);
    out.write(kTraceMagic, 4);
    write_raw<std::uint32_t>(out, 1);
    write_raw<std::uint64_t>(out, trace.size());
    write_raw<double>(out, trace.fs);
    write_raw<double>(out, trace.t0);
    write_column(out, trace.r);
    write_column(out, trace.g);
    write_column(out, trace.b);
    if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

void write_gt_csv(const std::string& path, const TimeSeries& ppg,
                  const std::optional<TimeSeries>& resp) {
    validate(ppg, "write_gt_csv ppg");
    if (resp && resp->values.size() != ppg.values.size())
        fail(ErrorKind::Parameter, "write_gt_csv: ppg/resp length mismatch");
    std::ofstream out = open_out(path, false);
    out << (resp ? "t,ppg,resp\n" : "t,ppg\n");
    for (std::size_t i = 0; i < ppg.values.size(); ++i) {
        const double t = ppg.time_at(i);
        out << fmt_double(t) << ',' << fmt_double(ppg.values[i]);
        if (resp) out << ',' << fmt_double(resp->values[i]);
        out << '\n';
    }
    if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

void write_gt_binary(const std::string& path, const TimeSeries& ppg,
                     const std::optional<TimeSeries>& resp) {
    validate(ppg, "write_gt_binary ppg");
    if (resp && resp->values.size() != ppg.values.size())
        fail(ErrorKind::Parameter, "write_gt_binary: ppg/resp length mismatch");
    std::ofstream out = open_out(path, true);
    out.write(kGtMagic, 4);
    write_raw<std::uint32_t>(out, 1);
    write_raw<std::uint32_t>(out, resp ? 2 : 1);
    write_raw<std::uint64_t>(out, ppg.values.size());
    write_raw<double>(out, ppg.fs);
    write_raw<double>(out, ppg.t0);
    write_column(out, ppg.values);
    if (resp) write_column(out, resp->values);
    if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

std::vector<ChunkRecord> read_manifest(const std::string& path) {
    std::ifstream in = open_in(path);
    std::ostringstream ss;
    ss << in.rdbuf();
    ordered_json root;
    try {
        root = ordered_json::parse(ss.str());
    } catch (const std::exception& e) {
        fail(ErrorKind::Parse, path + ": invalid JSON: " + e.what());
    }
    if (!root.is_array()) fail(ErrorKind::Parse, path + ": manifest must be a JSON array");

    const std::filesystem::path base = std::filesystem::path(path).parent_path();
    const auto resolve = [&base](const std::string& p) {
        std::filesystem::path fp(p);
        return fp.is_absolute() ? fp.string() : (base / fp).string();
    };

    std::vector<ChunkRecord> records;
    std::size_t idx = 0;
    for (const auto& item : root) {
        const std::string ctx = path + "[" + std::to_string(idx++) + "]";
        if (!item.is_object()) fail(ErrorKind::Parse, ctx + ": entry must be an object");
        ChunkRecord rec;
        for (const auto& [key, value] : item.items()) {
            if (key == "chunk_id") rec.chunk_id = value.get<std::string>();
            else if (key == "participant_id") rec.participant_id = value.get<std::string>();
            else if (key == "dataset") rec.dataset = value.get<std::string>();
            else if (key == "trace_path") rec.trace_path = resolve(value.get<std::string>());
            else if (key == "gt_path") rec.gt_path = resolve(value.get<std::string>());
            else if (key == "duration_s") rec.duration_s = value.get<double>();
            else if (key == "skin_type") rec.skin_type = value.get<int>();
            else if (key == "motion_score") rec.motion_score = value.get<double>();
            else if (key == "gt_hr_bpm") rec.gt_hr_bpm = value.get<double>();
            else if (key == "gt_rr_bpm") rec.gt_rr_bpm = value.get<double>();
            else if (key == "gt_sdnn_ms") rec.gt_sdnn_ms = value.get<double>();
            else if (key == "gt_rmssd_ms") rec.gt_rmssd_ms = value.get<double>();
            else if (key == "gt_lf_hf") rec.gt_lf_hf = value.get<double>();
            else fail(ErrorKind::Parse, ctx + ": unknown manifest key '" + key + "'");
        }
        if (rec.chunk_id.empty() || rec.participant_id.empty() || rec.trace_path.empty() ||
            rec.gt_path.empty())
            fail(ErrorKind::Parse,
                 ctx + ": chunk_id, participant_id, trace_path, gt_path are required");
        if (rec.skin_type && (*rec.skin_type < 1 || *rec.skin_type > 6))
            fail(ErrorKind::Parse, ctx + ": skin_type must be in 1..6");
        records.push_back(std::move(rec));
    }
    return records;
}

void write_manifest(const std::string& path, const std::vector<ChunkRecord>& records) {
    ordered_json root = ordered_json::array();
    for (const ChunkRecord& rec : records) {
        ordered_json item = ordered_json::object();
        item["chunk_id"] = rec.chunk_id;
        item["participant_id"] = rec.participant_id;
        item["dataset"] = rec.dataset;
        item["trace_path"] = rec.trace_path;
        item["gt_path"] = rec.gt_path;
        item["duration_s"] = rec.duration_s;
        if (rec.skin_type) item["skin_type"] = *rec.skin_type;
        if (rec.motion_score) item["motion_score"] = *rec.motion_score;
        if (rec.gt_hr_bpm) item["gt_hr_bpm"] = *rec.gt_hr_bpm;
        if (rec.gt_rr_bpm) item["gt_rr_bpm"] = *rec.gt_rr_bpm;
        if (rec.gt_sdnn_ms) item["gt_sdnn_ms"] = *rec.gt_sdnn_ms;
        if (rec.gt_rmssd_ms) item["gt_rmssd_ms"] = *rec.gt_rmssd_ms;
        if (rec.gt_lf_hf) item["gt_lf_hf"] = *rec.gt_lf_hf;
        root.push_back(std::move(item));
    }
    std::ofstream out = open_out(path, false);
    out << root.dump(2) << "\n";
    if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

}  // namespace rppg::io
