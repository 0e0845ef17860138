#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "helpers.hpp"
#include "rppgkit/io.hpp"

using namespace rppg;
using testutil::TempDir;
using testutil::TestRng;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
    REQUIRE(out.good());
}

RgbTrace random_trace(std::uint64_t seed, std::size_t n, double fs, double t0) {
    TestRng rng(seed);
    RgbTrace trace;
    trace.fs = fs;
    trace.t0 = t0;
    for (std::size_t i = 0; i < n; ++i) {
        trace.r.push_back(rng.uniform(50.0, 250.0));
        trace.g.push_back(rng.uniform(50.0, 250.0));
        trace.b.push_back(rng.uniform(50.0, 250.0));
    }
    return trace;
}

ErrorKind kind_of(const std::function<void()>& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::Parameter;
}

}  // namespace

TEST_CASE("fmt_double round-trips assorted values") {
    const std::vector<double> specials = {0.0,   1.0,    -1.0,  0.1,  1.0 / 3.0, 30.0,
                                          -2.5,  1e300,  1e-300, 5e-324, 833.3333333333334,
                                          0.03333333333333333};
    for (double v : specials) {
        const std::string s = io::fmt_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
    CHECK(io::fmt_double(30.0) == "30");
    CHECK(io::fmt_double(0.0) == "0");
    CHECK(io::fmt_double(0.5) == "0.5");

    TestRng rng(2024);
    for (int i = 0; i < 500; ++i) {
        const double v = (rng.uniform() - 0.5) * std::pow(10.0, rng.uniform(-12.0, 12.0));
        const std::string s = io::fmt_double(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}

TEST_CASE("trace CSV round-trip is byte-stable at a dyadic rate") {
    TempDir dir("io_trace");
    const RgbTrace trace = random_trace(1, 97, 32.0, 0.25);
    const std::string p1 = dir.file("a.csv");
    const std::string p2 = dir.file("b.csv");
    io::write_trace_csv(p1, trace);

    const RgbTrace back = io::read_trace(p1);
    CHECK(back.r == trace.r);
    CHECK(back.g == trace.g);
    CHECK(back.b == trace.b);
    CHECK(back.fs == 32.0);
    CHECK(back.t0 == 0.25);

    io::write_trace_csv(p2, back);
    CHECK(slurp(p1) == slurp(p2));
    CHECK(slurp(p1).substr(0, 8) == "t,r,g,b\n");
}

TEST_CASE("trace CSV round-trip is value-exact at 30 Hz") {
    TempDir dir("io_trace30");
    const RgbTrace trace = random_trace(2, 150, 30.0, 0.0);
    const std::string path = dir.file("t.csv");
    io::write_trace_csv(path, trace);
    const RgbTrace back = io::read_trace(path);
    CHECK(back.r == trace.r);
    CHECK(back.g == trace.g);
    CHECK(back.b == trace.b);
    CHECK(back.fs == doctest::Approx(30.0).epsilon(1e-12));
    CHECK(back.t0 == 0.0);
}

TEST_CASE("trace binary round-trip is byte-exact") {
    TempDir dir("io_bin");
    const RgbTrace trace = random_trace(3, 211, 29.97, 1.5);
    const std::string p1 = dir.file("a.bin");
    const std::string p2 = dir.file("b.bin");
    io::write_trace_binary(p1, trace);

    const RgbTrace back = io::read_trace(p1);  // format detected by magic
    CHECK(back.r == trace.r);
    CHECK(back.g == trace.g);
    CHECK(back.b == trace.b);
    CHECK(back.fs == trace.fs);
    CHECK(back.t0 == trace.t0);

    io::write_trace_binary(p2, back);
    CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("gt files round-trip with and without resp") {
    TempDir dir("io_gt");
    TestRng rng(4);
    TimeSeries ppg = testutil::make_series({}, 32.0, 0.0);
    TimeSeries resp = testutil::make_series({}, 32.0, 0.0);
    for (int i = 0; i < 120; ++i) {
        ppg.values.push_back(rng.uniform(-3.0, 3.0));
        resp.values.push_back(rng.uniform(-1.0, 1.0));
    }

    const std::string with_resp = dir.file("gt2.csv");
    io::write_gt_csv(with_resp, ppg, resp);
    io::GroundTruth gt = io::read_gt(with_resp);
    CHECK(gt.ppg.values == ppg.values);
    REQUIRE(gt.resp.has_value());
    CHECK(gt.resp->values == resp.values);
    CHECK(slurp(with_resp).substr(0, 11) == "t,ppg,resp\n");

    const std::string ppg_only = dir.file("gt1.csv");
    io::write_gt_csv(ppg_only, ppg, std::nullopt);
    gt = io::read_gt(ppg_only);
    CHECK(gt.ppg.values == ppg.values);
    CHECK(!gt.resp.has_value());
    CHECK(slurp(ppg_only).substr(0, 6) == "t,ppg\n");

    const std::string bin = dir.file("gt.bin");
    const std::string bin2 = dir.file("gt2.bin");
    io::write_gt_binary(bin, ppg, resp);
    gt = io::read_gt(bin);
    CHECK(gt.ppg.values == ppg.values);
    REQUIRE(gt.resp.has_value());
    CHECK(gt.resp->values == resp.values);
    io::write_gt_binary(bin2, gt.ppg, gt.resp);
    CHECK(slurp(bin) == slurp(bin2));

    TimeSeries short_resp = resp;
    short_resp.values.pop_back();
    CHECK_THROWS_AS(io::write_gt_csv(dir.file("bad.csv"), ppg, short_resp), Error);
}

TEST_CASE("trace CSV parse errors carry path and line number") {
    TempDir dir("io_err");
    const std::string path = dir.file("bad.csv");

    spit(path, "time,r,g,b\n0,1,2,3\n");
    try {
        io::read_trace(path);
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parse);
        CHECK(std::string(e.what()).find(path + ":1: bad header") != std::string::npos);
    }

    spit(path, "t,r,g,b\n0,1,2,3\n0.5,1,2\n");
    try {
        io::read_trace(path);
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }

    spit(path, "t,r,g,b\n0,1,2,x\n0.5,1,2,3\n");
    try {
        io::read_trace(path);
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("not a number") != std::string::npos);
        CHECK(std::string(e.what()).find(":2:") != std::string::npos);
    }

    spit(path, "t,r,g,b\n0,1,2,3\n");
    CHECK(kind_of([&] { io::read_trace(path); }) == ErrorKind::Parse);  // < 2 samples

    spit(path, "t,r,g,b\n1,1,2,3\n0.5,1,2,3\n");
    try {
        io::read_trace(path);
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("time column must be increasing") != std::string::npos);
    }

    spit(path, "t,r,g,b\n0,1,2,3\n0.05,1,2,3\n0.25,1,2,3\n");
    try {
        io::read_trace(path);
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("non-uniform sampling") != std::string::npos);
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }

    spit(path, "");
    CHECK(kind_of([&] { io::read_trace(path); }) == ErrorKind::Parse);
}

TEST_CASE("missing files raise Io errors that name the path") {
    const std::string path = "/definitely/not/here.csv";
    try {
        io::read_trace(path);
        FAIL("expected io error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Io);
        CHECK(std::string(e.what()).find(path) != std::string::npos);
    }
    CHECK(kind_of([&] { io::read_gt(path); }) == ErrorKind::Io);
    CHECK(kind_of([&] { io::read_manifest(path); }) == ErrorKind::Io);
}

TEST_CASE("manifest round-trips records field by field") {
    TempDir dir("io_manifest");
    std::vector<io::ChunkRecord> records(2);
    records[0].chunk_id = "c0";
    records[0].participant_id = "p0";
    records[0].dataset = "vv0";
    records[0].trace_path = dir.file("c0_trace.csv");
    records[0].gt_path = dir.file("c0_gt.csv");
    records[0].duration_s = 30.0;
    records[0].skin_type = 4;
    records[0].motion_score = 0.125;
    records[0].gt_hr_bpm = 71.5;
    records[1].chunk_id = "c1";
    records[1].participant_id = "p1";
    records[1].dataset = "vv1";
    records[1].trace_path = dir.file("c1_trace.bin");
    records[1].gt_path = dir.file("c1_gt.bin");
    records[1].duration_s = 42.5;
    records[1].gt_sdnn_ms = 48.0;
    records[1].gt_lf_hf = 2.25;

    const std::string path = dir.file("manifest.json");
    io::write_manifest(path, records);
    const std::vector<io::ChunkRecord> back = io::read_manifest(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].chunk_id == "c0");
    CHECK(back[0].participant_id == "p0");
    CHECK(back[0].dataset == "vv0");
    CHECK(back[0].trace_path == records[0].trace_path);
    CHECK(back[0].gt_path == records[0].gt_path);
    CHECK(back[0].duration_s == 30.0);
    CHECK(back[0].skin_type == 4);
    CHECK(back[0].motion_score == 0.125);
    CHECK(back[0].gt_hr_bpm == 71.5);
    CHECK(!back[0].gt_rr_bpm);
    CHECK(!back[0].gt_sdnn_ms);
    CHECK(back[1].skin_type == std::nullopt);
    CHECK(back[1].motion_score == std::nullopt);
    CHECK(back[1].gt_sdnn_ms == 48.0);
    CHECK(back[1].gt_lf_hf == 2.25);
}

TEST_CASE("manifest resolves relative paths against its directory") {
    TempDir dir("io_rel");
    spit(dir.file("manifest.json"), R"([
      {"chunk_id": "c0", "participant_id": "p0", "dataset": "d",
       "trace_path": "sub/a.csv", "gt_path": "/abs/b.csv", "duration_s": 20.0}
    ])");
    const auto records = io::read_manifest(dir.file("manifest.json"));
    REQUIRE(records.size() == 1);
    CHECK(records[0].trace_path == (dir.path() / "sub/a.csv").string());
    CHECK(records[0].gt_path == "/abs/b.csv");
}

TEST_CASE("manifest rejects malformed input") {
    TempDir dir("io_badmanifest");
    const std::string path = dir.file("m.json");

    spit(path, "{not json");
    CHECK(kind_of([&] { io::read_manifest(path); }) == ErrorKind::Parse);

    spit(path, R"({"chunk_id": "c"})");
    try {
        io::read_manifest(path);
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("must be a JSON array") != std::string::npos);
    }

    spit(path, R"([{"chunk_id": "c", "participant_id": "p", "dataset": "d",
                    "trace_path": "a", "gt_path": "b", "duration_s": 10, "color": 3}])");
    try {
        io::read_manifest(path);
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("unknown manifest key 'color'") != std::string::npos);
    }

    spit(path, R"([{"chunk_id": "c", "participant_id": "p", "dataset": "d",
                    "trace_path": "a", "duration_s": 10}])");
    try {
        io::read_manifest(path);
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("required") != std::string::npos);
        CHECK(std::string(e.what()).find("[0]") != std::string::npos);
    }

    spit(path, R"([{"chunk_id": "c", "participant_id": "p", "dataset": "d",
                    "trace_path": "a", "gt_path": "b", "duration_s": 10, "skin_type": 7}])");
    try {
        io::read_manifest(path);
        FAIL("expected parse error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("skin_type must be in 1..6") != std::string::npos);
    }

    spit(path, "[]");
    CHECK(io::read_manifest(path).empty());
}
