#include <fstream>
#include <string>

#include <doctest.h>

#include "helpers.hpp"
#include "rppgkit/config.hpp"

using namespace rppg;
using testutil::TempDir;

namespace {

ErrorKind kind_of_text(const std::string& text) {
    try {
        config_from_json_text(text, "test");
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an Error");
    return ErrorKind::Parameter;
}

}  // namespace

TEST_CASE("dump -> load -> dump is a byte-level fixed point") {
    const Config defaults;
    const std::string d1 = dump_config(defaults);
    const Config back = config_from_json_text(d1, "d1");
    const std::string d2 = dump_config(back);
    CHECK(d1 == d2);

    Config tweaked;
    apply_override(tweaked, "vitals.hr_band_hi_hz=3.5");
    apply_override(tweaked, "hrv.sdnn_min_beats=12");
    const std::string t1 = dump_config(tweaked);
    const std::string t2 = dump_config(config_from_json_text(t1, "t1"));
    CHECK(t1 == t2);
    CHECK(t1 != d1);
}

TEST_CASE("load_config reads files and honors partial configs") {
    TempDir dir("config");
    const std::string path = dir.file("cfg.json");
    {
        std::ofstream out(path);
        out << R"({"vitals": {"hr_band_lo_hz": 0.7}})";
    }
    const Config cfg = load_config(path);
    CHECK(cfg.vitals.hr_band_lo_hz == 0.7);
    // untouched sections keep defaults
    const Config defaults;
    CHECK(cfg.vitals.hr_band_hi_hz == defaults.vitals.hr_band_hi_hz);
    CHECK(cfg.method.window_s == defaults.method.window_s);
    CHECK(cfg.hrv.sdnn_min_beats == defaults.hrv.sdnn_min_beats);

    CHECK_THROWS_AS(load_config(dir.file("missing.json")), Error);
}

TEST_CASE("strict parsing rejects unknown keys and wrong types") {
    CHECK(kind_of_text(R"({"nosuch": {"a": 1}})") == ErrorKind::Parse);
    CHECK(kind_of_text(R"({"vitals": {"nosuch_key": 1}})") == ErrorKind::Parse);
    CHECK(kind_of_text(R"({"vitals": 3})") == ErrorKind::Parse);
    CHECK(kind_of_text(R"([1,2,3])") == ErrorKind::Parse);
    CHECK(kind_of_text(R"({"vitals": {"hr_band_lo_hz": "fast"}})") == ErrorKind::Parse);
    CHECK(kind_of_text(R"({"hrv": {"sdnn_min_beats": 2.5}})") == ErrorKind::Parse);
    CHECK(kind_of_text(R"({"hrv": {"sdnn_population": 1}})") == ErrorKind::Parse);
    CHECK(kind_of_text("not json at all") == ErrorKind::Parse);

    try {
        config_from_json_text(R"({"vitals": {"nosuch_key": 1}})", "ctx");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("ctx") != std::string::npos);
        CHECK(msg.find("vitals.nosuch_key") != std::string::npos);
    }
}

TEST_CASE("apply_override handles each leaf type") {
    Config cfg;
    apply_override(cfg, "preprocess.resample_fs=25");
    CHECK(cfg.preprocess.resample_fs == 25.0);
    apply_override(cfg, "hrv.median_neighbors=7");
    CHECK(cfg.hrv.median_neighbors == 7);
    apply_override(cfg, "hrv.sdnn_population=true");
    CHECK(cfg.hrv.sdnn_population);
    apply_override(cfg, "peaks.min_confidence=0.25");
    CHECK(cfg.peaks.min_confidence == 0.25);
}

TEST_CASE("apply_override rejects bad paths and literals") {
    Config cfg;
    CHECK_THROWS_AS(apply_override(cfg, "no_equals"), Error);
    CHECK_THROWS_AS(apply_override(cfg, "nodot=1"), Error);
    CHECK_THROWS_AS(apply_override(cfg, "vitals.nosuch=1"), Error);
    CHECK_THROWS_AS(apply_override(cfg, "vitals.hr_band_lo_hz=fast"), Error);
    CHECK_THROWS_AS(apply_override(cfg, "hrv.sdnn_min_beats=2.5"), Error);
    try {
        apply_override(cfg, "vitals.nosuch=1");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parameter);
        CHECK(std::string(e.what()).find("vitals.nosuch") != std::string::npos);
    }
    // failed overrides must not corrupt earlier state
    const Config defaults;
    CHECK(cfg.vitals.hr_band_lo_hz == defaults.vitals.hr_band_lo_hz);
}
