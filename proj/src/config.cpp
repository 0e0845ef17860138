#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "rppgkit/config.hpp"

namespace rppg {

namespace {

using ordered_json = nlohmann::ordered_json;

// One entry per leaf; drives parsing, dumping, and override resolution from
// a single table so the three stay consistent.
struct Field {
    const char* section;
    const char* key;
    enum Kind { Double, Int, Bool } kind;
    std::function<void(Config&, const ordered_json&)> set;
    std::function<ordered_json(const Config&)> get;
};

template <typename T, typename M>
Field make_field(const char* section, const char* key, Field::Kind kind, M T::*member,
                 T Config::*sub) {
    Field f;
    f.section = section;
    f.key = key;
    f.kind = kind;
    f.set = [member, sub, key](Config& c, const ordered_json& v) {
        if constexpr (std::is_same_v<M, bool>) {
            if (!v.is_boolean()) fail(ErrorKind::Parse, std::string("config: ") + key + " must be a boolean");
            (c.*sub).*member = v.get<bool>();
        } else if constexpr (std::is_same_v<M, int>) {
            if (!v.is_number_integer())
                fail(ErrorKind::Parse, std::string("config: ") + key + " must be an integer");
            (c.*sub).*member = v.get<int>();
        } else {
            if (!v.is_number()) fail(ErrorKind::Parse, std::string("config: ") + key + " must be a number");
            (c.*sub).*member = v.get<double>();
        }
    };
    f.get = [member, sub](const Config& c) { return ordered_json((c.*sub).*member); };
    return f;
}

const std::vector<Field>& fields() {
    static const std::vector<Field> table = [] {
        std::vector<Field> t;
        auto d = [&](const char* s, const char* k, auto member, auto sub) {
            t.push_back(make_field(s, k, Field::Double, member, sub));
        };
        auto i = [&](const char* s, const char* k, auto member, auto sub) {
            t.push_back(make_field(s, k, Field::Int, member, sub));
        };
        auto b = [&](const char* s, const char* k, auto member, auto sub) {
            t.push_back(make_field(s, k, Field::Bool, member, sub));
        };

        d("method", "window_s", &MethodConfig::window_s, &Config::method);

        d("preprocess", "detrend_window_s", &PreprocessConfig::detrend_window_s, &Config::preprocess);
        d("preprocess", "resample_fs", &PreprocessConfig::resample_fs, &Config::preprocess);

        d("vitals", "hr_band_lo_hz", &VitalsConfig::hr_band_lo_hz, &Config::vitals);
        d("vitals", "hr_band_hi_hz", &VitalsConfig::hr_band_hi_hz, &Config::vitals);
        d("vitals", "rr_band_lo_hz", &VitalsConfig::rr_band_lo_hz, &Config::vitals);
        d("vitals", "rr_band_hi_hz", &VitalsConfig::rr_band_hi_hz, &Config::vitals);
        d("vitals", "welch_segment_s", &VitalsConfig::welch_segment_s, &Config::vitals);
        d("vitals", "snr_template_hz", &VitalsConfig::snr_template_hz, &Config::vitals);
        d("vitals", "rolling_window_s", &VitalsConfig::rolling_window_s, &Config::vitals);
        d("vitals", "rolling_step_s", &VitalsConfig::rolling_step_s, &Config::vitals);

        d("peaks", "prominence_ratio", &hrv::PeakConfig::prominence_ratio, &Config::peaks);
        d("peaks", "prominence_saturation", &hrv::PeakConfig::prominence_saturation, &Config::peaks);
        d("peaks", "robust_window_s", &hrv::PeakConfig::robust_window_s, &Config::peaks);
        d("peaks", "width_lo", &hrv::PeakConfig::width_lo, &Config::peaks);
        d("peaks", "width_flat_lo", &hrv::PeakConfig::width_flat_lo, &Config::peaks);
        d("peaks", "width_flat_hi", &hrv::PeakConfig::width_flat_hi, &Config::peaks);
        d("peaks", "width_hi", &hrv::PeakConfig::width_hi, &Config::peaks);
        d("peaks", "dist_lo", &hrv::PeakConfig::dist_lo, &Config::peaks);
        d("peaks", "dist_flat_lo", &hrv::PeakConfig::dist_flat_lo, &Config::peaks);
        d("peaks", "dist_flat_hi", &hrv::PeakConfig::dist_flat_hi, &Config::peaks);
        d("peaks", "dist_hi", &hrv::PeakConfig::dist_hi, &Config::peaks);
        d("peaks", "edge_exclude_s", &hrv::PeakConfig::edge_exclude_s, &Config::peaks);
        d("peaks", "min_confidence", &hrv::PeakConfig::min_confidence, &Config::peaks);

        d("hrv", "ibi_lo_ms", &hrv::HrvConfig::ibi_lo_ms, &Config::hrv);
        d("hrv", "ibi_hi_ms", &hrv::HrvConfig::ibi_hi_ms, &Config::hrv);
        d("hrv", "rel_outlier_frac", &hrv::HrvConfig::rel_outlier_frac, &Config::hrv);
        i("hrv", "median_neighbors", &hrv::HrvConfig::median_neighbors, &Config::hrv);
        d("hrv", "low_quality_fraction", &hrv::HrvConfig::low_quality_fraction, &Config::hrv);
        d("hrv", "sdnn_min_duration_s", &hrv::HrvConfig::sdnn_min_duration_s, &Config::hrv);
        i("hrv", "sdnn_min_beats", &hrv::HrvConfig::sdnn_min_beats, &Config::hrv);
        d("hrv", "lfhf_min_duration_s", &hrv::HrvConfig::lfhf_min_duration_s, &Config::hrv);
        i("hrv", "lfhf_min_beats", &hrv::HrvConfig::lfhf_min_beats, &Config::hrv);
        d("hrv", "max_interp_fraction", &hrv::HrvConfig::max_interp_fraction, &Config::hrv);
        b("hrv", "sdnn_population", &hrv::HrvConfig::sdnn_population, &Config::hrv);
        d("hrv", "tachogram_fs", &hrv::HrvConfig::tachogram_fs, &Config::hrv);
        d("hrv", "welch_segment_s", &hrv::HrvConfig::welch_segment_s, &Config::hrv);
        d("hrv", "lf_lo_hz", &hrv::HrvConfig::lf_lo_hz, &Config::hrv);
        d("hrv", "lf_hi_hz", &hrv::HrvConfig::lf_hi_hz, &Config::hrv);
        d("hrv", "hf_lo_hz", &hrv::HrvConfig::hf_lo_hz, &Config::hrv);
        d("hrv", "hf_hi_hz", &hrv::HrvConfig::hf_hi_hz, &Config::hrv);
        return t;
    }();
    return table;
}

const Field* find_field(const std::string& section, const std::string& key) {
    for (const Field& f : fields())
        if (section == f.section && key == f.key) return &f;
    return nullptr;
}

}  // namespace

Config config_from_json_text(const std::string& text, const std::string& context) {
    ordered_json root;
    try {
        root = ordered_json::parse(text);
    } catch (const std::exception& e) {
        fail(ErrorKind::Parse, context + ": invalid JSON: " + e.what());
    }
    if (!root.is_object()) fail(ErrorKind::Parse, context + ": config root must be an object");

    Config cfg;
    for (const auto& [section, body] : root.items()) {
        if (!body.is_object())
            fail(ErrorKind::Parse, context + ": section '" + section + "' must be an object");
        for (const auto& [key, value] : body.items()) {
            const Field* f = find_field(section, key);
            if (!f)
                fail(ErrorKind::Parse,
                     context + ": unknown config key '" + section + "." + key + "'");
            f->set(cfg, value);
        }
    }
    return cfg;
}

Config load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorKind::Io, "cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return config_from_json_text(ss.str(), path);
}

std::string dump_config(const Config& cfg) {
    ordered_json root = ordered_json::object();
    for (const Field& f : fields()) {
        if (!root.contains(f.section)) root[f.section] = ordered_json::object();
        root[f.section][f.key] = f.get(cfg);
    }
    return root.dump(2) + "\n";
}

void apply_override(Config& cfg, const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        fail(ErrorKind::Parameter, "config override must be section.key=value: " + assignment);
    const std::string path = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);
    const auto dot = path.find('.');
    if (dot == std::string::npos)
        fail(ErrorKind::Parameter, "config override must be section.key=value: " + assignment);

    const Field* f = find_field(path.substr(0, dot), path.substr(dot + 1));
    if (!f) fail(ErrorKind::Parameter, "unknown config key '" + path + "'");

    ordered_json parsed;
    try {
        parsed = ordered_json::parse(value);
    } catch (const std::exception&) {
        fail(ErrorKind::Parameter, "config override value is not a JSON literal: " + value);
    }
    f->set(cfg, parsed);
}

}  // namespace rppg
