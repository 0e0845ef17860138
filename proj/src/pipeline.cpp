#include <algorithm>

#include "rppgkit/pipeline.hpp"

#include "rppgkit/dsp.hpp"
#include "rppgkit/vitals.hpp"

namespace rppg::pipeline {

TimeSeries preprocess_ppg(const TimeSeries& raw, const Config& cfg, bool* flat) {
    TimeSeries out = dsp::detrend(raw, cfg.preprocess.detrend_window_s);
    out = dsp::bandpass(out, cfg.vitals.hr_band_lo_hz, cfg.vitals.hr_band_hi_hz);
    return dsp::znormalize(out, flat);
}

TimeSeries preprocess_resp(const TimeSeries& raw, const Config& cfg, bool* flat) {
    TimeSeries out = dsp::bandpass(raw, cfg.vitals.rr_band_lo_hz, cfg.vitals.rr_band_hi_hz);
    return dsp::znormalize(out, flat);
}

VitalsEstimate estimate_vitals(const TimeSeries& ppg, const std::optional<TimeSeries>& resp,
                               const Config& cfg, bool trust_peaks) {
    validate(ppg, "estimate_vitals ppg");
    VitalsEstimate est;
    const double duration = ppg.duration();

    try {
        if (duration < 10.0)
            fail(ErrorKind::InsufficientData, "estimate_hr: needs at least 10 s of signal");
        est.hr_bpm = vitals::spectral_rate(ppg, cfg.vitals.hr_band_lo_hz,
                                           cfg.vitals.hr_band_hi_hz,
                                           cfg.vitals.welch_segment_s)
                         .bpm;
    } catch (const Error& e) {
        est.errors["hr"] = e.what();
    }

    if (resp) {
        try {
            if (resp->duration() < 20.0)
                fail(ErrorKind::InsufficientData, "estimate_rr: needs at least 20 s of signal");
            est.rr_bpm = vitals::spectral_rate(*resp, cfg.vitals.rr_band_lo_hz,
                                               cfg.vitals.rr_band_hi_hz,
                                               cfg.vitals.welch_segment_s)
                             .bpm;
        } catch (const Error& e) {
            est.errors["rr"] = e.what();
        }
    }

    const auto gate_all = [&est](const std::string& reason) {
        est.hrv.gate_reasons["sdnn"] = reason;
        est.hrv.gate_reasons["rmssd"] = reason;
        est.hrv.gate_reasons["lf_hf"] = reason;
    };

    try {
        const TimeSeries rolling =
            vitals::rolling_hr(ppg, cfg.vitals.rolling_window_s, cfg.vitals.rolling_step_s);
        hrv::PeakTrain detected = hrv::detect_peaks(ppg, rolling, cfg.peaks);
        if (trust_peaks)
            std::fill(detected.confidences.begin(), detected.confidences.end(), 1.0);
        est.peaks = hrv::filter_peaks(detected, cfg.peaks.min_confidence);
        est.ibis = hrv::clean_ibis(hrv::compute_ibis(est.peaks), cfg.hrv);
    } catch (const Error& e) {
        gate_all(e.what());
        return est;
    }

    if (est.ibis.size() > 0) {
        const double mean_ibi = dsp::mean(est.ibis.ibis_ms);
        if (mean_ibi > 0.0) est.hr_from_ibi_bpm = 60000.0 / mean_ibi;
    }

    const int beats = static_cast<int>(est.ibis.valid_beats());
    const double interp_frac = est.ibis.interpolated_fraction();
    const auto gated = [&](hrv::GateMetric metric) {
        return hrv::hrv_gate(duration, beats, interp_frac, metric, cfg.hrv);
    };

    if (auto reason = gated(hrv::GateMetric::Sdnn)) {
        est.hrv.gate_reasons["sdnn"] = *reason;
    } else {
        try {
            est.hrv.sdnn_ms = hrv::sdnn(est.ibis, cfg.hrv.sdnn_population);
        } catch (const Error& e) {
            est.hrv.gate_reasons["sdnn"] = e.what();
        }
    }
    if (auto reason = gated(hrv::GateMetric::Rmssd)) {
        est.hrv.gate_reasons["rmssd"] = *reason;
    } else {
        try {
            est.hrv.rmssd_ms = hrv::rmssd(est.ibis);
        } catch (const Error& e) {
            est.hrv.gate_reasons["rmssd"] = e.what();
        }
    }
    if (auto reason = gated(hrv::GateMetric::LfHf)) {
        est.hrv.gate_reasons["lf_hf"] = *reason;
    } else {
        try {
            est.hrv.lf_hf = hrv::lf_hf(est.ibis, cfg.hrv);
        } catch (const Error& e) {
            est.hrv.gate_reasons["lf_hf"] = e.what();
        }
    }
    return est;
}

}  // namespace rppg::pipeline
