#ifndef RPPGKIT_TYPES_HPP
#define RPPGKIT_TYPES_HPP

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace rppg {

enum class ErrorKind {
    Parameter,
    InsufficientData,
    InsufficientBeats,
    NoSignal,
    UndefinedCorrelation,
    Quality,
    Uncleanable,
    Io,
    Parse,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
    throw Error(kind, msg);
}

/// Uniformly sampled scalar series (PPG, RESP, rolling rate, ...).
struct TimeSeries {
    std::vector<double> values;
    double fs = 0.0;  // sampling rate, Hz
    double t0 = 0.0;  // time of first sample, seconds

    std::size_t size() const { return values.size(); }
    double duration() const {
        return values.empty() ? 0.0 : static_cast<double>(values.size() - 1) / fs;
    }
    double time_at(std::size_t i) const { return t0 + static_cast<double>(i) / fs; }
    double end_time() const { return t0 + duration(); }
};

/// Per-frame spatially averaged RGB intensities, uniform rate.
struct RgbTrace {
    std::vector<double> r, g, b;
    double fs = 0.0;
    double t0 = 0.0;

    std::size_t size() const { return r.size(); }
    double duration() const {
        return r.empty() ? 0.0 : static_cast<double>(r.size() - 1) / fs;
    }
};

void validate(const TimeSeries& x, const char* what = "series");
void validate(const RgbTrace& t, const char* what = "trace");

}  // namespace rppg

#endif
