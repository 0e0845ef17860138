#include "rppgkit/types.hpp"

namespace rppg {

void validate(const TimeSeries& x, const char* what) {
    if (x.values.empty())
        fail(ErrorKind::Parameter, std::string(what) + ": empty series");
    if (!(x.fs > 0.0))
        fail(ErrorKind::Parameter, std::string(what) + ": sampling rate must be > 0");
    for (double v : x.values)
        if (!std::isfinite(v))
            fail(ErrorKind::Parameter, std::string(what) + ": non-finite sample");
}

void validate(const RgbTrace& t, const char* what) {
    if (t.r.size() != t.g.size() || t.r.size() != t.b.size())
        fail(ErrorKind::Parameter, std::string(what) + ": channel lengths differ");
    if (t.r.size() < 2)
        fail(ErrorKind::Parameter, std::string(what) + ": needs at least 2 frames");
    if (!(t.fs > 0.0))
        fail(ErrorKind::Parameter, std::string(what) + ": sampling rate must be > 0");
    for (const auto* ch : {&t.r, &t.g, &t.b})
        for (double v : *ch)
            if (!std::isfinite(v) || v < 0.0)
                fail(ErrorKind::Parameter,
                     std::string(what) + ": samples must be finite and non-negative");
}

}  // namespace rppg
