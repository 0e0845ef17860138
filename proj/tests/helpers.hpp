#pragma once

// Shared test utilities: series builders, direct-DFT oracles, and a small
// deterministic RNG independent of the library's one.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <filesystem>
#include <numbers>
#include <string>
#include <vector>

#include <unistd.h>

#include "rppgkit/types.hpp"

namespace testutil {

inline rppg::TimeSeries make_series(std::vector<double> v, double fs, double t0 = 0.0) {
    rppg::TimeSeries x;
    x.values = std::move(v);
    x.fs = fs;
    x.t0 = t0;
    return x;
}

inline rppg::TimeSeries make_sine(double freq_hz, double duration_s, double fs, double amp = 1.0,
                                  double phase = 0.0, double offset = 0.0) {
    const auto n = static_cast<std::size_t>(std::llround(duration_s * fs)) + 1;
    rppg::TimeSeries x;
    x.fs = fs;
    x.values.resize(n);
    for (std::size_t i = 0; i < n; ++i)
        x.values[i] = offset + amp * std::sin(2.0 * std::numbers::pi * freq_hz *
                                                  static_cast<double>(i) / fs +
                                              phase);
    return x;
}

// direct-correlation DFT coefficient at an arbitrary frequency
inline std::complex<double> dft_at(const std::vector<double>& x, double fs, double f) {
    std::complex<double> acc{0.0, 0.0};
    const double w = -2.0 * std::numbers::pi * f / fs;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double a = w * static_cast<double>(i);
        acc += x[i] * std::complex<double>(std::cos(a), std::sin(a));
    }
    return acc;
}

// amplitude of the sinusoidal component at f measured over [start, start+k/f)
// (an integer number of cycles, so a pure tone measures exactly)
inline double tone_amplitude(const rppg::TimeSeries& x, double f, double start_s,
                             double end_max_s) {
    const double span = end_max_s - start_s;
    const auto cycles = static_cast<std::size_t>(std::floor(span * f));
    const auto i0 = static_cast<std::size_t>(std::ceil(start_s * x.fs));
    auto count = static_cast<std::size_t>(std::floor(static_cast<double>(cycles) / f * x.fs));
    if (i0 + count > x.size()) count = x.size() - i0;
    std::vector<double> seg(x.values.begin() + static_cast<std::ptrdiff_t>(i0),
                            x.values.begin() + static_cast<std::ptrdiff_t>(i0 + count));
    return 2.0 * std::abs(dft_at(seg, x.fs, f)) / static_cast<double>(seg.size());
}

// root-mean-square of the interior [start, end] of a series
inline double interior_rms(const rppg::TimeSeries& x, double start_s, double end_s) {
    const auto i0 = static_cast<std::size_t>(std::ceil(start_s * x.fs));
    const auto i1 = static_cast<std::size_t>(std::floor(end_s * x.fs));
    double acc = 0.0;
    for (std::size_t i = i0; i <= i1 && i < x.size(); ++i) acc += x.values[i] * x.values[i];
    return std::sqrt(acc / static_cast<double>(i1 - i0 + 1));
}

// xorshift-based generator, deliberately unrelated to the library RNG
class TestRng {
  public:
    explicit TestRng(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next() {
        std::uint64_t x = state_;
        x ^= x << 13;
        x ^= x >> 7;
        x ^= x << 17;
        state_ = x;
        return x;
    }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }
    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }
    double gauss() {
        // sum-of-uniforms normal approximation is plenty for test data
        double s = 0.0;
        for (int i = 0; i < 12; ++i) s += uniform();
        return s - 6.0;
    }

  private:
    std::uint64_t state_;
};

inline double rel_diff(double a, double b) {
    const double scale = std::max({std::abs(a), std::abs(b), 1e-300});
    return std::abs(a - b) / scale;
}

// Self-cleaning scratch directory for tests that touch the filesystem.
class TempDir {
  public:
    explicit TempDir(const std::string& tag) {
        static std::uint64_t counter = 0;
        path_ = std::filesystem::temp_directory_path() /
                ("rppgkit_test_" + tag + "_" + std::to_string(++counter) + "_" +
                 std::to_string(static_cast<std::uint64_t>(::getpid())));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

  private:
    std::filesystem::path path_;
};

}  // namespace testutil
