// Micro-benchmark: serial reference kernels vs. the parallel ones, plus a
// whole-chunk pipeline timing. Verifies bit-identity of the outputs while
// timing them.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "rppgkit/config.hpp"
#include "rppgkit/methods.hpp"
#include "rppgkit/pipeline.hpp"
#include "rppgkit/synth.hpp"
#include "rppgkit/types.hpp"

using namespace rppg;

namespace {

double time_best_ms(int reps, const std::function<void()>& fn) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        const auto start = std::chrono::steady_clock::now();
        fn();
        const auto stop = std::chrono::steady_clock::now();
        best = std::min(best, std::chrono::duration<double, std::milli>(stop - start).count());
    }
    return best;
}

bool identical(const TimeSeries& a, const TimeSeries& b) {
    if (a.size() != b.size()) return false;
    return std::memcmp(a.values.data(), b.values.data(), a.size() * sizeof(double)) == 0;
}

void set_threads(int n) {
#ifdef _OPENMP
    omp_set_num_threads(n);
#else
    (void)n;
#endif
}

}  // namespace

int main(int argc, char** argv) {
    double duration_s = 120.0;
    int reps = 5;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--duration" && i + 1 < argc) {
            duration_s = std::stod(argv[++i]);
        } else if (arg == "--reps" && i + 1 < argc) {
            reps = std::stoi(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: bench_kernels [--duration S] [--reps N]\n");
            return 2;
        }
    }

    synth::SynthSpec spec;
    spec.duration_s = duration_s;
    spec.noise_sigma = 0.3;
    spec.seed = 7;
    const synth::SynthPpg rendered = synth::synth_ppg(synth::synth_ibis(spec), 30.0);
    const RgbTrace trace = synth::embed_in_rgb(rendered.ppg, spec);
    std::printf("trace: %zu samples @ %.0f Hz (%.1f s)\n", trace.size(), trace.fs,
                trace.duration());

    const double chrom_ref_ms =
        time_best_ms(reps, [&] { (void)methods::extract_chrom_reference(trace); });
    const double pos_ref_ms =
        time_best_ms(reps, [&] { (void)methods::extract_pos_reference(trace); });
    std::printf("%-18s %8s %10s %9s %6s\n", "kernel", "threads", "best ms", "speedup", "match");

    int max_threads = 1;
#ifdef _OPENMP
    max_threads = omp_get_max_threads();
#endif
    std::vector<int> thread_counts = {1, 2, 4};
    if (max_threads > 4) thread_counts.push_back(max_threads);

    const TimeSeries chrom_ref = methods::extract_chrom_reference(trace);
    const TimeSeries pos_ref = methods::extract_pos_reference(trace);
    std::printf("%-18s %8s %10.3f %9s %6s\n", "chrom_reference", "-", chrom_ref_ms, "1.00x", "-");
    for (int t : thread_counts) {
        set_threads(t);
        const TimeSeries out = methods::extract_chrom(trace);
        const double ms = time_best_ms(reps, [&] { (void)methods::extract_chrom(trace); });
        std::printf("%-18s %8d %10.3f %8.2fx %6s\n", "chrom_parallel", t, ms, chrom_ref_ms / ms,
                    identical(out, chrom_ref) ? "yes" : "NO");
    }
    std::printf("%-18s %8s %10.3f %9s %6s\n", "pos_reference", "-", pos_ref_ms, "1.00x", "-");
    for (int t : thread_counts) {
        set_threads(t);
        const TimeSeries out = methods::extract_pos(trace);
        const double ms = time_best_ms(reps, [&] { (void)methods::extract_pos(trace); });
        std::printf("%-18s %8d %10.3f %8.2fx %6s\n", "pos_parallel", t, ms, pos_ref_ms / ms,
                    identical(out, pos_ref) ? "yes" : "NO");
    }

    set_threads(1);
    const Config cfg;
    const double chunk_ms = time_best_ms(reps, [&] {
        const TimeSeries ppg = methods::extract_pos(trace);
        (void)pipeline::estimate_vitals(ppg, std::nullopt, cfg);
    });
    std::printf("%-18s %8d %10.3f %9s %6s\n", "chunk_pipeline", 1, chunk_ms, "-", "-");
    return 0;
}
