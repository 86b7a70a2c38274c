// Benchmark comparing the OpenMP kernels against their serial reference
// implementations: noise sampling, blocked reductions, and the two-pass
// envelope sweep against the quadratic brute force.

#include <chrono>
#include <cstdio>

#include "rbdsde/envelope.hpp"
#include "rbdsde/noise.hpp"
#include "rbdsde/parallel.hpp"
#include "rbdsde/philox.hpp"

namespace {

using Clock = std::chrono::steady_clock;

template <typename F>
double time_ms(F&& fn, int repeats = 3) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const auto t0 = Clock::now();
        fn();
        const auto t1 = Clock::now();
        best = std::min(
            best, std::chrono::duration<double, std::milli>(t1 - t0).count());
    }
    return best;
}

void report(const char* name, double serial_ms, double parallel_ms) {
    std::printf("%-28s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx\n",
                name, serial_ms, parallel_ms,
                parallel_ms > 0 ? serial_ms / parallel_ms : 0.0);
}

} // namespace

int main() {
    using namespace rbdsde;
    std::printf("threads available: %d\n", par::max_threads());

    { // Counter-based sampling: per-element draws, serial loop vs omp loop.
        const std::size_t n = 1 << 22;
        std::vector<double> out(n);
        const double serial = time_ms([&] {
            par::for_each_index_serial(n, [&](std::size_t i) {
                out[i] = normal_draw(7, i, 0, 0);
            });
        });
        const double parallel = time_ms([&] {
            par::for_each_index(n, [&](std::size_t i) {
                out[i] = normal_draw(7, i, 0, 0);
            });
        });
        report("counter sampling (4M draws)", serial, parallel);
    }

    { // Deterministic blocked reduction.
        const std::size_t n = 1 << 24;
        std::vector<double> data(n);
        par::for_each_index(n, [&](std::size_t i) {
            data[i] = normal_draw(11, i, 0, 0);
        });
        volatile double sink = 0.0;
        const double serial = time_ms([&] {
            sink = par::blocked_sum_serial(n, [&](std::size_t i) {
                return data[i] * data[i];
            });
        });
        const double parallel = time_ms([&] {
            sink = par::blocked_sum(n, [&](std::size_t i) {
                return data[i] * data[i];
            });
        });
        (void)sink;
        report("blocked sum (16M terms)", serial, parallel);
    }

    { // Envelope: two-pass sweep vs quadratic brute force.
        const std::size_t G = 8193;
        auto tab = GridFunction1D::tabulate(-8.0, 8.0, G, [](double y) {
            return y > 0.0 ? 1.0 : 0.0;
        });
        volatile double sink = 0.0;
        const double brute = time_ms([&] {
            sink = envelope_bruteforce(tab, 4.0, EnvelopeDirection::inf)
                       .values[G / 2];
        });
        const double sweep = time_ms([&] {
            sink = inf_envelope(tab, 4.0).values[G / 2];
        });
        (void)sink;
        std::printf("%-28s brute  %9.2f ms   two-pass %9.3f ms\n",
                    "envelope (G=8193)", brute, sweep);
    }
    return 0;
}
