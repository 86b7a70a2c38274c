#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdint>
#include <vector>

#include "rbdsde/errors.hpp"
#include "rbdsde/noise.hpp"
#include "rbdsde/parallel.hpp"
#include "rbdsde/philox.hpp"
#include "rbdsde/time_grid.hpp"

using namespace rbdsde;

TEST_CASE("grid nodes are exact arithmetic") {
    const TimeGrid g = make_grid(1.0, 4);
    CHECK(g.dt == 0.25);
    const double expected[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    for (std::size_t i = 0; i <= 4; ++i) CHECK(g.node(i) == expected[i]);

    const TimeGrid degenerate = make_grid(1.0, 1);
    CHECK(degenerate.node(0) == 0.0);
    CHECK(degenerate.node(1) == 1.0);

    const TimeGrid g2 = make_grid(2.0, 8);
    CHECK(g2.node(5) == 1.25);
}

TEST_CASE("grid rejects bad parameters") {
    CHECK_THROWS_AS(make_grid(0.0, 4), InvalidArgument);
    CHECK_THROWS_AS(make_grid(-1.0, 4), InvalidArgument);
    CHECK_THROWS_AS(make_grid(1.0, 0), InvalidArgument);
}

TEST_CASE("gaussian sampling is bitwise reproducible") {
    const TimeGrid g = make_grid(1.0, 8);
    const NoiseBundle a = sample_noise(g, 500, 2, 2, 1234);
    const NoiseBundle b = sample_noise(g, 500, 2, 2, 1234);
    CHECK(a.raw_dw() == b.raw_dw());
    CHECK(a.raw_db() == b.raw_db());

    const NoiseBundle c = sample_noise(g, 500, 2, 2, 1235);
    CHECK(a.raw_dw() != c.raw_dw());
}

TEST_CASE("gaussian sampling matches serial reference bitwise") {
    // The parallel sampler assigns each element from its own counter; a
    // plain serial loop must produce the identical bundle.
    const TimeGrid g = make_grid(1.0, 6);
    const NoiseBundle a = sample_noise(g, 333, 1, 1, 99);
    std::vector<double> serial_dw(333 * 6);
    const double sdt = std::sqrt(g.dt);
    par::for_each_index_serial(333, [&](std::size_t p) {
        for (std::size_t i = 0; i < 6; ++i)
            serial_dw[p * 6 + i] =
                sdt * normal_draw(99, p, static_cast<std::uint32_t>(i), 0);
    });
    CHECK(a.raw_dw() == serial_dw);
}

TEST_CASE("gaussian moments at CLT scale") {
    const std::size_t P = 100000;
    const TimeGrid g = make_grid(1.0, 4);
    const NoiseBundle nb = sample_noise(g, P, 1, 1, 2024);
    for (std::size_t i = 0; i < 4; ++i) {
        const double mean_w = par::blocked_sum(P, [&](std::size_t p) {
            return nb.dW(p, i);
        }) / double(P);
        CHECK(std::abs(mean_w) <= 4.0 * std::sqrt(g.dt / double(P)));

        const double var_b = par::blocked_sum(P, [&](std::size_t p) {
            const double v = nb.dB(p, i);
            return v * v;
        }) / double(P);
        CHECK(var_b == doctest::Approx(g.dt).epsilon(0.05));
    }
}

TEST_CASE("disjoint seeds decorrelate") {
    const std::size_t P = 50000;
    const TimeGrid g = make_grid(1.0, 1);
    const NoiseBundle a = sample_noise(g, P, 1, 1, 1);
    const NoiseBundle b = sample_noise(g, P, 1, 1, 2);
    double corr = 0.0;
    for (std::size_t p = 0; p < P; ++p) corr += a.dW(p, 0) * b.dW(p, 0);
    corr /= double(P) * g.dt;
    CHECK(std::abs(corr) < 0.02);
}

TEST_CASE("rademacher tree enumerates every sign pattern once") {
    const TimeGrid g1 = make_grid(1.0, 1);
    const NoiseBundle t1 = enumerate_tree(g1);
    CHECK(t1.paths() == 4);
    const double s = std::sqrt(g1.dt);
    int plus_w = 0, plus_b = 0;
    for (std::size_t p = 0; p < 4; ++p) {
        CHECK(std::abs(t1.dW(p, 0)) == s);
        CHECK(std::abs(t1.dB(p, 0)) == s);
        if (t1.dW(p, 0) > 0) ++plus_w;
        if (t1.dB(p, 0) > 0) ++plus_b;
    }
    CHECK(plus_w == 2);
    CHECK(plus_b == 2);

    const NoiseBundle t2 = enumerate_tree(make_grid(1.0, 2));
    CHECK(t2.paths() == 16);
    int w0_plus = 0;
    for (std::size_t p = 0; p < 16; ++p)
        if (t2.dW(p, 0) > 0) ++w0_plus;
    CHECK(w0_plus == 8);
}

TEST_CASE("tree increments are exactly symmetric and independent") {
    const TimeGrid g = make_grid(1.0, 3);
    const NoiseBundle t = enumerate_tree(g);
    CHECK(t.paths() == 64);
    // Sum over all paths of dW_0 * dB_2 cancels exactly.
    double cross = 0.0;
    for (std::size_t p = 0; p < t.paths(); ++p)
        cross += t.dW(p, 0) * t.dB(p, 2);
    CHECK(cross == 0.0);

    // Exact mean zero via sign counting, exact variance dt.
    for (std::size_t i = 0; i < 3; ++i) {
        long long signs = 0;
        double var = 0.0;
        for (std::size_t p = 0; p < t.paths(); ++p) {
            signs += t.dW(p, i) > 0 ? 1 : -1;
            var += t.dW(p, i) * t.dW(p, i);
        }
        CHECK(signs == 0);
        CHECK(var / double(t.paths()) == doctest::Approx(g.dt).epsilon(1e-15));
    }
}

TEST_CASE("tree capacity guard") {
    CHECK_THROWS_AS(enumerate_tree(make_grid(1.0, 13)), CapacityError);
}

TEST_CASE("filtration rule classifies every increment") {
    const std::size_t N = 5;
    for (std::size_t i = 0; i <= N; ++i) {
        const FiltrationIndex fi{i};
        for (std::size_t j = 0; j < N; ++j) {
            CHECK(fi.knows_dW(j) == (j < i));
            CHECK(fi.knows_dB(j) == (j >= i));
        }
        if (i < N) {
            CHECK(fi.knows_dB(i));
            CHECK_FALSE(fi.knows_dW(i));
        }
    }
}

TEST_CASE("running sums match increments") {
    const TimeGrid g = make_grid(2.0, 5);
    const NoiseBundle nb = sample_noise(g, 50, 2, 3, 7);
    for (std::size_t p = 0; p < 50; ++p) {
        for (std::size_t a = 0; a < 2; ++a) {
            double w = 0.0;
            for (std::size_t i = 0; i <= 5; ++i) {
                CHECK(nb.w_at(p, i, a) == doctest::Approx(w).epsilon(1e-15));
                if (i < 5) w += nb.dW(p, i, a);
            }
        }
        for (std::size_t a = 0; a < 3; ++a) {
            double tail = 0.0;
            for (std::size_t i = 5; i-- > 0;) tail += nb.dB(p, i, a);
            CHECK(nb.b_tail(p, 0, a) ==
                  doctest::Approx(tail).epsilon(1e-15));
            CHECK(nb.b_tail(p, 5, a) == 0.0);
        }
    }
}

TEST_CASE("blocked sums are thread-count independent") {
    const std::size_t n = 100000;
    std::vector<double> data(n);
    for (std::size_t i = 0; i < n; ++i) data[i] = normal_draw(3, i, 1, 2);
    auto term = [&](std::size_t i) { return data[i]; };
    const double serial = par::blocked_sum_serial(n, term);
    const double parallel = par::blocked_sum(n, term);
    CHECK(serial == parallel);

    std::vector<double> row_serial(3), row_parallel(3);
    auto rows = [&](std::size_t i, std::span<double> r) {
        r[0] = data[i];
        r[1] = data[i] * data[i];
        r[2] = std::sin(data[i]);
    };
    par::blocked_sum_rows(n, 3, rows, row_serial, false);
    par::blocked_sum_rows(n, 3, rows, row_parallel, true);
    CHECK(row_serial == row_parallel);
}
