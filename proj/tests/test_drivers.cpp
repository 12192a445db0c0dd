#include <doctest.h>

#include <cmath>

#include "walsh/drivers.hpp"
#include "walsh/stats.hpp"

using namespace walsh;

TEST_CASE("simulate_driver: deterministic Euler paths") {
    const TimeGrid grid(1.0, 100);
    RngStream rng(1);
    DriverSpec linear{[](double) { return 1.0; }, [](double) { return 0.0; }, 0.0};
    const SamplePath u = simulate_driver(linear, grid, rng);
    for (std::size_t k = 0; k <= 100; ++k)
        CHECK(u[k] == doctest::Approx(grid.time(k)).epsilon(1e-12));

    DriverSpec constant{[](double) { return 0.0; }, [](double) { return 0.0; }, 3.0};
    const SamplePath c = simulate_driver(constant, grid, rng);
    for (std::size_t k = 0; k <= 100; ++k) CHECK(c[k] == 3.0);
}

TEST_CASE("simulate_driver: variance of the terminal value") {
    const TimeGrid grid(1.0, 200);
    DriverSpec bm{[](double) { return 0.0; }, [](double) { return 1.0; }, 0.0};
    const std::size_t n = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        RngStream rng = RngStream::for_path(5, i, RngStream::kDriver);
        const double v = simulate_driver(bm, grid, rng).terminal();
        sum += v;
        sum2 += v * v;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(var > 0.98);
    CHECK(var < 1.02);
}

TEST_CASE("simulate_driver: blowup carries the step index") {
    const TimeGrid grid(1.0, 50);
    DriverSpec bad{[](double u) { return u * u * u * 1e200; }, [](double) { return 0.0 * 1.0; }, 1e200};
    RngStream rng(3);
    CHECK_THROWS_AS(simulate_driver(bad, grid, rng), NumericalBlowup);
}

TEST_CASE("skorokhod_fold: running-max examples") {
    const TimeGrid grid(3.0, 3);
    const SamplePath u(grid, PathKind::driver, {0.0, -1.0, 0.0, -2.0});
    const FoldResult r = skorokhod_fold(u);
    CHECK(r.lambda.values == std::vector<double>{0.0, 1.0, 1.0, 2.0});
    CHECK(r.s.values == std::vector<double>{0.0, 0.0, 1.0, 0.0});

    SamplePath up(grid, PathKind::driver, {0.0, 1.0, 2.0, 3.0});
    const FoldResult r2 = skorokhod_fold(up);
    CHECK(r2.lambda.values == std::vector<double>{0.0, 0.0, 0.0, 0.0});
    CHECK(r2.s.values == up.values);

    SamplePath down(grid, PathKind::driver, {0.0, -1.0, -2.0, -3.0});
    const FoldResult r3 = skorokhod_fold(down);
    for (std::size_t k = 0; k < 4; ++k) {
        CHECK(r3.lambda[k] == -down[k]);
        CHECK(r3.s[k] == 0.0);
    }
}

TEST_CASE("skorokhod_fold: identity, flatness and minimality on random drivers") {
    for (int trial = 0; trial < 50; ++trial) {
        RngStream rng(1000 + trial);
        const TimeGrid grid(1.0, 200);
        SamplePath u(grid, PathKind::driver);
        u[0] = rng.uniform(-1.0, 1.0);
        for (std::size_t k = 1; k <= 200; ++k) u[k] = u[k - 1] + 0.2 * rng.normal();
        const FoldResult r = skorokhod_fold(u);
        for (std::size_t k = 0; k <= 200; ++k) {
            CHECK(r.s[k] == u[k] + r.lambda[k]);  // bitwise: S stored as U + Lambda
            CHECK(r.s[k] >= 0.0);
            if (k > 0) {
                CHECK(r.lambda[k] >= r.lambda[k - 1]);
                if (r.lambda[k] > r.lambda[k - 1]) CHECK(r.s[k] == 0.0);
            }
            // brute-force minimal regulator
            double m = 0.0;
            for (std::size_t j = 0; j <= k; ++j) m = std::max(m, -u[j]);
            CHECK(r.lambda[k] == m);
        }
    }
}

TEST_CASE("reflected diffusion: degenerate push and growth cases") {
    const TimeGrid grid(1.0, 1000);
    RngStream rng(2);
    RadialCoefficients down{[](double) { return -1.0; }, [](double) { return 0.0; }};
    const ReflectedDiffusion a = simulate_reflected_diffusion(down, 0.0, grid, rng);
    for (std::size_t k = 0; k <= 1000; ++k) {
        CHECK(a.s[k] == 0.0);
        CHECK(a.localtime[k] == doctest::Approx(grid.time(k)).epsilon(1e-12));
    }
    RadialCoefficients up{[](double) { return 1.0; }, [](double) { return 0.0; }};
    const ReflectedDiffusion b = simulate_reflected_diffusion(up, 0.0, grid, rng);
    CHECK(b.s.terminal() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(b.localtime.terminal() == 0.0);
    CHECK_THROWS_AS(simulate_reflected_diffusion(up, -0.5, grid, rng), ArgumentError);
}

TEST_CASE("reflected BM: regulator law and folded mean") {
    // E|N(0,1)| = sqrt(2/pi) = 0.7979; grid bias is O(sqrt(dt))
    const TimeGrid grid(1.0, 10000);
    RadialCoefficients bm{[](double) { return 0.0; }, [](double) { return 1.0; }};
    const std::size_t n = 20000;
    double mean_s = 0.0, mean_l = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        RngStream rng = RngStream::for_path(77, i, RngStream::kDriver);
        const ReflectedDiffusion r = simulate_reflected_diffusion(bm, 0.0, grid, rng);
        mean_s += r.s.terminal();
        mean_l += r.localtime.terminal();
    }
    mean_s /= n;
    mean_l /= n;
    const double target = std::sqrt(2.0 / std::acos(-1.0));
    CHECK(mean_s == doctest::Approx(target).epsilon(0.02));
    CHECK(mean_l == doctest::Approx(target).epsilon(0.02));
}

TEST_CASE("non-stickiness proxy: zero fraction shrinks with dt") {
    RadialCoefficients bm{[](double) { return 0.0; }, [](double) { return 1.0; }};
    double prev = 1.0;
    for (std::size_t n_steps : {100, 1000, 10000}) {
        const TimeGrid grid(1.0, n_steps);
        double frac = 0.0;
        const int paths = 50;
        for (int i = 0; i < paths; ++i) {
            RngStream rng = RngStream::for_path(31 + n_steps, i, RngStream::kDriver);
            const ReflectedDiffusion r = simulate_reflected_diffusion(bm, 0.0, grid, rng);
            std::size_t zeros = 0;
            for (double v : r.s.values) zeros += v == 0.0 ? 1 : 0;
            frac += static_cast<double>(zeros) / r.s.n_points();
        }
        frac /= paths;
        CHECK(frac < prev);
        prev = frac;
    }
    CHECK(prev < 0.02);
}
