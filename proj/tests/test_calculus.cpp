#include <doctest.h>

#include <cmath>

#include "walsh/calculus.hpp"
#include "walsh/diffusion.hpp"
#include "walsh/localtime.hpp"

using namespace walsh;

namespace {
const double kPi = std::acos(-1.0);

ClassDFunction r_squared() {
    ClassDFunction f;
    f.name = "r2";
    f.g = [](double r, double) { return r * r; };
    f.g1 = [](double r, double) { return 2.0 * r; };
    f.g2 = [](double, double) { return 2.0; };
    return f;
}
}  // namespace

TEST_CASE("generator: radial examples and the origin restriction") {
    RadialCoefficients bm{[](double) { return 0.0; }, [](double) { return 1.0; }};
    CHECK(generator_apply(r_squared(), bm, 0.7, 1.0) == doctest::Approx(1.0));

    ClassDFunction g3;
    g3.g = [](double r, double) { return r; };
    g3.g1 = [](double, double) { return 1.0; };
    g3.g2 = [](double, double) { return 0.0; };
    CHECK(generator_apply(g3, bm, 2.0, 0.3) == doctest::Approx(0.0));
    CHECK_THROWS_AS(generator_apply(g3, bm, 0.0, 0.0), DomainError);

    // slope-average functions have vanishing second radial derivative, so the
    // generator reduces to b times the centered slope
    const auto mu = SpinningMeasure::two_point(0.0, 0.7, kPi);
    const double phibar = integrate_against(mu, [](double t) { return std::cos(t); });
    ClassDFunction gphi;
    gphi.g = [phibar](double r, double t) { return r * (std::cos(t) - phibar); };
    gphi.g1 = [phibar](double, double t) { return std::cos(t) - phibar; };
    gphi.g2 = [](double, double) { return 0.0; };
    RadialCoefficients drift{[](double) { return 2.0; }, [](double) { return 1.0; }};
    CHECK(generator_apply(gphi, drift, 1.0, 0.0) == doctest::Approx(2.0 * (1.0 - phibar)));
}

TEST_CASE("generator is linear in the function") {
    RadialCoefficients coeffs{[](double r) { return 0.5 - r; }, [](double r) { return 1.0 + 0.1 * r; }};
    RngStream rng(21);
    const auto f1 = r_squared();
    ClassDFunction f2;
    f2.g = [](double r, double t) { return r * std::cos(t); };
    f2.g1 = [](double, double t) { return std::cos(t); };
    f2.g2 = [](double, double) { return 0.0; };
    for (int i = 0; i < 50; ++i) {
        const double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0);
        const double r = rng.uniform(0.1, 3.0), th = rng.uniform(0.0, kTwoPi);
        ClassDFunction combo;
        combo.g = [=](double rr, double tt) { return a * f1.g(rr, tt) + b * f2.g(rr, tt); };
        combo.g1 = [=](double rr, double tt) { return a * f1.g1(rr, tt) + b * f2.g1(rr, tt); };
        combo.g2 = [=](double rr, double tt) { return a * f1.g2(rr, tt) + b * f2.g2(rr, tt); };
        const double lhs = generator_apply(combo, coeffs, r, th);
        const double rhs =
            a * generator_apply(f1, coeffs, r, th) + b * generator_apply(f2, coeffs, r, th);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
    }
}

TEST_CASE("class-D validation passes for the whole catalog") {
    const auto mu = SpinningMeasure::two_point(0.0, 0.7, kPi);
    const AngleSet A({{0.0, kPi}});
    const auto cat = class_d_catalog(mu, A, [](double t) { return t < kPi ? 1.0 : 0.0; });
    CHECK(cat.size() == 12);
    for (const auto& g : cat) {
        const auto v = validate_class_d(g, mu);
        INFO(g.name);
        CHECK(v.ok);
        CHECK(v.max_fd_error < 1e-4);
    }
}

TEST_CASE("fs decomposition: zero-slope functions have no local-time term") {
    const auto mu = SpinningMeasure::two_point(0.0, 0.7, kPi);
    const TimeGrid grid(1.0, 5000);
    RngStream dr(31), ar(32);
    const WalshDiffusion wd = simulate_walsh_bm(mu, {0.0, 0.0}, grid, dr, ar);
    const SamplePath qv = realized_qv(wd.driver);
    const auto d = fs_decompose(wd.path, wd.driver, qv, r_squared(), mu);
    for (double v : d.localtime_term.values) CHECK(v == 0.0);
    CHECK(d.residual[0] == 0.0);
}

TEST_CASE("fs decomposition: g3 = r reduces to the Tanaka identity") {
    const auto mu = SpinningMeasure::uniform();
    const TimeGrid grid(1.0, 20000);
    RngStream dr(33), ar(34);
    const WalshDiffusion wd = simulate_walsh_bm(mu, {0.0, 0.0}, grid, dr, ar);
    const SamplePath qv = realized_qv(wd.driver);
    ClassDFunction g3;
    g3.name = "g3";
    g3.g = [](double r, double) { return r; };
    g3.g1 = [](double, double) { return 1.0; };
    g3.g2 = [](double, double) { return 0.0; };
    const auto d = fs_decompose(wd.path, wd.driver, qv, g3, mu);
    // localtime term with unit slope is exactly the raw Tanaka estimate
    SamplePath radial(grid, PathKind::folded, std::vector<double>(wd.path.radial));
    const auto tk = lt_tanaka(radial, wd.driver);
    CHECK(d.localtime_term.terminal() == doctest::Approx(tk.raw.back()).epsilon(1e-9));
    CHECK(std::abs(d.terminal_residual()) < 1e-9);

    // nu-averaged weighting agrees for angle-independent slopes
    const auto dn = fs_decompose(wd.path, wd.driver, qv, g3, mu, LocalTimeWeighting::nu_average);
    CHECK(dn.terminal_residual() == doctest::Approx(d.terminal_residual()).epsilon(1e-8));
}

TEST_CASE("fs decomposition: rms residual decreases with dt") {
    const auto mu = SpinningMeasure::two_point(0.0, 0.7, kPi);
    ClassDFunction g;
    g.name = "r2_cos2";
    g.g = [](double r, double t) { return r * r * std::cos(t) * std::cos(t); };
    g.g1 = [](double r, double t) { return 2.0 * r * std::cos(t) * std::cos(t); };
    g.g2 = [](double, double t) { return 2.0 * std::cos(t) * std::cos(t); };
    double prev = 1e9;
    for (std::size_t n_steps : {500, 5000, 50000}) {
        const TimeGrid grid(1.0, n_steps);
        double ss = 0.0;
        const std::size_t n = 40;
        for (std::size_t i = 0; i < n; ++i) {
            RngStream dr = RngStream::for_path(800 + n_steps, i, RngStream::kDriver);
            RngStream ar = RngStream::for_path(800 + n_steps, i, RngStream::kAngles);
            const WalshDiffusion wd = simulate_walsh_bm(mu, {0.0, 0.0}, grid, dr, ar);
            const SamplePath qv = realized_qv(wd.driver);
            const double r = fs_decompose(wd.path, wd.driver, qv, g, mu).terminal_residual();
            ss += r * r;
        }
        const double rms = std::sqrt(ss / n);
        CHECK(rms < prev);
        prev = rms;
    }
}

TEST_CASE("slope averages: constant phi gives the zero process") {
    const auto mu = SpinningMeasure::two_point(0.0, 0.7, kPi);
    const TimeGrid grid(1.0, 2000);
    RngStream dr(41), ar(42);
    const WalshDiffusion wd = simulate_walsh_bm(mu, {0.0, 0.0}, grid, dr, ar);
    const auto sa = slope_avg_process(wd.path, [](double) { return 3.5; }, mu, wd.driver);
    for (double v : sa.g_path.values) CHECK(v == 0.0);
    CHECK(sa.terminal_increment == 0.0);
}

TEST_CASE("slope averages: indicator values match nu(A^c) / -nu(A) on/off the set") {
    const auto mu = SpinningMeasure::two_point(0.0, 0.7, kPi);
    auto phi = [](double t) { return t < 1.0 ? 1.0 : 0.0; };  // contains only the 0-atom
    const TimeGrid grid(1.0, 4000);
    RngStream dr(43), ar(44);
    const WalshDiffusion wd = simulate_walsh_bm(mu, {0.0, 0.0}, grid, dr, ar);
    const auto sa = slope_avg_process(wd.path, phi, mu, wd.driver);
    for (std::size_t k = 0; k < wd.path.n_points(); ++k) {
        if (at_origin(wd.path.angle[k])) continue;
        const double h = sa.g_path[k] / wd.path.radial[k];
        if (wd.path.angle[k] == 0.0)
            CHECK(h == doctest::Approx(0.3));  // nu(A^c)
        else
            CHECK(h == doctest::Approx(-0.7));  // -nu(A)
    }
}

TEST_CASE("martingale z-test examples") {
    std::vector<double> zeros(64, 0.0);
    const auto z0 = martingale_ztest(zeros);
    CHECK(z0.degenerate);
    CHECK(z0.z == 0.0);
    CHECK(z0.mean == 0.0);

    RngStream rng(45);
    std::vector<double> normal(10000), shifted(10000);
    for (auto& v : normal) v = rng.normal();
    for (auto& v : shifted) v = rng.normal() + 0.1;
    CHECK(std::abs(martingale_ztest(normal).z) < 3.0);
    CHECK(std::abs(martingale_ztest(shifted).z) > 3.0);
    std::vector<double> small(5, 0.1);
    CHECK_THROWS_AS(martingale_ztest(small), ArgumentError);
}

TEST_CASE("radial identity blend is C2 at the junction") {
    const auto g4 = radial_identity_blend(0.5);
    CHECK(g4.g(0.5, 0.0) == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(g4.g1(0.5 - 1e-9, 0.0) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(g4.g2(0.5 - 1e-9, 0.0) == doctest::Approx(0.0).epsilon(1e-5));
    CHECK(g4.g1(0.0, 0.0) == 0.0);
    CHECK(g4.g(1.7, 0.0) == 1.7);
}
