#include <doctest.h>

#include <cmath>

#include "walsh/diffusion.hpp"
#include "walsh/localtime.hpp"
#include "walsh/stats.hpp"

using namespace walsh;

namespace {
const double kPi = std::acos(-1.0);
}

TEST_CASE("walsh diffusion with a point mass stays on its ray") {
    const auto mu = SpinningMeasure::point_mass(1.2);
    const TimeGrid grid(1.0, 5000);
    RngStream dr(51), ar(52);
    RadialCoefficients bm{[](double) { return 0.0; }, [](double) { return 1.0; }};
    const WalshDiffusion wd = simulate_walsh_diffusion(bm, mu, {0.0, 0.0}, grid, dr, ar);
    for (std::size_t k = 0; k < wd.path.n_points(); ++k)
        if (!at_origin(wd.path.angle[k])) CHECK(wd.path.angle[k] == doctest::Approx(1.2));
    CHECK(check_ray_constancy(wd.path).violations == 0);
    // driver reconstruction: S - L = U up to roundoff
    for (std::size_t k = 0; k < wd.path.n_points(); ++k)
        CHECK(wd.path.radial[k] - wd.path.localtime[k] ==
              doctest::Approx(wd.driver[k]).epsilon(1e-9));
}

TEST_CASE("walsh diffusion from an interior point keeps the starting ray first") {
    const auto mu = SpinningMeasure::uniform();
    const TimeGrid grid(0.5, 2000);
    RngStream dr(53), ar(54);
    RadialCoefficients bm{[](double) { return 0.0; }, [](double) { return 1.0; }};
    const WalshDiffusion wd =
        simulate_walsh_diffusion(bm, mu, {0.5 * std::cos(2.0), 0.5 * std::sin(2.0)}, grid, dr, ar);
    CHECK(wd.path.angle[0] == doctest::Approx(2.0));
    for (std::size_t k = 0; k < wd.path.n_points(); ++k) {
        if (wd.path.radial[k] == 0.0) break;
        CHECK(wd.path.angle[k] == wd.path.angle[0]);
    }
}

TEST_CASE("scale transform: driftless coefficients give the identity") {
    AngularCoefficients flat{[](double, double) { return 0.0; }, [](double, double) { return 1.0; }};
    const auto st = ScaleTransform::build(flat, {0.0, kPi}, uniform_lattice(0.0, 4.0, 256));
    for (double r = 0.0; r <= 4.0; r += 0.37) {
        CHECK(st.p(r, 0.0) == doctest::Approx(r).epsilon(1e-9));
        CHECK(st.q(r, kPi) == doctest::Approx(r).epsilon(1e-9));
        CHECK(st.sigma_tilde(r, 0.0) == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("scale transform: constant negative drift has the exponential scale") {
    const double lam = 0.8;
    AngularCoefficients coeffs{[lam](double, double) { return -lam; },
                               [](double, double) { return 1.0; }};
    const auto st = ScaleTransform::build(coeffs, {0.0}, uniform_lattice(0.0, 6.0, 1024));
    for (double r = 0.1; r <= 5.0; r += 0.5) {
        const double expect = (std::exp(2.0 * lam * r) - 1.0) / (2.0 * lam);
        CHECK(st.p(r, 0.0) == doctest::Approx(expect).epsilon(1e-4));
        CHECK(st.p_prime(r, 0.0) == doctest::Approx(std::exp(2.0 * lam * r)).epsilon(1e-4));
        // sigma_tilde(r) = p'(q(r)) = 1 + 2 lam r for these coefficients
        CHECK(st.sigma_tilde(r, 0.0) == doctest::Approx(1.0 + 2.0 * lam * r).epsilon(1e-4));
    }
    CHECK(st.p_prime(0.0, 0.0) == 1.0);
}

TEST_CASE("scale transform: scale identities hold on the lattice") {
    AngularCoefficients coeffs{[](double r, double th) { return -0.3 - 0.2 * std::sin(th) - 0.05 * r; },
                               [](double r, double) { return 1.0 + 0.1 * r; }};
    const auto lattice = uniform_lattice(0.0, 5.0, 512);
    const auto st = ScaleTransform::build(coeffs, {0.5, 2.5, 4.5}, lattice);
    for (double th : {0.5, 2.5, 4.5}) {
        CHECK(std::abs(st.p(0.0, th)) == 0.0);
        CHECK(std::abs(st.q(0.0, th)) == 0.0);
        CHECK(st.p_prime(0.0, th) == 1.0);
        for (double r : lattice) {
            const double pr = st.p(r, th);
            CHECK(st.p(st.q(pr, th), th) == doctest::Approx(pr).epsilon(1e-8));
        }
    }
}

TEST_CASE("scale transform rejects dispersion below threshold") {
    AngularCoefficients bessel{[](double, double) { return 1.5; },
                               [](double r, double) { return 4.0 * r; }};
    CHECK_THROWS_AS(ScaleTransform::build(bessel, {0.0}, uniform_lattice(0.0, 2.0, 64)),
                    DomainError);
}

TEST_CASE("bessel closed-form family matches the stated scale") {
    const auto st = ScaleTransform::bessel_family([](double) { return 1.5; }, {0.0});
    for (double r = 0.1; r < 3.0; r += 0.3) {
        CHECK(st.p(r, 0.0) == doctest::Approx(std::pow(r, 0.25)));
        CHECK(st.q(st.p(r, 0.0), 0.0) == doctest::Approx(r).epsilon(1e-12));
    }
    CHECK(std::isinf(st.sigma_tilde(0.0, 0.0)));
}

TEST_CASE("time change: identity transform returns the path on the target grid") {
    AngularCoefficients flat{[](double, double) { return 0.0; }, [](double, double) { return 1.0; }};
    const auto st = ScaleTransform::build(flat, {0.0}, uniform_lattice(0.0, 6.0, 256));
    const auto mu = SpinningMeasure::two_point(0.0, 0.5, kPi);
    const TimeGrid grid(1.0, 4000);
    RngStream dr(61), ar(62);
    const WalshDiffusion src = simulate_walsh_bm(mu, {0.0, 0.0}, grid, dr, ar);
    const TimeGrid target(0.5, 2000);
    const WalshPath y = time_change_walsh(src.path, st, target);
    for (std::size_t j = 0; j < y.n_points(); ++j) {
        CHECK(y.radial[j] == doctest::Approx(src.path.radial[j]).epsilon(1e-9));
        if (!at_origin(y.angle[j]) && !at_origin(src.path.angle[j]))
            CHECK(y.angle[j] == src.path.angle[j]);
    }
}

TEST_CASE("time change: constant dispersion c rescales time by c^2") {
    const double c = 2.0;
    AngularCoefficients scaled{[](double, double) { return 0.0; },
                               [c](double, double) { return c * c; }};
    const auto st = ScaleTransform::build(scaled, {0.0}, uniform_lattice(0.0, 8.0, 256));
    const auto mu = SpinningMeasure::two_point(0.0, 0.5, kPi);
    const TimeGrid grid(2.0, 8000);
    RngStream dr(63), ar(64);
    const WalshDiffusion src = simulate_walsh_bm(mu, {0.0, 0.0}, grid, dr, ar);
    // clock Q(t) = t / c^2, so Y(t) = X(c^2 t) and the horizon shrinks by c^2
    const TimeGrid target(0.5, 2000);
    const WalshPath y = time_change_walsh(src.path, st, target);
    for (std::size_t j = 0; j < y.n_points(); j += 50) {
        const std::size_t src_idx = j * static_cast<std::size_t>(c * c);
        CHECK(y.radial[j] == doctest::Approx(src.path.radial[src_idx]).epsilon(1e-9));
    }
}

TEST_CASE("time change: clock underrun reports the required extension") {
    AngularCoefficients flat{[](double, double) { return 0.0; }, [](double, double) { return 1.0; }};
    const auto st = ScaleTransform::build(flat, {0.0}, uniform_lattice(0.0, 6.0, 128));
    const auto mu = SpinningMeasure::uniform();
    const TimeGrid grid(0.25, 1000);
    RngStream dr(65), ar(66);
    const WalshDiffusion src = simulate_walsh_bm(mu, {0.0, 0.0}, grid, dr, ar);
    try {
        time_change_walsh(src.path, st, TimeGrid(1.0, 1000));
        FAIL("expected ClockUnderrun");
    } catch (const ClockUnderrun& e) {
        CHECK(e.required_factor == doctest::Approx(4.0).epsilon(0.05));
    }
}

TEST_CASE("clock and inverse are consistent to one grid step") {
    AngularCoefficients coeffs{[](double, double) { return -0.4; },
                               [](double, double) { return 1.0; }};
    const auto st = ScaleTransform::build(coeffs, {0.0, kPi}, uniform_lattice(0.0, 8.0, 512));
    const auto mu = SpinningMeasure::two_point(0.0, 0.5, kPi);
    const TimeGrid grid(2.0, 20000);
    RngStream dr(67), ar(68);
    const WalshDiffusion src = simulate_walsh_bm(mu, {0.0, 0.0}, grid, dr, ar);
    const SamplePath q = compute_clock(src.path, st);
    for (std::size_t k = 100; k < q.n_points(); k += 997) {
        const double t_back = invert_clock(q, q[k]);
        CHECK(std::abs(t_back - grid.time(k)) <= grid.dt() + 1e-12);
    }
}

TEST_CASE("estimate_spinning_measure: point mass and insufficient data") {
    const auto mu = SpinningMeasure::point_mass(2.0);
    const TimeGrid grid(1.0, 20000);
    RngStream dr(71), ar(72);
    const WalshDiffusion wd = simulate_walsh_bm(mu, {0.0, 0.0}, grid, dr, ar);
    const auto dist = estimate_spinning_measure(wd.path, 0.05);
    CHECK(dist.counts.size() == 1);
    CHECK(dist.counts.begin()->first == doctest::Approx(2.0));
    CHECK(dist.total > 0);
    CHECK(dist.tv_against(mu) == doctest::Approx(0.0));

    WalshPath flat;
    flat.grid = TimeGrid(1.0, 3);
    flat.radial = {0.0, 0.001, 0.001, 0.0};
    flat.angle = {kNoAngle, 1.0, 1.0, kNoAngle};
    flat.excursion_id = {kNoExcursion, 0, 0, kNoExcursion};
    flat.localtime = {0.0, 0.0, 0.0, 0.0};
    CHECK_THROWS_AS(estimate_spinning_measure(flat, 0.5), InsufficientData);
}

TEST_CASE("estimate_spinning_measure: two-atom frequencies in the binomial band") {
    const auto mu = SpinningMeasure::two_point(0.0, 0.7, kPi);
    const TimeGrid grid(2.0, 100000);
    AngleDistribution merged;
    for (int i = 0; i < 12; ++i) {
        RngStream dr = RngStream::for_path(900, i, RngStream::kDriver);
        RngStream ar = RngStream::for_path(900, i, RngStream::kAngles);
        const WalshDiffusion wd = simulate_walsh_bm(mu, {0.0, 0.0}, grid, dr, ar);
        const auto d = estimate_spinning_measure(wd.path, 0.02);
        merged.total += d.total;
        for (const auto& [a, c] : d.counts) merged.counts[a] += c;
    }
    REQUIRE(merged.total >= 500);
    const double f = merged.frequency(0.0);
    const double half = 2.5758 * std::sqrt(0.21 / static_cast<double>(merged.total));
    CHECK(std::abs(f - 0.7) <= half);
}

TEST_CASE("mixed-measure path switches spinning measures at the switch point") {
    const auto mu1 = SpinningMeasure::two_point(0.0, 0.5, kPi);
    const auto mu2 = SpinningMeasure::two_point(kPi / 2, 0.5, 3 * kPi / 2);
    const TimeGrid grid(30.0, 600000);
    RngStream dr(105), ar(1105);
    const auto res = mixed_measure_experiment(mu1, mu2, {1.0, 0.0}, 0.05, grid, dr, ar);
    CHECK(res.switch_index > 0);
    CHECK(check_ray_constancy(res.path).violations == 0);
    // every excursion born after the switch uses mu2's atoms
    for (std::size_t k = res.switch_index + 1; k < res.path.n_points(); ++k) {
        if (res.path.radial[k] > 0.0 && res.path.radial[k - 1] == 0.0) {
            const double a = res.path.angle[k];
            CHECK((a == doctest::Approx(kPi / 2) || a == doctest::Approx(3 * kPi / 2)));
        }
    }
    const auto pre = estimate_spinning_measure_window(res.path, 0.02, 0, res.switch_index);
    const auto post =
        estimate_spinning_measure_window(res.path, 0.02, res.switch_index, res.path.n_points());
    CHECK(pre.tv_against(post) > 0.3);
}

TEST_CASE("mixed-measure experiment reports an unreachable switch point") {
    const auto mu = SpinningMeasure::two_point(0.0, 0.5, kPi);
    const TimeGrid grid(0.01, 100);
    RngStream dr(83), ar(84);
    CHECK_THROWS_AS(mixed_measure_experiment(mu, mu, {50.0, 0.0}, 0.01, grid, dr, ar),
                    SwitchNotReached);
    CHECK_THROWS_AS(mixed_measure_experiment(mu, mu, {0.0, 0.0}, 0.01, grid, dr, ar),
                    ArgumentError);
}

TEST_CASE("gamma consistency: local-time coefficient equals the measure barycenter") {
    const auto mu = SpinningMeasure::two_point(0.0, 0.7, kPi);
    const auto mom = alpha_gamma(mu);
    const double coeff_cos = integrate_against(mu, [](double t) { return std::cos(t); });
    const double coeff_sin = integrate_against(mu, [](double t) { return std::sin(t); });
    CHECK(coeff_cos == doctest::Approx(mom.gamma[0]).epsilon(1e-12));
    CHECK(coeff_sin == doctest::Approx(mom.gamma[1]).epsilon(1e-12));
}

TEST_CASE("direct angular scheme and point-mass diffusion agree in law") {
    // with a single ray both constructions are the same reflected diffusion
    const double lam = 0.5;
    const auto mu = SpinningMeasure::point_mass(0.0);
    AngularCoefficients coeffs{[lam](double, double) { return -lam; },
                               [](double, double) { return 1.0; }};
    RadialCoefficients radial{[lam](double) { return -lam; }, [](double) { return 1.0; }};
    const TimeGrid grid(1.0, 2000);
    std::vector<double> a, b;
    for (int i = 0; i < 3000; ++i) {
        RngStream d1 = RngStream::for_path(1000, i, RngStream::kDriver);
        RngStream a1 = RngStream::for_path(1000, i, RngStream::kAngles);
        a.push_back(simulate_angular_walsh_direct(coeffs, mu, {0.0, 0.0}, grid, d1, a1)
                        .path.radial.back());
        RngStream d2 = RngStream::for_path(2000, i, RngStream::kDriver);
        RngStream a2 = RngStream::for_path(2000, i, RngStream::kAngles);
        b.push_back(
            simulate_walsh_diffusion(radial, mu, {0.0, 0.0}, grid, d2, a2).path.radial.back());
    }
    CHECK(ks_two_sample(a, b).pass(0.01));
}

TEST_CASE("polar drift: constant rate 1.0 relaxes to mean 1/(2 lambda)") {
    const auto mu = SpinningMeasure::two_point(0.0, 0.5, kPi);
    const PolarDriftResult res = polar_drift_experiment([](double) { return 1.0; }, false, mu,
                                                        10.0, 4000, 40000, 3100, 0);
    CHECK(res.mean_radial == doctest::Approx(0.5).epsilon(0.03));
}

TEST_CASE("bessel driver with a point mass stays on the axis") {
    const auto mu = SpinningMeasure::point_mass(0.0);
    const TimeGrid grid(1.0, 20000);
    const BesselSweepResult res =
        bessel_driver_experiment([](double) { return 1.5; }, false, mu, grid, 20, 3200, 0, {0.05});
    CHECK(res.n_paths == 20);
    // reconstruct one path and confirm x2 vanishes on the single ray
    RngStream dr = RngStream::for_path(3200, 3, RngStream::kDriver);
    RngStream ar = RngStream::for_path(3200, 3, RngStream::kAngles);
    const double dt = grid.dt(), sdt = std::sqrt(dt);
    SamplePath s(grid, PathKind::folded);
    double r2 = 0.0;
    for (std::size_t k = 0; k < grid.n_steps; ++k) {
        r2 = std::max(r2 + 1.5 * dt + 2.0 * std::sqrt(r2) * sdt * dr.normal(), 0.0);
        s[k + 1] = std::sqrt(r2);
    }
    const WalshPath w = unfold(s, mu, std::nullopt, ar);
    for (std::size_t k = 0; k < w.n_points(); ++k) CHECK(w.x2(k) == 0.0);
}

TEST_CASE("mixed measure with mu1 = mu2 reproduces the plain construction exactly") {
    const auto mu = SpinningMeasure::two_point(0.0, 0.5, kPi);
    const TimeGrid grid(4.0, 40000);
    RngStream dr1(3300), ar1(3301);
    const auto mixed = mixed_measure_experiment(mu, mu, {0.3, 0.0}, 0.1, grid, dr1, ar1);
    RngStream dr2(3300), ar2(3301);
    const WalshDiffusion plain = simulate_walsh_bm(mu, {0.0, 0.0}, grid, dr2, ar2);
    for (std::size_t k = 0; k < grid.n_points(); ++k) {
        CHECK(mixed.path.radial[k] == plain.path.radial[k]);
        if (!at_origin(mixed.path.angle[k]) || !at_origin(plain.path.angle[k]))
            CHECK(mixed.path.angle[k] == plain.path.angle[k]);
    }
}
