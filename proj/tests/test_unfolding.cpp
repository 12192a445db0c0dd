#include <doctest.h>

#include <cmath>
#include <sstream>

#include "walsh/diffusion.hpp"
#include "walsh/drivers.hpp"
#include "walsh/stats.hpp"
#include "walsh/unfolding.hpp"

using namespace walsh;

namespace {
const double kPi = std::acos(-1.0);
}

TEST_CASE("excursion_decompose: examples") {
    const TimeGrid g5(5.0, 5);
    const SamplePath s(g5, PathKind::folded, {0.0, 1.0, 2.0, 0.0, 3.0, 0.0});
    const auto d = excursion_decompose(s);
    CHECK(d.zero_indices == std::vector<std::size_t>{0, 3, 5});
    REQUIRE(d.excursions.size() == 2);
    CHECK(d.excursions[0].first == 1);
    CHECK(d.excursions[0].last == 2);
    CHECK(d.excursions[1].first == 4);
    CHECK(d.excursions[1].last == 4);

    const SamplePath pos(g5, PathKind::folded, {1.0, 1.0, 2.0, 3.0, 3.0, 1.0});
    const auto dp = excursion_decompose(pos);
    CHECK(dp.zero_indices.empty());
    REQUIRE(dp.excursions.size() == 1);
    CHECK(dp.excursions[0].first == 0);
    CHECK(dp.excursions[0].last == 5);

    const SamplePath zero(g5, PathKind::folded, std::vector<double>(6, 0.0));
    const auto dz = excursion_decompose(zero);
    CHECK(dz.excursions.empty());
    CHECK(dz.zero_indices.size() == 6);

    const SamplePath bad(g5, PathKind::folded, {0.0, -1.0, 0.0, 0.0, 0.0, 0.0});
    CHECK_THROWS_AS(excursion_decompose(bad), ArgumentError);
}

TEST_CASE("unfold: point mass stays on the positive axis") {
    const TimeGrid grid(1.0, 2000);
    RngStream dr(4), ar(5);
    DriverSpec bm{[](double) { return 0.0; }, [](double) { return 1.0; }, 0.0};
    const FoldResult fold = skorokhod_fold(simulate_driver(bm, grid, dr));
    const WalshPath w = unfold(fold.s, SpinningMeasure::point_mass(0.0), std::nullopt, ar,
                               &fold.lambda);
    for (std::size_t k = 0; k < w.n_points(); ++k) {
        CHECK(w.x2(k) == 0.0);
        CHECK(w.x1(k) == w.radial[k]);
        CHECK(w.radial[k] == fold.s[k]);  // radial part preserved exactly
    }
    CHECK(check_ray_constancy(w).violations == 0);
}

TEST_CASE("unfold: all-zero path maps to the origin") {
    const TimeGrid grid(1.0, 10);
    const SamplePath s(grid, PathKind::folded);
    RngStream ar(6);
    const WalshPath w = unfold(s, SpinningMeasure::uniform(), std::nullopt, ar);
    for (std::size_t k = 0; k < w.n_points(); ++k) {
        CHECK(at_origin(w.angle[k]));
        CHECK(w.excursion_id[k] == kNoExcursion);
        CHECK(w.x1(k) == 0.0);
    }
}

TEST_CASE("unfold: interior start requires an initial angle and uses it") {
    const TimeGrid grid(2.0, 2);
    const SamplePath s(grid, PathKind::folded, {1.0, 0.5, 0.0});
    RngStream ar(7);
    CHECK_THROWS_AS(unfold(s, SpinningMeasure::uniform(), std::nullopt, ar), ArgumentError);
    const WalshPath w = unfold(s, SpinningMeasure::uniform(), 1.25, ar);
    CHECK(w.angle[0] == doctest::Approx(1.25));
    CHECK(w.angle[1] == doctest::Approx(1.25));
    CHECK(at_origin(w.angle[2]));
}

TEST_CASE("unfold: excursion angle frequencies match the measure") {
    const auto mu = SpinningMeasure::two_point(0.0, 0.7, kPi);
    double zeros = 0.0, total = 0.0;
    for (int i = 0; i < 10; ++i) {
        const TimeGrid grid(1.0, 20000);
        RngStream dr = RngStream::for_path(8, i, RngStream::kDriver);
        RngStream ar = RngStream::for_path(8, i, RngStream::kAngles);
        DriverSpec bm{[](double) { return 0.0; }, [](double) { return 1.0; }, 0.0};
        const FoldResult fold = skorokhod_fold(simulate_driver(bm, grid, dr));
        const WalshPath w = unfold(fold.s, mu, std::nullopt, ar);
        for (const auto& e : excursion_decompose(fold.s).excursions) {
            zeros += w.angle[e.first] == 0.0 ? 1.0 : 0.0;
            total += 1.0;
        }
    }
    REQUIRE(total >= 200);
    const double f = zeros / total;
    const double half = 2.5758 * std::sqrt(0.21 / total);
    CHECK(std::abs(f - 0.7) <= half + 1e-12);
}

TEST_CASE("unfold: excursion angles pass a chi-square against nu") {
    const auto mu = SpinningMeasure::from_json(nlohmann::json::parse(
        R"({"atoms": [[0.0, 0.25], [2.0, 0.35], [4.5, 0.4]], "density": null})"));
    std::map<double, double> counts;
    double total = 0.0;
    for (int i = 0; i < 12; ++i) {
        const TimeGrid grid(1.0, 20000);
        RngStream dr = RngStream::for_path(100, i, RngStream::kDriver);
        RngStream ar = RngStream::for_path(100, i, RngStream::kAngles);
        DriverSpec bm{[](double) { return 0.0; }, [](double) { return 1.0; }, 0.0};
        const FoldResult fold = skorokhod_fold(simulate_driver(bm, grid, dr));
        const WalshPath w = unfold(fold.s, mu, std::nullopt, ar);
        for (const auto& e : excursion_decompose(fold.s).excursions) {
            counts[w.angle[e.first]] += 1.0;
            total += 1.0;
        }
    }
    REQUIRE(total >= 1000);
    std::vector<double> obs, expected;
    for (const Atom& a : mu.atoms()) {
        obs.push_back(counts[a.angle]);
        expected.push_back(total * a.weight);
    }
    CHECK(chi_square_gof(obs, expected).pass(0.01));
}

TEST_CASE("conditional angular law at a fixed time is nu, independent of radius") {
    // Angles of the excursion covering T are iid nu, so the terminal angular
    // law conditional on |X(T)| > 0 matches nu in any radial bucket.
    const auto mu = SpinningMeasure::two_point(0.0, 0.6, 2.5);
    const TimeGrid grid(1.0, 500);
    std::vector<double> r_low_obs{0.0, 0.0}, r_high_obs{0.0, 0.0};
    double median = 0.674;  // median of |N(0,1)| approx, up to reflection
    for (int i = 0; i < 6000; ++i) {
        RngStream dr = RngStream::for_path(200, i, RngStream::kDriver);
        RngStream ar = RngStream::for_path(200, i, RngStream::kAngles);
        const WalshDiffusion wd = simulate_walsh_bm(mu, {0.0, 0.0}, grid, dr, ar);
        const std::size_t last = wd.path.n_points() - 1;
        if (wd.path.radial[last] == 0.0) continue;
        auto& bucket = wd.path.radial[last] < median ? r_low_obs : r_high_obs;
        bucket[wd.path.angle[last] == 0.0 ? 0 : 1] += 1.0;
    }
    for (auto* obs : {&r_low_obs, &r_high_obs}) {
        const double n = (*obs)[0] + (*obs)[1];
        REQUIRE(n > 500);
        std::vector<double> expected{n * 0.6, n * 0.4};
        CHECK(chi_square_gof(*obs, expected).pass(0.01));
    }
}

TEST_CASE("tree distance: rays, origin, symmetry, triangle inequality") {
    CHECK(tree_distance_polar(2.0, 1.0, 5.0, 1.0) == doctest::Approx(3.0));
    CHECK(tree_distance(1.0, 0.0, 0.0, 2.0) == doctest::Approx(3.0));
    CHECK(tree_distance(0.0, 0.0, 3.0 * std::cos(2.0), 3.0 * std::sin(2.0)) == doctest::Approx(3.0));
    RngStream rng(55);
    for (int i = 0; i < 200; ++i) {
        const double a1 = rng.uniform(0.0, kTwoPi), a2 = rng.uniform(0.0, kTwoPi),
                     a3 = rng.uniform(0.0, kTwoPi);
        const double r1 = rng.uniform01() * 2, r2 = rng.uniform01() * 2, r3 = rng.uniform01() * 2;
        const double x1 = r1 * std::cos(a1), y1 = r1 * std::sin(a1);
        const double x2 = r2 * std::cos(a2), y2 = r2 * std::sin(a2);
        const double x3 = r3 * std::cos(a3), y3 = r3 * std::sin(a3);
        CHECK(tree_distance(x1, y1, x2, y2) == doctest::Approx(tree_distance(x2, y2, x1, y1)));
        CHECK(tree_distance(x1, y1, x3, y3) <=
              tree_distance(x1, y1, x2, y2) + tree_distance(x2, y2, x3, y3) + 1e-12);
    }
}

TEST_CASE("tree-metric increments shrink with dt") {
    const auto mu = SpinningMeasure::uniform();
    double prev = 1e9;
    for (std::size_t n_steps : {200, 2000, 20000}) {
        const TimeGrid grid(1.0, n_steps);
        std::vector<double> max_incs;
        for (int i = 0; i < 9; ++i) {
            RngStream dr = RngStream::for_path(300 + n_steps, i, RngStream::kDriver);
            RngStream ar = RngStream::for_path(300 + n_steps, i, RngStream::kAngles);
            const WalshDiffusion wd = simulate_walsh_bm(mu, {0.0, 0.0}, grid, dr, ar);
            double mx = 0.0;
            for (std::size_t k = 1; k < wd.path.n_points(); ++k)
                mx = std::max(mx, tree_distance_polar(wd.path.radial[k - 1], wd.path.angle[k - 1],
                                                      wd.path.radial[k], wd.path.angle[k]));
            max_incs.push_back(mx);
        }
        std::sort(max_incs.begin(), max_incs.end());
        const double med = max_incs[max_incs.size() / 2];
        CHECK(med < prev);
        prev = med;
    }
}

TEST_CASE("ray constancy flags a hand-built flip") {
    WalshPath w;
    w.grid = TimeGrid(3.0, 3);
    w.radial = {0.0, 1.0, 1.0, 0.0};
    w.angle = {kNoAngle, 0.5, 0.9, kNoAngle};
    w.excursion_id = {kNoExcursion, 0, 0, kNoExcursion};
    w.localtime = {0.0, 0.0, 0.0, 0.0};
    const auto rep = check_ray_constancy(w);
    CHECK(rep.violations == 1);
    CHECK(rep.indices == std::vector<std::size_t>{2});
}

TEST_CASE("walsh csv serializes the sentinel as an empty field") {
    WalshPath w;
    w.grid = TimeGrid(1.0, 1);
    w.radial = {0.0, 1.0};
    w.angle = {kNoAngle, 0.0};
    w.excursion_id = {kNoExcursion, 0};
    w.localtime = {0.0, 0.0};
    std::ostringstream os;
    write_walsh_csv(os, w);
    const std::string text = os.str();
    CHECK(text.find("t,r,theta,x1,x2,excursion_id,L") == 0);
    CHECK(text.find("0,0,,0,0,,0") != std::string::npos);
}
