#include "walsh/calculus.hpp"

#include <algorithm>
#include <cmath>

namespace walsh {

double generator_apply(const ClassDFunction& g, const RadialCoefficients& coeffs, double r,
                       double theta) {
    if (!(r > 0.0)) throw DomainError("generator defined off the origin (r > 0)");
    return coeffs.b(r) * g.g1(r, theta) + 0.5 * coeffs.a(r) * g.g2(r, theta);
}

FSDecomposition fs_decompose(const WalshPath& w, const SamplePath& u, const SamplePath& qv,
                             const ClassDFunction& g, const SpinningMeasure& mu,
                             LocalTimeWeighting weighting) {
    const std::size_t n = w.n_points();
    if (u.n_points() != n || qv.n_points() != n) throw ArgumentError("fs_decompose: grid mismatch");

    FSDecomposition d{SamplePath(w.grid, PathKind::driver), SamplePath(w.grid, PathKind::driver),
                      SamplePath(w.grid, PathKind::driver), SamplePath(w.grid, PathKind::localtime),
                      SamplePath(w.grid, PathKind::driver)};

    const double slope_avg = integrate_against(mu, [&](double t) { return g.g1(0.0, t); });
    auto g_at = [&](std::size_t k) {
        return at_origin(w.angle[k]) ? g.at_origin() : g.g(w.radial[k], w.angle[k]);
    };

    const double g0 = g_at(0);
    double stoch = 0.0, drift = 0.0, lt = 0.0;
    d.lhs[0] = g0;
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const bool off_origin = w.radial[k] > 0.0;
        const double du = u[k + 1] - u[k];
        if (off_origin) {
            stoch += g.g1(w.radial[k], w.angle[k]) * du;
            drift += 0.5 * g.g2(w.radial[k], w.angle[k]) * (qv[k + 1] - qv[k]);
        }
        // raw Tanaka local-time increment of (radial, driver)
        const double dl = (w.radial[k + 1] - w.radial[k]) - (off_origin ? du : 0.0);
        if (weighting == LocalTimeWeighting::nu_average) {
            lt += slope_avg * dl;
        } else {
            const double theta = off_origin ? w.angle[k] : w.angle[k + 1];
            if (!at_origin(theta)) lt += g.g1(0.0, theta) * dl;
        }
        d.lhs[k + 1] = g_at(k + 1);
        d.stochastic_term[k + 1] = stoch;
        d.drift_term[k + 1] = drift;
        d.localtime_term[k + 1] = lt;
        d.residual[k + 1] = d.lhs[k + 1] - g0 - stoch - drift - lt;
    }
    return d;
}

SlopeAverage slope_avg_process(const WalshPath& w, const std::function<double(double)>& phi,
                               const SpinningMeasure& mu, const SamplePath& u) {
    const std::size_t n = w.n_points();
    if (u.n_points() != n) throw ArgumentError("slope_avg_process: grid mismatch");
    const double phi_bar = integrate_against(mu, phi);
    auto h = [&](std::size_t k) {
        return at_origin(w.angle[k]) ? 0.0 : phi(w.angle[k]) - phi_bar;
    };
    SlopeAverage r{SamplePath(w.grid, PathKind::driver), SamplePath(w.grid, PathKind::driver)};
    double integral = 0.0;
    r.g_path[0] = w.radial[0] * h(0);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        if (w.radial[k] > 0.0) integral += h(k) * (u[k + 1] - u[k]);
        r.integral_path[k + 1] = integral;
        r.g_path[k + 1] = w.radial[k + 1] * h(k + 1);
        r.sup_identity_gap =
            std::max(r.sup_identity_gap, std::abs(r.g_path[k + 1] - r.g_path[0] - integral));
    }
    r.terminal_increment = r.g_path.terminal() - r.g_path[0];
    return r;
}

ZTestResult martingale_ztest(std::span<const double> terminal_increments) {
    return z_test(terminal_increments);
}

ClassDFunction radial_identity_blend(double c1) {
    // psi(r) = c1 * P(r/c1) on [0, c1] and psi(r) = r above, with
    // P(x) = 3/8 + (9/4) x^3 - (19/8) x^4 + (3/4) x^5, so that
    // P(1) = 1, P'(1) = 1, P''(1) = 0 and P'(0) = P''(0) = 0.
    const double a0 = 0.375, a3 = 2.25, a4 = -2.375, a5 = 0.75;
    ClassDFunction f;
    f.name = "g4_radial_blend";
    f.g = [=](double r, double) {
        if (r >= c1) return r;
        const double x = r / c1;
        return c1 * (a0 + x * x * x * (a3 + x * (a4 + x * a5)));
    };
    f.g1 = [=](double r, double) {
        if (r >= c1) return 1.0;
        const double x = r / c1;
        return x * x * (3.0 * a3 + x * (4.0 * a4 + x * 5.0 * a5));
    };
    f.g2 = [=](double r, double) {
        if (r >= c1) return 0.0;
        const double x = r / c1;
        return x * (6.0 * a3 + x * (12.0 * a4 + x * 20.0 * a5)) / c1;
    };
    return f;
}

std::vector<ClassDFunction> class_d_catalog(const SpinningMeasure& mu, const AngleSet& A,
                                            const std::function<double(double)>& phi, double c1) {
    const AngularMoments mom = alpha_gamma(mu);
    const double g1c = mom.gamma[0];
    const double g2c = mom.gamma[1];
    const double nuA = A.nu(mu);
    const double phi_bar = integrate_against(mu, phi);

    std::vector<ClassDFunction> cat;
    auto slope = [](std::string name, std::function<double(double)> h) {
        // functions of the form r * h(theta): g' = h, g'' = 0
        ClassDFunction f;
        f.name = std::move(name);
        f.g = [h](double r, double t) { return r * h(t); };
        f.g1 = [h](double, double t) { return h(t); };
        f.g2 = [](double, double) { return 0.0; };
        return f;
    };

    cat.push_back(slope("g1_cos_centered", [g1c](double t) { return std::cos(t) - g1c; }));
    cat.push_back(slope("g2_sin_centered", [g2c](double t) { return std::sin(t) - g2c; }));

    auto product = [&](std::string name, auto hi, auto hk) {
        // g = r^2 hi(theta) hk(theta)
        ClassDFunction f;
        f.name = std::move(name);
        f.g = [=](double r, double t) { return r * r * hi(t) * hk(t); };
        f.g1 = [=](double r, double t) { return 2.0 * r * hi(t) * hk(t); };
        f.g2 = [=](double, double t) { return 2.0 * hi(t) * hk(t); };
        return f;
    };
    auto c_cos = [g1c](double t) { return std::cos(t) - g1c; };
    auto c_sin = [g2c](double t) { return std::sin(t) - g2c; };
    cat.push_back(product("g11_product", c_cos, c_cos));
    cat.push_back(product("g12_product", c_cos, c_sin));
    cat.push_back(product("g22_product", c_sin, c_sin));
    cat.push_back(product("g11o_r2cos2", [](double t) { return std::cos(t); },
                          [](double t) { return std::cos(t); }));
    cat.push_back(product("g22o_r2sin2", [](double t) { return std::sin(t); },
                          [](double t) { return std::sin(t); }));

    cat.push_back(slope("g3_radial", [](double) { return 1.0; }));
    cat.push_back(radial_identity_blend(c1));
    cat.push_back(slope("g5_indicator_centered",
                        [&A, nuA](double t) { return (A.contains(t) ? 1.0 : 0.0) - nuA; }));
    cat.push_back(slope("g6_indicator", [&A](double t) { return A.contains(t) ? 1.0 : 0.0; }));
    cat.push_back(slope("g_phi_slope_avg", [phi, phi_bar](double t) { return phi(t) - phi_bar; }));
    return cat;
}

ClassDValidation validate_class_d(const ClassDFunction& g, const SpinningMeasure& mu, double r_max,
                                  std::size_t n_r, std::size_t n_theta) {
    ClassDValidation v;
    const double h = 1e-5;
    const double fd_tol = std::max(1e-4, 10.0 * h);

    std::vector<double> thetas;
    for (const Atom& a : mu.atoms()) thetas.push_back(a.angle);
    for (std::size_t i = 0; i < n_theta; ++i)
        thetas.push_back(kTwoPi * (static_cast<double>(i) + 0.3) / static_cast<double>(n_theta));

    const double g_origin = g.at_origin();
    for (double theta : thetas) {
        double sup_slope = 0.0;
        for (std::size_t i = 1; i <= n_r; ++i) {
            const double r = r_max * static_cast<double>(i) / static_cast<double>(n_r);
            const double d1 = g.g1(r, theta);
            const double d2 = g.g2(r, theta);
            if (!std::isfinite(d1) || !std::isfinite(d2)) {
                v.ok = false;
                continue;
            }
            v.max_abs_g1 = std::max(v.max_abs_g1, std::abs(d1));
            v.max_abs_g2 = std::max(v.max_abs_g2, std::abs(d2));
            sup_slope = std::max(sup_slope, std::abs(d1));
            const double fd = (g.g(r + h, theta) - g.g(r, theta)) / h;
            v.max_fd_error = std::max(v.max_fd_error, std::abs(fd - d1));
        }
        const double slope_bound = sup_slope + std::abs(g.g1(0.0, theta)) + 1e-9;
        for (std::size_t i = 1; i <= n_r; ++i) {
            const double r = r_max * static_cast<double>(i) / static_cast<double>(n_r);
            const double gap = std::abs(g.g(r, theta) - g_origin) - slope_bound * r;
            v.max_tree_violation = std::max(v.max_tree_violation, gap);
        }
    }
    if (v.max_fd_error > fd_tol || v.max_tree_violation > 1e-9) v.ok = false;
    return v;
}

}  // namespace walsh
