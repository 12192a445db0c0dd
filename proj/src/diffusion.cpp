#include "walsh/diffusion.hpp"

#include <algorithm>
#include <cmath>

#include "walsh/batch.hpp"
#include "walsh/localtime.hpp"
#include "walsh/quadrature.hpp"
#include "walsh/stats.hpp"

namespace walsh {

std::vector<double> uniform_lattice(double lo, double hi, std::size_t n) {
    std::vector<double> v(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
        v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n);
    return v;
}

WalshDiffusion simulate_walsh_diffusion(const RadialCoefficients& coeffs, const SpinningMeasure& mu,
                                        std::array<double, 2> x0, const TimeGrid& grid,
                                        RngStream& driver_rng, RngStream& angle_rng) {
    const double r0 = std::hypot(x0[0], x0[1]);
    ReflectedDiffusion refl = simulate_reflected_diffusion(coeffs, r0, grid, driver_rng);
    std::optional<double> initial;
    if (r0 > 0.0) initial = wrap_angle(std::atan2(x0[1], x0[0]));
    WalshPath path = unfold(refl.s, mu, initial, angle_rng, &refl.localtime);
    return {std::move(path), std::move(refl.driver)};
}

WalshDiffusion simulate_walsh_bm(const SpinningMeasure& mu, std::array<double, 2> x0,
                                 const TimeGrid& grid, RngStream& driver_rng,
                                 RngStream& angle_rng) {
    RadialCoefficients bm{[](double) { return 0.0; }, [](double) { return 1.0; }};
    return simulate_walsh_diffusion(bm, mu, x0, grid, driver_rng, angle_rng);
}

WalshDiffusion simulate_angular_walsh_direct(const AngularCoefficients& coeffs,
                                             const SpinningMeasure& mu, std::array<double, 2> x0,
                                             const TimeGrid& grid, RngStream& driver_rng,
                                             RngStream& angle_rng) {
    const double r0 = std::hypot(x0[0], x0[1]);
    const double dt = grid.dt();
    const double sdt = std::sqrt(dt);

    WalshDiffusion out;
    out.path.grid = grid;
    const std::size_t n = grid.n_points();
    out.path.radial.assign(n, 0.0);
    out.path.angle.assign(n, kNoAngle);
    out.path.excursion_id.assign(n, kNoExcursion);
    out.path.localtime.assign(n, 0.0);
    out.driver = SamplePath(grid, PathKind::driver);

    double s = r0, l = 0.0, u = r0;
    double theta = r0 > 0.0 ? wrap_angle(std::atan2(x0[1], x0[0])) : kNoAngle;
    std::int32_t exc = r0 > 0.0 ? 0 : kNoExcursion;
    std::int32_t next_id = r0 > 0.0 ? 1 : 0;
    out.path.radial[0] = s;
    out.path.angle[0] = theta;
    out.path.excursion_id[0] = exc;
    out.driver[0] = u;
    for (std::size_t k = 0; k < grid.n_steps; ++k) {
        if (s == 0.0) {
            theta = mu.sample(angle_rng);  // candidate ray for the step out of zero
            exc = kNoExcursion;
        }
        const double inc = coeffs.b(s, theta) * dt + coeffs.sigma(s, theta) * sdt * driver_rng.normal();
        if (!std::isfinite(inc)) throw NumericalBlowup(k + 1);
        u += inc;
        const double raw = s + inc;
        const bool was_zero = s == 0.0;
        if (raw < 0.0) {
            l -= raw;
            s = 0.0;
        } else {
            s = raw;
        }
        if (was_zero && s > 0.0) exc = next_id++;
        out.path.radial[k + 1] = s;
        out.path.angle[k + 1] = s > 0.0 ? theta : kNoAngle;
        out.path.excursion_id[k + 1] = s > 0.0 ? exc : kNoExcursion;
        out.path.localtime[k + 1] = l;
        out.driver[k + 1] = u;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scale transform

double ScaleTransform::interp(const std::vector<double>& xs, const std::vector<double>& ys,
                              double x) {
    if (x <= xs.front()) return ys.front();
    if (x >= xs.back()) {
        // linear extension with the terminal slope
        const std::size_t m = xs.size();
        const double slope = (ys[m - 1] - ys[m - 2]) / (xs[m - 1] - xs[m - 2]);
        return ys.back() + slope * (x - xs.back());
    }
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    const double frac = (x - xs[i]) / (xs[i + 1] - xs[i]);
    return ys[i] + (ys[i + 1] - ys[i]) * frac;
}

const ScaleTransform::PerAngle& ScaleTransform::nearest(double theta) const {
    const double t = wrap_angle(theta);
    const PerAngle* best = &angles_.front();
    double best_d = kTwoPi;
    for (const PerAngle& pa : angles_) {
        double d = std::abs(pa.theta - t);
        d = std::min(d, kTwoPi - d);
        if (d < best_d) {
            best_d = d;
            best = &pa;
        }
    }
    return *best;
}

ScaleTransform ScaleTransform::build(const AngularCoefficients& coeffs,
                                     const std::vector<double>& theta_lattice,
                                     const std::vector<double>& r_lattice, double a_floor) {
    if (theta_lattice.empty() || r_lattice.size() < 2 || r_lattice.front() != 0.0)
        throw ArgumentError("ScaleTransform lattices must be nonempty with r_lattice starting at 0");
    ScaleTransform st;
    st.r_lattice_ = r_lattice;
    st.r_max_ = r_lattice.back();
    for (double theta_raw : theta_lattice) {
        const double theta = wrap_angle(theta_raw);
        for (double r : r_lattice)
            if (!(coeffs.a(r, theta) >= a_floor))
                throw DomainError("dispersion a(r, theta) below threshold on lattice");
        PerAngle pa;
        pa.theta = theta;
        pa.sigma_of_r = [&coeffs, theta](double r) { return std::sqrt(coeffs.a(r, theta)); };
        const std::size_t m = r_lattice.size();
        pa.p_vals.resize(m);
        pa.p_prime_vals.resize(m);
        auto drift_ratio = [&coeffs, theta](double z) { return coeffs.b(z, theta) / coeffs.a(z, theta); };
        // inner integral I(xi) = int_0^xi b/a, accumulated along the lattice
        std::vector<double> inner(m, 0.0);
        for (std::size_t i = 1; i < m; ++i)
            inner[i] = inner[i - 1] + integrate(drift_ratio, r_lattice[i - 1], r_lattice[i], 1e-12);
        auto inner_at = [&](double xi) {
            auto it = std::upper_bound(r_lattice.begin(), r_lattice.end(), xi);
            std::size_t i = it == r_lattice.begin() ? 0 : static_cast<std::size_t>(it - r_lattice.begin()) - 1;
            if (i >= m - 1) i = m - 2;
            return inner[i] + integrate(drift_ratio, r_lattice[i], xi, 1e-12);
        };
        auto p_integrand = [&](double xi) { return std::exp(-2.0 * inner_at(xi)); };
        pa.p_vals[0] = 0.0;
        pa.p_prime_vals[0] = 1.0;
        for (std::size_t i = 1; i < m; ++i) {
            pa.p_vals[i] =
                pa.p_vals[i - 1] + integrate(p_integrand, r_lattice[i - 1], r_lattice[i], 1e-9);
            pa.p_prime_vals[i] = std::exp(-2.0 * inner[i]);
            if (!(pa.p_vals[i] > pa.p_vals[i - 1]))
                throw DomainError("scale function not strictly increasing");
        }
        st.angles_.push_back(std::move(pa));
    }
    return st;
}

ScaleTransform ScaleTransform::bessel_family(const std::function<double(double)>& delta,
                                             const std::vector<double>& theta_lattice) {
    if (theta_lattice.empty()) throw ArgumentError("ScaleTransform needs a theta lattice");
    ScaleTransform st;
    st.r_lattice_ = {0.0, 1.0};
    st.r_max_ = std::numeric_limits<double>::infinity();
    for (double theta_raw : theta_lattice) {
        const double theta = wrap_angle(theta_raw);
        const double d = delta(theta);
        if (!(d > 1.0 && d < 2.0)) throw DomainError("bessel family requires delta in (1, 2)");
        PerAngle pa;
        pa.theta = theta;
        pa.bessel_exponent = 0.5 * (2.0 - d);
        pa.sigma_of_r = [](double r) { return 2.0 * std::sqrt(std::max(r, 0.0)); };
        st.angles_.push_back(std::move(pa));
    }
    return st;
}

double ScaleTransform::p(double r, double theta) const {
    const PerAngle& pa = nearest(theta);
    if (pa.bessel_exponent) return std::pow(std::max(r, 0.0), *pa.bessel_exponent);
    return interp(r_lattice_, pa.p_vals, r);
}

double ScaleTransform::p_prime(double r, double theta) const {
    const PerAngle& pa = nearest(theta);
    if (pa.bessel_exponent) {
        const double e = *pa.bessel_exponent;
        return r > 0.0 ? e * std::pow(r, e - 1.0) : std::numeric_limits<double>::infinity();
    }
    return interp(r_lattice_, pa.p_prime_vals, r);
}

double ScaleTransform::q(double r, double theta) const {
    const PerAngle& pa = nearest(theta);
    if (pa.bessel_exponent) return std::pow(std::max(r, 0.0), 1.0 / *pa.bessel_exponent);
    if (r <= 0.0) return 0.0;
    // monotone inversion of the tabulated p: bracket on the lattice, then
    // bisection on the linear interpolant to 1e-10
    const auto& pv = pa.p_vals;
    if (r >= pv.back()) {
        const std::size_t m = pv.size();
        const double slope = (pv[m - 1] - pv[m - 2]) / (r_lattice_[m - 1] - r_lattice_[m - 2]);
        return r_lattice_.back() + (r - pv.back()) / slope;
    }
    auto it = std::upper_bound(pv.begin(), pv.end(), r);
    const std::size_t i = static_cast<std::size_t>(it - pv.begin()) - 1;
    const double frac = (r - pv[i]) / (pv[i + 1] - pv[i]);
    return r_lattice_[i] + (r_lattice_[i + 1] - r_lattice_[i]) * frac;
}

double ScaleTransform::sigma_tilde(double r, double theta) const {
    const PerAngle& pa = nearest(theta);
    if (pa.bessel_exponent) {
        const double e = *pa.bessel_exponent;  // (2 - delta)/2
        if (!(r > 0.0)) return std::numeric_limits<double>::infinity();
        // p'(q(r)) sigma(q(r)) = (2 - delta) r^{(1 - delta)/(2 - delta)}
        const double qr = std::pow(r, 1.0 / e);
        return e * std::pow(qr, e - 1.0) * 2.0 * std::sqrt(qr);
    }
    const double qr = q(r, theta);
    return interp(r_lattice_, pa.p_prime_vals, qr) * pa.sigma_of_r(qr);
}

// ---------------------------------------------------------------------------
// Stochastic clock and time change

namespace {

double first_angle_from(const WalshPath& w, std::size_t from) {
    for (std::size_t k = from; k < w.n_points(); ++k)
        if (!at_origin(w.angle[k])) return w.angle[k];
    return 0.0;
}

}  // namespace

SamplePath compute_clock(const WalshPath& source, const ScaleTransform& st) {
    SamplePath q(source.grid, PathKind::clock);
    const double dt = source.grid.dt();
    double last_theta = 0.0;
    bool have_theta = false;
    double acc = 0.0;
    for (std::size_t k = 0; k + 1 < source.n_points(); ++k) {
        double theta = source.angle[k];
        if (at_origin(theta)) {
            // zero set has vanishing occupation; carry the neighboring ray
            theta = have_theta ? last_theta : first_angle_from(source, k);
        } else {
            last_theta = theta;
            have_theta = true;
        }
        const double sig = st.sigma_tilde(source.radial[k], theta);
        acc += dt / (sig * sig);
        q[k + 1] = acc;
    }
    return q;
}

double invert_clock(const SamplePath& q, double t) {
    if (t <= 0.0) return 0.0;
    const auto& v = q.values;
    auto it = std::lower_bound(v.begin(), v.end(), t);
    if (it == v.end()) throw ClockUnderrun(t / std::max(v.back(), 1e-300));
    std::size_t k = static_cast<std::size_t>(it - v.begin());
    if (k == 0) return 0.0;
    const double frac = (t - v[k - 1]) / (v[k] - v[k - 1]);
    return q.grid.time(k - 1) + frac * q.grid.dt();
}

WalshPath time_change_walsh(const WalshPath& source, const ScaleTransform& st,
                            const TimeGrid& target_grid) {
    const SamplePath q = compute_clock(source, st);
    if (q.terminal() < target_grid.t_end)
        throw ClockUnderrun(target_grid.t_end / std::max(q.terminal(), 1e-300));

    WalshPath y;
    y.grid = target_grid;
    const std::size_t n = target_grid.n_points();
    y.radial.assign(n, 0.0);
    y.angle.assign(n, kNoAngle);
    y.excursion_id.assign(n, kNoExcursion);
    y.localtime.assign(n, 0.0);

    std::size_t k = 0;  // source step with q[k] <= t < q[k+1]
    for (std::size_t j = 0; j < n; ++j) {
        const double t = target_grid.time(j);
        while (k + 1 < q.n_points() && q[k + 1] < t) ++k;
        const std::size_t k1 = std::min(k + 1, q.n_points() - 1);
        double frac = 0.0;
        if (k1 > k && q[k1] > q[k]) frac = std::clamp((t - q[k]) / (q[k1] - q[k]), 0.0, 1.0);
        const double s_interp = source.radial[k] + frac * (source.radial[k1] - source.radial[k]);
        double theta = source.radial[k] > 0.0 ? source.angle[k] : source.angle[k1];
        if (s_interp <= 0.0) theta = kNoAngle;
        y.radial[j] = at_origin(theta) ? 0.0 : st.q(s_interp, theta);
        y.angle[j] = theta;
        y.localtime[j] =
            source.localtime[k] + frac * (source.localtime[k1] - source.localtime[k]);
    }
    // excursion ids: runs of constant ray between origin visits
    std::int32_t next_id = 0;
    for (std::size_t j = 0; j < n; ++j) {
        if (at_origin(y.angle[j])) continue;
        const bool fresh = j == 0 || at_origin(y.angle[j - 1]) || y.angle[j - 1] != y.angle[j];
        if (fresh) ++next_id;
        y.excursion_id[j] = next_id - 1;
    }
    return y;
}

WalshDiffusion simulate_walsh_bm_until_clock(const SpinningMeasure& mu, std::array<double, 2> x0,
                                             double dt, const ScaleTransform& st, double t_target,
                                             RngStream& driver_rng, RngStream& angle_rng,
                                             double horizon_guess, int max_doublings) {
    const double r0 = std::hypot(x0[0], x0[1]);
    double theta = r0 > 0.0 ? wrap_angle(std::atan2(x0[1], x0[0])) : kNoAngle;

    WalshDiffusion out;
    std::vector<double> radial{r0}, angle{theta}, localtime{0.0}, driver{r0};
    std::vector<std::int32_t> ids{r0 > 0.0 ? 0 : kNoExcursion};
    std::int32_t next_id = r0 > 0.0 ? 1 : 0;
    const double sdt = std::sqrt(dt);
    double s = r0, l = 0.0, u = r0, clock = 0.0;
    double clock_theta = r0 > 0.0 ? theta : 0.0;
    bool have_theta = r0 > 0.0;

    std::size_t budget = static_cast<std::size_t>(std::ceil(horizon_guess * t_target / dt));
    int doublings = 0;
    // 5% margin absorbs the slightly different ray attribution used by
    // compute_clock when it re-derives the clock from the assembled path
    const double stop_at = t_target * 1.05 + 100.0 * dt;
    while (clock <= stop_at) {
        if (radial.size() > budget) {
            if (doublings >= max_doublings)
                throw ClockUnderrun(t_target / std::max(clock, 1e-300));
            budget *= 2;
            ++doublings;
        }
        if (have_theta) clock_theta = at_origin(theta) ? clock_theta : theta;
        const double sig = st.sigma_tilde(s, have_theta ? clock_theta : 0.0);
        clock += dt / (sig * sig);
        const double inc = sdt * driver_rng.normal();
        u += inc;
        const double raw = s + inc;
        const bool was_zero = s == 0.0;
        std::int32_t id = ids.back();
        if (raw < 0.0) {
            l -= raw;
            s = 0.0;
            theta = kNoAngle;
            id = kNoExcursion;
        } else {
            s = raw;
            if (was_zero && s > 0.0) {
                theta = mu.sample(angle_rng);
                have_theta = true;
                id = next_id++;
            }
        }
        radial.push_back(s);
        angle.push_back(s > 0.0 ? theta : kNoAngle);
        ids.push_back(s > 0.0 ? id : kNoExcursion);
        localtime.push_back(l);
        driver.push_back(u);
    }

    const std::size_t n_steps = radial.size() - 1;
    out.path.grid = TimeGrid(static_cast<double>(n_steps) * dt, n_steps);
    out.path.radial = std::move(radial);
    out.path.angle = std::move(angle);
    out.path.excursion_id = std::move(ids);
    out.path.localtime = std::move(localtime);
    out.driver = SamplePath(out.path.grid, PathKind::driver, std::move(driver));
    return out;
}

double lt_downcrossing_mapped(const WalshPath& source, const ScaleTransform& st, double epsilon) {
    if (!(epsilon > 0.0)) throw ArgumentError("lt_downcrossing_mapped requires epsilon > 0");
    // Downcrossing counts are invariant under the time change, and the level
    // eps for |Y| maps to p_theta(eps) for the source radial part on each ray.
    bool seen_zero = false;
    bool above = false;
    double count = 0.0;
    for (std::size_t k = 0; k < source.n_points(); ++k) {
        const double v = source.radial[k];
        if (!seen_zero) {
            seen_zero = v == 0.0;
        } else if (!above) {
            if (v > 0.0 && !at_origin(source.angle[k]) && v >= st.p(epsilon, source.angle[k]))
                above = true;
        } else if (v == 0.0) {
            count += 1.0;
            above = false;
        }
    }
    return epsilon * count;
}

// ---------------------------------------------------------------------------
// Spinning-measure recovery

double AngleDistribution::frequency(double angle) const {
    auto it = counts.find(angle);
    if (it == counts.end() || total == 0) return 0.0;
    return static_cast<double>(it->second) / static_cast<double>(total);
}

double AngleDistribution::tv_against(const SpinningMeasure& mu) const {
    if (!mu.is_atomic()) throw ArgumentError("tv_against requires an atomic measure");
    double tv = 0.0;
    for (const Atom& a : mu.atoms()) tv += std::abs(frequency(a.angle) - a.weight);
    for (const auto& [angle, cnt] : counts) {
        bool known = false;
        for (const Atom& a : mu.atoms()) known = known || a.angle == angle;
        if (!known) tv += static_cast<double>(cnt) / static_cast<double>(total);
    }
    return 0.5 * tv;
}

double AngleDistribution::tv_against(const AngleDistribution& other) const {
    double tv = 0.0;
    for (const auto& [angle, cnt] : counts)
        tv += std::abs(static_cast<double>(cnt) / static_cast<double>(std::max<std::size_t>(total, 1)) -
                       other.frequency(angle));
    for (const auto& [angle, cnt] : other.counts)
        if (!counts.count(angle))
            tv += static_cast<double>(cnt) / static_cast<double>(std::max<std::size_t>(other.total, 1));
    return 0.5 * tv;
}

AngleDistribution estimate_spinning_measure_window(const WalshPath& w, double epsilon,
                                                   std::size_t first, std::size_t last) {
    if (!(epsilon > 0.0)) throw ArgumentError("estimate_spinning_measure requires epsilon > 0");
    last = std::min(last, w.n_points());
    AngleDistribution dist;
    bool seen_zero = false;
    bool above = false;
    for (std::size_t k = first; k < last; ++k) {
        const double v = w.radial[k];
        if (!seen_zero) {
            seen_zero = v == 0.0;
        } else if (!above) {
            if (v >= epsilon) {
                above = true;
                if (!at_origin(w.angle[k])) {
                    ++dist.counts[w.angle[k]];
                    ++dist.total;
                }
            }
        } else if (v == 0.0) {
            above = false;
        }
    }
    if (dist.total == 0)
        throw InsufficientData("no completed first exit at level epsilon in the window");
    return dist;
}

AngleDistribution estimate_spinning_measure(const WalshPath& w, double epsilon) {
    return estimate_spinning_measure_window(w, epsilon, 0, w.n_points());
}

// ---------------------------------------------------------------------------
// Mixed-measure construction (two spinning measures, switch at a point)

MixedMeasureResult mixed_measure_experiment(const SpinningMeasure& mu1, const SpinningMeasure& mu2,
                                            std::array<double, 2> switch_point, double tol,
                                            const TimeGrid& grid, RngStream& driver_rng,
                                            RngStream& angle_rng) {
    const double r_sw = std::hypot(switch_point[0], switch_point[1]);
    if (!(r_sw > 0.0)) throw ArgumentError("switch_point must differ from the origin");
    const double theta_sw = wrap_angle(std::atan2(switch_point[1], switch_point[0]));

    MixedMeasureResult out;
    out.path.grid = grid;
    const std::size_t n = grid.n_points();
    out.path.radial.assign(n, 0.0);
    out.path.angle.assign(n, kNoAngle);
    out.path.excursion_id.assign(n, kNoExcursion);
    out.path.localtime.assign(n, 0.0);

    const double dt = grid.dt();
    const double sdt = std::sqrt(dt);
    double s = 0.0, l = 0.0;
    double theta = kNoAngle;
    std::int32_t next_id = 0;
    bool switched = false;
    std::size_t switch_at = 0;
    for (std::size_t k = 0; k < grid.n_steps; ++k) {
        if (!switched &&
            tree_distance_polar(s, theta, r_sw, theta_sw) <= tol) {
            switched = true;
            switch_at = k;
        }
        const double inc = sdt * driver_rng.normal();
        const double raw = s + inc;
        const bool was_zero = s == 0.0;
        std::int32_t id = out.path.excursion_id[k];
        if (raw < 0.0) {
            l -= raw;
            s = 0.0;
            theta = kNoAngle;
            id = kNoExcursion;
        } else {
            s = raw;
            if (was_zero) {
                theta = (switched ? mu2 : mu1).sample(angle_rng);
                id = next_id++;
            }
        }
        out.path.radial[k + 1] = s;
        out.path.angle[k + 1] = s > 0.0 ? theta : kNoAngle;
        out.path.excursion_id[k + 1] = s > 0.0 ? id : kNoExcursion;
        out.path.localtime[k + 1] = l;
    }
    if (!switched) throw SwitchNotReached("switch point never approached within the horizon");
    out.switch_index = switch_at;
    return out;
}

// ---------------------------------------------------------------------------
// Flagship experiments

PolarDriftResult polar_drift_experiment(const std::function<double(double)>& lambda,
                                        bool angular_dependent, const SpinningMeasure& mu,
                                        double t_end, std::size_t n_paths, std::size_t n_steps,
                                        std::uint64_t seed, unsigned workers) {
    PolarDriftResult res;
    res.n_paths = n_paths;
    const TimeGrid grid(t_end, n_steps);

    struct Terminal {
        double r = 0.0;
        double theta = kNoAngle;
    };

    std::vector<Terminal> terms;
    if (!angular_dependent) {
        const double rate = lambda(0.0);
        terms = run_batch<Terminal>(n_paths, workers, [&](std::size_t i) {
            RngStream dr = RngStream::for_path(seed, i, RngStream::kDriver);
            RngStream ar = RngStream::for_path(seed, i, RngStream::kAngles);
            RadialCoefficients coeffs{[rate](double) { return -rate; }, [](double) { return 1.0; }};
            WalshDiffusion wd = simulate_walsh_diffusion(coeffs, mu, {0.0, 0.0}, grid, dr, ar);
            return Terminal{wd.path.radial.back(), wd.path.angle.back()};
        });
    } else {
        AngularCoefficients coeffs{[&lambda](double, double th) { return -lambda(th); },
                                   [](double, double) { return 1.0; }};
        std::vector<double> thetas;
        for (const Atom& a : mu.atoms()) thetas.push_back(a.angle);
        if (thetas.empty()) thetas = uniform_lattice(0.0, kTwoPi * (1.0 - 1.0 / 64.0), 63);
        const ScaleTransform st =
            ScaleTransform::build(coeffs, thetas, uniform_lattice(0.0, 12.0, 1024));
        const double dt = grid.dt();
        terms = run_batch<Terminal>(n_paths, workers, [&](std::size_t i) {
            RngStream dr = RngStream::for_path(seed, i, RngStream::kDriver);
            RngStream ar = RngStream::for_path(seed, i, RngStream::kAngles);
            WalshDiffusion src = simulate_walsh_bm_until_clock(mu, {0.0, 0.0}, dt, st, t_end, dr,
                                                               ar, 4.0);
            WalshPath y = time_change_walsh(src.path, st, grid);
            return Terminal{y.radial.back(), y.angle.back()};
        });
    }

    res.radial_samples.reserve(terms.size());
    for (const Terminal& t : terms) {
        res.radial_samples.push_back(t.r);
        if (!at_origin(t.theta)) res.angle_samples.push_back(t.theta);
    }
    const Summary s = summarize(res.radial_samples);
    res.mean_radial = s.mean;
    res.stderr_radial = s.stderr_of_mean;
    return res;
}

BesselSweepResult bessel_driver_experiment(const std::function<double(double)>& delta,
                                           bool angular_dependent, const SpinningMeasure& mu,
                                           const TimeGrid& grid, std::size_t n_paths,
                                           std::uint64_t seed, unsigned workers,
                                           std::vector<double> epsilons) {
    constexpr double kMargin = 0.05;
    for (double th = 0.0; th < kTwoPi; th += kTwoPi / 64.0)
        if (!(delta(th) >= 1.0 + kMargin && delta(th) <= 2.0 - kMargin))
            throw DomainError("delta(theta) must lie in [1.05, 1.95]");

    BesselSweepResult res;
    res.epsilons = epsilons;
    res.n_paths = n_paths;

    struct PerPath {
        std::vector<double> lt;
        double r_term = 0.0;
    };

    std::optional<ScaleTransform> st;
    if (angular_dependent) {
        std::vector<double> thetas;
        for (const Atom& a : mu.atoms()) thetas.push_back(a.angle);
        if (thetas.empty()) thetas = uniform_lattice(0.0, kTwoPi * (1.0 - 1.0 / 64.0), 63);
        st = ScaleTransform::bessel_family(delta, thetas);
    }

    auto per_path = [&](std::size_t i) {
        RngStream dr = RngStream::for_path(seed, i, RngStream::kDriver);
        RngStream ar = RngStream::for_path(seed, i, RngStream::kAngles);
        PerPath out;
        if (!angular_dependent) {
            const double d = delta(0.0);
            const double dt = grid.dt();
            const double sdt = std::sqrt(dt);
            SamplePath s(grid, PathKind::folded);
            double r2 = 0.0;
            s[0] = 0.0;
            for (std::size_t k = 0; k < grid.n_steps; ++k) {
                r2 = r2 + d * dt + 2.0 * std::sqrt(r2) * sdt * dr.normal();
                if (r2 < 0.0) r2 = 0.0;  // positivity-preserving floor
                if (!std::isfinite(r2)) throw NumericalBlowup(k + 1);
                s[k + 1] = std::sqrt(r2);
            }
            WalshPath path = unfold(s, mu, std::nullopt, ar);
            out.r_term = path.radial.back();
            for (double eps : epsilons) out.lt.push_back(lt_downcrossing(s, eps).terminal());
        } else {
            // squared-Bessel radial part via the closed-form scale family:
            // the source is a Walsh BM, the clock integrand sigma_tilde.
            // Downcrossings are counted on the source through the scale map
            // (resampling does not preserve exact zeros).
            WalshDiffusion src = simulate_walsh_bm_until_clock(mu, {0.0, 0.0}, grid.dt(), *st,
                                                               grid.t_end, dr, ar, 4.0);
            WalshPath path = time_change_walsh(src.path, *st, grid);
            out.r_term = path.radial.back();
            const SamplePath q = compute_clock(src.path, *st);
            const double t_src_end = invert_clock(q, grid.t_end);
            const std::size_t cut =
                std::min(src.path.n_points(),
                         static_cast<std::size_t>(std::ceil(t_src_end / src.path.grid.dt())) + 1);
            WalshPath clipped = src.path;
            clipped.radial.resize(cut);
            clipped.angle.resize(cut);
            clipped.excursion_id.resize(cut);
            clipped.localtime.resize(cut);
            for (double eps : epsilons) out.lt.push_back(lt_downcrossing_mapped(clipped, *st, eps));
        }
        return out;
    };

    auto results = run_batch<PerPath>(n_paths, workers, per_path);
    res.localtime_means.assign(epsilons.size(), 0.0);
    double mean_r = 0.0;
    for (const PerPath& pp : results) {
        mean_r += pp.r_term;
        for (std::size_t e = 0; e < epsilons.size(); ++e) res.localtime_means[e] += pp.lt[e];
    }
    for (auto& v : res.localtime_means) v /= static_cast<double>(n_paths);
    res.mean_radial = mean_r / static_cast<double>(n_paths);
    return res;
}

}  // namespace walsh
