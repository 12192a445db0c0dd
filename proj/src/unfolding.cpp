#include "walsh/unfolding.hpp"

#include <cmath>
#include <ostream>

namespace walsh {

ExcursionDecomposition excursion_decompose(const SamplePath& s) {
    ExcursionDecomposition d;
    const std::size_t n = s.n_points();
    bool open = false;
    std::size_t start = 0;
    for (std::size_t k = 0; k < n; ++k) {
        const double v = s[k];
        if (v < 0.0) throw ArgumentError("excursion_decompose requires a nonnegative path");
        if (v == 0.0) {
            d.zero_indices.push_back(k);
            if (open) {
                d.excursions.push_back({start, k - 1, static_cast<std::int32_t>(d.excursions.size())});
                open = false;
            }
        } else if (!open) {
            open = true;
            start = k;
        }
    }
    if (open)
        d.excursions.push_back({start, n - 1, static_cast<std::int32_t>(d.excursions.size())});
    return d;
}

WalshPath unfold(const SamplePath& s, const SpinningMeasure& mu, std::optional<double> initial_angle,
                 RngStream& angle_rng, const SamplePath* localtime) {
    const auto decomp = excursion_decompose(s);
    if (s[0] > 0.0 && !initial_angle)
        throw ArgumentError("unfold: initial_angle required when s(0) > 0");
    if (localtime) require_same_grid(s, *localtime, "unfold");

    WalshPath w;
    w.grid = s.grid;
    const std::size_t n = s.n_points();
    w.radial.assign(s.values.begin(), s.values.end());
    w.angle.assign(n, kNoAngle);
    w.excursion_id.assign(n, kNoExcursion);
    w.localtime.assign(n, 0.0);
    if (localtime) w.localtime.assign(localtime->values.begin(), localtime->values.end());

    for (const Excursion& e : decomp.excursions) {
        const double theta =
            (e.first == 0) ? wrap_angle(*initial_angle) : mu.sample(angle_rng);
        for (std::size_t k = e.first; k <= e.last; ++k) {
            w.angle[k] = theta;
            w.excursion_id[k] = e.id;
        }
    }
    return w;
}

double tree_distance_polar(double r1, double theta1, double r2, double theta2) {
    if (r1 == 0.0) return r2;
    if (r2 == 0.0) return r1;
    const bool same = !at_origin(theta1) && !at_origin(theta2) && theta1 == theta2;
    return same ? std::abs(r1 - r2) : r1 + r2;
}

double tree_distance(double x1, double y1, double x2, double y2, double angle_tol) {
    const double r1 = std::hypot(x1, y1);
    const double r2 = std::hypot(x2, y2);
    if (r1 == 0.0) return r2;
    if (r2 == 0.0) return r1;
    const double t1 = wrap_angle(std::atan2(y1, x1));
    const double t2 = wrap_angle(std::atan2(y2, x2));
    double diff = std::abs(t1 - t2);
    diff = std::min(diff, kTwoPi - diff);
    return diff <= angle_tol ? std::abs(r1 - r2) : r1 + r2;
}

RayConstancyReport check_ray_constancy(const WalshPath& w) {
    RayConstancyReport rep;
    for (std::size_t k = 1; k < w.n_points(); ++k) {
        if (w.excursion_id[k] != kNoExcursion && w.excursion_id[k] == w.excursion_id[k - 1] &&
            w.angle[k] != w.angle[k - 1]) {
            ++rep.violations;
            rep.indices.push_back(k);
        }
    }
    return rep;
}

void write_walsh_csv(std::ostream& os, const WalshPath& w) {
    os << "t,r,theta,x1,x2,excursion_id,L\n";
    os.precision(17);
    for (std::size_t k = 0; k < w.n_points(); ++k) {
        os << w.grid.time(k) << ',' << w.radial[k] << ',';
        if (!at_origin(w.angle[k])) os << w.angle[k];
        os << ',' << w.x1(k) << ',' << w.x2(k) << ',';
        if (w.excursion_id[k] != kNoExcursion) os << w.excursion_id[k];
        os << ',' << w.localtime[k] << '\n';
    }
}

}  // namespace walsh
