#include "walsh/drivers.hpp"

#include <cmath>
#include <ostream>

namespace walsh {

SamplePath simulate_driver(const DriverSpec& spec, const TimeGrid& grid, RngStream& rng) {
    SamplePath u(grid, PathKind::driver);
    const double dt = grid.dt();
    const double sdt = std::sqrt(dt);
    u[0] = spec.u0;
    for (std::size_t k = 0; k < grid.n_steps; ++k) {
        const double x = u[k];
        const double next = x + spec.b(x) * dt + spec.sigma(x) * sdt * rng.normal();
        if (!std::isfinite(next)) throw NumericalBlowup(k + 1);
        u[k + 1] = next;
    }
    return u;
}

FoldResult skorokhod_fold(const SamplePath& u) {
    FoldResult r{SamplePath(u.grid, PathKind::folded), SamplePath(u.grid, PathKind::regulator)};
    double running = u[0] < 0.0 ? -u[0] : 0.0;
    for (std::size_t k = 0; k < u.n_points(); ++k) {
        if (-u[k] > running) running = -u[k];
        r.lambda[k] = running;
        r.s[k] = u[k] + running;  // exactly 0.0 whenever running == -u[k]
    }
    return r;
}

ReflectedDiffusion simulate_reflected_diffusion(const RadialCoefficients& coeffs, double r0,
                                                const TimeGrid& grid, RngStream& rng) {
    if (r0 < 0.0) throw ArgumentError("reflected diffusion requires r0 >= 0");
    ReflectedDiffusion out{SamplePath(grid, PathKind::folded), SamplePath(grid, PathKind::localtime),
                           SamplePath(grid, PathKind::driver)};
    const double dt = grid.dt();
    const double sdt = std::sqrt(dt);
    double s = r0, l = 0.0, u = r0;
    out.s[0] = s;
    out.localtime[0] = 0.0;
    out.driver[0] = u;
    for (std::size_t k = 0; k < grid.n_steps; ++k) {
        const double inc = coeffs.b(s) * dt + coeffs.sigma(s) * sdt * rng.normal();
        if (!std::isfinite(inc)) throw NumericalBlowup(k + 1);
        u += inc;
        const double raw = s + inc;
        if (raw < 0.0) {
            l -= raw;
            s = 0.0;
        } else {
            s = raw;
        }
        out.s[k + 1] = s;
        out.localtime[k + 1] = l;
        out.driver[k + 1] = u;
    }
    return out;
}

void write_fold_csv(std::ostream& os, const SamplePath& u, const SamplePath& s,
                    const SamplePath& lambda) {
    require_same_grid(u, s, "write_fold_csv");
    require_same_grid(u, lambda, "write_fold_csv");
    os << "t,U,S,Lambda\n";
    os.precision(17);
    for (std::size_t k = 0; k < u.n_points(); ++k)
        os << u.grid.time(k) << ',' << u[k] << ',' << s[k] << ',' << lambda[k] << '\n';
}

}  // namespace walsh
