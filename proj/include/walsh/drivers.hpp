#pragma once

#include <functional>
#include <iosfwd>

#include "walsh/grid.hpp"
#include "walsh/rng.hpp"

namespace walsh {

// Scalar coefficient pair for a driver SDE dU = b(U) dt + sigma(U) dW.
struct DriverSpec {
    std::function<double(double)> b;
    std::function<double(double)> sigma;
    double u0 = 0.0;
};

// Radial coefficients of a reflected Ito diffusion; sigma never vanishes.
struct RadialCoefficients {
    std::function<double(double)> b;
    std::function<double(double)> sigma;
    double a(double r) const {
        const double s = sigma(r);
        return s * s;
    }
};

// Euler-Maruyama path of the driver SDE on the grid. Throws NumericalBlowup
// (with the step index) if a value becomes non-finite.
SamplePath simulate_driver(const DriverSpec& spec, const TimeGrid& grid, RngStream& rng);

struct FoldResult {
    SamplePath s;       // folded path, S = U + Lambda, zero exactly where Lambda grows
    SamplePath lambda;  // regulator, nondecreasing running max of (-U)^+
};

// Skorokhod reflection of a driver path: Lambda(t_k) = max_{j<=k} (-U(t_j))^+,
// S = U + Lambda. At indices where the max is attained S is exactly 0.0.
FoldResult skorokhod_fold(const SamplePath& u);

struct ReflectedDiffusion {
    SamplePath s;          // nonnegative path with exact zeros
    SamplePath localtime;  // regulator = semimartingale local time for these drivers
    SamplePath driver;     // accumulated Euler increments, U = S - L
};

// Euler increments dS_hat = b(S) dt + sigma(S) sqrt(dt) Z folded stepwise by
// the discrete Skorokhod map of the increment process.
ReflectedDiffusion simulate_reflected_diffusion(const RadialCoefficients& coeffs, double r0,
                                                const TimeGrid& grid, RngStream& rng);

// CSV dump with header "t,U,S,Lambda".
void write_fold_csv(std::ostream& os, const SamplePath& u, const SamplePath& s,
                    const SamplePath& lambda);

}  // namespace walsh
