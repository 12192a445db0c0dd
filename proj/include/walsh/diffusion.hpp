#pragma once

#include <array>
#include <functional>
#include <map>
#include <optional>
#include <vector>

#include "walsh/drivers.hpp"
#include "walsh/measures.hpp"
#include "walsh/unfolding.hpp"

namespace walsh {

// Coefficients that may depend on the angular variable. `a` must be bounded
// and bounded away from zero on the working domain.
struct AngularCoefficients {
    std::function<double(double, double)> b;  // (r, theta) -> drift
    std::function<double(double, double)> a;  // (r, theta) -> dispersion^2
    double sigma(double r, double theta) const { return std::sqrt(a(r, theta)); }
};

struct WalshDiffusion {
    WalshPath path;
    SamplePath driver;  // U with S - L = U; quadratic variation via localtime module helpers
};

// Reflected diffusion for the radial part (drivers module) skew-unfolded with
// mu; an interior start uses arg(x0) for the initial ray.
WalshDiffusion simulate_walsh_diffusion(const RadialCoefficients& coeffs, const SpinningMeasure& mu,
                                        std::array<double, 2> x0, const TimeGrid& grid,
                                        RngStream& driver_rng, RngStream& angle_rng);

// Walsh Brownian motion: b = 0, sigma = 1.
WalshDiffusion simulate_walsh_bm(const SpinningMeasure& mu, std::array<double, 2> x0,
                                 const TimeGrid& grid, RngStream& driver_rng, RngStream& angle_rng);

// Direct Euler scheme for the angular system: the radial part moves with the
// coefficients of the current ray, and a fresh ray is drawn from mu at every
// departure from an exact zero.
WalshDiffusion simulate_angular_walsh_direct(const AngularCoefficients& coeffs,
                                             const SpinningMeasure& mu, std::array<double, 2> x0,
                                             const TimeGrid& grid, RngStream& driver_rng,
                                             RngStream& angle_rng);

// Per-angle scale function p_theta(r) = int_0^r exp(-2 int_0^xi b/a) dxi with
// inverse q_theta and the auxiliary dispersion
// sigma_tilde(r, theta) = p'_theta(q_theta(r)) * sigma_theta(q_theta(r)).
// Tables live on a radial lattice per lattice angle; angle queries snap to
// the nearest lattice angle, radial queries interpolate linearly (linear
// extension with the boundary slope beyond the lattice).
class ScaleTransform {
  public:
    // Nested adaptive quadrature (inner tolerance 1e-12 per panel, outer
    // 1e-9). Throws DomainError if a falls below a_floor on lattice probes.
    static ScaleTransform build(const AngularCoefficients& coeffs,
                                const std::vector<double>& theta_lattice,
                                const std::vector<double>& r_lattice, double a_floor = 1e-6);

    // Closed-form family for squared-Bessel radial parts (a = 4r, b = delta):
    // p_theta(r) = r^{(2 - delta)/2}, q_theta(r) = r^{2/(2 - delta)}.
    static ScaleTransform bessel_family(const std::function<double(double)>& delta,
                                        const std::vector<double>& theta_lattice);

    double p(double r, double theta) const;
    double p_prime(double r, double theta) const;
    double q(double r, double theta) const;
    double sigma_tilde(double r, double theta) const;
    double r_max() const { return r_max_; }

  private:
    struct PerAngle {
        double theta = 0.0;
        std::vector<double> p_vals;        // on r_lattice
        std::vector<double> p_prime_vals;  // on r_lattice
        // closed-form exponent for the Bessel family (p interpolation unused)
        std::optional<double> bessel_exponent;
        std::function<double(double)> sigma_of_r;  // dispersion at the angle
    };
    const PerAngle& nearest(double theta) const;
    static double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x);

    std::vector<double> r_lattice_;
    std::vector<PerAngle> angles_;
    double r_max_ = 0.0;
};

struct ClockPair {
    SamplePath q;                // nondecreasing clock on the source grid, Q(0) = 0
    std::vector<double> t_inv;   // inverse clock evaluated at target grid times
};

// Q(t) = sum dt / sigma_tilde^2(|X|, Theta) over the source grid.
SamplePath compute_clock(const WalshPath& source, const ScaleTransform& st);

// Inverse clock at a single time (linear interpolation inside a source step).
double invert_clock(const SamplePath& q, double t);

// Time-changed, rescaled path: |Y| = q(|X(T(.))|, arg X(T(.))),
// arg Y = arg X(T(.)). Throws ClockUnderrun (with the required horizon
// extension factor) when the source clock does not cover the target horizon.
WalshPath time_change_walsh(const WalshPath& source, const ScaleTransform& st,
                            const TimeGrid& target_grid);

// Walsh BM simulated until its clock covers t_target (chunked extension of
// one deterministic stream); horizon capped at max_factor times the initial
// guess.
WalshDiffusion simulate_walsh_bm_until_clock(const SpinningMeasure& mu, std::array<double, 2> x0,
                                             double dt, const ScaleTransform& st, double t_target,
                                             RngStream& driver_rng, RngStream& angle_rng,
                                             double horizon_guess, int max_doublings = 12);

// Downcrossing local-time estimate of a time-changed path, counted on the
// source path with the level mapped through the scale (eps -> p_theta(eps)).
double lt_downcrossing_mapped(const WalshPath& source, const ScaleTransform& st, double epsilon);

// Empirical distribution of first-exit angles at level eps (tau recursion).
struct AngleDistribution {
    std::map<double, std::size_t> counts;
    std::size_t total = 0;

    double frequency(double angle) const;
    // Total-variation distance against a purely atomic measure.
    double tv_against(const SpinningMeasure& mu) const;
    double tv_against(const AngleDistribution& other) const;
};

AngleDistribution estimate_spinning_measure(const WalshPath& w, double epsilon);
// Restriction to grid indices [first, last).
AngleDistribution estimate_spinning_measure_window(const WalshPath& w, double epsilon,
                                                   std::size_t first, std::size_t last);

struct MixedMeasureResult {
    WalshPath path;
    std::size_t switch_index = 0;
};

// Walsh BM with mu1 from the origin until the path comes within tree-distance
// tol of switch_point, then continued with mu2 (fresh driver segment) on the
// same grid. Throws SwitchNotReached when the horizon ends first.
MixedMeasureResult mixed_measure_experiment(const SpinningMeasure& mu1, const SpinningMeasure& mu2,
                                            std::array<double, 2> switch_point, double tol,
                                            const TimeGrid& grid, RngStream& driver_rng,
                                            RngStream& angle_rng);

struct PolarDriftResult {
    double mean_radial = 0.0;
    double stderr_radial = 0.0;
    std::vector<double> radial_samples;
    std::vector<double> angle_samples;  // sentinel-free terminal angles
    std::size_t n_paths = 0;
};

// Terminal sample of the drifted Walsh diffusion at time T. Constant rates
// run through simulate_walsh_diffusion with b = -lambda; angularly dependent
// rates run through the scale/time-change construction.
PolarDriftResult polar_drift_experiment(const std::function<double(double)>& lambda,
                                        bool angular_dependent, const SpinningMeasure& mu,
                                        double t_end, std::size_t n_paths, std::size_t n_steps,
                                        std::uint64_t seed, unsigned workers);

struct BesselSweepResult {
    std::vector<double> epsilons;
    std::vector<double> localtime_means;  // downcrossing estimate means per epsilon
    double mean_radial = 0.0;
    std::size_t n_paths = 0;
};

// Squared-Bessel driver (Euler on R^2 floored at 0), S = sqrt(R^2), unfolded
// with mu; angular delta uses the closed-form scale family and time change.
// Requires delta(theta) within (1 + margin, 2 - margin), margin = 0.05.
BesselSweepResult bessel_driver_experiment(const std::function<double(double)>& delta,
                                           bool angular_dependent, const SpinningMeasure& mu,
                                           const TimeGrid& grid, std::size_t n_paths,
                                           std::uint64_t seed, unsigned workers,
                                           std::vector<double> epsilons);

std::vector<double> uniform_lattice(double lo, double hi, std::size_t n);

}  // namespace walsh
