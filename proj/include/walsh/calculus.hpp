#pragma once

#include <functional>
#include <string>
#include <vector>

#include "walsh/drivers.hpp"
#include "walsh/measures.hpp"
#include "walsh/stats.hpp"
#include "walsh/unfolding.hpp"

namespace walsh {

// Test function given by radial sections g_theta(r) with first and second
// radial derivatives; g1(0, theta) is the right derivative at the origin.
struct ClassDFunction {
    std::string name;
    std::function<double(double, double)> g;   // (r, theta)
    std::function<double(double, double)> g1;  // d/dr
    std::function<double(double, double)> g2;  // d^2/dr^2

    double at_origin() const { return g(0.0, 0.0); }
};

// L g(x) = b(r) g'_theta(r) + (1/2) a(r) g''_theta(r), defined off the origin.
// Throws DomainError at r <= 0.
double generator_apply(const ClassDFunction& g, const RadialCoefficients& coeffs, double r,
                       double theta);

// How the local-time term of the decomposition weights excursion-level
// local-time increments: by the excursion's own slope g'_theta(0+) (the
// pre-limit form of the change-of-variable formula), or by the nu-averaged
// slope (the limit coefficient) times the same local-time path.
enum class LocalTimeWeighting { per_excursion, nu_average };

struct FSDecomposition {
    SamplePath lhs;             // g(X(t))
    SamplePath stochastic_term;
    SamplePath drift_term;
    SamplePath localtime_term;
    SamplePath residual;        // lhs - g(x0) - sum of terms

    double terminal_residual() const { return residual.terminal(); }
};

// Grid change-of-variable decomposition along a Walsh path. `u` is the driver
// and `qv` its cumulative quadratic variation; the local-time increments are
// the raw Tanaka increments of (radial, driver).
FSDecomposition fs_decompose(const WalshPath& w, const SamplePath& u, const SamplePath& qv,
                             const ClassDFunction& g, const SpinningMeasure& mu,
                             LocalTimeWeighting weighting = LocalTimeWeighting::per_excursion);

struct SlopeAverage {
    SamplePath g_path;         // g_phi(X(t)) = |X| (phi(arg X) - int phi dnu)
    SamplePath integral_path;  // sum h_phi(X(t_k)) Delta U
    double sup_identity_gap = 0.0;  // sup_t |g_path - g_path(0) - integral|
    double terminal_increment = 0.0;  // g_phi(X(T)) - g_phi(X(0))
};

SlopeAverage slope_avg_process(const WalshPath& w, const std::function<double(double)>& phi,
                               const SpinningMeasure& mu, const SamplePath& u);

// z = mean / (stddev / sqrt(n)), two-sided p-value attached; n >= 30 required.
ZTestResult martingale_ztest(std::span<const double> terminal_increments);

// Built-in catalog: the polynomial family r(cos-g1), r(sin-g2), their
// products, r^2 cos^2, r^2 sin^2, r, a smooth radial blend that is the
// identity above c1, the indicator slopes r(1_A - nu(A)), r 1_A, and the
// slope-average function for phi.
std::vector<ClassDFunction> class_d_catalog(const SpinningMeasure& mu, const AngleSet& A,
                                            const std::function<double(double)>& phi,
                                            double c1 = 0.5);

// Smooth radial function: identity for r >= c1, fifth-degree blend on [0, c1]
// with zero first and second derivative at the origin.
ClassDFunction radial_identity_blend(double c1);

struct ClassDValidation {
    bool ok = true;
    double max_fd_error = 0.0;        // finite-difference mismatch on g1
    double max_tree_violation = 0.0;  // |g(r,.) - g(0,.)| - C r above tolerance
    double max_abs_g1 = 0.0;
    double max_abs_g2 = 0.0;
};

// Finite-difference and tree-continuity probes over r in (0, r_max], all
// atom angles of mu plus a uniform angle lattice.
ClassDValidation validate_class_d(const ClassDFunction& g, const SpinningMeasure& mu,
                                  double r_max = 3.0, std::size_t n_r = 60,
                                  std::size_t n_theta = 24);

}  // namespace walsh
