#pragma once

#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "walsh/errors.hpp"
#include "walsh/rng.hpp"

namespace walsh {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

// Wraps an angle into [0, 2*pi).
double wrap_angle(double theta);

struct Atom {
    double angle = 0.0;   // in [0, 2*pi)
    double weight = 0.0;  // in (0, 1]
};

// Angular moments of a spinning measure: alpha_i^{+-} and gamma = (gamma_1, gamma_2).
struct AngularMoments {
    std::array<double, 2> alpha_plus{};
    std::array<double, 2> alpha_minus{};
    std::array<double, 2> gamma{};
    double gamma_norm() const;
};

// Probability law on the unit circle driving ray selection: a discrete part
// (atoms) plus an optional absolutely continuous part given by a density on
// [0, 2*pi). The density is held as a table on a uniform angular grid with
// linear interpolation; a monotone CDF table (derived data) backs
// inverse-CDF sampling. Immutable after construction and safe to share
// across workers.
class SpinningMeasure {
  public:
    enum class DensityKind { none, uniform, table };

    static SpinningMeasure from_atoms(std::vector<Atom> atoms);
    static SpinningMeasure point_mass(double angle) { return from_atoms({{wrap_angle(angle), 1.0}}); }
    static SpinningMeasure two_point(double angle0, double w0, double angle1);
    static SpinningMeasure uniform();
    // Atoms plus a density given as a callable; the density is tabulated on
    // `table_size` intervals and scaled so its mass equals density_mass.
    static SpinningMeasure mixed(std::vector<Atom> atoms, const std::function<double(double)>& density,
                                 double density_mass, std::size_t table_size = 4096);

    static SpinningMeasure from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    const std::vector<Atom>& atoms() const { return atoms_; }
    DensityKind density_kind() const { return density_kind_; }
    double density_mass() const { return density_mass_; }
    double atom_mass() const { return atom_mass_; }
    bool is_atomic() const { return density_kind_ == DensityKind::none; }

    // Density value at an angle (0 when there is no density part).
    double density_at(double theta) const;

    // Mass of the density part on [a, b], 0 <= a <= b <= 2*pi.
    double density_mass_on(double a, double b) const;

    // Draws one angle distributed according to the measure.
    double sample(RngStream& rng) const;

  private:
    SpinningMeasure() = default;
    void finalize();  // validates invariants, builds the CDF cache

    std::vector<Atom> atoms_;
    DensityKind density_kind_ = DensityKind::none;
    double density_mass_ = 0.0;
    double atom_mass_ = 0.0;
    std::vector<double> density_values_;  // size table_size + 1, values on uniform grid
    std::vector<double> density_cdf_;     // size table_size + 1, cumulative mass, monotone
    std::vector<double> atom_cdf_;        // cumulative atom weights
};

// alpha_i^{+-} = integral of (f_i)^{+-} d(mu), gamma_i = alpha_i^+ - alpha_i^-,
// with f_1 = cos, f_2 = sin in polar form. Density integrated by adaptive
// quadrature to absolute tolerance 1e-10.
AngularMoments alpha_gamma(const SpinningMeasure& mu);

// Two-atom measure ((1+beta)/2) delta_{z0} + ((1-beta)/2) delta_{-z0} with
// beta = |gamma| and z0 = gamma/beta (angle 0 when beta = 0). Throws
// DomainError when |gamma| > 1: no measure with that barycenter exists.
SpinningMeasure measure_from_gamma(std::array<double, 2> gamma);

// nu([a, b)) for 0 <= a <= b <= 2*pi: atom weights in [a, b) plus density mass.
double nu_mass(const SpinningMeasure& mu, double a, double b);

// Integral of phi over [0, 2*pi) against the measure (atoms exactly, density
// by adaptive quadrature to tolerance 1e-10).
double integrate_against(const SpinningMeasure& mu, const std::function<double(double)>& phi,
                         double abs_tol = 1e-10);

// A finite union of disjoint half-open angle intervals within [0, 2*pi].
class AngleSet {
  public:
    AngleSet() = default;
    AngleSet(std::initializer_list<std::pair<double, double>> intervals);
    explicit AngleSet(std::vector<std::pair<double, double>> intervals);
    // [center - halfwidth, center + halfwidth) wrapped around the circle.
    static AngleSet neighborhood(double center, double halfwidth);
    static AngleSet full() { return AngleSet({{0.0, kTwoPi}}); }

    bool contains(double theta) const;
    double nu(const SpinningMeasure& mu) const;
    const std::vector<std::pair<double, double>>& intervals() const { return intervals_; }
    AngleSet unite(const AngleSet& other) const;

  private:
    std::vector<std::pair<double, double>> intervals_;
};

}  // namespace walsh
