#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <optional>
#include <vector>

#include "walsh/grid.hpp"
#include "walsh/measures.hpp"
#include "walsh/rng.hpp"

namespace walsh {

// Sentinel for "no ray": the path sits at the origin. Never 0.0, so angular
// statistics cannot be biased toward the zero ray.
inline constexpr double kNoAngle = std::numeric_limits<double>::quiet_NaN();
inline constexpr std::int32_t kNoExcursion = -1;

inline bool at_origin(double angle) { return std::isnan(angle); }

struct Excursion {
    std::size_t first = 0;  // first index with S > 0
    std::size_t last = 0;   // last index with S > 0 (inclusive)
    std::int32_t id = 0;
};

struct ExcursionDecomposition {
    std::vector<std::size_t> zero_indices;
    std::vector<Excursion> excursions;
};

// Maximal index intervals with S > 0 throughout; ids assigned in time order.
// Requires exact zeros (ArgumentError on any negative value).
ExcursionDecomposition excursion_decompose(const SamplePath& s);

// Planar Walsh path in polar storage: radial value, ray angle (sentinel at
// zeros), excursion id, and the accumulated local-time path.
struct WalshPath {
    TimeGrid grid;
    std::vector<double> radial;
    std::vector<double> angle;
    std::vector<std::int32_t> excursion_id;
    std::vector<double> localtime;

    std::size_t n_points() const { return radial.size(); }
    double x1(std::size_t k) const { return at_origin(angle[k]) ? 0.0 : radial[k] * std::cos(angle[k]); }
    double x2(std::size_t k) const { return at_origin(angle[k]) ? 0.0 : radial[k] * std::sin(angle[k]); }
};

// Skew-unfolds a folded path: every excursion beginning after the first zero
// receives an independent angle drawn from mu; an initial excursion with
// s(0) > 0 uses initial_angle (ArgumentError if missing). The local-time path
// is copied from `localtime` when given, else left at zero.
WalshPath unfold(const SamplePath& s, const SpinningMeasure& mu, std::optional<double> initial_angle,
                 RngStream& angle_rng, const SamplePath* localtime = nullptr);

// Tree (French railway) metric between planar points: r1 + r2 on distinct
// rays, |r1 - r2| on a common ray. Rays extracted by atan2 are compared with
// tolerance angle_tol.
double tree_distance(double x1, double y1, double x2, double y2, double angle_tol = 1e-12);

// Polar form with exact angle comparison (sentinel-aware).
double tree_distance_polar(double r1, double theta1, double r2, double theta2);

struct RayConstancyReport {
    std::size_t violations = 0;
    std::vector<std::size_t> indices;
};

// Counts indices where the angle changes within one excursion.
RayConstancyReport check_ray_constancy(const WalshPath& w);

// CSV dump "t,r,theta,x1,x2,excursion_id,L"; the sentinel serializes as an
// empty theta field and an empty excursion_id field.
void write_walsh_csv(std::ostream& os, const WalshPath& w);

}  // namespace walsh
