#pragma once

#include <cstddef>
#include <vector>

#include "walsh/errors.hpp"

namespace walsh {

// Uniform grid t_k = k * dt, k = 0..n_steps, over [0, t_end].
struct TimeGrid {
    double t_end = 1.0;
    std::size_t n_steps = 0;

    TimeGrid() = default;
    TimeGrid(double t_end_, std::size_t n_steps_) : t_end(t_end_), n_steps(n_steps_) {
        if (!(t_end > 0.0) || n_steps == 0) throw ArgumentError("TimeGrid requires t_end > 0 and n_steps > 0");
    }

    double dt() const { return t_end / static_cast<double>(n_steps); }
    std::size_t n_points() const { return n_steps + 1; }
    double time(std::size_t k) const { return static_cast<double>(k) * dt(); }

    bool operator==(const TimeGrid& other) const {
        return t_end == other.t_end && n_steps == other.n_steps;
    }
};

enum class PathKind { driver, folded, regulator, localtime, clock };

// A scalar process sampled on a uniform grid.
struct SamplePath {
    TimeGrid grid;
    PathKind kind = PathKind::driver;
    std::vector<double> values;

    SamplePath() = default;
    SamplePath(TimeGrid g, PathKind k) : grid(g), kind(k), values(g.n_points(), 0.0) {}
    SamplePath(TimeGrid g, PathKind k, std::vector<double> v) : grid(g), kind(k), values(std::move(v)) {
        if (values.size() != grid.n_points())
            throw ArgumentError("SamplePath length does not match its grid");
    }

    std::size_t n_points() const { return values.size(); }
    double operator[](std::size_t k) const { return values[k]; }
    double& operator[](std::size_t k) { return values[k]; }
    double terminal() const { return values.back(); }
};

inline void require_same_grid(const SamplePath& a, const SamplePath& b, const char* what) {
    if (!(a.grid == b.grid) || a.values.size() != b.values.size())
        throw ArgumentError(std::string("grid mismatch in ") + what);
}

}  // namespace walsh
