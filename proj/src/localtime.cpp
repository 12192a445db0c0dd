#include "walsh/localtime.hpp"

#include <algorithm>
#include <cmath>

#include "walsh/stats.hpp"

namespace walsh {

std::string to_string(LocalTimeMethod m) {
    switch (m) {
        case LocalTimeMethod::downcrossing: return "downcrossing";
        case LocalTimeMethod::occupation: return "occupation";
        case LocalTimeMethod::tanaka: return "tanaka";
        case LocalTimeMethod::regulator: return "regulator";
    }
    return "?";
}

LocalTimeEstimate lt_downcrossing(const SamplePath& s, double epsilon) {
    if (!(epsilon > 0.0)) throw ArgumentError("lt_downcrossing requires epsilon > 0");
    LocalTimeEstimate est;
    est.method = LocalTimeMethod::downcrossing;
    est.epsilon = epsilon;
    est.value = SamplePath(s.grid, PathKind::localtime);
    // tau recursion: tau_0 = first exact zero; tau_{2l+1} = first index >= eps
    // after tau_{2l}; tau_{2l+2} = first exact zero after tau_{2l+1}.
    bool seen_zero = false;
    bool above = false;  // an exceedance of eps is pending its return to zero
    double acc = 0.0;
    for (std::size_t k = 0; k < s.n_points(); ++k) {
        const double v = s[k];
        if (v < 0.0) throw ArgumentError("lt_downcrossing requires a nonnegative path");
        if (!seen_zero) {
            seen_zero = v == 0.0;
        } else if (!above) {
            if (v >= epsilon) above = true;
        } else if (v == 0.0) {
            acc += epsilon;
            ++est.downcrossings;
            above = false;
        }
        est.value[k] = acc;
    }
    return est;
}

LocalTimeEstimate lt_tanaka(const SamplePath& s, const SamplePath& u) {
    require_same_grid(s, u, "lt_tanaka");
    LocalTimeEstimate est;
    est.method = LocalTimeMethod::tanaka;
    est.value = SamplePath(s.grid, PathKind::localtime);
    est.raw.assign(s.n_points(), 0.0);
    double integral = 0.0;
    double run_max = 0.0;
    est.raw[0] = 0.0;
    for (std::size_t k = 1; k < s.n_points(); ++k) {
        if (s[k - 1] > 0.0) integral += u[k] - u[k - 1];
        const double raw = s[k] - s[0] - integral;
        est.raw[k] = raw;
        run_max = std::max(run_max, raw);
        est.value[k] = run_max;
    }
    return est;
}

LocalTimeEstimate lt_occupation(const SamplePath& s, double epsilon,
                                const SamplePath& quadratic_variation) {
    if (!(epsilon > 0.0)) throw ArgumentError("lt_occupation requires epsilon > 0");
    require_same_grid(s, quadratic_variation, "lt_occupation");
    LocalTimeEstimate est;
    est.method = LocalTimeMethod::occupation;
    est.epsilon = epsilon;
    est.value = SamplePath(s.grid, PathKind::localtime);
    double acc = 0.0;
    for (std::size_t k = 1; k < s.n_points(); ++k) {
        const double prev = s[k - 1];
        if (prev >= 0.0 && prev < epsilon)
            acc += (quadratic_variation[k] - quadratic_variation[k - 1]) / (2.0 * epsilon);
        est.value[k] = acc;
    }
    return est;
}

SamplePath realized_qv(const SamplePath& s) {
    SamplePath qv(s.grid, PathKind::clock);
    double acc = 0.0;
    for (std::size_t k = 1; k < s.n_points(); ++k) {
        const double d = s[k] - s[k - 1];
        acc += d * d;
        qv[k] = acc;
    }
    return qv;
}

SamplePath analytic_qv(const SamplePath& s, const std::function<double(double)>& a) {
    SamplePath qv(s.grid, PathKind::clock);
    const double dt = s.grid.dt();
    double acc = 0.0;
    for (std::size_t k = 1; k < s.n_points(); ++k) {
        if (s[k - 1] > 0.0) acc += a(s[k - 1]) * dt;
        qv[k] = acc;
    }
    return qv;
}

SamplePath thinned_radial(const WalshPath& w, const AngleSet& A) {
    SamplePath r(w.grid, PathKind::folded);
    for (std::size_t k = 0; k < w.n_points(); ++k)
        r[k] = (!at_origin(w.angle[k]) && A.contains(w.angle[k])) ? w.radial[k] : 0.0;
    return r;
}

LocalTimeEstimate thinned_local_time(const WalshPath& w, const AngleSet& A, double epsilon) {
    if (A.intervals().empty()) throw ArgumentError("thinned_local_time requires a nonempty angle set");
    return lt_downcrossing(thinned_radial(w, A), epsilon);
}

LocalTimeEstimate lt_occupation_signed(const std::vector<double>& x, const TimeGrid& grid,
                                       double epsilon, const SamplePath& quadratic_variation) {
    if (!(epsilon > 0.0)) throw ArgumentError("lt_occupation_signed requires epsilon > 0");
    if (x.size() != grid.n_points() || quadratic_variation.n_points() != x.size())
        throw ArgumentError("lt_occupation_signed: length mismatch");
    LocalTimeEstimate est;
    est.method = LocalTimeMethod::occupation;
    est.epsilon = epsilon;
    est.value = SamplePath(grid, PathKind::localtime);
    double acc = 0.0;
    for (std::size_t k = 1; k < x.size(); ++k) {
        if (x[k - 1] >= 0.0 && x[k - 1] < epsilon)
            acc += (quadratic_variation[k] - quadratic_variation[k - 1]) / (2.0 * epsilon);
        est.value[k] = acc;
    }
    return est;
}

nlohmann::ordered_json batch_summary(LocalTimeMethod method, double epsilon, double t_end,
                                     std::span<const double> terminal_values) {
    const Summary s = summarize(terminal_values);
    nlohmann::ordered_json j;
    j["method"] = to_string(method);
    j["epsilon"] = epsilon;
    j["T"] = t_end;
    j["mean"] = s.mean;
    j["stderr"] = s.stderr_of_mean;
    j["n_paths"] = s.n;
    return j;
}

}  // namespace walsh
