#pragma once

#include <functional>
#include <span>
#include <string>

#include <json.hpp>

#include "walsh/grid.hpp"
#include "walsh/measures.hpp"
#include "walsh/unfolding.hpp"

namespace walsh {

enum class LocalTimeMethod { downcrossing, occupation, tanaka, regulator };

std::string to_string(LocalTimeMethod m);

struct LocalTimeEstimate {
    LocalTimeMethod method = LocalTimeMethod::tanaka;
    double epsilon = 0.0;  // 0 when the method has no bandwidth
    SamplePath value;      // nondecreasing, value(0) = 0
    std::vector<double> raw;  // pre-monotonization series where it differs
    std::size_t downcrossings = 0;  // completed (0, eps) cycles, when counted

    double terminal() const { return value.terminal(); }
};

// epsilon * N(t, epsilon) where N counts completed downcrossings of (0, eps):
// from an exact zero, first reach >= eps, then return to an exact zero.
LocalTimeEstimate lt_downcrossing(const SamplePath& s, double epsilon);

// S(t) - S(0) - sum_{k<t} 1{S(t_k) > 0} (U(t_{k+1}) - U(t_k)). The reported
// value path is the running maximum of the raw series; raw retained.
LocalTimeEstimate lt_tanaka(const SamplePath& s, const SamplePath& u);

// (1/2 eps) * sum_k 1{0 <= S(t_k) < eps} d<S>(t_k), with the quadratic
// variation supplied as a cumulative path.
LocalTimeEstimate lt_occupation(const SamplePath& s, double epsilon,
                                const SamplePath& quadratic_variation);

// Cumulative realized quadratic variation sum (Delta S)^2.
SamplePath realized_qv(const SamplePath& s);

// Cumulative analytic quadratic variation  sum a(S(t_k)) 1{S(t_k) > 0} dt.
SamplePath analytic_qv(const SamplePath& s, const std::function<double(double)>& a);

// Downcrossing estimate of the thinned process R^A = radial * 1{angle in A}.
LocalTimeEstimate thinned_local_time(const WalshPath& w, const AngleSet& A, double epsilon);

// Masked radial path of the thinned process (exact zeros off A).
SamplePath thinned_radial(const WalshPath& w, const AngleSet& A);

// One-sided occupation estimate for a signed component path over [0, eps).
LocalTimeEstimate lt_occupation_signed(const std::vector<double>& x, const TimeGrid& grid,
                                       double epsilon, const SamplePath& quadratic_variation);

// {method, epsilon, T, mean, stderr, n_paths}
nlohmann::ordered_json batch_summary(LocalTimeMethod method, double epsilon, double t_end,
                                     std::span<const double> terminal_values);

}  // namespace walsh
