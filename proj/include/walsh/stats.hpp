#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace walsh {

// Regularized incomplete gamma functions P(a, x) and Q(a, x) = 1 - P(a, x).
double gamma_p(double a, double x);
double gamma_q(double a, double x);

// Survival function of the chi-square distribution with dof degrees of freedom.
double chi2_sf(double x, int dof);

struct ChiSquareResult {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
    bool pass(double significance) const { return p_value > significance; }
};

// Goodness of fit of observed counts against expected counts (same total).
// Bins with expected count below min_expected are pooled into their neighbor.
ChiSquareResult chi_square_gof(std::span<const double> observed, std::span<const double> expected,
                               double min_expected = 5.0);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
    bool pass(double significance) const { return p_value > significance; }
};

// Two-sample Kolmogorov-Smirnov test (asymptotic p-value).
KsResult ks_two_sample(std::vector<double> a, std::vector<double> b);

struct ZTestResult {
    double z = 0.0;
    double p_value = 1.0;
    double mean = 0.0;
    double stderr_of_mean = 0.0;
    std::size_t n = 0;
    bool degenerate = false;  // zero sample standard deviation
};

// z = mean / (stddev / sqrt(n)); requires n >= 30 (ArgumentError otherwise).
ZTestResult z_test(std::span<const double> samples);

// Two-sided normal tail: P(|N(0,1)| > |z|).
double normal_two_sided_p(double z);

struct Summary {
    double mean = 0.0;
    double stddev = 0.0;
    double stderr_of_mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::size_t n = 0;
};

Summary summarize(std::span<const double> samples);

struct Histogram {
    std::vector<double> edges;   // size bins + 1
    std::vector<double> counts;  // size bins
    std::size_t total = 0;
};

Histogram make_histogram(std::span<const double> samples, double lo, double hi, std::size_t bins);

}  // namespace walsh
