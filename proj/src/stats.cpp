#include "walsh/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "walsh/errors.hpp"

namespace walsh {

namespace {

double gamma_p_series(double a, double x) {
    double ap = a;
    double sum = 1.0 / a;
    double del = sum;
    for (int n = 0; n < 500; ++n) {
        ap += 1.0;
        del *= x / ap;
        sum += del;
        if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q_contfrac(double a, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace

double gamma_p(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw ArgumentError("gamma_p requires x >= 0, a > 0");
    if (x == 0.0) return 0.0;
    return (x < a + 1.0) ? gamma_p_series(a, x) : 1.0 - gamma_q_contfrac(a, x);
}

double gamma_q(double a, double x) {
    if (x < 0.0 || a <= 0.0) throw ArgumentError("gamma_q requires x >= 0, a > 0");
    if (x == 0.0) return 1.0;
    return (x < a + 1.0) ? 1.0 - gamma_p_series(a, x) : gamma_q_contfrac(a, x);
}

double chi2_sf(double x, int dof) {
    if (dof <= 0) throw ArgumentError("chi2_sf requires dof > 0");
    if (x <= 0.0) return 1.0;
    return gamma_q(0.5 * dof, 0.5 * x);
}

ChiSquareResult chi_square_gof(std::span<const double> observed, std::span<const double> expected,
                               double min_expected) {
    if (observed.size() != expected.size() || observed.empty())
        throw ArgumentError("chi_square_gof requires matching, nonempty bins");
    // Pool adjacent bins until every expected count reaches min_expected.
    std::vector<double> obs(observed.begin(), observed.end());
    std::vector<double> exp(expected.begin(), expected.end());
    std::vector<double> obs_pooled, exp_pooled;
    double o_acc = 0.0, e_acc = 0.0;
    for (std::size_t i = 0; i < obs.size(); ++i) {
        o_acc += obs[i];
        e_acc += exp[i];
        if (e_acc >= min_expected) {
            obs_pooled.push_back(o_acc);
            exp_pooled.push_back(e_acc);
            o_acc = e_acc = 0.0;
        }
    }
    if (e_acc > 0.0 || o_acc > 0.0) {
        if (exp_pooled.empty()) {
            obs_pooled.push_back(o_acc);
            exp_pooled.push_back(e_acc);
        } else {
            obs_pooled.back() += o_acc;
            exp_pooled.back() += e_acc;
        }
    }
    ChiSquareResult r;
    r.dof = static_cast<int>(obs_pooled.size()) - 1;
    if (r.dof < 1) {
        r.dof = 0;
        r.statistic = 0.0;
        r.p_value = 1.0;
        return r;
    }
    for (std::size_t i = 0; i < obs_pooled.size(); ++i) {
        const double d = obs_pooled[i] - exp_pooled[i];
        r.statistic += d * d / exp_pooled[i];
    }
    r.p_value = chi2_sf(r.statistic, r.dof);
    return r;
}

namespace {

// Kolmogorov distribution tail Q_KS(lambda) = 2 sum_{j>=1} (-1)^{j-1} exp(-2 j^2 lambda^2).
double kolmogorov_q(double lambda) {
    if (lambda < 1e-8) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int j = 1; j <= 100; ++j) {
        const double term = std::exp(-2.0 * j * j * lambda * lambda);
        sum += sign * term;
        if (term < 1e-16) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace

KsResult ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw ArgumentError("ks_two_sample requires nonempty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size());
    const double nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    KsResult r;
    r.statistic = d;
    const double ne = std::sqrt(na * nb / (na + nb));
    r.p_value = kolmogorov_q((ne + 0.12 + 0.11 / ne) * d);
    return r;
}

double normal_two_sided_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

ZTestResult z_test(std::span<const double> samples) {
    if (samples.size() < 30) throw ArgumentError("z_test requires n >= 30");
    ZTestResult r;
    r.n = samples.size();
    double sum = 0.0;
    for (double v : samples) sum += v;
    r.mean = sum / static_cast<double>(r.n);
    double ss = 0.0;
    for (double v : samples) ss += (v - r.mean) * (v - r.mean);
    const double sd = std::sqrt(ss / static_cast<double>(r.n - 1));
    if (sd == 0.0) {
        r.degenerate = true;
        r.z = 0.0;
        r.p_value = r.mean == 0.0 ? 1.0 : 0.0;
        return r;
    }
    r.stderr_of_mean = sd / std::sqrt(static_cast<double>(r.n));
    r.z = r.mean / r.stderr_of_mean;
    r.p_value = normal_two_sided_p(r.z);
    return r;
}

Summary summarize(std::span<const double> samples) {
    Summary s;
    s.n = samples.size();
    if (s.n == 0) return s;
    s.min = std::numeric_limits<double>::infinity();
    s.max = -std::numeric_limits<double>::infinity();
    double sum = 0.0;
    for (double v : samples) {
        sum += v;
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
    }
    s.mean = sum / static_cast<double>(s.n);
    double ss = 0.0;
    for (double v : samples) ss += (v - s.mean) * (v - s.mean);
    s.stddev = s.n > 1 ? std::sqrt(ss / static_cast<double>(s.n - 1)) : 0.0;
    s.stderr_of_mean = s.n > 0 ? s.stddev / std::sqrt(static_cast<double>(s.n)) : 0.0;
    return s;
}

Histogram make_histogram(std::span<const double> samples, double lo, double hi, std::size_t bins) {
    if (!(hi > lo) || bins == 0) throw ArgumentError("make_histogram requires hi > lo and bins > 0");
    Histogram h;
    h.edges.resize(bins + 1);
    h.counts.assign(bins, 0.0);
    for (std::size_t i = 0; i <= bins; ++i)
        h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
    for (double v : samples) {
        if (v < lo || v >= hi) continue;
        auto idx = static_cast<std::size_t>((v - lo) / (hi - lo) * static_cast<double>(bins));
        if (idx >= bins) idx = bins - 1;
        h.counts[idx] += 1.0;
        ++h.total;
    }
    return h;
}

}  // namespace walsh
