#include "walsh/measures.hpp"

#include <algorithm>
#include <cmath>

#include "walsh/quadrature.hpp"

namespace walsh {

double wrap_angle(double theta) {
    double t = std::fmod(theta, kTwoPi);
    if (t < 0.0) t += kTwoPi;
    if (t >= kTwoPi) t = 0.0;
    return t;
}

double AngularMoments::gamma_norm() const { return std::hypot(gamma[0], gamma[1]); }

SpinningMeasure SpinningMeasure::from_atoms(std::vector<Atom> atoms) {
    SpinningMeasure m;
    m.atoms_ = std::move(atoms);
    m.finalize();
    return m;
}

SpinningMeasure SpinningMeasure::two_point(double angle0, double w0, double angle1) {
    return from_atoms({{wrap_angle(angle0), w0}, {wrap_angle(angle1), 1.0 - w0}});
}

SpinningMeasure SpinningMeasure::uniform() {
    SpinningMeasure m;
    m.density_kind_ = DensityKind::uniform;
    m.density_mass_ = 1.0;
    m.finalize();
    return m;
}

SpinningMeasure SpinningMeasure::mixed(std::vector<Atom> atoms,
                                       const std::function<double(double)>& density,
                                       double density_mass, std::size_t table_size) {
    SpinningMeasure m;
    m.atoms_ = std::move(atoms);
    if (density_mass > 0.0) {
        if (table_size < 8) throw ArgumentError("density table too small");
        m.density_kind_ = DensityKind::table;
        m.density_values_.resize(table_size + 1);
        const double h = kTwoPi / static_cast<double>(table_size);
        double raw_mass = 0.0;
        for (std::size_t i = 0; i <= table_size; ++i) {
            const double v = density(std::min(static_cast<double>(i) * h, kTwoPi));
            if (v < 0.0) throw ArgumentError("density must be nonnegative");
            m.density_values_[i] = v;
        }
        for (std::size_t i = 0; i < table_size; ++i)
            raw_mass += 0.5 * (m.density_values_[i] + m.density_values_[i + 1]) * h;
        if (!(raw_mass > 0.0)) throw ArgumentError("density part has zero mass");
        const double scale = density_mass / raw_mass;
        for (auto& v : m.density_values_) v *= scale;
        m.density_mass_ = density_mass;
    }
    m.finalize();
    return m;
}

void SpinningMeasure::finalize() {
    atom_mass_ = 0.0;
    std::sort(atoms_.begin(), atoms_.end(), [](const Atom& a, const Atom& b) { return a.angle < b.angle; });
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        const Atom& a = atoms_[i];
        if (!(a.weight > 0.0)) throw ArgumentError("atom weights must be positive");
        if (a.angle < 0.0 || a.angle >= kTwoPi) throw ArgumentError("atom angles must lie in [0, 2pi)");
        if (i > 0 && atoms_[i - 1].angle == a.angle) throw ArgumentError("atom angles must be distinct");
        atom_mass_ += a.weight;
    }
    if (std::abs(atom_mass_ + density_mass_ - 1.0) > 1e-12)
        throw ArgumentError("total mass must equal 1 within 1e-12");
    atom_cdf_.clear();
    double acc = 0.0;
    for (const Atom& a : atoms_) {
        acc += a.weight;
        atom_cdf_.push_back(acc);
    }
    if (density_kind_ == DensityKind::uniform) {
        density_values_.assign(2, density_mass_ / kTwoPi);
    }
    density_cdf_.clear();
    if (density_kind_ != DensityKind::none) {
        const std::size_t n = density_values_.size() - 1;
        const double h = kTwoPi / static_cast<double>(n);
        density_cdf_.resize(n + 1);
        density_cdf_[0] = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            density_cdf_[i + 1] = density_cdf_[i] + 0.5 * (density_values_[i] + density_values_[i + 1]) * h;
        // Exact mass at the right endpoint keeps sampling and nu_mass consistent.
        const double total = density_cdf_[n];
        if (total > 0.0)
            for (auto& c : density_cdf_) c *= density_mass_ / total;
    }
}

double SpinningMeasure::density_at(double theta) const {
    if (density_kind_ == DensityKind::none) return 0.0;
    if (density_kind_ == DensityKind::uniform) return density_mass_ / kTwoPi;
    const std::size_t n = density_values_.size() - 1;
    const double h = kTwoPi / static_cast<double>(n);
    double t = std::clamp(theta, 0.0, kTwoPi);
    auto i = std::min(static_cast<std::size_t>(t / h), n - 1);
    const double frac = (t - static_cast<double>(i) * h) / h;
    return density_values_[i] * (1.0 - frac) + density_values_[i + 1] * frac;
}

double SpinningMeasure::density_mass_on(double a, double b) const {
    if (density_kind_ == DensityKind::none) return 0.0;
    if (density_kind_ == DensityKind::uniform) return density_mass_ * (b - a) / kTwoPi;
    auto cdf_at = [&](double t) {
        const std::size_t n = density_values_.size() - 1;
        const double h = kTwoPi / static_cast<double>(n);
        t = std::clamp(t, 0.0, kTwoPi);
        auto i = std::min(static_cast<std::size_t>(t / h), n - 1);
        const double x0 = static_cast<double>(i) * h;
        const double frac = t - x0;
        const double v0 = density_values_[i];
        const double v1 = density_values_[i + 1];
        const double v_at = v0 + (v1 - v0) * (frac / h);
        // piecewise-linear density integrates to a quadratic within a cell
        return density_cdf_[i] + 0.5 * (v0 + v_at) * frac;
    };
    return cdf_at(b) - cdf_at(a);
}

double SpinningMeasure::sample(RngStream& rng) const {
    const double u = rng.uniform01();
    if (u < atom_mass_ || density_kind_ == DensityKind::none) {
        const double target = std::min(u, atom_mass_);
        auto it = std::lower_bound(atom_cdf_.begin(), atom_cdf_.end(), target);
        std::size_t idx = static_cast<std::size_t>(it - atom_cdf_.begin());
        if (idx >= atoms_.size()) idx = atoms_.size() - 1;
        return atoms_[idx].angle;
    }
    // Inverse CDF over the cached monotone table for the density part.
    const double target = (u - atom_mass_) / density_mass_ * density_cdf_.back();
    auto it = std::upper_bound(density_cdf_.begin(), density_cdf_.end(), target);
    std::size_t i = it == density_cdf_.begin()
                        ? 0
                        : static_cast<std::size_t>(it - density_cdf_.begin()) - 1;
    const std::size_t n = density_cdf_.size() - 1;
    if (i >= n) i = n - 1;
    const double h = kTwoPi / static_cast<double>(n);
    const double seg = density_cdf_[i + 1] - density_cdf_[i];
    const double frac = seg > 0.0 ? (target - density_cdf_[i]) / seg : 0.0;
    return wrap_angle((static_cast<double>(i) + frac) * h);
}

SpinningMeasure SpinningMeasure::from_json(const nlohmann::json& j) {
    std::vector<Atom> atoms;
    if (j.contains("atoms"))
        for (const auto& e : j.at("atoms")) atoms.push_back({e.at(0).get<double>(), e.at(1).get<double>()});
    if (!j.contains("density") || j.at("density").is_null()) return from_atoms(std::move(atoms));
    const auto& d = j.at("density");
    const std::string kind = d.at("kind").get<std::string>();
    const double mass = d.value("mass", 1.0);
    if (kind == "uniform") {
        if (atoms.empty() && std::abs(mass - 1.0) < 1e-12) return uniform();
        return mixed(std::move(atoms), [](double) { return 1.0; }, mass);
    }
    if (kind == "table") {
        std::vector<double> vals = d.at("values").get<std::vector<double>>();
        if (vals.size() < 2) throw ArgumentError("density table requires >= 2 values");
        const std::size_t n = vals.size() - 1;
        auto fn = [&vals, n](double theta) {
            const double h = kTwoPi / static_cast<double>(n);
            auto i = std::min(static_cast<std::size_t>(theta / h), n - 1);
            const double frac = (theta - static_cast<double>(i) * h) / h;
            return vals[i] * (1.0 - frac) + vals[i + 1] * frac;
        };
        return mixed(std::move(atoms), fn, mass, n);
    }
    throw ArgumentError("unknown density kind: " + kind);
}

nlohmann::json SpinningMeasure::to_json() const {
    nlohmann::json j;
    j["atoms"] = nlohmann::json::array();
    for (const Atom& a : atoms_) j["atoms"].push_back({a.angle, a.weight});
    if (density_kind_ == DensityKind::none) {
        j["density"] = nullptr;
    } else if (density_kind_ == DensityKind::uniform) {
        j["density"] = {{"kind", "uniform"}, {"mass", density_mass_}};
    } else {
        j["density"] = {{"kind", "table"}, {"mass", density_mass_}, {"values", density_values_}};
    }
    return j;
}

namespace {

// Integrates fn against the density part, splitting at quarter-circle points
// so the positive-part kinks of cos/sin never straddle a panel.
double density_integral(const SpinningMeasure& mu, const std::function<double(double)>& fn,
                        double abs_tol) {
    if (mu.density_kind() == SpinningMeasure::DensityKind::none) return 0.0;
    const double quarters[5] = {0.0, 0.25 * kTwoPi, 0.5 * kTwoPi, 0.75 * kTwoPi, kTwoPi};
    double total = 0.0;
    for (int p = 0; p < 4; ++p)
        total += integrate([&](double t) { return fn(t) * mu.density_at(t); }, quarters[p],
                           quarters[p + 1], abs_tol / 4.0);
    return total;
}

}  // namespace

double integrate_against(const SpinningMeasure& mu, const std::function<double(double)>& phi,
                         double abs_tol) {
    double total = 0.0;
    for (const Atom& a : mu.atoms()) total += a.weight * phi(a.angle);
    total += density_integral(mu, phi, abs_tol);
    return total;
}

AngularMoments alpha_gamma(const SpinningMeasure& mu) {
    AngularMoments m;
    auto pos = [](double v) { return v > 0.0 ? v : 0.0; };
    auto neg = [](double v) { return v < 0.0 ? -v : 0.0; };
    m.alpha_plus[0] = integrate_against(mu, [&](double t) { return pos(std::cos(t)); });
    m.alpha_minus[0] = integrate_against(mu, [&](double t) { return neg(std::cos(t)); });
    m.alpha_plus[1] = integrate_against(mu, [&](double t) { return pos(std::sin(t)); });
    m.alpha_minus[1] = integrate_against(mu, [&](double t) { return neg(std::sin(t)); });
    m.gamma[0] = m.alpha_plus[0] - m.alpha_minus[0];
    m.gamma[1] = m.alpha_plus[1] - m.alpha_minus[1];
    return m;
}

SpinningMeasure measure_from_gamma(std::array<double, 2> gamma) {
    const double beta = std::hypot(gamma[0], gamma[1]);
    if (beta > 1.0 + 1e-12)
        throw DomainError("|gamma| > 1: no spinning measure attains this barycenter");
    if (beta == 0.0) return SpinningMeasure::two_point(0.0, 0.5, std::acos(-1.0));
    const double theta0 = wrap_angle(std::atan2(gamma[1], gamma[0]));
    const double w0 = 0.5 * (1.0 + std::min(beta, 1.0));
    if (w0 >= 1.0) return SpinningMeasure::point_mass(theta0);
    return SpinningMeasure::two_point(theta0, w0, theta0 + std::acos(-1.0));
}

double nu_mass(const SpinningMeasure& mu, double a, double b) {
    if (a > b) throw ArgumentError("nu_mass requires a <= b");
    if (a < 0.0 || b > kTwoPi) throw ArgumentError("nu_mass interval must lie in [0, 2pi]");
    double total = 0.0;
    for (const Atom& atom : mu.atoms())
        if (atom.angle >= a && atom.angle < b) total += atom.weight;
    total += mu.density_mass_on(a, b);
    return total;
}

AngleSet::AngleSet(std::initializer_list<std::pair<double, double>> intervals)
    : AngleSet(std::vector<std::pair<double, double>>(intervals)) {}

AngleSet::AngleSet(std::vector<std::pair<double, double>> intervals) : intervals_(std::move(intervals)) {
    std::sort(intervals_.begin(), intervals_.end());
    for (std::size_t i = 0; i < intervals_.size(); ++i) {
        const auto& [a, b] = intervals_[i];
        if (a > b || a < 0.0 || b > kTwoPi) throw ArgumentError("AngleSet interval out of range");
        if (i > 0 && intervals_[i - 1].second > a) throw ArgumentError("AngleSet intervals must be disjoint");
    }
}

AngleSet AngleSet::neighborhood(double center, double halfwidth) {
    const double c = wrap_angle(center);
    const double lo = c - halfwidth;
    const double hi = c + halfwidth;
    std::vector<std::pair<double, double>> iv;
    if (lo < 0.0) {
        iv.push_back({0.0, hi});
        iv.push_back({wrap_angle(lo), kTwoPi});
    } else if (hi > kTwoPi) {
        iv.push_back({lo, kTwoPi});
        iv.push_back({0.0, hi - kTwoPi});
    } else {
        iv.push_back({lo, hi});
    }
    return AngleSet(std::move(iv));
}

bool AngleSet::contains(double theta) const {
    for (const auto& [a, b] : intervals_)
        if (theta >= a && theta < b) return true;
    return false;
}

double AngleSet::nu(const SpinningMeasure& mu) const {
    double total = 0.0;
    for (const auto& [a, b] : intervals_) total += nu_mass(mu, a, b);
    return total;
}

AngleSet AngleSet::unite(const AngleSet& other) const {
    auto iv = intervals_;
    iv.insert(iv.end(), other.intervals_.begin(), other.intervals_.end());
    return AngleSet(std::move(iv));
}

}  // namespace walsh
