#include "walsh/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "walsh/batch.hpp"
#include "walsh/calculus.hpp"
#include "walsh/diffusion.hpp"
#include "walsh/io.hpp"
#include "walsh/localtime.hpp"

namespace walsh {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr double kZ99 = 2.5758293035489004;  // two-sided 99% normal quantile

const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names = {
        "fold-demo", "walsh-bm",   "skew-bm",   "tripod",      "polar-drift", "bessel",
        "thinning",  "fs-residual", "slope-avg", "time-change", "estimate-mu", "mixed-mu"};
    return names;
}

json measure_two_atom(double p) {
    return json{{"atoms", {{0.0, p}, {std::acos(-1.0), 1.0 - p}}}, {"density", nullptr}};
}

json measure_uniform() { return json{{"atoms", json::array()}, {"density", {{"kind", "uniform"}, {"mass", 1.0}}}}; }

json base_config(const std::string& name) {
    json j;
    j["experiment"] = name;
    j["measure"] = measure_two_atom(0.7);
    j["coefficients"] = nullptr;
    j["grid"] = {{"t_end", 1.0}, {"n_steps", 10000}};
    j["batch"] = {{"n_paths", 1000}, {"seed", 20240901}, {"workers", 0}};
    j["estimator"] = {{"epsilons", {0.04}}, {"method", "tanaka"}};
    j["output"] = {{"dir", "out-" + name}, {"formats", {"json", "csv"}}, {"per_path_csv", false}};
    j["params"] = json::object();
    return j;
}

json make_default_config(const std::string& name) {
    json j = base_config(name);
    if (name == "fold-demo") {
        j["batch"]["n_paths"] = 1;
        j["grid"] = {{"t_end", 1.0}, {"n_steps", 1000}};
        j["params"] = {{"driver", "linear_down"}, {"u0", 0.0}};
    } else if (name == "walsh-bm") {
        j["params"] = {{"x0", {0.0, 0.0}}, {"angle_bins", 12}};
        j["batch"]["n_paths"] = 4000;
        j["grid"]["n_steps"] = 1000;
    } else if (name == "skew-bm") {
        j["params"] = {{"p", 0.7}, {"hs_epsilon", 0.04}};
        j["batch"]["n_paths"] = 20000;
        j["grid"]["n_steps"] = 10000;
    } else if (name == "tripod") {
        j["measure"] = json{{"atoms",
                             {{0.0, 1.0 / 3.0},
                              {2.0943951023931953, 1.0 / 3.0},
                              {4.1887902047863905, 1.0 / 3.0}}},
                            {"density", nullptr}};
        j["params"] = json::object();
        j["batch"]["n_paths"] = 10000;
        j["grid"]["n_steps"] = 1000;
    } else if (name == "polar-drift") {
        j["params"] = {{"lambda", 0.5}, {"hist_max", 4.0}, {"hist_bins", 16}};
        j["grid"] = {{"t_end", 20.0}, {"n_steps", 100000}};
        j["batch"]["n_paths"] = 10000;
    } else if (name == "bessel") {
        j["params"] = {{"delta", 1.5}, {"delta_compare", 1.05}};
        j["estimator"]["epsilons"] = {0.04, 0.02, 0.01};
        j["grid"]["n_steps"] = 100000;
        j["batch"]["n_paths"] = 2000;
    } else if (name == "thinning") {
        j["params"] = {{"A_halfwidth", 0.15}};
        j["estimator"]["epsilons"] = {0.04};
        j["batch"]["n_paths"] = 10000;
        j["grid"]["n_steps"] = 10000;
    } else if (name == "fs-residual") {
        j["params"] = {{"n_steps_list", {1000, 10000, 100000}}, {"paths_per_dt", 160}};
        j["batch"]["n_paths"] = 160;
        j["grid"]["n_steps"] = 100000;
    } else if (name == "slope-avg") {
        j["measure"] = measure_uniform();
        j["params"] = {{"phis", {"half_indicator", "cos", "sin2"}}};
        j["batch"]["n_paths"] = 10000;
        j["grid"]["n_steps"] = 1000;
    } else if (name == "time-change") {
        j["measure"] = json{{"atoms", {{1.5707963267948966, 0.5}, {4.71238898038469, 0.5}}},
                            {"density", nullptr}};
        j["params"] = {{"lambda", {0.3, 0.7}},
                       {"x0_polar", {0.3, 1.5707963267948966}},
                       {"dt_source", 1e-4}};
        j["batch"]["n_paths"] = 10000;
        j["grid"] = {{"t_end", 1.0}, {"n_steps", 10000}};
    } else if (name == "estimate-mu") {
        j["params"] = {{"epsilon", 0.02}, {"min_excursions", 2000}};
        j["grid"] = {{"t_end", 4.0}, {"n_steps", 200000}};
        j["batch"]["n_paths"] = 40;
    } else if (name == "mixed-mu") {
        j["measure"] = json{{"atoms", {{0.0, 0.5}, {std::acos(-1.0), 0.5}}}, {"density", nullptr}};
        j["params"] = {{"mu2",
                        json{{"atoms", {{1.5707963267948966, 0.5}, {4.71238898038469, 0.5}}},
                             {"density", nullptr}}},
                       {"switch_point", {1.0, 0.0}},
                       {"tol", 0.05},
                       {"epsilon", 0.02}};
        j["grid"] = {{"t_end", 40.0}, {"n_steps", 2000000}};
        j["batch"]["n_paths"] = 1;
    }
    return j;
}

void check_field(std::vector<std::string>& errors, const json& j, const std::string& path,
                 const std::string& key, json::value_t type, bool required) {
    if (!j.contains(key)) {
        if (required) errors.push_back(path + key + ": missing");
        return;
    }
    const auto& v = j.at(key);
    const bool num_ok = type == json::value_t::number_float &&
                        (v.is_number_float() || v.is_number_integer() || v.is_number_unsigned());
    const bool int_ok = type == json::value_t::number_unsigned && v.is_number_integer() &&
                        v.get<long long>() >= 0;
    if (v.type() != type && !num_ok && !int_ok)
        errors.push_back(path + key + ": wrong type");
}

json merged_with_defaults(const json& input) {
    if (!input.contains("experiment") || !input.at("experiment").is_string()) return input;
    const std::string name = input.at("experiment").get<std::string>();
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) return input;
    json merged = make_default_config(name);
    for (const auto& [key, value] : input.items()) {
        if (value.is_object() && merged.contains(key) && merged[key].is_object()) {
            for (const auto& [k2, v2] : value.items()) merged[key][k2] = v2;
        } else {
            merged[key] = value;
        }
    }
    return merged;
}

}  // namespace

std::vector<std::string> list_experiments() { return experiment_names(); }

nlohmann::json default_config(const std::string& name) {
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), name) == names.end())
        throw ArgumentError("unknown experiment: " + name);
    return make_default_config(name);
}

std::vector<std::string> validate_config(const nlohmann::json& input) {
    std::vector<std::string> errors;
    if (!input.is_object()) return {"config: must be a JSON object"};
    if (!input.contains("experiment") || !input.at("experiment").is_string()) {
        errors.push_back("experiment: missing or not a string");
        return errors;
    }
    const std::string name = input.at("experiment").get<std::string>();
    const auto& names = experiment_names();
    if (std::find(names.begin(), names.end(), name) == names.end()) {
        errors.push_back("experiment: unknown name '" + name + "'");
        return errors;
    }
    const json j = merged_with_defaults(input);
    static const std::vector<std::string> allowed = {"experiment", "measure", "coefficients",
                                                     "grid",       "batch",   "estimator",
                                                     "output",     "params"};
    for (const auto& [key, _] : input.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            errors.push_back(key + ": unknown field");

    try {
        SpinningMeasure::from_json(j.at("measure"));
    } catch (const std::exception& e) {
        errors.push_back(std::string("measure: ") + e.what());
    }
    if (j.contains("grid") && j.at("grid").is_object()) {
        check_field(errors, j.at("grid"), "grid.", "t_end", json::value_t::number_float, true);
        check_field(errors, j.at("grid"), "grid.", "n_steps", json::value_t::number_unsigned, true);
        if (j.at("grid").value("t_end", 1.0) <= 0.0) errors.push_back("grid.t_end: must be > 0");
        if (j.at("grid").value("n_steps", 1) < 1) errors.push_back("grid.n_steps: must be >= 1");
    } else {
        errors.push_back("grid: missing object");
    }
    if (j.contains("batch") && j.at("batch").is_object()) {
        const auto& b = j.at("batch");
        check_field(errors, b, "batch.", "n_paths", json::value_t::number_unsigned, true);
        check_field(errors, b, "batch.", "seed", json::value_t::number_unsigned, true);
        if (b.contains("n_paths") && b.at("n_paths").is_number_integer() && b.at("n_paths").get<long long>() < 1)
            errors.push_back("batch.n_paths: must be >= 1");
    } else {
        errors.push_back("batch: missing object (seed is required)");
    }
    if (j.contains("estimator") && j.at("estimator").is_object()) {
        const auto& e = j.at("estimator");
        if (e.contains("epsilons")) {
            if (!e.at("epsilons").is_array()) {
                errors.push_back("estimator.epsilons: must be an array");
            } else {
                for (const auto& eps : e.at("epsilons"))
                    if (!eps.is_number() || eps.get<double>() <= 0.0)
                        errors.push_back("estimator.epsilons: entries must be positive numbers");
            }
        }
        if (e.contains("method")) {
            const std::string m = e.at("method").get<std::string>();
            if (m != "tanaka" && m != "downcrossing" && m != "occupation" && m != "regulator")
                errors.push_back("estimator.method: unknown method '" + m + "'");
        }
    }
    if (j.contains("output") && j.at("output").is_object()) {
        const auto& o = j.at("output");
        if (o.contains("formats")) {
            for (const auto& f : o.at("formats"))
                if (f != "json" && f != "csv") errors.push_back("output.formats: only json/csv");
        }
    }
    return errors;
}

ExperimentConfig parse_config(const nlohmann::json& input) {
    auto errors = validate_config(input);
    if (!errors.empty()) throw ArgumentError(errors.front());
    const json j = merged_with_defaults(input);
    ExperimentConfig c;
    c.experiment = j.at("experiment").get<std::string>();
    c.measure = j.at("measure");
    c.coefficients = j.value("coefficients", json());
    c.t_end = j.at("grid").at("t_end").get<double>();
    c.n_steps = j.at("grid").at("n_steps").get<std::size_t>();
    c.n_paths = j.at("batch").at("n_paths").get<std::size_t>();
    c.seed = j.at("batch").at("seed").get<std::uint64_t>();
    c.workers = j.at("batch").value("workers", 0u);
    if (j.contains("estimator")) {
        c.epsilons = j.at("estimator").value("epsilons", std::vector<double>{0.04});
        c.lt_method = j.at("estimator").value("method", std::string("tanaka"));
    }
    const auto& o = j.at("output");
    c.out_dir = o.value("dir", "out-" + c.experiment);
    c.per_path_csv = o.value("per_path_csv", false);
    c.want_csv = false;
    for (const auto& f : o.value("formats", std::vector<std::string>{"json", "csv"}))
        if (f == "csv") c.want_csv = true;
    c.params = j.value("params", json::object());
    return c;
}

// ---------------------------------------------------------------------------
// shared helpers

namespace {

ordered_json config_echo(const ExperimentConfig& c) {
    // deterministic echo: excludes output location and worker count
    ordered_json e;
    e["experiment"] = c.experiment;
    e["measure"] = ordered_json::parse(c.measure.dump());
    if (!c.coefficients.is_null()) e["coefficients"] = ordered_json::parse(c.coefficients.dump());
    e["grid"] = {{"t_end", c.t_end}, {"n_steps", c.n_steps}};
    e["batch"] = {{"n_paths", c.n_paths}, {"seed", c.seed}};
    e["estimator"] = {{"epsilons", c.epsilons}, {"method", c.lt_method}};
    e["params"] = ordered_json::parse(c.params.dump());
    return e;
}

ordered_json ztest_json(const ZTestResult& z) {
    return ordered_json{{"z", z.z},
                        {"p_value", z.p_value},
                        {"mean", z.mean},
                        {"stderr", z.stderr_of_mean},
                        {"n", z.n},
                        {"degenerate", z.degenerate}};
}

// chi-square of terminal angles against nu; atomic measures use exact atom
// categories, others a uniform binning.
ChiSquareResult chi2_angles(const std::vector<double>& angles, const SpinningMeasure& mu,
                            std::size_t bins) {
    const double n = static_cast<double>(angles.size());
    std::vector<double> obs, exp;
    if (mu.is_atomic()) {
        std::map<double, double> counts;
        double stray = 0.0;
        for (double a : angles) {
            bool matched = false;
            for (const Atom& atom : mu.atoms())
                if (atom.angle == a) {
                    counts[atom.angle] += 1.0;
                    matched = true;
                    break;
                }
            if (!matched) stray += 1.0;
        }
        for (const Atom& atom : mu.atoms()) {
            obs.push_back(counts[atom.angle]);
            exp.push_back(n * atom.weight);
        }
        if (stray > 0.0) {
            obs.push_back(stray);
            exp.push_back(1e-9);
        }
    } else {
        for (std::size_t b = 0; b < bins; ++b) {
            const double lo = kTwoPi * static_cast<double>(b) / static_cast<double>(bins);
            const double hi = kTwoPi * static_cast<double>(b + 1) / static_cast<double>(bins);
            double cnt = 0.0;
            for (double a : angles) cnt += (a >= lo && a < hi) ? 1.0 : 0.0;
            obs.push_back(cnt);
            exp.push_back(n * nu_mass(mu, lo, hi));
        }
    }
    return chi_square_gof(obs, exp);
}

struct TerminalSample {
    double radial = 0.0;
    double angle = kNoAngle;
    double x1 = 0.0;
    double x2 = 0.0;
};

std::vector<TerminalSample> walsh_bm_terminals(const SpinningMeasure& mu, std::array<double, 2> x0,
                                               const TimeGrid& grid, std::size_t n_paths,
                                               std::uint64_t seed, unsigned workers) {
    return run_batch<TerminalSample>(n_paths, workers, [&](std::size_t i) {
        RngStream dr = RngStream::for_path(seed, i, RngStream::kDriver);
        RngStream ar = RngStream::for_path(seed, i, RngStream::kAngles);
        WalshDiffusion wd = simulate_walsh_bm(mu, x0, grid, dr, ar);
        const std::size_t last = wd.path.n_points() - 1;
        return TerminalSample{wd.path.radial[last], wd.path.angle[last], wd.path.x1(last),
                              wd.path.x2(last)};
    });
}

std::function<double(double)> phi_by_name(const std::string& name) {
    if (name == "half_indicator") return [](double t) { return t < 0.5 * kTwoPi ? 1.0 : 0.0; };
    if (name == "cos") return [](double t) { return std::cos(t); };
    if (name == "sin2") return [](double t) { return std::sin(2.0 * t); };
    throw ArgumentError("params.phis: unknown phi '" + name + "'");
}

// ---------------------------------------------------------------------------
// runners

ordered_json run_fold_demo(const ExperimentConfig& c, ArtifactWriter& out) {
    const TimeGrid grid(c.t_end, c.n_steps);
    const std::string kind = c.params.value("driver", "linear_down");
    const double u0 = c.params.value("u0", 0.0);
    SamplePath u(grid, PathKind::driver);
    if (kind == "linear_down" || kind == "linear_up") {
        const double slope = kind == "linear_down" ? -1.0 : 1.0;
        for (std::size_t k = 0; k < u.n_points(); ++k) u[k] = u0 + slope * grid.time(k);
    } else if (kind == "brownian") {
        DriverSpec spec{[](double) { return 0.0; }, [](double) { return 1.0; }, u0};
        RngStream rng = RngStream::for_path(c.seed, 0, RngStream::kDriver);
        u = simulate_driver(spec, grid, rng);
    } else {
        throw ArgumentError("params.driver: unknown driver '" + kind + "'");
    }
    const FoldResult fold = skorokhod_fold(u);

    std::size_t flat_violations = 0;  // Lambda may grow only where S == 0
    bool identity = true;
    for (std::size_t k = 0; k < u.n_points(); ++k) {
        if (k > 0 && fold.lambda[k] > fold.lambda[k - 1] && fold.s[k] != 0.0) ++flat_violations;
        identity = identity && fold.s[k] == u[k] + fold.lambda[k];
    }
    if (c.want_csv) {
        std::ostringstream os;
        write_fold_csv(os, u, fold.s, fold.lambda);
        out.add("path.csv", os.str());
    }
    ordered_json s;
    s["terminal"] = {{"U", u.terminal()}, {"S", fold.s.terminal()}, {"Lambda", fold.lambda.terminal()}};
    s["fold_identity_bitwise"] = identity;
    s["lambda_growth_off_zero"] = flat_violations;
    return s;
}

ordered_json run_walsh_bm(const ExperimentConfig& c, ArtifactWriter& out) {
    const SpinningMeasure mu = SpinningMeasure::from_json(c.measure);
    const TimeGrid grid(c.t_end, c.n_steps);
    const auto x0v = c.params.value("x0", std::vector<double>{0.0, 0.0});
    const std::array<double, 2> x0{x0v.at(0), x0v.at(1)};
    auto terms = walsh_bm_terminals(mu, x0, grid, c.n_paths, c.seed, c.workers);

    std::vector<double> radial, angles;
    for (const auto& t : terms) {
        radial.push_back(t.radial);
        if (!at_origin(t.angle)) angles.push_back(t.angle);
    }
    const Summary rs = summarize(radial);
    const auto chi2 = chi2_angles(angles, mu, c.params.value("angle_bins", 12));

    if (c.want_csv) {
        const Histogram h = make_histogram(radial, 0.0, rs.max + 1e-12, 24);
        out.add("radial_hist.csv", histogram_csv(h));
    }
    if (c.per_path_csv) {
        for (std::size_t i = 0; i < std::min<std::size_t>(c.n_paths, 3); ++i) {
            RngStream dr = RngStream::for_path(c.seed, i, RngStream::kDriver);
            RngStream ar = RngStream::for_path(c.seed, i, RngStream::kAngles);
            WalshDiffusion wd = simulate_walsh_bm(mu, x0, grid, dr, ar);
            std::ostringstream os;
            write_walsh_csv(os, wd.path);
            out.add("path_" + std::to_string(i) + ".csv", os.str());
        }
    }
    ordered_json s;
    s["mean_radial"] = rs.mean;
    s["stderr_radial"] = rs.stderr_of_mean;
    s["expected_mean_radial"] = std::sqrt(2.0 * c.t_end / std::acos(-1.0));
    s["zero_fraction"] = 1.0 - static_cast<double>(angles.size()) / static_cast<double>(c.n_paths);
    s["angular_chi2"] = {{"statistic", chi2.statistic}, {"dof", chi2.dof}, {"p_value", chi2.p_value}};
    return s;
}

ordered_json run_skew_bm(const ExperimentConfig& c, ArtifactWriter&) {
    const double p = c.params.value("p", 0.7);
    if (!(p > 0.0 && p < 1.0)) throw ArgumentError("params.p: must lie in (0, 1)");
    const SpinningMeasure mu = SpinningMeasure::from_json(measure_two_atom(p));
    const TimeGrid grid(c.t_end, c.n_steps);
    const double gamma1 = 2.0 * p - 1.0;

    struct PathStats {
        double positive = 0.0;
        double hs_residual = 0.0;
        double component_ratio_num = 0.0;
        double component_ratio_den = 0.0;
    };
    const double eps = c.params.value("hs_epsilon", 0.04);
    auto stats = run_batch<PathStats>(c.n_paths, c.workers, [&](std::size_t i) {
        RngStream dr = RngStream::for_path(c.seed, i, RngStream::kDriver);
        RngStream ar = RngStream::for_path(c.seed, i, RngStream::kAngles);
        WalshDiffusion wd = simulate_walsh_bm(mu, {0.0, 0.0}, grid, dr, ar);
        const auto& w = wd.path;
        const std::size_t n = w.n_points();
        PathStats ps;
        ps.positive = w.x1(n - 1) > 0.0 ? 1.0 : 0.0;
        // driver form of the two-ray equation: X1 - x1 - sum sgn(X1) dU = gamma1 * L
        double integral = 0.0;
        std::vector<double> x1(n);
        for (std::size_t k = 0; k < n; ++k) x1[k] = w.x1(k);
        for (std::size_t k = 0; k + 1 < n; ++k)
            if (x1[k] != 0.0) integral += (x1[k] > 0.0 ? 1.0 : -1.0) * (wd.driver[k + 1] - wd.driver[k]);
        SamplePath radial(grid, PathKind::folded, std::vector<double>(w.radial));
        const double lt = lt_tanaka(radial, wd.driver).raw.back();
        ps.hs_residual = x1[n - 1] - x1[0] - integral - gamma1 * lt;
        // component local time against the full one, same-bandwidth occupation
        std::vector<double> qv_x1(n, 0.0);
        const double dt = grid.dt();
        for (std::size_t k = 1; k < n; ++k)
            qv_x1[k] = qv_x1[k - 1] + (w.radial[k - 1] > 0.0 ? dt : 0.0);
        SamplePath qv(grid, PathKind::clock, std::move(qv_x1));
        ps.component_ratio_num = lt_occupation_signed(x1, grid, eps, qv).terminal();
        ps.component_ratio_den = lt_occupation(radial, eps, qv).terminal();
        return ps;
    });

    double pos = 0.0, hs2 = 0.0, num = 0.0, den = 0.0;
    for (const auto& ps : stats) {
        pos += ps.positive;
        hs2 += ps.hs_residual * ps.hs_residual;
        num += ps.component_ratio_num;
        den += ps.component_ratio_den;
    }
    const double n = static_cast<double>(c.n_paths);
    const double p_hat = pos / n;
    const double halfwidth = kZ99 * std::sqrt(p * (1.0 - p) / n);

    ordered_json s;
    s["p_x1_positive"] = p_hat;
    s["target"] = p;
    s["ci99_halfwidth"] = halfwidth;
    s["ci99_pass"] = std::abs(p_hat - p) <= halfwidth;
    s["hs_coefficient"] = (1.0 - 2.0 * (1.0 - p)) / p;  // against L^{X_1}
    s["hs_residual_rms"] = std::sqrt(hs2 / n);
    s["component_lt_ratio"] = num / den;
    s["alpha1_plus"] = p;
    return s;
}

ordered_json run_tripod(const ExperimentConfig& c, ArtifactWriter&) {
    const SpinningMeasure mu = SpinningMeasure::from_json(c.measure);
    const TimeGrid grid(c.t_end, c.n_steps);
    auto terms = walsh_bm_terminals(mu, {0.0, 0.0}, grid, c.n_paths, c.seed, c.workers);
    std::vector<double> x1, x2;
    for (const auto& t : terms) {
        x1.push_back(t.x1);
        x2.push_back(t.x2);
    }
    const ZTestResult z1 = z_test(x1);
    const ZTestResult z2 = z_test(x2);
    ordered_json s;
    s["x1_ztest"] = ztest_json(z1);
    s["x2_ztest"] = ztest_json(z2);
    s["both_pass"] = std::abs(z1.z) < 3.0 && std::abs(z2.z) < 3.0;
    return s;
}

ordered_json run_polar_drift(const ExperimentConfig& c, ArtifactWriter& out) {
    const SpinningMeasure mu = SpinningMeasure::from_json(c.measure);
    const auto& lam = c.params.at("lambda");
    const bool angular = lam.is_array();
    std::function<double(double)> lambda;
    if (angular) {
        const double l1 = lam.at(0).get<double>();
        const double l2 = lam.at(1).get<double>();
        if (!(l1 > 0.0 && l2 > 0.0)) throw ArgumentError("params.lambda: rates must be positive");
        lambda = [l1, l2](double th) { return th < 0.5 * kTwoPi ? l1 : l2; };
    } else {
        const double l = lam.get<double>();
        if (!(l > 0.0)) throw ArgumentError("params.lambda: rate must be positive");
        lambda = [l](double) { return l; };
    }
    const PolarDriftResult res = polar_drift_experiment(lambda, angular, mu, c.t_end, c.n_paths,
                                                        c.n_steps, c.seed, c.workers);

    ordered_json s;
    s["mean_radial"] = res.mean_radial;
    s["stderr_radial"] = res.stderr_radial;
    if (!angular) {
        const double l = lambda(0.0);
        s["expected_mean_radial"] = 1.0 / (2.0 * l);
        // radial marginal against the stationary density 2 lambda e^{-2 lambda r}
        const double hist_max = c.params.value("hist_max", 4.0);
        const std::size_t bins = c.params.value("hist_bins", 16);
        const Histogram h = make_histogram(res.radial_samples, 0.0, hist_max, bins);
        std::vector<double> obs(h.counts.begin(), h.counts.end());
        std::vector<double> exp;
        const double n = static_cast<double>(res.radial_samples.size());
        for (std::size_t b = 0; b < bins; ++b) {
            const double F0 = 1.0 - std::exp(-2.0 * l * h.edges[b]);
            const double F1 = 1.0 - std::exp(-2.0 * l * h.edges[b + 1]);
            exp.push_back(n * (F1 - F0));
        }
        obs.push_back(n - static_cast<double>(h.total));  // tail mass
        exp.push_back(n * std::exp(-2.0 * l * hist_max));
        const auto chi2 = chi_square_gof(obs, exp);
        s["radial_chi2"] = {{"statistic", chi2.statistic}, {"dof", chi2.dof}, {"p_value", chi2.p_value}};
        if (c.want_csv) out.add("radial_hist.csv", histogram_csv(h));
    }
    const auto chi2a = chi2_angles(res.angle_samples, mu, 12);
    s["angular_chi2"] = {{"statistic", chi2a.statistic}, {"dof", chi2a.dof}, {"p_value", chi2a.p_value}};
    return s;
}

ordered_json run_bessel(const ExperimentConfig& c, ArtifactWriter&) {
    const SpinningMeasure mu = SpinningMeasure::from_json(c.measure);
    const TimeGrid grid(c.t_end, c.n_steps);
    const auto& dj = c.params.at("delta");
    const bool angular = dj.is_array();
    std::function<double(double)> delta;
    if (angular) {
        const double d1 = dj.at(0).get<double>();
        const double d2 = dj.at(1).get<double>();
        delta = [d1, d2](double th) { return th < 0.5 * kTwoPi ? d1 : d2; };
    } else {
        const double d = dj.get<double>();
        delta = [d](double) { return d; };
    }
    const BesselSweepResult res = bessel_driver_experiment(delta, angular, mu, grid, c.n_paths,
                                                           c.seed, c.workers, c.epsilons);
    bool monotone = true;
    for (std::size_t e = 1; e < res.localtime_means.size(); ++e)
        monotone = monotone && res.localtime_means[e] < res.localtime_means[e - 1];

    ordered_json s;
    s["epsilons"] = res.epsilons;
    s["localtime_means"] = res.localtime_means;
    s["monotone_decreasing"] = monotone;
    s["mean_radial"] = res.mean_radial;
    if (c.params.contains("delta_compare") && !c.params.at("delta_compare").is_null() &&
        !angular && !c.epsilons.empty()) {
        const double dc = c.params.at("delta_compare").get<double>();
        const double eps_mid = c.epsilons[c.epsilons.size() / 2];
        const BesselSweepResult cmp =
            bessel_driver_experiment([dc](double) { return dc; }, false, mu, grid,
                                     std::max<std::size_t>(c.n_paths / 4, 100), c.seed + 1,
                                     c.workers, {eps_mid});
        s["compare"] = {{"delta", dc},
                        {"epsilon", eps_mid},
                        {"localtime_mean", cmp.localtime_means[0]},
                        {"exceeds_main", cmp.localtime_means[0] >
                                             res.localtime_means[c.epsilons.size() / 2]}};
    }
    return s;
}

ordered_json run_thinning(const ExperimentConfig& c, ArtifactWriter&) {
    const SpinningMeasure mu = SpinningMeasure::from_json(c.measure);
    const TimeGrid grid(c.t_end, c.n_steps);
    const double hw = c.params.value("A_halfwidth", 0.15);
    const AngleSet A = AngleSet::neighborhood(0.0, hw);
    const AngleSet Ac({{hw, kTwoPi - hw}});
    const double eps = c.epsilons.empty() ? 0.04 : c.epsilons.front();
    const double nuA = A.nu(mu);

    struct PathStats {
        double thinned = 0.0, total = 0.0, part_sum_ok = 1.0;
        double comp_num = 0.0, comp_den = 0.0;
    };
    auto stats = run_batch<PathStats>(c.n_paths, c.workers, [&](std::size_t i) {
        RngStream dr = RngStream::for_path(c.seed, i, RngStream::kDriver);
        RngStream ar = RngStream::for_path(c.seed, i, RngStream::kAngles);
        WalshDiffusion wd = simulate_walsh_bm(mu, {0.0, 0.0}, grid, dr, ar);
        const auto& w = wd.path;
        SamplePath radial(grid, PathKind::folded, std::vector<double>(w.radial));
        PathStats ps;
        const auto in_a = thinned_local_time(w, A, eps);
        const auto off_a = thinned_local_time(w, Ac, eps);
        const auto everything = lt_downcrossing(radial, eps);
        ps.thinned = in_a.terminal();
        ps.total = everything.terminal();
        ps.part_sum_ok =
            (in_a.downcrossings + off_a.downcrossings == everything.downcrossings) ? 1.0 : 0.0;
        // component local time of X1 by one-sided occupation over [0, eps)
        const std::size_t n = w.n_points();
        std::vector<double> x1(n);
        for (std::size_t k = 0; k < n; ++k) x1[k] = w.x1(k);
        std::vector<double> qv(n, 0.0);
        for (std::size_t k = 1; k < n; ++k) {
            const double cosv = at_origin(w.angle[k - 1]) ? 0.0 : std::cos(w.angle[k - 1]);
            qv[k] = qv[k - 1] + (w.radial[k - 1] > 0.0 ? cosv * cosv * grid.dt() : 0.0);
        }
        SamplePath qvp(grid, PathKind::clock, std::move(qv));
        ps.comp_num = lt_occupation_signed(x1, grid, eps, qvp).terminal();
        SamplePath qs = analytic_qv(radial, [](double) { return 1.0; });
        ps.comp_den = lt_occupation(radial, eps, qs).terminal();
        return ps;
    });

    double ratio_sum = 0.0, ratio_n = 0.0, addl_bad = 0.0, num = 0.0, den = 0.0;
    for (const auto& ps : stats) {
        if (ps.total > 0.0) {
            ratio_sum += ps.thinned / ps.total;
            ratio_n += 1.0;
        }
        addl_bad += 1.0 - ps.part_sum_ok;
        num += ps.comp_num;
        den += ps.comp_den;
    }
    ordered_json s;
    s["nu_A"] = nuA;
    s["ratio"] = ratio_sum / std::max(ratio_n, 1.0);
    s["paths_with_crossings"] = ratio_n;
    s["additivity_violations"] = addl_bad;
    s["component_lt_ratio"] = num / den;
    const AngularMoments mom = alpha_gamma(mu);
    s["alpha1_plus"] = mom.alpha_plus[0];
    std::vector<double> thinned_terms, total_terms;
    for (const auto& ps : stats) {
        thinned_terms.push_back(ps.thinned);
        total_terms.push_back(ps.total);
    }
    s["localtime_batches"] = {
        batch_summary(LocalTimeMethod::downcrossing, eps, c.t_end, total_terms),
        batch_summary(LocalTimeMethod::downcrossing, eps, c.t_end, thinned_terms)};
    return s;
}

ordered_json run_fs_residual(const ExperimentConfig& c, ArtifactWriter&) {
    const SpinningMeasure mu = SpinningMeasure::from_json(c.measure);
    const AngleSet A({{0.0, 0.5 * kTwoPi}});
    const auto phi = phi_by_name("half_indicator");
    const auto catalog = class_d_catalog(mu, A, phi);
    const auto steps_list = c.params.value("n_steps_list", std::vector<std::size_t>{1000, 10000, 100000});
    const std::size_t paths = c.params.value("paths_per_dt", std::size_t{160});

    ordered_json records = ordered_json::array();
    std::map<std::string, std::vector<double>> rms_by_g;
    for (std::size_t n_steps : steps_list) {
        const TimeGrid grid(c.t_end, n_steps);
        auto residuals = run_batch<std::vector<double>>(paths, c.workers, [&](std::size_t i) {
            RngStream dr = RngStream::for_path(c.seed, i, RngStream::kDriver);
            RngStream ar = RngStream::for_path(c.seed, i, RngStream::kAngles);
            WalshDiffusion wd = simulate_walsh_bm(mu, {0.0, 0.0}, grid, dr, ar);
            const SamplePath qv = realized_qv(wd.driver);
            std::vector<double> res;
            res.reserve(catalog.size());
            for (const auto& g : catalog)
                res.push_back(fs_decompose(wd.path, wd.driver, qv, g, mu).terminal_residual());
            return res;
        });
        for (std::size_t gi = 0; gi < catalog.size(); ++gi) {
            std::vector<double> r(paths);
            for (std::size_t i = 0; i < paths; ++i) r[i] = residuals[i][gi];
            double ss = 0.0, mx = 0.0;
            for (double v : r) {
                ss += v * v;
                mx = std::max(mx, std::abs(v));
            }
            const double rms = std::sqrt(ss / static_cast<double>(paths));
            rms_by_g[catalog[gi].name].push_back(rms);
            records.push_back(ordered_json{{"g_name", catalog[gi].name},
                                           {"dt", grid.dt()},
                                           {"T", c.t_end},
                                           {"n_paths", paths},
                                           {"rms_residual", rms},
                                           {"max_residual", mx},
                                           {"ztest", ztest_json(z_test(r))}});
        }
    }
    bool all_monotone = true;
    double finest_max_rms = 0.0;
    for (const auto& [name, series] : rms_by_g) {
        for (std::size_t i = 1; i < series.size(); ++i)
            all_monotone = all_monotone && series[i] < series[i - 1];
        finest_max_rms = std::max(finest_max_rms, series.back());
    }
    ordered_json s;
    s["records"] = records;
    s["rms_monotone_decreasing"] = all_monotone;
    s["finest_dt_max_rms"] = finest_max_rms;
    return s;
}

ordered_json run_slope_avg(const ExperimentConfig& c, ArtifactWriter&) {
    const SpinningMeasure mu = SpinningMeasure::from_json(c.measure);
    const TimeGrid grid(c.t_end, c.n_steps);
    const auto names = c.params.value("phis", std::vector<std::string>{"half_indicator", "cos", "sin2"});

    ordered_json per_phi = ordered_json::array();
    bool all_pass = true;
    for (const auto& name : names) {
        const auto phi = phi_by_name(name);
        struct R {
            double increment = 0.0;
            double gap = 0.0;
        };
        auto rs = run_batch<R>(c.n_paths, c.workers, [&](std::size_t i) {
            RngStream dr = RngStream::for_path(c.seed, i, RngStream::kDriver);
            RngStream ar = RngStream::for_path(c.seed, i, RngStream::kAngles);
            WalshDiffusion wd = simulate_walsh_bm(mu, {0.0, 0.0}, grid, dr, ar);
            const SlopeAverage sa = slope_avg_process(wd.path, phi, mu, wd.driver);
            return R{sa.terminal_increment, sa.sup_identity_gap};
        });
        std::vector<double> inc(c.n_paths);
        double gap = 0.0;
        for (std::size_t i = 0; i < c.n_paths; ++i) {
            inc[i] = rs[i].increment;
            gap = std::max(gap, rs[i].gap);
        }
        const ZTestResult z = z_test(inc);
        all_pass = all_pass && std::abs(z.z) < 3.0;
        per_phi.push_back(ordered_json{{"phi", name},
                                       {"ztest", ztest_json(z)},
                                       {"max_identity_gap", gap},
                                       {"pass", std::abs(z.z) < 3.0}});
    }
    ordered_json s;
    s["per_phi"] = per_phi;
    s["all_pass"] = all_pass;
    return s;
}

ordered_json run_time_change(const ExperimentConfig& c, ArtifactWriter&) {
    const SpinningMeasure mu = SpinningMeasure::from_json(c.measure);
    const auto lamv = c.params.at("lambda").get<std::vector<double>>();
    if (lamv.size() != 2) throw ArgumentError("params.lambda: expected two rates");
    const double l1 = lamv[0], l2 = lamv[1];
    AngularCoefficients coeffs{[l1, l2](double, double th) { return th < 0.5 * kTwoPi ? -l1 : -l2; },
                               [](double, double) { return 1.0; }};
    const auto x0p = c.params.value("x0_polar", std::vector<double>{0.3, 0.25 * kTwoPi});
    const double r0 = x0p.at(0), th0 = x0p.at(1);
    const std::array<double, 2> x0{r0 * std::cos(th0), r0 * std::sin(th0)};
    const double dt_src = c.params.value("dt_source", 1e-4);

    std::vector<double> thetas;
    for (const Atom& a : mu.atoms()) thetas.push_back(a.angle);
    if (r0 > 0.0) thetas.push_back(wrap_angle(th0));
    const ScaleTransform st = ScaleTransform::build(coeffs, thetas, uniform_lattice(0.0, 12.0, 1024));

    const TimeGrid target(c.t_end, c.n_steps);
    auto y_term = run_batch<double>(c.n_paths, c.workers, [&](std::size_t i) {
        RngStream dr = RngStream::for_path(c.seed, i, RngStream::kDriver);
        RngStream ar = RngStream::for_path(c.seed, i, RngStream::kAngles);
        const std::array<double, 2> x0_scaled{st.p(r0, th0) * std::cos(th0),
                                              st.p(r0, th0) * std::sin(th0)};
        WalshDiffusion src =
            simulate_walsh_bm_until_clock(mu, x0_scaled, dt_src, st, c.t_end, dr, ar, 4.0);
        WalshPath y = time_change_walsh(src.path, st, target);
        return y.radial.back();
    });
    auto r_term = run_batch<double>(c.n_paths, c.workers, [&](std::size_t i) {
        RngStream dr = RngStream::for_path(c.seed ^ 0x9E3779B97F4A7C15ull, i, RngStream::kDriver);
        RngStream ar = RngStream::for_path(c.seed ^ 0x9E3779B97F4A7C15ull, i, RngStream::kAngles);
        const TimeGrid og(c.t_end, static_cast<std::size_t>(std::llround(c.t_end / dt_src)));
        WalshDiffusion wd = simulate_angular_walsh_direct(coeffs, mu, x0, og, dr, ar);
        return wd.path.radial.back();
    });

    const KsResult ks = ks_two_sample(std::vector<double>(y_term), std::vector<double>(r_term));

    // scale identities on a probe lattice
    double max_pq = 0.0, max_pprime0 = 0.0;
    for (double th : thetas) {
        max_pprime0 = std::max(max_pprime0, std::abs(st.p_prime(0.0, th) - 1.0));
        for (double r = 0.25; r <= 8.0; r += 0.25)
            max_pq = std::max(max_pq, std::abs(st.p(st.q(r, th), th) - r));
    }

    ordered_json s;
    s["ks"] = {{"statistic", ks.statistic}, {"p_value", ks.p_value}, {"pass", ks.p_value > 0.01}};
    s["mean_radial_timechange"] = summarize(y_term).mean;
    s["mean_radial_direct"] = summarize(r_term).mean;
    s["scale_identity_max_error"] = max_pq;
    s["p_prime_origin_max_error"] = max_pprime0;
    return s;
}

ordered_json run_estimate_mu(const ExperimentConfig& c, ArtifactWriter& out) {
    const SpinningMeasure mu = SpinningMeasure::from_json(c.measure);
    const TimeGrid grid(c.t_end, c.n_steps);
    const double eps = c.params.value("epsilon", 0.02);

    auto dists = run_batch<AngleDistribution>(c.n_paths, c.workers, [&](std::size_t i) {
        RngStream dr = RngStream::for_path(c.seed, i, RngStream::kDriver);
        RngStream ar = RngStream::for_path(c.seed, i, RngStream::kAngles);
        WalshDiffusion wd = simulate_walsh_bm(mu, {0.0, 0.0}, grid, dr, ar);
        try {
            return estimate_spinning_measure(wd.path, eps);
        } catch (const InsufficientData&) {
            return AngleDistribution{};
        }
    });
    AngleDistribution merged;
    for (const auto& d : dists) {
        merged.total += d.total;
        for (const auto& [a, cnt] : d.counts) merged.counts[a] += cnt;
    }
    if (merged.total == 0) throw InsufficientData("no completed excursions across the batch");

    ordered_json s;
    s["excursions"] = merged.total;
    s["epsilon"] = eps;
    if (mu.is_atomic()) s["tv_distance"] = merged.tv_against(mu);
    ordered_json angles = ordered_json::array();
    for (const auto& [a, cnt] : merged.counts) angles.push_back({a, cnt});
    s["empirical"] = angles;
    out.add_json("exit_angles.json", s);
    return s;
}

ordered_json run_mixed_mu(const ExperimentConfig& c, ArtifactWriter&) {
    const SpinningMeasure mu1 = SpinningMeasure::from_json(c.measure);
    const SpinningMeasure mu2 = SpinningMeasure::from_json(c.params.at("mu2"));
    const auto swp = c.params.value("switch_point", std::vector<double>{1.0, 0.0});
    const double tol = c.params.value("tol", 0.05);
    const double eps = c.params.value("epsilon", 0.02);
    const TimeGrid grid(c.t_end, c.n_steps);

    RngStream dr = RngStream::for_path(c.seed, 0, RngStream::kDriver);
    RngStream ar = RngStream::for_path(c.seed, 0, RngStream::kAngles);
    const MixedMeasureResult res =
        mixed_measure_experiment(mu1, mu2, {swp.at(0), swp.at(1)}, tol, grid, dr, ar);

    const auto pre = estimate_spinning_measure_window(res.path, eps, 0, res.switch_index);
    const auto post =
        estimate_spinning_measure_window(res.path, eps, res.switch_index, res.path.n_points());

    // all excursions that begin after the switch carry mu2 angles
    bool post_angles_ok = true;
    for (std::size_t k = res.switch_index + 1; k < res.path.n_points(); ++k) {
        if (at_origin(res.path.angle[k])) continue;
        if (k > 0 && res.path.radial[k - 1] == 0.0) {
            bool known = false;
            for (const Atom& a : mu2.atoms()) known = known || a.angle == res.path.angle[k];
            post_angles_ok = post_angles_ok && known;
        }
    }

    ordered_json s;
    s["switch_index"] = res.switch_index;
    s["switch_time"] = grid.time(res.switch_index);
    s["pre_excursions"] = pre.total;
    s["post_excursions"] = post.total;
    s["tv_gap"] = pre.tv_against(post);
    s["tv_pre_vs_mu1"] = mu1.is_atomic() ? pre.tv_against(mu1) : -1.0;
    s["tv_post_vs_mu2"] = mu2.is_atomic() ? post.tv_against(mu2) : -1.0;
    s["post_switch_angles_in_mu2"] = post_angles_ok;
    return s;
}

}  // namespace

RunResult run_experiment(const nlohmann::json& config_json) {
    const ExperimentConfig c = parse_config(config_json);
    ArtifactWriter out(c.out_dir);

    ordered_json summary;
    summary["config"] = config_echo(c);
    ordered_json body;
    if (c.experiment == "fold-demo") body = run_fold_demo(c, out);
    else if (c.experiment == "walsh-bm") body = run_walsh_bm(c, out);
    else if (c.experiment == "skew-bm") body = run_skew_bm(c, out);
    else if (c.experiment == "tripod") body = run_tripod(c, out);
    else if (c.experiment == "polar-drift") body = run_polar_drift(c, out);
    else if (c.experiment == "bessel") body = run_bessel(c, out);
    else if (c.experiment == "thinning") body = run_thinning(c, out);
    else if (c.experiment == "fs-residual") body = run_fs_residual(c, out);
    else if (c.experiment == "slope-avg") body = run_slope_avg(c, out);
    else if (c.experiment == "time-change") body = run_time_change(c, out);
    else if (c.experiment == "estimate-mu") body = run_estimate_mu(c, out);
    else if (c.experiment == "mixed-mu") body = run_mixed_mu(c, out);
    else throw ArgumentError("unknown experiment: " + c.experiment);

    summary["results"] = body;
    RunResult r;
    out.add_json("summary.json", summary);
    r.manifest = out.finish();
    r.summary = summary;
    r.out_dir = out.dir();
    return r;
}

}  // namespace walsh
