#include <pybind11/functional.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "walsh/calculus.hpp"
#include "walsh/diffusion.hpp"
#include "walsh/drivers.hpp"
#include "walsh/experiments.hpp"
#include "walsh/localtime.hpp"
#include "walsh/measures.hpp"
#include "walsh/stats.hpp"
#include "walsh/unfolding.hpp"

namespace py = pybind11;
using namespace walsh;

namespace {

py::array_t<double> to_numpy(const std::vector<double>& v) {
    py::array_t<double> out(static_cast<py::ssize_t>(v.size()));
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

SamplePath path_from(const std::vector<double>& values, double t_end, PathKind kind) {
    if (values.size() < 2) throw ArgumentError("path needs at least two points");
    return SamplePath(TimeGrid(t_end, values.size() - 1), kind, values);
}

py::dict walsh_path_dict(const WalshPath& w) {
    py::dict d;
    d["radial"] = to_numpy(w.radial);
    d["angle"] = to_numpy(w.angle);  // NaN marks the origin
    std::vector<double> ids(w.excursion_id.begin(), w.excursion_id.end());
    d["excursion_id"] = to_numpy(ids);
    d["localtime"] = to_numpy(w.localtime);
    std::vector<double> x1(w.n_points()), x2(w.n_points());
    for (std::size_t k = 0; k < w.n_points(); ++k) {
        x1[k] = w.x1(k);
        x2[k] = w.x2(k);
    }
    d["x1"] = to_numpy(x1);
    d["x2"] = to_numpy(x2);
    d["t_end"] = w.grid.t_end;
    return d;
}

WalshPath walsh_path_from(const std::vector<double>& radial, const std::vector<double>& angle,
                          double t_end) {
    if (radial.size() != angle.size() || radial.size() < 2)
        throw ArgumentError("radial and angle arrays must match and have >= 2 points");
    WalshPath w;
    w.grid = TimeGrid(t_end, radial.size() - 1);
    w.radial = radial;
    w.angle = angle;
    w.excursion_id.assign(radial.size(), kNoExcursion);
    w.localtime.assign(radial.size(), 0.0);
    std::int32_t id = -1;
    for (std::size_t k = 0; k < radial.size(); ++k) {
        if (radial[k] == 0.0) continue;
        if (k == 0 || radial[k - 1] == 0.0) ++id;
        w.excursion_id[k] = id;
    }
    return w;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Walsh semimartingale simulation toolkit (C++ core)";

    py::register_exception<ArgumentError>(m, "ArgumentError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<InsufficientData>(m, "InsufficientDataError", PyExc_RuntimeError);
    py::register_exception<SwitchNotReached>(m, "SwitchNotReachedError", PyExc_RuntimeError);
    py::register_exception<ClockUnderrun>(m, "ClockUnderrunError", PyExc_RuntimeError);

    py::class_<SpinningMeasure>(m, "SpinningMeasure")
        .def_static("from_atoms",
                    [](const std::vector<std::pair<double, double>>& atoms) {
                        std::vector<Atom> a;
                        for (auto& [t, w] : atoms) a.push_back({wrap_angle(t), w});
                        return SpinningMeasure::from_atoms(std::move(a));
                    },
                    py::arg("atoms"))
        .def_static("uniform", &SpinningMeasure::uniform)
        .def_static("from_json",
                    [](const std::string& text) {
                        return SpinningMeasure::from_json(nlohmann::json::parse(text));
                    })
        .def("to_json", [](const SpinningMeasure& mu) { return mu.to_json().dump(); })
        .def("atoms",
             [](const SpinningMeasure& mu) {
                 std::vector<std::pair<double, double>> out;
                 for (const Atom& a : mu.atoms()) out.emplace_back(a.angle, a.weight);
                 return out;
             })
        .def("nu_mass", [](const SpinningMeasure& mu, double a, double b) { return nu_mass(mu, a, b); })
        .def("sample",
             [](const SpinningMeasure& mu, std::uint64_t seed, std::size_t n, std::uint64_t stream) {
                 RngStream rng(seed, stream, RngStream::kAngles);
                 std::vector<double> out(n);
                 for (auto& v : out) v = mu.sample(rng);
                 return to_numpy(out);
             },
             py::arg("seed"), py::arg("n"), py::arg("stream") = 0);

    m.def("alpha_gamma", [](const SpinningMeasure& mu) {
        const AngularMoments mm = alpha_gamma(mu);
        py::dict d;
        d["alpha_plus"] = mm.alpha_plus;
        d["alpha_minus"] = mm.alpha_minus;
        d["gamma"] = mm.gamma;
        return d;
    });
    m.def("measure_from_gamma",
          [](double g1, double g2) { return measure_from_gamma({g1, g2}); });

    m.def(
        "skorokhod_fold",
        [](const std::vector<double>& u, double t_end) {
            const FoldResult r = skorokhod_fold(path_from(u, t_end, PathKind::driver));
            return py::make_tuple(to_numpy(r.s.values), to_numpy(r.lambda.values));
        },
        py::arg("u"), py::arg("t_end") = 1.0,
        "Skorokhod reflection: returns (S, Lambda) with S = U + Lambda");

    m.def(
        "simulate_driver",
        [](double b, double sigma, double u0, double t_end, std::size_t n_steps,
           std::uint64_t seed, std::uint64_t path_index) {
            DriverSpec spec{[b](double) { return b; }, [sigma](double) { return sigma; }, u0};
            RngStream rng = RngStream::for_path(seed, path_index, RngStream::kDriver);
            return to_numpy(simulate_driver(spec, TimeGrid(t_end, n_steps), rng).values);
        },
        py::arg("b"), py::arg("sigma"), py::arg("u0") = 0.0, py::arg("t_end") = 1.0,
        py::arg("n_steps") = 1000, py::arg("seed") = 0, py::arg("path_index") = 0);

    m.def(
        "simulate_reflected_diffusion",
        [](double b, double sigma, double r0, double t_end, std::size_t n_steps,
           std::uint64_t seed, std::uint64_t path_index) {
            RadialCoefficients coeffs{[b](double) { return b; }, [sigma](double) { return sigma; }};
            RngStream rng = RngStream::for_path(seed, path_index, RngStream::kDriver);
            const ReflectedDiffusion r =
                simulate_reflected_diffusion(coeffs, r0, TimeGrid(t_end, n_steps), rng);
            py::dict d;
            d["s"] = to_numpy(r.s.values);
            d["localtime"] = to_numpy(r.localtime.values);
            d["driver"] = to_numpy(r.driver.values);
            return d;
        },
        py::arg("b"), py::arg("sigma"), py::arg("r0") = 0.0, py::arg("t_end") = 1.0,
        py::arg("n_steps") = 1000, py::arg("seed") = 0, py::arg("path_index") = 0);

    m.def(
        "unfold",
        [](const std::vector<double>& s, double t_end, const SpinningMeasure& mu,
           std::uint64_t seed, std::optional<double> initial_angle, std::uint64_t path_index) {
            RngStream rng = RngStream::for_path(seed, path_index, RngStream::kAngles);
            return walsh_path_dict(
                unfold(path_from(s, t_end, PathKind::folded), mu, initial_angle, rng));
        },
        py::arg("s"), py::arg("t_end"), py::arg("mu"), py::arg("seed") = 0,
        py::arg("initial_angle") = std::nullopt, py::arg("path_index") = 0);

    m.def(
        "simulate_walsh_bm",
        [](const SpinningMeasure& mu, std::pair<double, double> x0, double t_end,
           std::size_t n_steps, std::uint64_t seed, std::uint64_t path_index) {
            RngStream dr = RngStream::for_path(seed, path_index, RngStream::kDriver);
            RngStream ar = RngStream::for_path(seed, path_index, RngStream::kAngles);
            WalshDiffusion wd = simulate_walsh_bm(mu, {x0.first, x0.second},
                                                  TimeGrid(t_end, n_steps), dr, ar);
            py::dict d = walsh_path_dict(wd.path);
            d["driver"] = to_numpy(wd.driver.values);
            return d;
        },
        py::arg("mu"), py::arg("x0") = std::pair<double, double>{0.0, 0.0}, py::arg("t_end") = 1.0,
        py::arg("n_steps") = 1000, py::arg("seed") = 0, py::arg("path_index") = 0);

    m.def("excursion_decompose", [](const std::vector<double>& s, double t_end) {
        const auto d = excursion_decompose(path_from(s, t_end, PathKind::folded));
        std::vector<std::tuple<std::size_t, std::size_t, int>> exc;
        for (const auto& e : d.excursions) exc.emplace_back(e.first, e.last, e.id);
        return py::make_tuple(d.zero_indices, exc);
    }, py::arg("s"), py::arg("t_end") = 1.0);

    m.def("tree_distance", [](double x1, double y1, double x2, double y2) {
        return tree_distance(x1, y1, x2, y2);
    });

    m.def(
        "lt_downcrossing",
        [](const std::vector<double>& s, double t_end, double eps) {
            return to_numpy(lt_downcrossing(path_from(s, t_end, PathKind::folded), eps).value.values);
        },
        py::arg("s"), py::arg("t_end"), py::arg("epsilon"));
    m.def(
        "lt_tanaka",
        [](const std::vector<double>& s, const std::vector<double>& u, double t_end) {
            const auto est = lt_tanaka(path_from(s, t_end, PathKind::folded),
                                       path_from(u, t_end, PathKind::driver));
            return py::make_tuple(to_numpy(est.value.values), to_numpy(est.raw));
        },
        py::arg("s"), py::arg("u"), py::arg("t_end"));
    m.def(
        "lt_occupation",
        [](const std::vector<double>& s, double t_end, double eps) {
            const SamplePath sp = path_from(s, t_end, PathKind::folded);
            return to_numpy(lt_occupation(sp, eps, realized_qv(sp)).value.values);
        },
        py::arg("s"), py::arg("t_end"), py::arg("epsilon"),
        "Occupation estimate with realized quadratic variation");

    m.def(
        "estimate_spinning_measure",
        [](const std::vector<double>& radial, const std::vector<double>& angle, double t_end,
           double eps) {
            const auto dist = estimate_spinning_measure(walsh_path_from(radial, angle, t_end), eps);
            py::dict d;
            py::dict counts;
            for (const auto& [a, c] : dist.counts) counts[py::float_(a)] = c;
            d["counts"] = counts;
            d["total"] = dist.total;
            return d;
        },
        py::arg("radial"), py::arg("angle"), py::arg("t_end"), py::arg("epsilon"));

    m.def("martingale_ztest", [](const std::vector<double>& samples) {
        const ZTestResult z = martingale_ztest(samples);
        py::dict d;
        d["z"] = z.z;
        d["p_value"] = z.p_value;
        d["mean"] = z.mean;
        d["stderr"] = z.stderr_of_mean;
        d["degenerate"] = z.degenerate;
        return d;
    });

    m.def("list_experiments", &list_experiments);
    m.def("default_config",
          [](const std::string& name) { return default_config(name).dump(); });
    m.def("validate_config", [](const std::string& config_text) {
        return validate_config(nlohmann::json::parse(config_text));
    });
    m.def(
        "run_experiment",
        [](const std::string& config_text) {
            const RunResult r = run_experiment(nlohmann::json::parse(config_text));
            return r.summary.dump();
        },
        py::arg("config_json"),
        "Runs an experiment from a JSON config string; returns the summary as JSON text");
}
