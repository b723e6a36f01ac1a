// Python module starnoma._core. SNR arguments are linear, as in C++;
// starnoma.db_to_linear converts.

#include <optional>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "starnoma/analysis.hpp"
#include "starnoma/errors.hpp"
#include "starnoma/experiment.hpp"
#include "starnoma/montecarlo.hpp"
#include "starnoma/quadrature.hpp"
#include "starnoma/specfun.hpp"

namespace py = pybind11;
namespace an = starnoma::analysis;
namespace ex = starnoma::experiment;
namespace mc = starnoma::montecarlo;
namespace q = starnoma::quadrature;
namespace sf = starnoma::specfun;
using starnoma::channel::SystemConfig;

namespace {

py::list curves_to_list(const ex::CurveSet& c) {
    py::list out;
    for (const auto& s : c.series) {
        py::dict d;
        d["scheme"] = s.label;
        d["provenance"] = ex::to_string(s.provenance);
        std::vector<double> r, v, h;
        for (const auto& p : s.points) {
            r.push_back(p.rho_db);
            v.push_back(p.value);
            h.push_back(p.half_width);
        }
        d["rho_db"] = r;
        d["value"] = v;
        d["ci_halfwidth"] = h;
        out.append(d);
    }
    return out;
}

std::vector<an::CurvePoint> to_points(const std::vector<double>& rho_db, const std::vector<double>& value) {
    if (rho_db.size() != value.size()) {
        throw starnoma::ConfigError("rho_db and value must have the same length");
    }
    std::vector<an::CurvePoint> c;
    for (std::size_t i = 0; i < rho_db.size(); ++i) {
        c.push_back({rho_db[i], value[i]});
    }
    return c;
}

ex::ExperimentSpec adjust(ex::ExperimentSpec spec, std::optional<std::uint64_t> trials, std::optional<std::uint64_t> seed,
                          bool analytic_only) {
    if (trials || seed) {
        if (!spec.mc) {
            spec.mc = mc::McSettings{};
        }
        if (trials) {
            spec.mc->trials = *trials;
        }
        if (seed) {
            spec.mc->seed = *seed;
        }
    }
    if (analytic_only) {
        spec.mc.reset();
    }
    return spec;
}

ex::CurveSet run_released(const ex::ExperimentSpec& spec) {
    py::gil_scoped_release nogil;
    return ex::run(spec);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "STAR-RIS NOMA outage, rate and throughput kernels";

    py::register_exception<starnoma::ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<starnoma::DivergenceError>(m, "DivergenceError", PyExc_ArithmeticError);
    py::register_exception<starnoma::DomainError>(m, "DomainError", PyExc_ArithmeticError);
    py::register_exception<starnoma::ConvergenceError>(m, "ConvergenceError", PyExc_ArithmeticError);
    py::register_exception<starnoma::OverflowError>(m, "OverflowError", PyExc_OverflowError);

    py::class_<SystemConfig>(m, "SystemConfig")
        .def(py::init<>())
        .def_readwrite("d_sn", &SystemConfig::d_sn)
        .def_readwrite("d_sr", &SystemConfig::d_sr)
        .def_readwrite("d_rn", &SystemConfig::d_rn)
        .def_readwrite("d_rm", &SystemConfig::d_rm)
        .def_readwrite("alpha", &SystemConfig::alpha)
        .def_readwrite("kappa", &SystemConfig::kappa)
        .def_readwrite("K", &SystemConfig::K)
        .def_readwrite("a_n", &SystemConfig::a_n)
        .def_readwrite("a_m", &SystemConfig::a_m)
        .def_readwrite("R_n", &SystemConfig::R_n)
        .def_readwrite("R_m", &SystemConfig::R_m)
        .def_readwrite("omega_I", &SystemConfig::omega_I)
        .def_readwrite("ipsic", &SystemConfig::ipsic)
        .def_readwrite("require_power_order", &SystemConfig::require_power_order)
        .def("validate", &SystemConfig::validate)
        .def("__repr__", [](const SystemConfig& c) {
            std::string s = "SystemConfig(";
            bool first = true;
            for (const auto& [k, v] : ex::describe(c)) {
                s += (first ? "" : ", ") + k + "=" + v;
                first = false;
            }
            return s + ")";
        });

    py::enum_<an::Status>(m, "Status")
        .value("Ok", an::Status::Ok)
        .value("Clamped", an::Status::Clamped)
        .value("CertainOutage", an::Status::CertainOutage)
        .value("SurrogateTheta", an::Status::SurrogateTheta);

    py::class_<an::OutageValue>(m, "OutageValue")
        .def_readonly("value", &an::OutageValue::value)
        .def_readonly("status", &an::OutageValue::status)
        .def_readonly("excursion", &an::OutageValue::excursion)
        .def("__float__", [](const an::OutageValue& v) { return v.value; })
        .def("__repr__", [](const an::OutageValue& v) {
            return "OutageValue(" + std::to_string(v.value) + ", " + an::to_string(v.status) + ")";
        });

    py::enum_<an::User>(m, "User").value("N", an::User::N).value("M", an::User::M);
    py::enum_<an::AsymKind>(m, "AsymKind")
        .value("IpSicFloor", an::AsymKind::IpSicFloor)
        .value("PSicUserN", an::AsymKind::PSicUserN)
        .value("UserM", an::AsymKind::UserM);
    py::enum_<an::Bound>(m, "Bound").value("NomaN", an::Bound::NomaN).value("OmaN", an::Bound::OmaN).value("OmaM", an::Bound::OmaM);
    py::enum_<an::ThroughputMode>(m, "ThroughputMode")
        .value("DelayLimited_ipSIC", an::ThroughputMode::DelayLimited_ipSIC)
        .value("DelayLimited_pSIC", an::ThroughputMode::DelayLimited_pSIC)
        .value("DelayTolerant", an::ThroughputMode::DelayTolerant);

    m.def("db_to_linear", &an::db_to_linear, py::arg("db"));

    m.def("op_user_n_ipsic", &an::op_user_n_ipsic, py::arg("cfg"), py::arg("rho"), py::arg("P") = an::kDefaultLaguerreOrder,
          py::arg("U") = an::kDefaultChebyshevOrder);
    m.def("op_user_n_psic", &an::op_user_n_psic, py::arg("cfg"), py::arg("rho"), py::arg("U") = an::kDefaultChebyshevOrder);
    m.def("op_user_m", &an::op_user_m, py::arg("cfg"), py::arg("rho"));
    m.def("op_oma", &an::op_oma, py::arg("cfg"), py::arg("rho"), py::arg("user"), py::arg("U") = an::kDefaultChebyshevOrder);
    m.def("op_system", &an::op_system, py::arg("p_n"), py::arg("p_m"));
    m.def("op_asym", &an::op_asym, py::arg("cfg"), py::arg("rho"), py::arg("kind"), py::arg("theta_z") = 1.0 - 1e-6,
          py::arg("P") = an::kDefaultLaguerreOrder, py::arg("U") = an::kDefaultChebyshevOrder);
    m.def("rate_user_n_psic", &an::rate_user_n_psic, py::arg("cfg"), py::arg("rho"), py::arg("U") = an::kDefaultChebyshevOrder);
    m.def("rate_user_m", &an::rate_user_m, py::arg("cfg"), py::arg("rho"), py::arg("U") = an::kDefaultChebyshevOrder);
    m.def("rate_oma", &an::rate_oma, py::arg("cfg"), py::arg("rho"), py::arg("user"), py::arg("U") = an::kDefaultChebyshevOrder);
    m.def("rate_upper_bound", &an::rate_upper_bound, py::arg("cfg"), py::arg("rho"), py::arg("which"));
    m.def("throughput", &an::throughput, py::arg("cfg"), py::arg("rho"), py::arg("mode"));
    m.def(
        "diversity_fit",
        [](const std::vector<double>& r, const std::vector<double>& v, double lo, double hi) {
            return an::diversity_fit(to_points(r, v), lo, hi);
        },
        py::arg("rho_db"), py::arg("value"), py::arg("lo_db"), py::arg("hi_db"));
    m.def(
        "slope_fit",
        [](const std::vector<double>& r, const std::vector<double>& v, double lo, double hi) {
            return an::slope_fit(to_points(r, v), lo, hi);
        },
        py::arg("rho_db"), py::arg("value"), py::arg("lo_db"), py::arg("hi_db"));

    py::class_<mc::McSettings>(m, "McSettings")
        .def(py::init<>())
        .def_readwrite("trials", &mc::McSettings::trials)
        .def_readwrite("seed", &mc::McSettings::seed)
        .def_readwrite("confidence", &mc::McSettings::confidence)
        .def_readwrite("threads", &mc::McSettings::threads);
    py::class_<mc::McEstimate>(m, "McEstimate")
        .def_readonly("value", &mc::McEstimate::value)
        .def_readonly("half_width", &mc::McEstimate::half_width)
        .def_readonly("trials_used", &mc::McEstimate::trials_used)
        .def("__repr__", [](const mc::McEstimate& e) {
            return "McEstimate(" + std::to_string(e.value) + " +- " + std::to_string(e.half_width) + ")";
        });
    py::enum_<mc::OutageScheme>(m, "OutageScheme")
        .value("NomaUserN_ipSIC", mc::OutageScheme::NomaUserN_ipSIC)
        .value("NomaUserN_pSIC", mc::OutageScheme::NomaUserN_pSIC)
        .value("NomaUserM", mc::OutageScheme::NomaUserM)
        .value("OmaUserN", mc::OutageScheme::OmaUserN)
        .value("OmaUserM", mc::OutageScheme::OmaUserM)
        .value("SystemNoma_ipSIC", mc::OutageScheme::SystemNoma_ipSIC)
        .value("SystemNoma_pSIC", mc::OutageScheme::SystemNoma_pSIC)
        .value("SystemOma", mc::OutageScheme::SystemOma);
    py::enum_<mc::RateScheme>(m, "RateScheme")
        .value("NomaUserN_ipSIC", mc::RateScheme::NomaUserN_ipSIC)
        .value("NomaUserN_pSIC", mc::RateScheme::NomaUserN_pSIC)
        .value("NomaUserM", mc::RateScheme::NomaUserM)
        .value("OmaUserN", mc::RateScheme::OmaUserN)
        .value("OmaUserM", mc::RateScheme::OmaUserM);
    py::enum_<mc::ThroughputMode>(m, "SimThroughputMode")
        .value("DelayLimited_ipSIC", mc::ThroughputMode::DelayLimited_ipSIC)
        .value("DelayLimited_pSIC", mc::ThroughputMode::DelayLimited_pSIC)
        .value("DelayTolerant_pSIC", mc::ThroughputMode::DelayTolerant_pSIC)
        .value("DelayTolerant_ipSIC", mc::ThroughputMode::DelayTolerant_ipSIC)
        .value("DelayLimited_OMA", mc::ThroughputMode::DelayLimited_OMA)
        .value("DelayTolerant_OMA", mc::ThroughputMode::DelayTolerant_OMA);

    m.def("simulate_outage", &mc::estimate_outage, py::arg("cfg"), py::arg("rho"), py::arg("scheme"), py::arg("mc"),
          py::call_guard<py::gil_scoped_release>());
    m.def("simulate_rate", &mc::estimate_rate, py::arg("cfg"), py::arg("rho"), py::arg("scheme"), py::arg("mc"),
          py::call_guard<py::gil_scoped_release>());
    m.def("simulate_throughput", &mc::estimate_throughput, py::arg("cfg"), py::arg("rho"), py::arg("mode"), py::arg("mc"),
          py::call_guard<py::gil_scoped_release>());

    m.def("marcum_q", [](double a, double b) { return sf::marcum_q(a, b); }, py::arg("a"), py::arg("b"));
    m.def("gamma_p", [](double a, double x) { return sf::gamma_p(a, x); }, py::arg("a"), py::arg("x"));
    m.def("bessel_i", [](int n, double x) { return sf::bessel_i(n, x); }, py::arg("order"), py::arg("x"));
    m.def("bessel_k", [](int n, double x) { return sf::bessel_k(n, x); }, py::arg("order"), py::arg("x"));

    m.def(
        "quadrature_rule",
        [](const std::string& family, int order) {
            q::QuadratureRule r;
            if (family == "chebyshev") {
                r = q::chebyshev_rule(order);
            } else if (family == "laguerre") {
                r = q::laguerre_rule(order);
            } else {
                throw starnoma::ConfigError("family must be chebyshev or laguerre");
            }
            return py::make_tuple(r.nodes, r.weights);
        },
        py::arg("family"), py::arg("order"));

    m.def("preset_names", &ex::preset_names);
    m.def(
        "schemes", [] {
            std::vector<std::string> v;
            for (const auto& s : ex::scheme_catalog()) {
                v.emplace_back(s.name);
            }
            return v;
        });
    m.def(
        "run_figure",
        [](const std::string& name, std::optional<std::uint64_t> trials, std::optional<std::uint64_t> seed, bool analytic_only) {
            return curves_to_list(run_released(adjust(ex::figure_preset(name), trials, seed, analytic_only)));
        },
        py::arg("name"), py::arg("trials") = py::none(), py::arg("seed") = py::none(), py::arg("analytic_only") = false,
        "Series of a figure preset as a list of dicts.");
    m.def(
        "run_config",
        [](const std::string& text, std::optional<std::uint64_t> trials, std::optional<std::uint64_t> seed, bool analytic_only) {
            ex::ExperimentSpec b;
            b.snr_grid_db = ex::db_grid(0.0, 40.0, 2.0);
            return curves_to_list(run_released(adjust(ex::parse_config(text, b), trials, seed, analytic_only)));
        },
        py::arg("text"), py::arg("trials") = py::none(), py::arg("seed") = py::none(), py::arg("analytic_only") = false,
        "Series of a 'key = value' experiment description; analytical unless trials or montecarlo = 1 is given.");
    m.def(
        "figure_csv",
        [](const std::string& name, std::optional<std::uint64_t> trials, std::optional<std::uint64_t> seed, bool analytic_only) {
            return ex::to_csv(run_released(adjust(ex::figure_preset(name), trials, seed, analytic_only)));
        },
        py::arg("name"), py::arg("trials") = py::none(), py::arg("seed") = py::none(), py::arg("analytic_only") = false);
}
