#include "mvsde/cloud.hpp"
#include "mvsde/config.hpp"
#include "mvsde/operators.hpp"
#include "mvsde/rng.hpp"
#include "mvsde/solver.hpp"
#include "mvsde/wasserstein.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <limits>

namespace py = pybind11;
using namespace mvsde;

namespace {

ParticleCloud cloud_from_array(const py::array_t<double>& array) {
    const auto buf = array.request();
    int n = 0, d = 0;
    if (buf.ndim == 1) {
        n = static_cast<int>(buf.shape[0]);
        d = 1;
    } else if (buf.ndim == 2) {
        n = static_cast<int>(buf.shape[0]);
        d = static_cast<int>(buf.shape[1]);
    } else {
        throw ConfigError("expected a (N,) or (N, d) array of points");
    }
    std::vector<double> flat(static_cast<std::size_t>(n) * d);
    if (buf.ndim == 1) {
        auto access = array.unchecked<1>();
        for (int i = 0; i < n; ++i) flat[static_cast<std::size_t>(i)] = access(i);
    } else {
        auto access = array.unchecked<2>();
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < d; ++j) {
                flat[static_cast<std::size_t>(i) * d + j] = access(i, j);
            }
        }
    }
    return ParticleCloud::from_flat(d, std::move(flat));
}

py::array_t<double> cloud_to_array(const ParticleCloud& cloud) {
    py::array_t<double> out({cloud.size(), cloud.dim()});
    std::copy(cloud.flat().begin(), cloud.flat().end(), out.mutable_data());
    return out;
}

py::dict ensemble_to_dict(const TrajectoryEnsemble& ensemble) {
    py::dict out;
    out["times"] = py::array_t<double>(static_cast<py::ssize_t>(ensemble.times.size()),
                                       ensemble.times.data());
    py::list snapshots;
    for (const auto& cloud : ensemble.snapshots) snapshots.append(cloud_to_array(cloud));
    out["snapshots"] = snapshots;
    out["reflection_variation"] =
        py::array_t<double>(static_cast<py::ssize_t>(ensemble.reflection_variation.size()),
                            ensemble.reflection_variation.data());
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Core operations: monotone-operator calculus, transport distances, and the "
              "interacting-particle solver";
    m.attr("__version__") = kToolVersion;

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<CertificationError>(m, "CertificationError", PyExc_RuntimeError);
    py::register_exception<InstabilityError>(m, "InstabilityError", PyExc_RuntimeError);

    py::class_<OperatorSpec>(m, "Operator")
        .def_static("zero", &OperatorSpec::zero, py::arg("dim"))
        .def_static("linear", &OperatorSpec::linear, py::arg("matrix"))
        .def_static(
            "box_cone",
            [](const Vec& lower, const Vec& upper) {
                return OperatorSpec::normal_cone(BoxSet{lower, upper});
            },
            py::arg("lower"), py::arg("upper"))
        .def_static(
            "ball_cone",
            [](const Vec& center, double radius) {
                return OperatorSpec::normal_cone(BallSet{center, radius});
            },
            py::arg("center"), py::arg("radius"))
        .def_static(
            "half_space_cone",
            [](const Vec& normal, double offset) {
                return OperatorSpec::normal_cone(HalfSpaceSet{normal, offset});
            },
            py::arg("normal"), py::arg("offset"))
        .def_static("scaled_abs", &OperatorSpec::scaled_abs, py::arg("weight"), py::arg("dim"))
        .def_static(
            "box_cone_plus_linear",
            [](const Vec& lower, const Vec& upper, double beta) {
                return OperatorSpec::normal_cone_plus_linear(BoxSet{lower, upper}, beta);
            },
            py::arg("lower"), py::arg("upper"), py::arg("beta"))
        .def_property_readonly("dimension", &OperatorSpec::dimension)
        .def("in_domain", &OperatorSpec::in_domain, py::arg("x"));

    m.def(
        "resolvent",
        [](const OperatorSpec& op, double eps, const Vec& x, double shift) {
            return resolvent(op, eps, x, shift);
        },
        py::arg("op"), py::arg("eps"), py::arg("x"), py::arg("shift") = 0.0);
    m.def(
        "yosida",
        [](const OperatorSpec& op, double eps, const Vec& x, double shift) {
            return yosida(op, eps, x, shift);
        },
        py::arg("op"), py::arg("eps"), py::arg("x"), py::arg("shift") = 0.0);
    m.def(
        "minimal_section",
        [](const OperatorSpec& op, const Vec& x) -> py::object {
            const auto section = minimal_section(op, x);
            if (!section.has_value()) return py::none();  // infinite outside the domain
            return py::cast(*section);
        },
        py::arg("op"), py::arg("x"));
    m.def("project_domain_closure", &project_domain_closure, py::arg("op"), py::arg("x"));

    m.def(
        "moment_norm",
        [](const py::array_t<double>& cloud, double theta) {
            return moment_norm(cloud_from_array(cloud), theta);
        },
        py::arg("cloud"), py::arg("theta"));
    m.def(
        "quantile",
        [](const py::array_t<double>& cloud, double q) {
            return quantile(cloud_from_array(cloud), q);
        },
        py::arg("cloud"), py::arg("q"));
    m.def(
        "w2",
        [](const py::array_t<double>& a, const py::array_t<double>& b) {
            return w2_distance(cloud_from_array(a), cloud_from_array(b));
        },
        py::arg("a"), py::arg("b"),
        "Exact W2: sorted coupling in one dimension, assignment otherwise");
    m.def(
        "w1",
        [](const py::array_t<double>& a, const py::array_t<double>& b) {
            return w1_distance(cloud_from_array(a), cloud_from_array(b));
        },
        py::arg("a"), py::arg("b"));

    m.def("normal_quantile", &rng::normal_quantile, py::arg("p"));

    m.def(
        "simulate",
        [](const std::string& config_json, int threads) {
            ExperimentConfig cfg = parse_config(Json::parse(config_json));
            cfg.solver.threads = threads;
            return ensemble_to_dict(simulate(cfg.system(), cfg.solver));
        },
        py::arg("config_json"), py::arg("threads") = 1,
        "Run the particle solver from a config JSON string; returns times, snapshots and the "
        "per-particle reflection variation");
}
