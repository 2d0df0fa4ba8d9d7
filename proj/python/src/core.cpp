// Python bindings: geometries, the check suite and a few pointwise quantities.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tractorlab/affine.hpp"
#include "tractorlab/boundary.hpp"
#include "tractorlab/errors.hpp"
#include "tractorlab/geometry.hpp"
#include "tractorlab/verify.hpp"

namespace py = pybind11;
using namespace tractorlab;

namespace {

double scalar_curvature_at(const Geometry& g, const Point& x) {
    Connection conn = interior_connection(g);
    CurvaturePack pk = curvature_pack(conn, x, 0);
    return scalar_curvature(mat_inverse(g.metric(x, 0)), pk.ricci).value();
}

py::dict asymptotic(const Geometry& g, int points, std::uint64_t seed) {
    AsymptoticReport r = asymptotic_h(g, g.sample_boundary(points, seed));
    py::dict d;
    d["S"] = r.S;
    d["S_spread"] = r.S_spread;
    d["C"] = r.C;
    d["h_min_eig"] = r.h_min_eig;
    d["error"] = r.error;
    return d;
}

std::string verify(const Geometry& g, const std::vector<std::string>& checks, std::uint64_t seed, int points,
                   int boundary_points, bool timing) {
    SamplingPlan plan;
    plan.seed = seed;
    plan.interior_points = points;
    plan.boundary_points = boundary_points;
    std::vector<CheckReport> rs;
    {
        py::gil_scoped_release nogil;
        rs = run_suite(g, checks, plan);
    }
    return reports_to_json(rs, timing);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<PoleError>(m, "PoleError", PyExc_ArithmeticError);

    py::class_<Geometry>(m, "Geometry")
        .def_readonly("name", &Geometry::name)
        .def_readonly("dim", &Geometry::dim)
        .def_readonly("alpha", &Geometry::alpha)
        .def_readonly("coords", &Geometry::coords)
        .def("sample_interior", &Geometry::sample_interior, py::arg("count"), py::arg("seed") = 1)
        .def("sample_boundary", &Geometry::sample_boundary, py::arg("count"), py::arg("seed") = 1)
        .def("to_json", [](const Geometry& g) { return geometry_to_json(g); })
        .def("__repr__", [](const Geometry& g) {
            return "<Geometry " + g.name + " dim=" + std::to_string(g.dim) + ">";
        });

    m.def("builtin_names", &builtin_names);
    m.def(
        "builtin_geometry",
        [](const std::string& name, int dim, const Params& params) {
            Geometry g = builtin_geometry(name, dim, params);
            validate_geometry(g);
            return g;
        },
        py::arg("name"), py::arg("dim") = 3, py::arg("params") = Params{});
    m.def(
        "load_geometry",
        [](const std::string& text) {
            Geometry g = load_geometry(text);
            validate_geometry(g);
            return g;
        },
        py::arg("json_text"));

    m.def("check_ids", [] {
        std::vector<std::tuple<std::string, std::string, double>> out;
        for (const auto& c : registry()) out.emplace_back(c.id, c.paper_ref, c.tolerance);
        return out;
    });
    m.def("verify_json", &verify, py::arg("geometry"), py::arg("checks") = std::vector<std::string>{"all"},
          py::arg("seed") = 1, py::arg("points") = 8, py::arg("boundary_points") = 5, py::arg("timing") = false);
    m.def("scalar_curvature", &scalar_curvature_at, py::arg("geometry"), py::arg("point"));
    m.def("asymptotic_h", &asymptotic, py::arg("geometry"), py::arg("points") = 5, py::arg("seed") = 2);
}
