#include <doctest.h>

#include <cmath>

#include "tractorlab/errors.hpp"
#include "tractorlab/geometry.hpp"

using namespace tractorlab;

namespace {

double det3(const JetArray& g) {
    auto v = [&](int a, int b) { return g(a, b).value(); };
    return v(0, 0) * (v(1, 1) * v(2, 2) - v(1, 2) * v(2, 1)) - v(0, 1) * (v(1, 0) * v(2, 2) - v(1, 2) * v(2, 0)) +
           v(0, 2) * (v(1, 0) * v(2, 1) - v(1, 1) * v(2, 0));
}

}  // namespace

TEST_CASE("builtin catalog") {
    Geometry k = builtin_geometry("klein", 3);
    JetArray g0 = k.metric({0, 0, 0}, 1);
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) CHECK(g0(a, b).value() == doctest::Approx(a == b ? 1.0 : 0.0));
    CHECK_THROWS_AS(k.metric({1, 0, 0}, 1), PoleError);

    Geometry f = builtin_geometry("flat", 3);
    JetArray gf = f.metric({0.2, 0.1, -0.3}, 2);
    CHECK(gf(0, 0).value() == 1.0);
    CHECK(gf(0, 1).max_abs() == 0.0);

    CHECK_THROWS_AS(builtin_geometry("nosuch", 3), ValidationError);
    CHECK_THROWS_AS(builtin_geometry("klein", 2), ValidationError);
    CHECK_THROWS_AS(builtin_geometry("af2_generic", 4, {{"C", "0"}}), ValidationError);
    CHECK_THROWS_AS(builtin_geometry("af2_generic", 4, {{"h", "wobbly"}}), ValidationError);
    for (const auto& name : builtin_names()) CHECK_NOTHROW(builtin_geometry(name, 4));
}

TEST_CASE("klein written as a document matches the builtin") {
    Geometry k = builtin_geometry("klein", 3);
    Geometry d = load_geometry(geometry_to_json(k));
    CHECK(d.dim == 3);
    for (const auto& p : k.sample_interior(10, 3)) {
        JetArray a = k.metric(p, 0), b = d.metric(p, 0);
        for (size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i].value() - b[i].value()) <= 1e-12);
        CHECK(std::abs(k.rho_value(p) - d.rho_value(p)) <= 1e-12);
    }
    Geometry af = builtin_geometry("af2_generic", 4);
    Geometry afd = load_geometry(geometry_to_json(af));
    Point p{0.2, 0.1, -0.3, 0.4};
    CHECK(std::abs(af.metric(p, 0)(1, 1).value() - afd.metric(p, 0)(1, 1).value()) <= 1e-12);
}

TEST_CASE("document errors") {
    const char* missing_rho = R"({"dim": 2, "coords": ["x", "y"], "alpha": 2, "metric": [["1","0"],["0","1"]]})";
    CHECK_THROWS_AS(load_geometry(missing_rho), SchemaError);
    const char* asym = R"({"dim": 2, "coords": ["x", "y"], "rho": "1 - x^2 - y^2", "alpha": 2,
                           "metric": [["1","x"],["0","1"]]})";
    CHECK_THROWS_AS(load_geometry(asym), ValidationError);
    const char* bad_expr = R"({"dim": 2, "coords": ["x", "y"], "rho": "1 - z", "alpha": 2,
                               "metric": [["1","0"],["0","1"]]})";
    CHECK_THROWS_AS(load_geometry(bad_expr), SchemaError);
    const char* bad_alpha = R"({"dim": 2, "coords": ["x", "y"], "rho": "1 - x", "alpha": 3,
                                "metric": [["1","0"],["0","1"]]})";
    CHECK_THROWS_AS(load_geometry(bad_alpha), ValidationError);
    const char* degenerate_h = R"({"kind": "asymptotic_form", "dim": 3, "coords": ["r", "u", "v"], "rho": "r",
        "alpha": 2, "C": 0.25, "h": [["1","0","0"],["0","1","0"],["0","0","r"]],
        "box": [[0, 0.5], [-0.5, 0.5], [-0.5, 0.5]]})";
    CHECK_THROWS_AS(load_geometry(degenerate_h), ValidationError);
    CHECK_THROWS_AS(load_geometry("{not json"), SchemaError);
}

TEST_CASE("sampling is deterministic and respects the domain") {
    Geometry k = builtin_geometry("klein", 3);
    auto a = k.sample_interior(8, 42), b = k.sample_interior(8, 42);
    CHECK(a == b);
    for (const auto& p : a) CHECK(k.rho_value(p) >= k.interior_rho_min);
    for (const auto& y : k.sample_boundary(8, 42)) {
        CHECK(std::abs(k.rho_value(y)) <= 1e-12);
        Point mu = k.transversal(y);
        Point g = k.rho_gradient(y);
        double dr = 0;
        for (int i = 0; i < 3; ++i) dr += g[i] * mu[i];
        CHECK(dr == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(k.rho_value(k.ray_point(y, 0.01)) == doctest::Approx(0.01).epsilon(1e-12));
        auto T = k.tangential_basis(y);
        CHECK(T.size() == 2);
        for (const auto& t : T) {
            double s = 0;
            for (int i = 0; i < 3; ++i) s += t[i] * g[i];
            CHECK(std::abs(s) <= 1e-12);
        }
    }
}

TEST_CASE("leading asymptotics of the model metrics") {
    Geometry k = builtin_geometry("klein", 3);
    Point y{0.6, 0.8, 0.0};
    // rho^2 g(mu_rad, mu_rad) along the radius stays bounded
    double prev = 0;
    for (double eps : {1e-1, 1e-2, 1e-3, 1e-4}) {
        Point x = k.ray_point(y, eps);
        double r = std::sqrt(x[0] * x[0] + x[1] * x[1]);
        Point u{x[0] / r, x[1] / r, 0.0};
        JetArray g = k.metric(x, 0);
        double q = 0;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) q += g(a, b).value() * u[a] * u[b];
        prev = eps * eps * q;
        CHECK(prev <= 1.0 + 1e-9);
    }
    CHECK(prev == doctest::Approx(1.0).epsilon(1e-9));

    // rho^(n+2) |det g| tends to a finite nonzero value for klein, diverges for the conformal control
    Geometry pc = builtin_geometry("poincare_control", 3);
    for (double eps : {1e-2, 1e-3}) {
        Point x = k.ray_point(y, eps);
        CHECK(std::pow(eps, 4) * std::abs(det3(k.metric(x, 0))) == doctest::Approx(1.0).epsilon(1e-9));
    }
    double v2 = std::pow(1e-2, 4) * std::abs(det3(pc.metric(k.ray_point(y, 1e-2), 0)));
    double v3 = std::pow(1e-3, 4) * std::abs(det3(pc.metric(k.ray_point(y, 1e-3), 0)));
    CHECK(v3 > 50 * v2);

    Geometry af = builtin_geometry("af2_generic", 4, {{"h", "delta"}});
    Point z{0.01, 0.2, -0.1, 0.3};
    JetArray g = af.metric(z, 0);
    for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) {
            double h = a == b ? 1.0 : 0.0;
            double c = (a == 0 && b == 0) ? 0.25 / z[0] : 0.0;
            CHECK(std::abs(z[0] * g(a, b).value() - h - c) <= 1e-12);
        }
}
