#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "tractorlab/affine.hpp"
#include "tractorlab/errors.hpp"

using namespace tractorlab;

namespace {

double max_abs(const JetArray& a) { return a.max_abs_value(); }

// Random smooth exact one-form d f, f a low-degree polynomial in the coordinates.
OneForm random_exact_form(std::mt19937_64& rng, const std::vector<std::string>& coords, double size = 0.5) {
    std::uniform_real_distribution<double> u(-size, size);
    std::string f = "0";
    for (size_t i = 0; i < coords.size(); ++i) {
        f += " + " + std::to_string(u(rng)) + "*" + coords[i];
        f += " + " + std::to_string(u(rng)) + "*" + coords[i] + "*" + coords[(i + 1) % coords.size()];
    }
    f += " + " + std::to_string(u(rng)) + "*sin(" + coords[0] + ")";
    return gradient_form(parse_expr(f, coords));
}

}  // namespace

TEST_CASE("Levi-Civita Christoffels match the Koszul finite-difference oracle") {
    std::vector<std::string> xy{"x", "y"};
    std::vector<std::vector<Expr>> g{{parse_expr("exp(2*x)", xy), parse_expr("0", xy)},
                                     {parse_expr("0", xy), parse_expr("exp(2*x)", xy)}};
    TensorField gf;
    gf.eval = [g](const Point& p, int order) {
        auto vars = coordinate_jets(p, order);
        JetArray m = JetArray::zeros({2, 2}, 2, order);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) m(a, b) = eval_jet(g[a][b], vars);
        return m;
    };
    Connection lc = levi_civita(gf, 2);
    Point p{0.3, -0.7};
    JetArray G = lc.gamma(p, 0);
    auto ref = oracle::koszul_christoffel(g, {0.3L, -0.7L});
    for (size_t k = 0; k < G.size(); ++k) CHECK(std::abs(G[k].value() - static_cast<double>(ref[k])) <= 1e-8);

    Geometry k = builtin_geometry("klein", 4);
    Connection kc = levi_civita(k);
    for (const auto& q : k.sample_interior(5, 9)) {
        JetArray Gk = kc.gamma(q, 0);
        std::vector<long double> ql(q.begin(), q.end());
        auto rk = oracle::koszul_christoffel(k.metric_exprs, ql);
        for (size_t i = 0; i < Gk.size(); ++i) CHECK(std::abs(Gk[i].value() - static_cast<double>(rk[i])) <= 1e-7);
    }
    CHECK(max_abs(kc.gamma({0, 0, 0, 0}, 0)) <= 1e-15);
    CHECK(max_abs(levi_civita(builtin_geometry("flat", 3)).gamma({0.1, 0.2, 0.3}, 2)) == 0.0);
}

TEST_CASE("projective modification by dx0 on the flat connection") {
    Geometry f = builtin_geometry("flat", 3);
    Connection m = projective_modify(levi_civita(f), gradient_form(parse_expr("x0", f.coords)));
    JetArray G = m.gamma({0.1, 0.2, 0.3}, 0);
    CHECK(G(0, 0, 0).value() == 2.0);
    CHECK(G(1, 0, 1).value() == 1.0);
    CHECK(G(1, 1, 0).value() == 1.0);
    CHECK(G(2, 0, 2).value() == 1.0);
    CHECK(G(1, 1, 1).value() == 0.0);
    CHECK(G(0, 1, 1).value() == 0.0);
    Connection same = projective_modify(levi_civita(f), gradient_form(parse_expr("0", f.coords)));
    CHECK(max_abs(same.gamma({0.1, 0.2, 0.3}, 1)) == 0.0);
}

TEST_CASE("klein is hyperbolic: R = -(delta g - delta g), S = -n(n+1)") {
    for (int dim : {3, 4}) {
        Geometry k = builtin_geometry("klein", dim);
        Connection lc = levi_civita(k);
        for (const auto& p : k.sample_interior(20, 11)) {
            JetArray R = riemann(lc.gamma(p, 1));
            JetArray g = k.metric(p, 0);
            double err = 0;
            for (int a = 0; a < dim; ++a)
                for (int b = 0; b < dim; ++b)
                    for (int c = 0; c < dim; ++c)
                        for (int d = 0; d < dim; ++d) {
                            double ref = -((a == c ? g(b, d).value() : 0.0) - (b == c ? g(a, d).value() : 0.0));
                            err = std::max(err, std::abs(R(a, b, c, d).value() - ref));
                        }
            CHECK(err <= 1e-8);
            JetArray Ric = ricci(R);
            Jet S = scalar_curvature(mat_inverse(g), Ric);
            CHECK(S.value() == doctest::Approx(-(dim - 1.0) * dim).epsilon(1e-10));
            JetArray P = schouten(Ric);
            for (int a = 0; a < dim; ++a)
                for (int b = 0; b < dim; ++b) CHECK(std::abs(P(a, b).value() + g(a, b).value()) <= 1e-9);
        }
    }
    Geometry k3 = builtin_geometry("klein", 3);
    JetArray R0 = riemann(levi_civita(k3).gamma({0, 0, 0}, 1));
    Jet S0 = scalar_curvature(mat_inverse(k3.metric({0, 0, 0}, 0)), ricci(R0));
    CHECK(S0.value() == doctest::Approx(-6.0));
}

TEST_CASE("curvature identities on klein and af2") {
    std::vector<Geometry> geoms{builtin_geometry("klein", 3), builtin_geometry("klein", 4),
                                builtin_geometry("af2_generic", 4)};
    for (const auto& geom : geoms) {
        Connection lc = levi_civita(geom);
        int d = geom.dim;
        for (const auto& p : geom.sample_interior(10, 5)) {
            CurvaturePack pk = curvature_pack(lc, p, 0);
            double scale = 1.0 + max_abs(pk.riemann);
            double bianchi = 0, tr1 = 0, tr2 = 0;
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b)
                    for (int c = 0; c < d; ++c)
                        for (int e = 0; e < d; ++e) {
                            double s = pk.riemann(a, b, c, e).value() + pk.riemann(b, e, c, a).value() +
                                       pk.riemann(e, a, c, b).value();
                            bianchi = std::max(bianchi, std::abs(s));
                        }
            for (int b = 0; b < d; ++b)
                for (int e = 0; e < d; ++e) {
                    double s1 = 0, s2 = 0;
                    for (int a = 0; a < d; ++a) s1 += pk.weyl(a, b, a, e).value();
                    for (int c = 0; c < d; ++c) s2 += pk.weyl(b, e, c, c).value();
                    tr1 = std::max(tr1, std::abs(s1));
                    tr2 = std::max(tr2, std::abs(s2));
                }
            CHECK(bianchi / scale <= 1e-9);
            CHECK(tr1 / scale <= 1e-9);
            CHECK(tr2 / scale <= 1e-9);
            JetArray back = reassemble_riemann(pk.weyl, pk.schouten);
            CHECK(max_abs(back - pk.riemann) / scale <= 1e-10);
            CHECK(max_abs(pk.beta) / scale <= 1e-10);
            CHECK(special_defect(lc, p) <= 1e-9 * scale);
        }
    }
}

TEST_CASE("Weyl tensor is projectively invariant; Schouten change law") {
    std::mt19937_64 rng(3);
    Geometry geom = builtin_geometry("af2_generic", 4);
    Connection lc = levi_civita(geom);
    for (int t = 0; t < 3; ++t) {
        OneForm ups = random_exact_form(rng, geom.coords);
        Connection m = projective_modify(lc, ups);
        CHECK(m.special);
        for (const auto& p : geom.sample_interior(4, 100 + t)) {
            CurvaturePack a = curvature_pack(lc, p, 1);
            CurvaturePack b = curvature_pack(m, p, 1);
            double scale = 1.0 + max_abs(a.weyl);
            CHECK(max_abs(a.weyl.truncated(0) - b.weyl.truncated(0)) / scale <= 1e-8);
            // P = hat P + hat nabla_a Y_b + Y_a Y_b
            JetArray Y = ups.eval(p, 1);
            JetArray dY = covariant_derivative(Y, {IndexKind::Down}, 0.0, m.gamma(p, 0));
            double err = 0;
            for (int i = 0; i < 4; ++i)
                for (int j = 0; j < 4; ++j) {
                    double rhs = b.schouten(i, j).value() + dY(i, j).value() + Y(i).value() * Y(j).value();
                    err = std::max(err, std::abs(a.schouten(i, j).value() - rhs));
                }
            CHECK(err / (1.0 + max_abs(a.schouten)) <= 1e-8);
        }
    }
}

TEST_CASE("covariant derivative: metric, tau and the density sign") {
    for (const char* name : {"klein", "af2_generic", "poincare_control"}) {
        Geometry geom = builtin_geometry(name, 4);
        Connection lc = levi_civita(geom);
        TensorField g = geom.metric_field();
        TensorField tau = canonical_tau(geom);
        for (const auto& p : geom.sample_interior(5, 21)) {
            JetArray dg = covariant_derivative(g, lc)(p, 1);
            CHECK(max_abs(dg) / (1.0 + max_abs(g(p, 0))) <= 1e-9);
            JetArray dtau = covariant_derivative(tau, lc)(p, 1);
            CHECK(max_abs(dtau) <= 1e-9 * (1.0 + std::abs(tau(p, 0)[0].value())));
            // the opposite density sign does not annihilate tau
            JetArray wrong = covariant_derivative(tau, lc, -1)(p, 0);
            if (std::string(name) != "klein" || max_abs(lc.gamma(p, 0)) > 1e-3) CHECK(max_abs(wrong) > 1e-6);
            // |tau^(-n-2) det g^ab| = 1
            JetArray ginv = mat_inverse(g(p, 0));
            double t = tau(p, 0)[0].value();
            CHECK(std::abs(std::pow(t, -5.0) * mat_det(ginv).value()) == doctest::Approx(1.0).epsilon(1e-10));
        }
    }
    // klein: tau = rho exactly, and tau/rho is parallel for the rho-modified connection
    Geometry k = builtin_geometry("klein", 3);
    Connection rc = rho_connection(k);
    TensorField tau = canonical_tau(k);
    TensorField tau_hat;
    tau_hat.weight = 2.0;
    tau_hat.eval = [&](const Point& p, int order) {
        return JetArray({}, tau(p, order)[0] / k.rho_jet(p, order));
    };
    for (const auto& p : k.sample_interior(10, 4)) {
        CHECK(tau(p, 0)[0].value() == doctest::Approx(k.rho_value(p)).epsilon(1e-12));
        CHECK(max_abs(covariant_derivative(tau_hat, rc)(p, 1)) <= 1e-9);
    }
}

TEST_CASE("rho-modified connection extends for klein and not for the conformal control") {
    Geometry k = builtin_geometry("klein", 3);
    Connection rc = rho_connection(k);
    Point y{0.0, 0.6, 0.8};
    // klein's rho-modified connection is flat: Christoffels vanish identically
    for (double eps : {0.1, 1e-2, 1e-3, 1e-5, 0.0}) {
        Point x = eps > 0 ? k.ray_point(y, eps) : y;
        CHECK(max_abs(rc.gamma(x, 1)) <= 1e-8);
    }
    Geometry pc = builtin_geometry("poincare_control", 3);
    Connection rp = rho_connection(pc);
    CHECK_THROWS_AS(rp.gamma(y, 0), PoleError);
    Connection raw = rho_connection(pc, RhoExtension{false});
    CHECK_THROWS_AS(raw.gamma(y, 0), PoleError);
    auto lim = boundary_limit([&](double e) { return raw.gamma(pc.ray_point(y, e), 0).values(); });
    CHECK(lim.diverged);
    CHECK(lim.slope <= -0.9);
    // flat metric with rho = 1 - x0 is not projectively compact
    Geometry f = builtin_geometry("flat", 3);
    Connection rf = rho_connection(f, RhoExtension{false});
    auto limf = boundary_limit([&](double e) { return rf.gamma(f.ray_point({1.0, 0.0, 0.0}, e), 0).values(); });
    CHECK(limf.diverged);
}

TEST_CASE("Richardson extrapolation") {
    auto r = boundary_limit_scalar([](double e) { return 3.0 + e * e; });
    CHECK(std::abs(r.value[0] - 3.0) <= 1e-10);
    CHECK(!r.diverged);
    auto s = boundary_limit_scalar([](double e) { return std::exp(e) * std::cos(3 * e); });
    CHECK(std::abs(s.value[0] - 1.0) <= 1e-9);
    auto d = boundary_limit_scalar([](double e) { return 1.0 / e; });
    CHECK(d.diverged);
    auto v = boundary_limit_scalar([](double e) { return std::sqrt(e); });
    CHECK(v.vanishing);
    CHECK(neville({0.0, 1.0, 2.0}, {1.0, 2.0, 5.0}, 3.0) == doctest::Approx(10.0));
}

TEST_CASE("closed-form rho-modified Christoffels") {
    // frozen from a symbolic computation of LC + drho/(alpha rho) for the default
    // asymptotic forms, at (0.1, 0.2, -0.3, 0.4)
    Point p{0.1, 0.2, -0.3, 0.4};
    Geometry a2 = builtin_geometry("af2_generic", 4);
    JetArray G2 = rho_christoffel_closed_form(a2, p, 0);
    CHECK(G2(0, 0, 0).value() == doctest::Approx(1.4285714285714286).epsilon(1e-13));
    CHECK(G2(0, 2, 2).value() == doctest::Approx(1.4285714285714286).epsilon(1e-13));
    CHECK(G2(1, 0, 1).value() == doctest::Approx(0.019920318725099605).epsilon(1e-13));
    CHECK(G2(2, 2, 2).value() == doctest::Approx(-0.029732408325074334).epsilon(1e-13));
    CHECK(std::abs(G2(0, 1, 2).value()) <= 1e-15);
    Geometry a1 = builtin_geometry("af1_generic", 4);
    JetArray G1 = rho_christoffel_closed_form(a1, p, 0);
    CHECK(G1(0, 0, 0).value() == doctest::Approx(0.3846153846153846).epsilon(1e-13));
    CHECK(G1(0, 3, 3).value() == doctest::Approx(0.38769230769230767).epsilon(1e-13));
    CHECK(G1(3, 3, 3).value() == doctest::Approx(0.03937007874015749).epsilon(1e-13));

    // agrees with the pole-cancelling generic path in the interior, at full jet order
    for (const Geometry* g : {&a2, &a1}) {
        Connection generic = rho_connection(*g, RhoExtension{false, false});
        for (const auto& x : g->sample_interior(5, 21)) {
            JetArray d = rho_christoffel_closed_form(*g, x, 3) - generic.gamma(x, 3);
            CHECK(max_abs(d) <= 1e-6);
        }
    }
    Geometry k = builtin_geometry("klein", 4);
    Connection kg = rho_connection(k, RhoExtension{false, false});
    for (const auto& x : k.sample_interior(5, 22)) {
        CHECK(max_abs(rho_christoffel_closed_form(k, x, 2)) <= 1e-13);
        CHECK(max_abs(kg.gamma(x, 2)) <= 1e-6);
    }
    // at the boundary: 2/(4r + 1) -> 2 and the alpha = 1 tangential block -> 0
    Point y{0.0, 0.2, -0.3, 0.4};
    CHECK(rho_christoffel_closed_form(a2, y, 0)(0, 1, 1).value() == doctest::Approx(2.0));
    CHECK(std::abs(rho_christoffel_closed_form(a1, y, 0)(0, 1, 1).value()) <= 1e-15);
    // tau-hat closed form equals tau/rho from the metric
    for (const auto& x : a2.sample_interior(5, 23)) {
        Jet direct = tau_from_metric(a2.metric(x, 2)) / a2.rho_jet(x, 2);
        Jet closed = tau_hat(a2, x, 2);
        for (size_t m = 0; m < closed.coeffs().size(); ++m)
            CHECK(std::abs(closed.coeffs()[m] - direct.coeffs()[m]) <= 1e-8);
    }
}
