#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "tractorlab/boundary.hpp"
#include "tractorlab/errors.hpp"

using namespace tractorlab;

namespace {

double max_diff(const Tensor& a, const Tensor& b) {
    double m = 0.0;
    for (size_t k = 0; k < a.v.size(); ++k) m = std::max(m, std::abs(a.v[k] - b.v[k]));
    return m;
}

Tensor scaled_identity(int n, double s) {
    Tensor t({n, n});
    for (int i = 0; i < n; ++i) t(i, i) = s;
    return t;
}

}  // namespace

TEST_CASE("rho-splitting data: klein and af2 boundary values") {
    Geometry k = builtin_geometry("klein", 4);
    Point y{0.5, -0.5, 0.5, 0.5};
    RhoScaleData D = rho_scale_data(k, y, 1);
    // Gamma-hat = 0, rho = 1 - |x|^2: hess = -2 delta, t = -x/2, psi = 1, tau-hat = 1
    CHECK(D.gamma_hat.max_abs_value() <= 1e-13);
    for (int a = 0; a < 4; ++a) {
        CHECK(D.t(a).value() == doctest::Approx(-y[a] / 2).epsilon(1e-12));
        for (int b = 0; b < 4; ++b) CHECK(D.hess(a, b).value() == doctest::Approx(a == b ? -2.0 : 0.0).epsilon(1e-12));
    }
    CHECK(D.psi.value() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(D.tau_hat.value() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(D.contorsion.max_abs_value() <= 1e-12);

    // af2 at r = 0: tau-hat = (det h (r + C h^00))^(-1/5) = 4^(1/5)
    Geometry g = builtin_geometry("af2_generic", 4);
    Point z{0.0, 0.3, -0.2, 0.4};
    RhoScaleData E = rho_scale_data(g, z, 1);
    CHECK(E.tau_hat.value() == doctest::Approx(std::pow(4.0, 0.2)).epsilon(1e-12));
    CHECK(E.gamma_hat(0, 1, 1).value() == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(E.hess(1, 1).value() == doctest::Approx(-2.0).epsilon(1e-12));
    double td = 0.0;
    for (int a = 0; a < 4; ++a) td += E.t(a).value() * E.drho(a).value();
    CHECK(td == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("rho nabla P: direct, smooth right-hand side and the Phi form agree") {
    for (const char* name : {"klein", "af2_generic"}) {
        Geometry g = builtin_geometry(name, 4);
        for (const auto& x : g.sample_interior(10, 3)) {
            JetArray a = rho_nabla_P_direct(g, x, 1);
            JetArray b = rho_nabla_P_from_phi(g, x, 1);
            RhoScaleData D = rho_scale_data(g, x, 1);
            double scale = 1.0 + a.max_abs_value();
            CHECK((a - b).max_abs_value() / scale <= 1e-8);
            CHECK((a - D.rho_dP).max_abs_value() / scale <= 1e-8);
        }
    }
}

TEST_CASE("metric tractor connection: compatibility, torsion and the block formula") {
    Geometry g = builtin_geometry("af2_generic", 4);
    auto pts = g.sample_interior(4, 11);
    auto bd = g.sample_boundary(3, 12);
    pts.insert(pts.end(), bd.begin(), bd.end());
    for (const auto& x : pts) {
        RhoScaleData D = rho_scale_data(g, x, 2);
        CHECK(metric_compatibility_residual(D, 20, 5) <= 1e-6);
        CHECK(D.A.max_abs_value() > 1e-3);  // af2 is not Einstein, so the check is not vacuous

        JetArray F = tractor_curvature(D.connection);
        JetArray B = metric_curvature_blocks(D);
        double scale = 1.0 + F.max_abs_value();
        CHECK((F.truncated(0) - B.truncated(0)).max_abs_value() / scale <= 1e-6);
        double torsion = 0.0;
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                for (int I = 0; I < 5; ++I) torsion = std::max(torsion, std::abs(F(a, b, I, 0).value()));
        CHECK(torsion / scale <= 1e-6);

        // the unmodified standard connection is not metric
        RhoScaleData S = D;
        S.connection = S.connection - S.contorsion;
        CHECK(metric_compatibility_residual(S, 20, 5) > 1e-2);
    }
}

TEST_CASE("Levi-Civita contorsion moved to the rho splitting is the smooth one") {
    Geometry g = builtin_geometry("af2_generic", 4);
    for (const auto& x : g.sample_interior(5, 21)) {
        int K = 1;
        Connection lc = levi_civita(g);
        JetArray G = lc.gamma(x, K + 2);
        JetArray P = schouten(ricci(riemann(G)));
        JetArray A = std_connection_matrix(G.truncated(K), P.truncated(K)) + lc_contorsion(g, x, K);
        JetArray Y = rho_upsilon(g).eval(x, K + 1);
        JetArray moved = change_splitting_connection(A, Y);
        RhoScaleData D = rho_scale_data(g, x, K);
        int o = std::min(moved.order(), D.connection.order());
        double scale = 1.0 + D.connection.max_abs_value();
        CHECK((moved.truncated(o) - D.connection.truncated(o)).max_abs_value() / scale <= 1e-8);
    }
}

TEST_CASE("geodetic transversals and collars") {
    Geometry k = builtin_geometry("klein", 3);
    Point y{0.0, 0.6, 0.8};
    TransversalCurve c = geodetic_transversal(k, y, k.transversal(y));
    CHECK(c.drho_mu0 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(c.residual <= 1e-8);
    CHECK(c.samples.size() == 201);
    // straight radius x(t) = y (1 - t/2)
    for (const auto& s : c.samples)
        for (int a = 0; a < 3; ++a) CHECK(s.x[a] == doctest::Approx(y[a] * (1 - s.t / 2)).epsilon(1e-12));
    for (size_t i = 1; i < c.samples.size(); ++i)
        CHECK(rho2_g_mu_mu(k, c.samples[i]) == doctest::Approx(0.25).epsilon(1e-9));

    Geometry g = builtin_geometry("af2_generic", 4);
    auto ys = g.sample_boundary(3, 4);
    for (const auto& yy : ys) {
        TransversalCurve t = geodetic_transversal(g, yy, g.transversal(yy));
        CHECK(t.residual <= 1e-8);
        double lo = 1e300, hi = -1e300;
        for (size_t i = 1; i < t.samples.size(); ++i) {
            double v = rho2_g_mu_mu(g, t.samples[i]);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        CHECK(hi - lo <= 1e-6);
        CHECK(lo == doctest::Approx(0.25).epsilon(1e-6));
    }
    CHECK_THROWS_AS(geodetic_transversal(g, ys[0], Point{2.0, 0, 0, 0}), DomainError);

    Collar col = collar_sample(g, ys, {0.0, 0.05, 0.1});
    for (size_t i = 0; i < ys.size(); ++i) CHECK(col.points[i][0] == ys[i]);
    CHECK(col.min_distance > 1e-3);
    std::vector<Point> dup{ys[0], ys[1], ys[0]};
    CHECK_THROWS_AS(collar_sample(g, dup, {0.0, 0.1}), CollisionError);

    Geometry pc = builtin_geometry("poincare_control", 3);
    Point yp{0.0, 0.0, 1.0};
    CHECK_THROWS_AS(geodetic_transversal(pc, yp, pc.transversal(yp)), PoleError);
}

TEST_CASE("projective second fundamental form") {
    Geometry k = builtin_geometry("klein", 4);
    Point y{0.5, 0.5, -0.5, 0.5};
    SecondFundamentalForm s = second_fundamental_form(k, y);
    CHECK(max_diff(s.direct, scaled_identity(3, -2.0)) <= 1e-12);
    CHECK(s.agreement <= 1e-6);
    CHECK(s.conformal_residual <= 1e-6);
    CHECK(s.projective_residual <= 1e-6);
    CHECK(s.min_singular == doctest::Approx(2.0));

    Geometry a1 = builtin_geometry("af1_generic", 4);
    SecondFundamentalForm t = second_fundamental_form(a1, Point{0.0, 0.2, 0.1, -0.3});
    CHECK(t.direct.max_abs() <= 1e-12);
    CHECK(t.extrapolated.max_abs() <= 1e-5);

    // h restricted equals -2 C hat nabla d rho
    Geometry a2 = builtin_geometry("af2_generic", 4, {{"C", "0.5"}});
    Point z{0.0, 0.2, 0.1, -0.3};
    SecondFundamentalForm u = second_fundamental_form(a2, z);
    AsymptoticReport ah = asymptotic_h(a2, {z});
    CHECK(ah.error.empty());
    Tensor m = u.direct;
    for (double& v : m.v) v *= -2.0 * 0.5;
    CHECK(max_diff(ah.h_boundary, m) <= 1e-5);
}

TEST_CASE("asymptotic h and the constant C") {
    Geometry k = builtin_geometry("klein", 3);
    auto ys = k.sample_boundary(5, 9);
    AsymptoticReport r = asymptotic_h(k, ys);
    CHECK(r.error.empty());
    for (double s : r.S) CHECK(s == doctest::Approx(-6.0).epsilon(1e-6));
    CHECK(r.S_spread <= 1e-5);
    CHECK(r.C == doctest::Approx(0.25).epsilon(1e-6));
    CHECK(max_diff(r.h_boundary, scaled_identity(2, 1.0)) <= 1e-5);
    CHECK(r.h_min_eig >= 0.5);

    for (double C : {0.25, 0.7, -0.4}) {
        Geometry g = builtin_geometry("af2_generic", 4, {{"C", std::to_string(C)}});
        AsymptoticReport q = asymptotic_h(g, g.sample_boundary(3, 2));
        CHECK(q.error.empty());
        CHECK(q.C == doctest::Approx(C).epsilon(1e-6));
    }

    Geometry pc = builtin_geometry("poincare_control", 3);
    AsymptoticReport p = asymptotic_h(pc, pc.sample_boundary(3, 2));
    CHECK(p.error.find("does not extend") != std::string::npos);

    Geometry a1 = builtin_geometry("af1_generic", 3);
    CHECK(asymptotic_h(a1, a1.sample_boundary(2, 2)).error.find("vanishes") != std::string::npos);
}

TEST_CASE("curvature asymptotics of order-2 metrics") {
    Geometry k = builtin_geometry("klein", 4);
    Point y{0.5, 0.5, -0.5, 0.5};
    EinsteinReport e = einstein_asymptotics(k, y, 0.25);
    CHECK(e.tracefree_finite);
    CHECK(e.tracefree_limit <= 1e-8);
    CHECK(e.tail_finite);
    CHECK(e.tail_limit <= 1e-6);

    Geometry g = builtin_geometry("af2_generic", 4);
    Point z{0.0, 0.2, 0.1, -0.3};
    EinsteinReport f = einstein_asymptotics(g, z, 0.25);
    CHECK(f.tail_finite);
    CHECK(f.tail_error <= 1e-4);
    CHECK(f.tangential_finite);
    CHECK(f.tangential_error <= 1e-5);
    // the normal-normal component keeps a 1/rho term
    CHECK_FALSE(f.tracefree_finite);
    CHECK(std::abs(f.normal_normal) > 0.1);

    // rho tfRic computed from smooth data agrees with the direct Levi-Civita route inside
    for (const auto& x : g.sample_interior(4, 6)) {
        Tensor t = tracefree_ricci_scaled(g, x);
        Connection lc = levi_civita(g);
        JetArray Ric = ricci(riemann(lc.gamma(x, 1)));
        JetArray gm = g.metric(x, 0);
        double S = scalar_curvature(mat_inverse(gm), Ric).value();
        double r = g.rho_value(x);
        for (int a = 0; a < 4; ++a)
            for (int b = 0; b < 4; ++b)
                CHECK(t(a, b) == doctest::Approx(r * (Ric(a, b).value() - S / 4.0 * gm(a, b).value())).epsilon(1e-8));
    }
}

TEST_CASE("boundary tractor bundle: Gram form and signature") {
    Geometry k = builtin_geometry("klein", 4);
    Point y{0.5, 0.5, -0.5, 0.5};
    BoundaryTractorData B = boundary_tractor_bundle(k, y);
    CHECK(B.gram_residual <= 1e-7);
    CHECK(B.isotropy <= 1e-8);
    CHECK(B.quotient_residual <= 1e-8);
    CHECK(B.gamma_inverse_residual <= 1e-9);
    CHECK(B.t_dot_drho == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(B.tau_hat == doctest::Approx(1.0));
    CHECK(B.psi == doctest::Approx(1.0));
    CHECK(max_diff(B.gamma_ij, scaled_identity(3, -1.0)) <= 1e-12);
    CHECK(B.gram(0, 0) == doctest::Approx(-0.25));
    // gamma negative definite plus a hyperbolic plane
    CHECK(B.gamma_negative == 3);
    CHECK(B.positive == B.gamma_positive + 1);
    CHECK(B.negative == B.gamma_negative + 1);

    Geometry g = builtin_geometry("af2_generic", 5);
    BoundaryTractorData C = boundary_tractor_bundle(g, Point{0.0, 0.1, 0.2, -0.1, 0.3});
    CHECK(C.gram_residual <= 1e-7);
    CHECK(C.isotropy <= 1e-8);
    CHECK(C.positive == C.gamma_positive + 1);
    CHECK(C.negative == C.gamma_negative + 1);

    Geometry f = builtin_geometry("flat", 4);
    try {
        boundary_tractor_bundle(f, Point{1.0, 0.0, 0.1, 0.2});
        FAIL("flat boundary accepted");
    } catch (const DegenerateError& e) {
        CHECK(std::string(e.what()).find("degenerate boundary geometry") != std::string::npos);
    }
}

TEST_CASE("boundary curvature blocks and the normalized connection") {
    Geometry k = builtin_geometry("klein", 4);
    Point y{0.5, 0.5, -0.5, 0.5};
    CurvatureBlocks kb = curvature_blocks(k, y);
    CHECK(kb.V.max_abs() <= 1e-12);
    CHECK(kb.W.max_abs() <= 1e-12);
    NormalizationReport kn = normalize_boundary_connection(k, y);
    CHECK(kn.phi.max_abs() <= 1e-12);
    CHECK(kn.F0.max_abs() <= 1e-10);

    Geometry g = builtin_geometry("af2_generic", 4);
    for (const auto& z : g.sample_boundary(3, 31)) {
        CurvatureBlocks cb = curvature_blocks(g, z);
        CHECK(cb.W.max_abs() > 1e-2);
        CHECK(cb.pattern <= 1e-5);
        CHECK(cb.antisymmetry <= 1e-10);
        CHECK(cb.gamma_skew <= 1e-5);
        CHECK(cb.bottom_middle <= 1e-5);

        NormalizationReport nr = normalize_boundary_connection(g, z);
        CHECK(nr.phi.max_abs() > 1e-2);
        CHECK(nr.formula_residual <= 1e-6);
        CHECK(nr.skew_residual <= 1e-6);
        CHECK(nr.metric_residual <= 1e-6);
        CHECK(nr.t1_residual <= 1e-6);
        CHECK(nr.ricci_residual <= 1e-6);
        CHECK(nr.fault_residual > 0.1);
    }
    Geometry g3 = builtin_geometry("af2_generic", 3);
    try {
        normalize_boundary_connection(g3, Point{0.0, 0.1, 0.2});
        FAIL("n = 2 accepted");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("unsupported dimension") != std::string::npos);
    }
}

TEST_CASE("asymptotically parallel L(tau)") {
    Geometry k = builtin_geometry("klein", 4);
    ParallelReport p = asymptotically_parallel_check(k, Point{0.5, 0.5, -0.5, 0.5});
    CHECK(p.holds);
    CHECK(p.hypothesis <= 1e-6);
    CHECK(p.t1_residual <= 1e-6);
    CHECK(p.ricci_residual <= 1e-6);
    CHECK(p.tracefree_ricci <= 1e-5);

    Geometry g = builtin_geometry("af2_generic", 4);
    ParallelReport q = asymptotically_parallel_check(g, Point{0.0, 0.2, 0.1, -0.3});
    CHECK_FALSE(q.holds);
    CHECK(q.hypothesis > 1.0);
    CHECK(q.tracefree_ricci > 1e-5);
    CHECK(q.reason.find("does not vanish") != std::string::npos);
}
