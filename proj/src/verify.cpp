#include "tractorlab/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <set>
#include <sstream>

#include <Eigen/Dense>
#include <json.hpp>

#include "tractorlab/affine.hpp"
#include "tractorlab/boundary.hpp"
#include "tractorlab/errors.hpp"
#include "tractorlab/tractor.hpp"

namespace tractorlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// extrapolated boundary values inside checks whose identities are exact
constexpr double kLimitTol = 1e-5;

// Thrown by an evaluator that finds its hypothesis unmet at every sample.
struct SkipCheck {
    std::string reason;
    std::vector<Detail> details;
};

struct Out {
    std::vector<Detail> d;
    void add(const char* where, int i, const std::string& q, double r, std::string note = {}, double tol = 0.0) {
        if (!std::isfinite(r)) r = kInf;
        d.push_back({i, where, q, r, tol, std::move(note)});
    }
};

// Runs f and records +inf for a pole instead of aborting the whole check.
template <class F>
void guarded(Out& out, const char* where, int i, const std::string& q, F&& f) {
    try {
        f();
    } catch (const PoleError& e) {
        out.add(where, i, q, kInf, std::string("pole: ") + e.what());
    }
}

double rel(const JetArray& a, const JetArray& b) {
    int o = std::min(a.order(), b.order());
    double d = (a.truncated(o) - b.truncated(o)).max_abs_value();
    return d / (1.0 + std::max(a.max_abs_value(), b.max_abs_value()));
}

double norm_inf(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double rel(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m / (1.0 + std::max(norm_inf(a), norm_inf(b)));
}

// Extrapolation quality of a limit; +inf when the ladder diverged.
double limit_residual(const LimitResult& r) {
    if (r.diverged) return kInf;
    for (double v : r.value)
        if (!std::isfinite(v)) return kInf;
    return r.error / (1.0 + norm_inf(r.value));
}

std::string limit_note(const LimitResult& r) {
    std::string s = r.note;
    if (r.diverged) s += (s.empty() ? "" : "; ") + std::string("diverges");
    if (r.vanishing) s += (s.empty() ? "" : "; ") + std::string("vanishes");
    return s;
}

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

LimitResult ray_limit(const Geometry& geom, const Point& y, const LimitPlan& plan,
                      const std::function<std::vector<double>(const Point&)>& f) {
    return boundary_limit([&](double eps) { return f(geom.ray_point(y, eps)); }, plan);
}

// Levi-Civita data at an interior point, straight from the metric.
struct LcValues {
    JetArray G, R, Ric, P, g, ginv;
    double S = 0.0;
};

LcValues lc_values(const Geometry& geom, const Point& x) {
    LcValues v;
    v.G = levi_civita(geom).gamma(x, 2);
    v.R = riemann(v.G);
    v.Ric = ricci(v.R);
    v.P = schouten(v.Ric);
    v.g = geom.metric(x, 0);
    v.ginv = mat_inverse(v.g);
    v.S = scalar_curvature(v.ginv, v.Ric).value();
    return v;
}

double trace_gP(const LcValues& v, int d) {
    double s = 0.0;
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) s += v.ginv(a, b).value() * v.P(a, b).value();
    return s;
}

// hat nabla_a rho_b at a point from the rho-modified connection.
Tensor rho_hessian(const Geometry& geom, const Point& y) {
    int d = geom.dim;
    JetArray G = rho_connection(geom).gamma(y, 0);
    Jet r = geom.rho_jet(y, 2);
    Tensor H({d, d});
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            double v = r.partial(a).partial(b).value();
            for (int c = 0; c < d; ++c) v -= G(c, a, b).value() * r.partial(c).value();
            H(a, b) = v;
        }
    return H;
}

// Random quadratic polynomial in the chart coordinates.
Expr random_potential(const Geometry& geom, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    std::ostringstream s;
    s.precision(17);
    s << "0";
    for (int i = 0; i < geom.dim; ++i) {
        s << " + (" << u(rng) << ")*" << geom.coords[i];
        for (int j = i; j < geom.dim; ++j) s << " + (" << u(rng) << ")*" << geom.coords[i] << "*" << geom.coords[j];
    }
    return parse_expr(s.str(), geom.coords);
}

JetArray random_field(std::mt19937_64& rng, std::vector<int> shape, int d, int order) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    JetArray out = JetArray::zeros(shape, d, order);
    std::vector<Jet> X;
    for (int i = 0; i < d; ++i) X.push_back(Jet::variable(i, 0.0, d, order));
    for (size_t k = 0; k < out.size(); ++k) {
        Jet s = Jet::constant(d, order, u(rng));
        for (int i = 0; i < d; ++i) {
            s += X[i] * u(rng);
            for (int j = i; j < d; ++j) s += X[i] * X[j] * u(rng);
        }
        out[k] = s;
    }
    return out;
}

std::vector<double> flatten(const JetArray& a) { return a.values(); }

// ---------------------------------------------------------------------------
// kernel identities

std::vector<Detail> weyl_traces(const CheckContext& c) {
    Out out;
    int d = c.geom.dim;
    Connection conn = interior_connection(c.geom);
    for (size_t i = 0; i < c.interior.size(); ++i) {
        CurvaturePack pk = curvature_pack(conn, c.interior[i], 0);
        double scale = 1.0 + pk.riemann.max_abs_value();
        double t1 = 0.0, t2 = 0.0;
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                double s2 = 0.0;
                for (int e = 0; e < d; ++e) s2 += pk.weyl(a, b, e, e).value();
                t2 = std::max(t2, std::abs(s2));
                for (int e = 0; e < d; ++e) {
                    double s1 = 0.0;
                    for (int k = 0; k < d; ++k) s1 += pk.weyl(k, a, k, e).value();
                    t1 = std::max(t1, std::abs(s1));
                }
            }
        out.add("interior", int(i), "weyl-trace-first", t1 / scale);
        out.add("interior", int(i), "weyl-trace-last", t2 / scale);
        out.add("interior", int(i), "reassembly", rel(reassemble_riemann(pk.weyl, pk.schouten), pk.riemann));
    }
    return std::move(out.d);
}

std::vector<Detail> bianchi(const CheckContext& c) {
    Out out;
    int d = c.geom.dim;
    Connection conn = interior_connection(c.geom);
    for (size_t i = 0; i < c.interior.size(); ++i) {
        JetArray G = conn.gamma(c.interior[i], 3);
        JetArray R = riemann(G);  // order 1
        double scale = 1.0 + R.max_abs_value();
        double first = 0.0;
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                for (int e = 0; e < d; ++e)
                    for (int f = 0; f < d; ++f) {
                        double s = R(a, b, e, f).value() + R(b, f, e, a).value() + R(f, a, e, b).value();
                        first = std::max(first, std::abs(s));
                    }
        out.add("interior", int(i), "first", first / scale);

        JetArray dR = covariant_derivative(R, {IndexKind::Down, IndexKind::Down, IndexKind::Up, IndexKind::Down}, 0.0,
                                           G.truncated(1));
        double dscale = 1.0 + dR.max_abs_value();
        double second = 0.0;
        for (int e = 0; e < d; ++e)
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b)
                    for (int k = 0; k < d; ++k)
                        for (int l = 0; l < d; ++l) {
                            double s = dR(e, a, b, k, l).value() + dR(a, b, e, k, l).value() + dR(b, e, a, k, l).value();
                            second = std::max(second, std::abs(s));
                        }
        out.add("interior", int(i), "second", second / dscale);
    }
    return std::move(out.d);
}

std::vector<Detail> splitting_equivariance(const CheckContext& c) {
    Out out;
    const Geometry& geom = c.geom;
    int d = geom.dim, N = d + 1;
    double n = d - 1;
    Connection conn = interior_connection(geom);
    OneForm ups = gradient_form(random_potential(geom, c.plan.seed + 101));
    Connection mod = projective_modify(conn, ups);
    std::mt19937_64 rng(c.plan.seed + 102);
    for (size_t i = 0; i < c.interior.size(); ++i) {
        const Point& p = c.interior[i];
        JetArray G = conn.gamma(p, 3), Gh = mod.gamma(p, 3);
        JetArray P = schouten(ricci(riemann(G))), Ph = schouten(ricci(riemann(Gh)));
        JetArray Y = ups.eval(p, 2);
        JetArray A = std_connection_matrix(G.truncated(1), P);
        JetArray Ah = std_connection_matrix(Gh.truncated(1), Ph);
        out.add("interior", int(i), "connection-change", rel(change_splitting_connection(A, Y), Ah));

        TractorTensor sec = make_tractor({Slot::T}, 0, random_field(rng, {N}, d, 2), "base");
        out.add("interior", int(i), "derivative-section",
                rel(change_splitting(tractor_derivative(sec, A), Y.truncated(1)).c,
                    tractor_derivative(change_splitting(sec, Y), Ah).c));
        TractorTensor L = make_tractor({Slot::Tstar, Slot::Tstar}, 0, random_field(rng, {N, N}, d, 2), "base");
        out.add("interior", int(i), "derivative-form",
                rel(change_splitting(tractor_derivative(L, A), Y.truncated(1)).c,
                    tractor_derivative(change_splitting(L, Y), Ah).c));

        CurvaturePack k1 = curvature_pack(conn, p, 0), k2 = curvature_pack(mod, p, 0);
        out.add("interior", int(i), "weyl-invariance", rel(k1.weyl, k2.weyl));
    }

    // the L(tau), h and Phi instances in the rho splitting
    if (!geom.has_metric() || geom.alpha != 2.0) return std::move(out.d);
    Connection lc = levi_civita(geom);
    Connection rc = rho_connection(geom);
    OneForm ru = rho_upsilon(geom);
    for (size_t i = 0; i < c.interior.size(); ++i) {
        const Point& p = c.interior[i];
        JetArray G = lc.gamma(p, 1), Gh = rc.gamma(p, 1);
        JetArray P = schouten(ricci(riemann(G))), Ph = schouten(ricci(riemann(Gh)));
        JetArray g = geom.metric(p, 2), ginv = mat_inverse(g);
        Jet tau = tau_from_metric(g), rho = geom.rho_jet(p, 2);
        JetArray Y = ru.eval(p, 1);
        double r = rho.value(), t = tau.value(), th = t / r;
        std::vector<double> ra(d);
        for (int a = 0; a < d; ++a) ra[a] = rho.partial(a).value();

        JetArray Lform = JetArray::zeros({N, N}, d, 0);
        Lform(0, 0) = tau.truncated(0);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) Lform(1 + a, 1 + b) = P(a, b).truncated(0) * tau.truncated(0);
        JetArray Lhat = JetArray::zeros({N, N}, d, 0);
        Lhat(0, 0) += r * th;
        for (int a = 0; a < d; ++a) {
            Lhat(0, 1 + a) += 0.5 * ra[a] * th;
            Lhat(1 + a, 0) += 0.5 * ra[a] * th;
            for (int b = 0; b < d; ++b)
                Lhat(1 + a, 1 + b) += (P(a, b).value() * r + ra[a] * ra[b] / (4 * r)) * th;
        }
        JetArray moved = change_splitting(make_tractor({Slot::Tstar, Slot::Tstar}, 0, Lform, "lc"), Y.truncated(0)).c;
        out.add("interior", int(i), "Lhat-form", std::max(rel(moved, Lhat), rel(l_tau_matrix(tau, Gh, Ph), Lhat)));

        JetArray H = bgg_split_metricity(tau.reciprocal() * ginv, G, P);
        double gP = 0.0, grr = 0.0;
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) {
                gP += ginv(a, b).value() * P(a, b).value();
                grr += ginv(a, b).value() * ra[a] * ra[b];
            }
        JetArray hr = JetArray::zeros({N, N}, d, 0);
        hr(0, 0) += gP / ((n + 1) * t) + grr / (4 * r * r * t);
        for (int a = 0; a < d; ++a) {
            double m = 0.0;
            for (int b = 0; b < d; ++b) {
                hr(1 + a, 1 + b) += ginv(a, b).value() / t;
                m += ginv(a, b).value() * ra[b];
            }
            hr(0, 1 + a) += -m / (2 * r * t);
            hr(1 + a, 0) += -m / (2 * r * t);
        }
        JetArray Hr = change_splitting(make_tractor({Slot::T, Slot::T}, 0, H, "lc"), Y.truncated(0)).c;
        out.add("interior", int(i), "h-rho-splitting",
                std::max(rel(Hr, hr), rel(bgg_split_metricity(tau.reciprocal() * ginv, Gh, Ph), hr)));

        if (std::abs(gP) < 1e-8) {
            out.add("interior", int(i), "Phi-rho-splitting", 0.0, "g^{ab}P_ab vanishes; instance not applicable");
            continue;
        }
        JetArray phi = JetArray::zeros({N, N}, d, 0);
        phi(0, 0) += th * r * (n + 1) / gP;
        for (int a = 0; a < d; ++a) {
            phi(0, 1 + a) += th * (n + 1) / 2 / gP * ra[a];
            phi(1 + a, 0) += th * (n + 1) / 2 / gP * ra[a];
            for (int b = 0; b < d; ++b)
                phi(1 + a, 1 + b) += th * (r * g(a, b).value() + (n + 1) / (4 * r) / gP * ra[a] * ra[b]);
        }
        out.add("interior", int(i), "Phi-rho-splitting", rel(tractor_metric_inverse(Hr), phi));
    }
    return std::move(out.d);
}

std::vector<Detail> tractor_curv_consistency(const CheckContext& c) {
    Out out;
    Connection conn = interior_connection(c.geom);
    Connection mod = projective_modify(conn, gradient_form(random_potential(c.geom, c.plan.seed + 201)));
    for (size_t i = 0; i < c.interior.size(); ++i) {
        int k = 0;
        for (const Connection* cn : {&conn, &mod}) {
            const Point& p = c.interior[i];
            JetArray G = cn->gamma(p, 2);
            JetArray P = schouten(ricci(riemann(G)));
            JetArray F = tractor_curvature(std_connection_matrix(G.truncated(1), P));
            CurvaturePack pk = curvature_pack(*cn, p, 0);
            out.add("interior", int(i), k++ == 0 ? "base" : "modified",
                    rel(F, standard_curvature_blocks(pk.weyl, pk.cotton)));
        }
    }
    return std::move(out.d);
}

// ---------------------------------------------------------------------------
// compactness and the defining density

std::vector<Detail> prop_2_1_extend(const CheckContext& c) {
    Out out;
    const Geometry& geom = c.geom;
    const LimitPlan& lp = c.plan.limit;
    Connection direct = rho_connection(geom, RhoExtension{false, false});
    Connection smooth = rho_connection(geom);
    for (size_t i = 0; i < c.boundary.size(); ++i) {
        const Point& y = c.boundary[i];
        LimitResult gl = ray_limit(geom, y, lp, [&](const Point& x) { return flatten(direct.gamma(x, 0)); });
        out.add("boundary", int(i), "rho-connection-limit", limit_residual(gl),
                limit_note(gl) + (gl.note.empty() ? "" : "; ") + "log-slope " + num(gl.slope));
        guarded(out, "boundary", int(i), "rho-connection-at-boundary", [&] {
            auto at = flatten(smooth.gamma(y, 0));
            out.add("boundary", int(i), "rho-connection-at-boundary", gl.diverged ? kInf : rel(at, gl.value));
        });
        LimitResult sl = ray_limit(geom, y, lp, [&](const Point& x) { return std::vector<double>{lc_values(geom, x).S}; });
        out.add("boundary", int(i), "scalar-curvature-limit", limit_residual(sl),
                sl.value.empty() ? limit_note(sl) : "S = " + num(sl.value[0]));
        LimitResult tl = ray_limit(geom, y, lp, [&](const Point& x) {
            JetArray g = geom.metric(x, 0);
            double t = tau_from_metric(g).value();
            return flatten(mat_inverse(g) * (1.0 / t));
        });
        out.add("boundary", int(i), "tau-inverse-metric-limit", limit_residual(tl), limit_note(tl));
    }
    return std::move(out.d);
}

std::vector<Detail> prop_2_2_dense(const CheckContext& c) {
    Out out;
    const Geometry& geom = c.geom;
    const LimitPlan& lp = c.plan.limit;
    for (size_t i = 0; i < c.boundary.size(); ++i) {
        const Point& y = c.boundary[i];
        LimitResult tl = ray_limit(geom, y, lp, [&](const Point& x) {
            return std::vector<double>{tau_from_metric(geom.metric(x, 0)).value() / geom.rho_value(x)};
        });
        double res = limit_residual(tl);
        std::string note = limit_note(tl);
        if (tl.vanishing || (!tl.value.empty() && std::abs(tl.value[0]) < 1e-8)) {
            res = kInf;
            note += note.empty() ? "tau / rho tends to zero" : "; tau / rho tends to zero";
        }
        if (!tl.value.empty()) note += (note.empty() ? "" : "; ") + std::string("limit ") + num(tl.value[0]);
        out.add("boundary", int(i), "tau-hat-limit", res, note);
        guarded(out, "boundary", int(i), "tau-hat-at-boundary", [&] {
            double th = tau_hat(geom, y, 0).value();
            out.add("boundary", int(i), "tau-hat-at-boundary",
                    tl.diverged || tl.value.empty() ? kInf : std::abs(th - tl.value[0]) / (1.0 + std::abs(th)));
        });

        LimitResult gl = ray_limit(geom, y, lp, [&](const Point& x) {
            return flatten(mat_inverse(geom.metric(x, 0)) * (1.0 / geom.rho_value(x)));
        });
        out.add("boundary", int(i), "rho-inverse-metric-limit", limit_residual(gl), limit_note(gl));

        LimitResult sl = ray_limit(geom, y, lp, [&](const Point& x) { return std::vector<double>{lc_values(geom, x).S}; });
        double sres = limit_residual(sl);
        if (!sl.value.empty() && std::abs(sl.value[0]) < 1e-6) sres = kInf;
        out.add("boundary", int(i), "scalar-curvature-nonzero", sres,
                sl.value.empty() ? limit_note(sl) : "S = " + num(sl.value[0]));
    }
    return std::move(out.d);
}

std::vector<Detail> prop_2_3_h(const CheckContext& c) {
    Out out;
    const Geometry& geom = c.geom;
    int d = geom.dim;
    double n = d - 1;
    for (size_t i = 0; i < c.boundary.size(); ++i) {
        const Point& y = c.boundary[i];
        LimitResult hl = ray_limit(geom, y, c.plan.limit, [&](const Point& x) {
            LcValues v = lc_values(geom, x);
            double r = geom.rho_value(x), gP = trace_gP(v, d);
            Point dr = geom.rho_gradient(x);
            std::vector<double> h(d * d);
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b)
                    h[a * d + b] = r * v.g(a, b).value() + (n + 1) / (4 * r * gP) * dr[a] * dr[b];
            return h;
        });
        out.add("boundary", int(i), "h-limit", limit_residual(hl), limit_note(hl));
        if (hl.diverged) continue;
        Tensor H({d, d});
        H.v = hl.value;
        auto basis = geom.tangential_basis(y);
        Tensor ht = tangential(H, basis);
        int m = static_cast<int>(basis.size());
        Eigen::MatrixXd hm(m, m);
        for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) hm(a, b) = 0.5 * (ht(a, b) + ht(b, a));
        double mn = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(hm).eigenvalues().cwiseAbs().minCoeff();
        out.add("boundary", int(i), "h-tangential-nondegenerate", mn >= 1e-6 ? 0.0 : kInf, "min |eig| " + num(mn));
        if (const AsymptoticForm* f = geom.asymptotic_form()) {
            Tensor hf({d, d});
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) hf(a, b) = eval_scalar(f->h[a][b], y);
            out.add("boundary", int(i), "h-tangential-vs-form", rel(tangential(hf, basis).v, ht.v));
        }
    }
    return std::move(out.d);
}

std::vector<Detail> lem_2_4_transversal(const CheckContext& c) {
    Out out;
    const Geometry& geom = c.geom;
    for (size_t i = 0; i < c.boundary.size(); ++i) {
        const Point& y = c.boundary[i];
        guarded(out, "boundary", int(i), "geodesic", [&] {
            TransversalCurve tc = geodetic_transversal(geom, y, geom.transversal(y), c.plan.ode_step, c.plan.ode_horizon);
            out.add("boundary", int(i), "geodesic", tc.residual);
            out.add("boundary", int(i), "drho-mu0", std::abs(tc.drho_mu0 - 1.0));
        });
    }
    guarded(out, "global", -1, "collar", [&] {
        double h = c.plan.ode_horizon;
        try {
            Collar col = collar_sample(geom, c.boundary, {0.0, 0.5 * h, h}, c.plan.ode_step);
            double row = 0.0;
            for (size_t i = 0; i < c.boundary.size(); ++i)
                for (size_t a = 0; a < c.boundary[i].size(); ++a)
                    row = std::max(row, std::abs(col.points[i][0][a] - c.boundary[i][a]));
            out.add("global", -1, "collar-t0-row", row);
            out.add("global", -1, "collar-injective", col.min_distance > 0.0 ? 0.0 : kInf,
                    "min distance " + num(col.min_distance));
        } catch (const CollisionError& e) {
            out.add("global", -1, "collar-injective", kInf, e.what());
        }
    });
    return std::move(out.d);
}

std::vector<Detail> prop_2_5_mu(const CheckContext& c) {
    Out out;
    const Geometry& geom = c.geom;
    int d = geom.dim;
    double n = d - 1;
    auto extrapolated = [&](const TransversalCurve& tc) {
        std::vector<double> ts, vs;
        for (size_t k = 1; k <= 6 && k < tc.samples.size(); ++k) {
            ts.push_back(tc.samples[k].t);
            vs.push_back(rho2_g_mu_mu(geom, tc.samples[k]));
        }
        return neville(ts, vs, 0.0);
    };
    for (size_t i = 0; i < c.boundary.size(); ++i) {
        const Point& y = c.boundary[i];
        guarded(out, "boundary", int(i), "constancy", [&] {
            TransversalCurve tc = geodetic_transversal(geom, y, geom.transversal(y), c.plan.ode_step, c.plan.ode_horizon);
            double lo = kInf, hi = -kInf;
            for (size_t k = 1; k < tc.samples.size(); ++k) {
                double v = rho2_g_mu_mu(geom, tc.samples[k]);
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            out.add("boundary", int(i), "constancy", (hi - lo) / (1.0 + std::abs(hi)));

            double v0 = extrapolated(tc);
            LimitResult gl = ray_limit(geom, y, c.plan.limit, [&](const Point& x) {
                return std::vector<double>{trace_gP(lc_values(geom, x), d)};
            });
            if (gl.diverged || gl.value.empty() || gl.value[0] == 0.0) {
                out.add("boundary", int(i), "value", kInf, "g^{ij}P_ij has no usable limit", kLimitTol);
            } else {
                double target = -(n + 1) / 4.0 / gl.value[0];
                out.add("boundary", int(i), "value", std::abs(v0 - target) / (1.0 + std::abs(target)),
                        "rho^2 g(mu,mu) -> " + num(v0) + ", expected " + num(target), kLimitTol);
            }

            // a nearby transversal: the value is locally constant on the boundary
            Point z = y;
            auto basis = geom.tangential_basis(y);
            for (int a = 0; a < d; ++a) z[a] += 0.01 * basis[0][a];
            z = geom.project_to_boundary(z);
            TransversalCurve tz = geodetic_transversal(geom, z, geom.transversal(z), c.plan.ode_step, c.plan.ode_horizon);
            double vz = extrapolated(tz);
            out.add("boundary", int(i), "cross-transversal", std::abs(vz - v0) / (1.0 + std::abs(v0)), {}, 1e-4);
        });
    }
    return std::move(out.d);
}

std::vector<Detail> thm_2_5_S_const(const CheckContext& c) {
    Out out;
    AsymptoticReport r = asymptotic_h(c.geom, c.boundary, c.plan.limit);
    if (!r.error.empty()) {
        out.add("global", -1, "scalar-curvature-limit", kInf, r.error);
        return std::move(out.d);
    }
    for (size_t i = 0; i < r.S.size(); ++i)
        out.add("boundary", int(i), "scalar-curvature-limit", r.S_error[i] / (1.0 + std::abs(r.S[i])), "S = " + num(r.S[i]));
    double s0 = r.S.empty() ? 0.0 : r.S[0];
    out.add("global", -1, "spread", r.S_spread / (1.0 + std::abs(s0)));
    return std::move(out.d);
}

std::vector<Detail> thm_2_5_C(const CheckContext& c) {
    Out out;
    AsymptoticReport r = asymptotic_h(c.geom, c.boundary, c.plan.limit);
    if (!r.error.empty()) {
        out.add("global", -1, "C", kInf, r.error);
        return std::move(out.d);
    }
    out.add("global", -1, "h-extrapolation", r.h_error / (1.0 + r.h_boundary.max_abs()), {}, kLimitTol);
    out.add("global", -1, "h-tangential-nondegenerate", r.h_min_eig >= 1e-6 ? 0.0 : kInf, "min |eig| " + num(r.h_min_eig));
    if (const AsymptoticForm* f = c.geom.asymptotic_form()) {
        for (size_t i = 0; i < c.boundary.size(); ++i) {
            double cf = eval_scalar(f->C, c.boundary[i]);
            out.add("boundary", int(i), "C-vs-form", std::abs(r.C - cf) / (1.0 + std::abs(cf)),
                    "C = " + num(r.C) + ", form " + num(cf));
        }
    } else {
        out.add("global", -1, "C", 0.0, "C = " + num(r.C));
    }
    return std::move(out.d);
}

// ---------------------------------------------------------------------------
// second fundamental form and curvature asymptotics

std::vector<Detail> prop_3_1_pff(const CheckContext& c) {
    Out out;
    const Geometry& geom = c.geom;
    int d = geom.dim;
    double al = geom.alpha;
    for (size_t i = 0; i < c.boundary.size(); ++i) {
        const Point& y = c.boundary[i];
        guarded(out, "boundary", int(i), "schouten-limit", [&] {
            Tensor H = rho_hessian(geom, y);
            LimitResult ql = ray_limit(geom, y, c.plan.limit, [&](const Point& x) {
                LcValues v = lc_values(geom, x);
                double r = geom.rho_value(x);
                Point dr = geom.rho_gradient(x);
                std::vector<double> q(d * d);
                for (int a = 0; a < d; ++a)
                    for (int b = 0; b < d; ++b)
                        q[a * d + b] = r * v.P(a, b).value() + (al - 1) / (al * al) * dr[a] * dr[b] / r;
                return q;
            });
            out.add("boundary", int(i), "schouten-limit", limit_residual(ql), limit_note(ql));
            std::vector<double> target = H.v;
            for (double& t : target) t /= al;
            out.add("boundary", int(i), "schouten-vs-hessian", ql.diverged ? kInf : rel(ql.value, target));
        });
        guarded(out, "boundary", int(i), "second-fundamental-form", [&] {
            SecondFundamentalForm s = second_fundamental_form(geom, y, c.plan.limit, c.plan.seed + i);
            double scale = 1.0 + s.direct.max_abs();
            out.add("boundary", int(i), "direct-vs-extrapolated", s.agreement / scale);
            out.add("boundary", int(i), "conformal-class", s.conformal_residual);
            out.add("boundary", int(i), "projective-invariance", s.projective_residual);
        });
    }
    return std::move(out.d);
}

std::vector<Detail> prop_3_2_i(const CheckContext& c) {
    Out out;
    for (size_t i = 0; i < c.boundary.size(); ++i) {
        guarded(out, "boundary", int(i), "tangential-hessian", [&] {
            SecondFundamentalForm s = second_fundamental_form(c.geom, c.boundary[i], c.plan.limit, c.plan.seed + i);
            out.add("boundary", int(i), "tangential-hessian", s.direct.max_abs());
            out.add("boundary", int(i), "tangential-hessian-extrapolated", s.extrapolated.max_abs());
        });
    }
    return std::move(out.d);
}

std::vector<Detail> prop_3_2_ii(const CheckContext& c) {
    Out out;
    for (size_t i = 0; i < c.boundary.size(); ++i) {
        const Point& y = c.boundary[i];
        guarded(out, "boundary", int(i), "h-vs-hessian", [&] {
            AsymptoticReport r = asymptotic_h(c.geom, {y}, c.plan.limit);
            if (!r.error.empty()) {
                out.add("boundary", int(i), "h-vs-hessian", kInf, r.error);
                return;
            }
            SecondFundamentalForm s = second_fundamental_form(c.geom, y, c.plan.limit, c.plan.seed + i);
            std::vector<double> target = s.direct.v;
            for (double& t : target) t *= -2.0 * r.C;
            out.add("boundary", int(i), "h-vs-hessian", rel(r.h_boundary.v, target), "C = " + num(r.C));
        });
    }
    return std::move(out.d);
}

// rho^k R along the ray against a target built from the boundary data at y.
void curvature_limit(Out& out, const CheckContext& c, size_t i, int power, const std::vector<double>& target) {
    const Geometry& geom = c.geom;
    const Point& y = c.boundary[i];
    Connection conn = interior_connection(geom);
    LimitResult rl = ray_limit(geom, y, c.plan.limit, [&](const Point& x) {
        JetArray R = riemann(conn.gamma(x, 1));
        return flatten(R * std::pow(geom.rho_value(x), power));
    });
    out.add("boundary", int(i), "curvature-limit", limit_residual(rl), limit_note(rl));
    out.add("boundary", int(i), "curvature-vs-boundary-data", rl.diverged ? kInf : rel(rl.value, target));
}

std::vector<Detail> prop_3_3_i(const CheckContext& c) {
    Out out;
    int d = c.geom.dim;
    for (size_t i = 0; i < c.boundary.size(); ++i) {
        guarded(out, "boundary", int(i), "curvature-limit", [&] {
            Tensor H = rho_hessian(c.geom, c.boundary[i]);
            std::vector<double> t(d * d * d * d, 0.0);
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b)
                    for (int e = 0; e < d; ++e)
                        for (int f = 0; f < d; ++f)
                            t[((a * d + b) * d + e) * d + f] = (e == a ? H(b, f) : 0.0) - (e == b ? H(a, f) : 0.0);
            curvature_limit(out, c, i, 1, t);
        });
    }
    return std::move(out.d);
}

std::vector<Detail> prop_3_3_ii(const CheckContext& c) {
    Out out;
    int d = c.geom.dim;
    double al = c.geom.alpha, k = (1 - al) / (al * al);
    for (size_t i = 0; i < c.boundary.size(); ++i) {
        guarded(out, "boundary", int(i), "curvature-limit", [&] {
            Point dr = c.geom.rho_gradient(c.boundary[i]);
            std::vector<double> t(d * d * d * d, 0.0);
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b)
                    for (int e = 0; e < d; ++e)
                        for (int f = 0; f < d; ++f)
                            t[((a * d + b) * d + e) * d + f] =
                                k * ((e == a ? dr[b] * dr[f] : 0.0) - (e == b ? dr[a] * dr[f] : 0.0));
            curvature_limit(out, c, i, 2, t);
        });
    }
    return std::move(out.d);
}

std::vector<Detail> thm_3_3_einstein(const CheckContext& c) {
    Out out;
    const Geometry& geom = c.geom;
    double C = 0.0;
    const AsymptoticForm* f = geom.asymptotic_form();
    if (!f) {
        AsymptoticReport r = asymptotic_h(geom, c.boundary, c.plan.limit);
        if (!r.error.empty()) {
            out.add("global", -1, "C", kInf, r.error);
            return std::move(out.d);
        }
        C = r.C;
    }
    for (size_t i = 0; i < c.boundary.size(); ++i) {
        const Point& y = c.boundary[i];
        guarded(out, "boundary", int(i), "tracefree-ricci-tangential", [&] {
            double Ci = f ? eval_scalar(f->C, y) : C;
            EinsteinReport e = einstein_asymptotics(geom, y, Ci, c.plan.limit);
            out.add("boundary", int(i), "tracefree-ricci-tangential",
                    e.tangential_finite ? e.tangential_error / (1.0 + e.tangential_limit) : kInf,
                    "max " + num(e.tangential_limit) + "; rho-scaled normal-normal part " + num(e.normal_normal));
            out.add("boundary", int(i), "curvature-tail", e.tail_finite ? e.tail_error / (1.0 + e.tail_limit) : kInf,
                    "max " + num(e.tail_limit) + ", log-slope " + num(e.tail_slope));
        });
    }
    return std::move(out.d);
}

// ---------------------------------------------------------------------------
// tractor bundle along the boundary

std::vector<Detail> prop_4_1_bundle(const CheckContext& c) {
    Out out;
    for (size_t i = 0; i < c.boundary.size(); ++i) {
        BoundaryTractorData B = boundary_tractor_bundle(c.geom, c.boundary[i]);
        out.add("boundary", int(i), "gram-form", B.gram_residual);
        out.add("boundary", int(i), "sigma-isotropic", B.isotropy, {}, 1e-8);
        out.add("boundary", int(i), "quotient-metric", B.quotient_residual);
        out.add("boundary", int(i), "gamma-inverse", B.gamma_inverse_residual);
        bool sig = B.positive == B.gamma_positive + 1 && B.negative == B.gamma_negative + 1;
        out.add("boundary", int(i), "signature", sig ? 0.0 : kInf,
                "L(tau) (" + std::to_string(B.positive) + "," + std::to_string(B.negative) + "), gamma (" +
                    std::to_string(B.gamma_positive) + "," + std::to_string(B.gamma_negative) + ")");
        out.add("boundary", int(i), "gamma-nondegenerate", B.gamma_min_singular >= 1e-6 ? 0.0 : kInf,
                "min singular " + num(B.gamma_min_singular));
    }
    return std::move(out.d);
}

std::vector<Detail> prop_4_2_splitids(const CheckContext& c) {
    Out out;
    const Geometry& geom = c.geom;
    int d = geom.dim;
    Connection lc = levi_civita(geom);
    Connection rc = rho_connection(geom);
    for (size_t i = 0; i < c.interior.size(); ++i) {
        const Point& p = c.interior[i];
        JetArray G = lc.gamma(p, 1), Gh = rc.gamma(p, 1);
        JetArray P = schouten(ricci(riemann(G))), Ph = schouten(ricci(riemann(Gh)));
        Jet tau = tau_from_metric(geom.metric(p, 2)), rho = geom.rho_jet(p, 2);
        JetArray Li = tractor_metric_inverse(l_tau_matrix(tau, Gh, Ph));
        double r = rho.value();
        InverseSlots sl = inverse_slots(Li, tau.truncated(0) * rho.truncated(0).reciprocal());
        JetArray Pinv = mat_inverse(P.truncated(0));
        std::vector<double> ra(d);
        for (int a = 0; a < d; ++a) ra[a] = rho.partial(a).value();
        auto gam = [&](int a, int b) { return r * P(a, b).value() + ra[a] * ra[b] / (4 * r); };
        double tr = 0.0, e2 = 0.0, e3 = 0.0, et = 0.0, ep = 0.0;
        for (int a = 0; a < d; ++a) tr += sl.t(a).value() * ra[a];
        for (int b = 0; b < d; ++b) {
            double v = 0.0;
            for (int a = 0; a < d; ++a) v += sl.t(a).value() * gam(a, b);
            e2 = std::max(e2, std::abs(v + 0.25 * sl.psi.value() * ra[b]));
        }
        for (int a = 0; a < d; ++a) {
            double ta = 0.0;
            for (int b = 0; b < d; ++b) ta += -Pinv(a, b).value() * ra[b] / (4 * r * r);
            et = std::max(et, std::abs(ta - sl.t(a).value()));
            for (int b = 0; b < d; ++b) {
                double v = sl.t(a).value() * ra[b];
                for (int k = 0; k < d; ++k) v += sl.rho_inv_P_inv(a, k).value() * gam(k, b);
                e3 = std::max(e3, std::abs(v - (a == b ? 1.0 : 0.0)));
                ep = std::max(ep, std::abs(sl.rho_inv_P_inv(a, b).value() - Pinv(a, b).value() / r));
            }
        }
        out.add("interior", int(i), "t-drho", std::abs(tr - (1 - r * sl.psi.value())));
        out.add("interior", int(i), "t-gamma", e2);
        out.add("interior", int(i), "inverse-identity", e3);
        out.add("interior", int(i), "t-slot", et / (1.0 + sl.t.max_abs_value()));
        out.add("interior", int(i), "P-inverse-slot", ep / (1.0 + sl.rho_inv_P_inv.max_abs_value()));
    }
    for (size_t i = 0; i < c.boundary.size(); ++i) {
        const Point& y = c.boundary[i];
        // t from the inverse of L(tau) in the rho splitting, as in the interior identities
        LimitResult tl = ray_limit(geom, y, c.plan.limit, [&](const Point& x) {
            JetArray Gh = rc.gamma(x, 1);
            // tau = rho tau-hat with the cancellation-free tau-hat
            Jet rho = geom.rho_jet(x, 2), th = tau_hat(geom, x, 2);
            JetArray Li = tractor_metric_inverse(l_tau_matrix(rho * th, Gh, schouten(ricci(riemann(Gh)))));
            InverseSlots sl = inverse_slots(Li, th.truncated(0));
            double s = 0.0;
            for (int a = 0; a < d; ++a) s += sl.t(a).value() * rho.partial(a).value();
            return std::vector<double>{s};
        });
        out.add("boundary", int(i), "t-drho-limit",
                tl.diverged || tl.value.empty() ? kInf : std::abs(tl.value[0] - 1.0) + limit_residual(tl),
                limit_note(tl), kLimitTol);
    }
    return std::move(out.d);
}

std::vector<Detail> prop_4_3_identity(const CheckContext& c) {
    Out out;
    for (size_t i = 0; i < c.interior.size(); ++i) {
        const Point& x = c.interior[i];
        JetArray a = rho_nabla_P_direct(c.geom, x, 1);
        JetArray b = rho_nabla_P_from_phi(c.geom, x, 1);
        RhoScaleData D = rho_scale_data(c.geom, x, 1);
        out.add("interior", int(i), "phi-form", rel(a, b));
        out.add("interior", int(i), "smooth-form", rel(a, D.rho_dP));
    }
    return std::move(out.d);
}

std::vector<Detail> thm_4_1a_normal(const CheckContext& c) {
    Out out;
    int held = 0;
    std::string reason;
    for (size_t i = 0; i < c.boundary.size(); ++i) {
        ParallelReport p = asymptotically_parallel_check(c.geom, c.boundary[i], c.plan.limit);
        bool flat_tf = p.tracefree_ricci <= 1e-5;
        // the hypothesis holds exactly when the trace-free Ricci tensor vanishes at the boundary
        out.add("boundary", int(i), "equivalence", p.holds == flat_tf ? 0.0 : kInf,
                "tau nabla P " + num(p.hypothesis) + ", trace-free Ricci " + num(p.tracefree_ricci));
        if (!p.holds) {
            reason = p.reason;
            continue;
        }
        ++held;
        out.add("boundary", int(i), "hypothesis", p.hypothesis);
        out.add("boundary", int(i), "sigma-line", p.t1_residual);
        out.add("boundary", int(i), "ricci-contraction", p.ricci_residual);
    }
    if (held == 0) {
        bool bad = std::any_of(out.d.begin(), out.d.end(), [](const Detail& x) { return !(x.residual <= 0.0); });
        if (!bad) throw SkipCheck{"hypothesis fails: " + reason, std::move(out.d)};
    }
    return std::move(out.d);
}

std::vector<Point> interior_and_boundary(const CheckContext& c) {
    std::vector<Point> pts = c.interior;
    pts.insert(pts.end(), c.boundary.begin(), c.boundary.end());
    return pts;
}

std::vector<Detail> thm_4_3_metric(const CheckContext& c) {
    Out out;
    auto pts = interior_and_boundary(c);
    for (size_t k = 0; k < pts.size(); ++k) {
        bool in = k < c.interior.size();
        const char* where = in ? "interior" : "boundary";
        int i = in ? int(k) : int(k - c.interior.size());
        guarded(out, where, i, "metric-compatibility", [&] {
            RhoScaleData D = rho_scale_data(c.geom, pts[k], 1);
            out.add(where, i, "metric-compatibility", metric_compatibility_residual(D, 20, c.plan.seed + k));
            out.add(where, i, "contorsion-finite", std::isfinite(D.contorsion.max_abs_value()) ? 0.0 : kInf);
        });
    }
    return std::move(out.d);
}

std::vector<Detail> thm_4_3_torsionfree(const CheckContext& c) {
    Out out;
    int d = c.geom.dim, N = d + 1;
    auto pts = interior_and_boundary(c);
    for (size_t k = 0; k < pts.size(); ++k) {
        bool in = k < c.interior.size();
        const char* where = in ? "interior" : "boundary";
        int i = in ? int(k) : int(k - c.interior.size());
        guarded(out, where, i, "torsion", [&] {
            RhoScaleData D = rho_scale_data(c.geom, pts[k], 1);
            JetArray F = tractor_curvature(D.connection);
            JetArray B = metric_curvature_blocks(D);
            double scale = 1.0 + F.max_abs_value();
            double torsion = 0.0;
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b)
                    for (int I = 0; I < N; ++I) torsion = std::max(torsion, std::abs(F(a, b, I, 0).value()));
            out.add(where, i, "torsion", torsion / scale);
            out.add(where, i, "block-formula", (F.truncated(0) - B.truncated(0)).max_abs_value() / scale);
        });
    }
    return std::move(out.d);
}

std::vector<Detail> thm_4_4_normality(const CheckContext& c) {
    Out out;
    // degeneracy is reported before the dimension restriction
    for (const auto& y : c.boundary) boundary_tractor_bundle(c.geom, y);
    if (c.geom.n() < 3) throw SkipCheck{"unsupported dimension: normalization needs n >= 3", {}};
    for (size_t i = 0; i < c.boundary.size(); ++i) {
        const Point& y = c.boundary[i];
        CurvatureBlocks cb = curvature_blocks(c.geom, y);
        out.add("boundary", int(i), "zero-pattern", cb.pattern, {}, kLimitTol);
        out.add("boundary", int(i), "form-antisymmetry", cb.antisymmetry, {}, kLimitTol);
        out.add("boundary", int(i), "W-gamma-skew", cb.gamma_skew, {}, kLimitTol);
        out.add("boundary", int(i), "bottom-middle", cb.bottom_middle, {}, kLimitTol);
        NormalizationReport nr = normalize_boundary_connection(c.geom, y);
        out.add("boundary", int(i), "phi-formula", nr.formula_residual);
        out.add("boundary", int(i), "psi-skew", nr.skew_residual);
        out.add("boundary", int(i), "normalized-metric", nr.metric_residual);
        out.add("boundary", int(i), "normalized-sigma-line", nr.t1_residual);
        out.add("boundary", int(i), "ricci-contraction", nr.ricci_residual);
        out.add("boundary", int(i), "fault-detector", nr.fault_residual > 0.1 ? 0.0 : kInf,
                "perturbed residual " + num(nr.fault_residual));
    }
    return std::move(out.d);
}

std::vector<Check> build_registry() {
    std::vector<Check> r;
    auto add = [&](std::string id, std::string ref, std::vector<std::string> req, double tol, auto fn) {
        r.push_back({std::move(id), std::move(ref), std::move(req), tol, fn});
    };
    add("weyl-traces", "The projective Weyl tensor is totally trace-free and, with the Schouten tensor, reassembles the curvature.",
        {}, 1e-9, weyl_traces);
    add("bianchi", "The curvature of a torsion-free connection satisfies the first and second Bianchi identities.", {}, 1e-9,
        bianchi);
    add("splitting-equivariance",
        "Changing the connection in the projective class changes tractor splittings by the standard formula, and the tractor "
        "connection, L(tau), h and its inverse transform accordingly.",
        {}, 1e-7, splitting_equivariance);
    add("tractor-curv-consistency",
        "The curvature of the normal tractor connection has the Weyl tensor in its middle block and the Cotton tensor below it.",
        {}, 1e-7, tractor_curv_consistency);
    add("prop-2.1-extend",
        "For a projectively compact metric the modified connection, the scalar curvature and tau^-1 g^ab extend to the boundary.",
        {"metric"}, 1e-5, prop_2_1_extend);
    add("prop-2.2-dense",
        "The volume density tau is a defining density: tau / rho extends to the boundary without vanishing, as does rho^-1 g^ab, "
        "and the scalar curvature has a nonzero boundary value.",
        {"metric", "alpha=2"}, 1e-5, prop_2_2_dense);
    add("prop-2.3-h",
        "rho g + (n+1)/(4 rho g^ij P_ij) drho drho extends to the boundary and is nondegenerate along it.",
        {"metric", "alpha=2"}, 1e-5, prop_2_3_h);
    add("lem-2.4-transversal",
        "Each transversal at a boundary point extends to a geodetic transversal of the modified connection, giving an "
        "injective collar.",
        {}, 1e-8, lem_2_4_transversal);
    add("prop-2.5-mu",
        "rho^2 g(mu, mu) is constant along geodetic transversals and equals -(n+1)/4 times the inverse of g^ij P_ij at the "
        "boundary.",
        {"metric", "alpha=2"}, 1e-6, prop_2_5_mu);
    add("thm-2.5-S-const", "The scalar curvature has a locally constant nonzero boundary value.", {"metric", "alpha=2"}, 1e-5,
        thm_2_5_S_const);
    add("thm-2.5-C",
        "The metric takes the form h / rho + C drho^2 / rho^2 with C = -n(n+1)/(4S) and h nondegenerate along the boundary.",
        {"metric", "alpha=2"}, 1e-6, thm_2_5_C);
    add("prop-3.1-pff",
        "rho P + (alpha-1)/alpha^2 drho drho / rho extends with boundary value hat nabla d rho / alpha, whose tangential part "
        "is a well defined projective second fundamental form.",
        {"metric"}, 1e-5, prop_3_1_pff);
    add("prop-3.2-i", "For order one the boundary is totally geodesic.", {"alpha=1"}, 1e-5, prop_3_2_i);
    add("prop-3.2-ii", "For order two the boundary value of h along the boundary is -2C hat nabla d rho.",
        {"metric", "alpha=2"}, 1e-5, prop_3_2_ii);
    add("prop-3.3-i",
        "For order one, rho R_ab^c_d extends with boundary value delta^c_a hat nabla_b rho_d - delta^c_b hat nabla_a rho_d.",
        {"alpha=1"}, 1e-5, prop_3_3_i);
    add("prop-3.3-ii",
        "For order two, rho^2 R_ab^c_d tends to the rank-one tensor (1-alpha)/alpha^2 (delta^c_a rho_b rho_d - delta^c_b rho_a "
        "rho_d).",
        {"alpha=2"}, 1e-5, prop_3_3_ii);
    add("thm-3.3-einstein",
        "The trace-free Ricci tensor extends along the boundary and the curvature equals the constant-curvature model up to "
        "terms that extend.",
        {"metric", "alpha=2"}, 1e-5, thm_3_3_einstein);
    add("prop-4.1-bundle",
        "Along the boundary L(tau) is a nondegenerate tractor metric with isotropic sigma line, giving a standard conformal "
        "tractor bundle.",
        {"metric", "alpha=2"}, 1e-7, prop_4_1_bundle);
    add("prop-4.2-splitids",
        "The inverse of L(tau) in the rho splitting has slots rho^-1 P^ab, t and psi satisfying t.drho = 1 - rho psi and the "
        "companion identities.",
        {"metric", "alpha=2"}, 1e-8, prop_4_2_splitids);
    add("prop-4.3-identity",
        "rho nabla P is expressed through smooth data: Phi = P - S g / (n(n+1)) and the modified connection.",
        {"metric", "alpha=2"}, 1e-8, prop_4_3_identity);
    add("thm-4.1a-normal",
        "When nabla L(tau) vanishes along the boundary the induced connection is normal, equivalently the trace-free Ricci "
        "tensor vanishes there.",
        {"metric", "alpha=2", "n>=3"}, 1e-6, thm_4_1a_normal);
    add("thm-4.3-metric", "The corrected tractor connection preserves L(tau) and extends to the boundary.",
        {"metric", "alpha=2"}, 1e-6, thm_4_3_metric);
    add("thm-4.3-torsionfree",
        "The corrected tractor connection is torsion free and its curvature has the stated block form.",
        {"metric", "alpha=2"}, 1e-6, thm_4_3_torsionfree);
    add("thm-4.4-normality",
        "Along the boundary the curvature has the conformal block pattern and a unique normalization gives the normal "
        "conformal tractor connection.",
        {"metric", "alpha=2"}, 1e-6, thm_4_4_normality);
    return r;
}

std::string timing_free(double t, bool timing) { return timing ? num(t) : ""; }

}  // namespace

const char* status_name(Status s) {
    switch (s) {
        case Status::Pass: return "pass";
        case Status::Fail: return "fail";
        case Status::Skip: return "skip";
        default: return "error";
    }
}

const std::vector<Check>& registry() {
    static const std::vector<Check> r = build_registry();
    return r;
}

std::string inapplicable_reason(const Check& c, const Geometry& geom) {
    for (const auto& q : c.needs) {
        if (q == "metric" && !geom.has_metric()) return "requires a metric";
        if (q == "alpha=2" && geom.alpha != 2.0) return "requires alpha = 2";
        if (q == "alpha=1" && geom.alpha != 1.0) return "requires alpha = 1";
        if (q == "n>=3" && geom.n() < 3) return "unsupported dimension: requires n >= 3";
    }
    return {};
}

std::vector<const Check*> select_checks(const std::vector<std::string>& ids) {
    const auto& reg = registry();
    std::vector<bool> take(reg.size(), false);
    for (const auto& sel : ids) {
        bool hit = false;
        for (size_t k = 0; k < reg.size(); ++k) {
            const std::string& id = reg[k].id;
            bool m = sel == "all" || id == sel ||
                     (id.size() > sel.size() && id.compare(0, sel.size(), sel) == 0 && id[sel.size()] == '-');
            if (m) take[k] = hit = true;
        }
        if (!hit) throw ValidationError("unknown check id '" + sel + "'");
    }
    std::vector<const Check*> out;
    for (size_t k = 0; k < reg.size(); ++k)
        if (take[k]) out.push_back(&reg[k]);
    return out;
}

std::vector<CheckReport> run_suite(const Geometry& geom, const std::vector<std::string>& ids, const SamplingPlan& plan) {
    auto checks = select_checks(ids.empty() ? std::vector<std::string>{"all"} : ids);
    CheckContext ctx{geom, plan, geom.sample_interior(plan.interior_points, plan.seed),
                     geom.sample_boundary(plan.boundary_points, plan.seed + 1)};
    std::vector<CheckReport> out;
    for (const Check* c : checks) {
        CheckReport rep;
        rep.id = c->id;
        rep.paper_ref = c->paper_ref;
        rep.tolerance = c->tolerance;
        auto t0 = std::chrono::steady_clock::now();
        std::string why = inapplicable_reason(*c, geom);
        if (!why.empty()) {
            rep.status = Status::Skip;
            rep.reason = why;
        } else {
            try {
                rep.details = c->evaluate(ctx);
                rep.status = Status::Pass;
            } catch (const SkipCheck& s) {
                rep.status = Status::Skip;
                rep.reason = s.reason;
                rep.details = s.details;
            } catch (const DegenerateError& e) {
                rep.status = Status::Skip;
                std::string m = e.what();
                rep.reason = m.find("degenerate boundary geometry") == std::string::npos ? "degenerate boundary geometry: " + m : m;
            } catch (const PoleError& e) {
                rep.status = Status::Fail;
                rep.reason = std::string("pole: ") + e.what();
                rep.max_residual = kInf;
            } catch (const std::exception& e) {
                rep.status = Status::Error;
                rep.reason = e.what();
            }
        }
        std::set<std::pair<std::string, int>> pts;
        double worst = rep.max_residual / rep.tolerance;
        for (auto& d : rep.details) {
            if (d.tolerance <= 0.0) d.tolerance = rep.tolerance;
            if (d.residual / d.tolerance > worst) {
                worst = d.residual / d.tolerance;
                rep.max_residual = d.residual;
                rep.tolerance = d.tolerance;
            }
            if (d.point >= 0) pts.insert({d.where, d.point});
        }
        rep.n_points = static_cast<int>(pts.size());
        if (rep.status == Status::Pass && !(rep.max_residual <= rep.tolerance)) rep.status = Status::Fail;
        rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.push_back(std::move(rep));
    }
    return out;
}

bool any_failed(const std::vector<CheckReport>& reports) {
    return std::any_of(reports.begin(), reports.end(),
                       [](const CheckReport& r) { return r.status == Status::Fail || r.status == Status::Error; });
}

namespace {

nlohmann::ordered_json number_or_null(double x) {
    if (std::isfinite(x)) return x;
    return nullptr;
}

}  // namespace

std::string reports_to_json(const std::vector<CheckReport>& reports, bool timing) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& r : reports) {
        nlohmann::ordered_json j;
        j["id"] = r.id;
        j["paper_ref"] = r.paper_ref;
        j["status"] = status_name(r.status);
        j["max_residual"] = number_or_null(r.max_residual);
        j["tolerance"] = r.tolerance;
        j["n_points"] = r.n_points;
        if (!r.reason.empty()) j["reason"] = r.reason;
        if (timing) j["wall_time"] = r.wall_time;
        nlohmann::ordered_json ds = nlohmann::ordered_json::array();
        for (const auto& d : r.details) {
            nlohmann::ordered_json x;
            x["where"] = d.where;
            x["point"] = d.point;
            x["quantity"] = d.quantity;
            x["residual"] = number_or_null(d.residual);
            x["tolerance"] = d.tolerance;
            if (!d.note.empty()) x["note"] = d.note;
            ds.push_back(std::move(x));
        }
        j["details"] = std::move(ds);
        arr.push_back(std::move(j));
    }
    return arr.dump(2) + "\n";
}

std::string reports_to_csv(const std::vector<CheckReport>& reports, bool timing) {
    auto quote = [](const std::string& s) {
        std::string q = "\"";
        for (char ch : s) {
            if (ch == '"') q += '"';
            q += ch;
        }
        return q + "\"";
    };
    std::ostringstream os;
    os << "id,status,max_residual,tolerance,n_points" << (timing ? ",wall_time" : "") << ",reason\n";
    os.precision(17);
    for (const auto& r : reports) {
        os << r.id << ',' << status_name(r.status) << ',';
        if (std::isfinite(r.max_residual)) os << r.max_residual;
        else os << "inf";
        os << ',' << r.tolerance << ',' << r.n_points;
        if (timing) os << ',' << timing_free(r.wall_time, true);
        os << ',' << quote(r.reason) << '\n';
    }
    return os.str();
}

}  // namespace tractorlab
