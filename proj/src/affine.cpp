#include "tractorlab/affine.hpp"

#include <algorithm>
#include <cmath>

#include "tractorlab/errors.hpp"
#include "tractorlab/expr.hpp"

namespace tractorlab {

Connection levi_civita(const TensorField& g, int dim) {
    Connection c;
    c.dim = dim;
    c.provenance = "levi_civita";
    c.christoffel = [g, dim](const Point& p, int order) {
        JetArray gm = g(p, order + 1);
        JetArray ginv = mat_inverse(gm.truncated(order));
        JetArray dg = gm.gradient();  // dg(e, a, b) = d_e g_ab
        JetArray G = JetArray::zeros({dim, dim, dim}, dim, order);
        std::vector<Jet> low(dim);
        for (int a = 0; a < dim; ++a)
            for (int b = a; b < dim; ++b) {
                for (int d = 0; d < dim; ++d) low[d] = dg(a, d, b) + dg(b, d, a) - dg(d, a, b);
                for (int cc = 0; cc < dim; ++cc) {
                    Jet s = Jet::zero(dim, order);
                    for (int d = 0; d < dim; ++d) s += ginv(cc, d) * low[d];
                    s *= 0.5;
                    G(cc, a, b) = s;
                    if (b != a) G(cc, b, a) = s;
                }
            }
        return G;
    };
    return c;
}

Connection levi_civita(const Geometry& geom) { return levi_civita(geom.metric_field(), geom.dim); }

Connection explicit_connection(const Geometry& geom) {
    Connection c;
    c.dim = geom.dim;
    c.provenance = "custom";
    c.special = false;
    c.christoffel = [geom](const Point& p, int order) { return geom.christoffel_data(p, order); };
    return c;
}

Connection interior_connection(const Geometry& geom) {
    return geom.has_metric() ? levi_civita(geom) : explicit_connection(geom);
}

Connection projective_modify(const Connection& conn, const OneForm& upsilon) {
    Connection c = conn;
    c.provenance = "projective_modification";
    c.special = conn.special && upsilon.exact;
    int dim = conn.dim;
    auto base = conn.christoffel;
    auto ups = upsilon.eval;
    c.christoffel = [base, ups, dim](const Point& p, int order) {
        JetArray G = base(p, order).truncated(order);
        JetArray Y = ups(p, order).truncated(order);
        for (int cc = 0; cc < dim; ++cc)
            for (int b = 0; b < dim; ++b) {
                G(cc, cc, b) += Y(b);
                G(cc, b, cc) += Y(b);
            }
        return G;
    };
    return c;
}

OneForm gradient_form(const Expr& f, double scale) {
    OneForm u;
    u.exact = true;
    u.eval = [f, scale](const Point& p, int order) {
        int dim = static_cast<int>(p.size());
        Jet j = eval_jet(f, p, order + 1);
        JetArray Y = JetArray::zeros({dim}, dim, order);
        for (int a = 0; a < dim; ++a) Y(a) = j.partial(a) * scale;
        return Y;
    };
    return u;
}

OneForm rho_upsilon(const Geometry& geom) {
    OneForm u;
    u.exact = true;
    u.eval = [geom](const Point& p, int order) {
        int dim = geom.dim;
        Jet r = geom.rho_jet(p, order + 1);
        Jet inv = (r.truncated(order) * geom.alpha).reciprocal();
        JetArray Y = JetArray::zeros({dim}, dim, order);
        for (int a = 0; a < dim; ++a) Y(a) = r.partial(a) * inv;
        return Y;
    };
    return u;
}

JetArray rho_christoffel_closed_form(const Geometry& geom, const Point& p, int order) {
    const AsymptoticForm* form = geom.asymptotic_form();
    if (!form) throw Error("geometry '" + geom.name + "' has no asymptotic form");
    int dim = geom.dim;
    int K = order;
    double s = 2.0 / geom.alpha;
    int si = static_cast<int>(std::lround(s));
    auto vars = coordinate_jets(p, K + 2);
    Jet r2 = eval_jet(geom.rho, vars);
    std::vector<Jet> u1(dim), u(dim);
    for (int a = 0; a < dim; ++a) {
        u1[a] = r2.partial(a);
        u[a] = u1[a].truncated(K);
    }
    Jet r = r2.truncated(K);
    JetArray h1 = JetArray::zeros({dim, dim}, dim, K + 1);
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) h1(a, b) = eval_jet(form->h[a][b], vars).truncated(K + 1);
    JetArray h = h1.truncated(K);
    JetArray dh = h1.gradient();  // dh(e, a, b) = d_e h_ab
    Jet C1 = eval_jet(form->C, vars).truncated(K + 1);
    Jet C = C1.truncated(K);
    std::vector<Jet> dC(dim);
    bool C_const = true;
    for (int a = 0; a < dim; ++a) {
        dC[a] = C1.partial(a);
        C_const = C_const && dC[a].max_abs() == 0.0;
    }
    if (std::abs(mat_det(h).value()) < 1e-12) throw DegenerateError("h is degenerate at the point");
    JetArray hinv = mat_inverse(h);
    Jet rs = ipow(r, si);
    Jet rs1 = si == 1 ? Jet::constant(dim, K, 1.0) : ipow(r, si - 1);
    std::vector<Jet> v(dim, Jet::zero(dim, K));
    Jet q = Jet::zero(dim, K);
    for (int a = 0; a < dim; ++a) {
        for (int b = 0; b < dim; ++b) v[a] += hinv(a, b) * u[b];
        q += u[a] * v[a];
    }
    Jet inv_den = (rs + C * q).reciprocal();
    Jet rs_inv = C_const ? Jet() : rs.reciprocal();
    // Gamma^c_ab = v^c X_ab / (rho^s + C q) + M^ce Z_eab with
    // X = s/2 rho^(s-1) h + C_(a u_b) + C dd rho, Z = 1/2 (Dh_eab - rho^-s C_e u_a u_b),
    // M = h^-1 - C v v / (rho^s + C q).
    JetArray G = JetArray::zeros({dim, dim, dim}, dim, K);
    std::vector<Jet> Z(dim);
    for (int a = 0; a < dim; ++a)
        for (int b = a; b < dim; ++b) {
            Jet X = 0.5 * s * rs1 * h(a, b) + 0.5 * (dC[a] * u[b] + dC[b] * u[a]) + C * u1[a].partial(b);
            for (int e = 0; e < dim; ++e) {
                Z[e] = 0.5 * (dh(a, e, b) + dh(b, e, a) - dh(e, a, b));
                if (!C_const) Z[e] -= 0.5 * rs_inv * dC[e] * u[a] * u[b];
            }
            Jet vZ = Jet::zero(dim, K);
            for (int e = 0; e < dim; ++e) vZ += v[e] * Z[e];
            for (int c = 0; c < dim; ++c) {
                Jet g = v[c] * (X - C * vZ) * inv_den;
                for (int e = 0; e < dim; ++e) g += hinv(c, e) * Z[e];
                G(c, a, b) = g;
                if (b != a) G(c, b, a) = g;
            }
        }
    return G;
}

Jet tau_hat(const Geometry& geom, const Point& p, int order) {
    if (const AsymptoticForm* form = geom.asymptotic_form(); form && geom.alpha == 2.0) {
        // det g = rho^-(n+2) det h (rho + C |drho|_h^2)
        int dim = geom.dim;
        auto vars = coordinate_jets(p, order + 1);
        Jet r1 = eval_jet(geom.rho, vars);
        JetArray h = JetArray::zeros({dim, dim}, dim, order);
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b) h(a, b) = eval_jet(form->h[a][b], vars).truncated(order);
        JetArray hinv = mat_inverse(h);
        Jet q = Jet::zero(dim, order);
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b) q += hinv(a, b) * r1.partial(a) * r1.partial(b);
        Jet C = eval_jet(form->C, vars).truncated(order);
        Jet det = mat_det(h) * (r1.truncated(order) + C * q);
        if (det.value() < 0.0) det = -det;
        return pow(det, -1.0 / (dim + 1.0));
    }
    Jet tau = tau_from_metric(geom.metric(p, order));
    return tau / geom.rho_jet(p, order);
}

JetArray rho_scaled_inverse_metric(const Geometry& geom, const Point& p, int order) {
    int dim = geom.dim;
    const AsymptoticForm* form = geom.asymptotic_form();
    if (!form || geom.alpha != 2.0) {
        Jet r = geom.rho_jet(p, order);
        return r.reciprocal() * mat_inverse(geom.metric(p, order));
    }
    auto vars = coordinate_jets(p, order + 1);
    Jet r1 = eval_jet(geom.rho, vars);
    JetArray h = JetArray::zeros({dim, dim}, dim, order);
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) h(a, b) = eval_jet(form->h[a][b], vars).truncated(order);
    JetArray hinv = mat_inverse(h);
    std::vector<Jet> v(dim, Jet::zero(dim, order));
    Jet q = Jet::zero(dim, order);
    for (int a = 0; a < dim; ++a) {
        for (int b = 0; b < dim; ++b) v[a] += hinv(a, b) * r1.partial(b);
        q += v[a] * r1.partial(a);
    }
    Jet C = eval_jet(form->C, vars).truncated(order);
    Jet f = C * (r1.truncated(order) + C * q).reciprocal();
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) hinv(a, b) -= f * v[a] * v[b];
    return hinv;
}

Connection rho_connection(const Geometry& geom, RhoExtension ext) {
    Connection c = projective_modify(interior_connection(geom), rho_upsilon(geom));
    c.provenance = "rho_modified";
    if (ext.closed_form && geom.asymptotic_form()) {
        c.christoffel = [geom](const Point& p, int order) { return rho_christoffel_closed_form(geom, p, order); };
        return c;
    }
    if (!ext.enabled) return c;
    auto direct = c.christoffel;
    c.christoffel = [geom, direct, ext](const Point& p, int order) {
        double r = geom.rho_value(p);
        if (std::abs(r) >= ext.threshold) return direct(p, order);
        Point y = geom.project_to_boundary(p);
        auto eps = ext.plan.ladder();
        std::vector<JetArray> samples;
        for (double e : eps) samples.push_back(direct(geom.ray_point(y, e), order));
        double first = samples.front().max_abs_value();
        double last = samples.back().max_abs_value();
        if (last > 10.0 * std::max(first, 1e-4))
            throw PoleError("rho-modified connection does not extend to the boundary (Christoffels grow by " +
                            std::to_string(last / std::max(first, 1e-300)) + "x along the ray)");
        JetArray out = samples.front();
        std::vector<double> ys(eps.size());
        for (size_t k = 0; k < out.size(); ++k) {
            auto cf = out[k].coeffs();
            for (size_t m = 0; m < cf.size(); ++m) {
                for (size_t s = 0; s < eps.size(); ++s) ys[s] = samples[s][k].coeffs()[m];
                cf[m] = neville(eps, ys, r);
            }
        }
        return out;
    };
    return c;
}

JetArray riemann(const JetArray& G) {
    int dim = G.shape()[0];
    int order = G.order() - 1;
    if (order < 0) throw JetOrderError("curvature needs Christoffel jets of order >= 1");
    JetArray dG = G.gradient();  // dG(e, c, a, b) = d_e Gamma^c_ab
    JetArray Gt = G.truncated(order);
    JetArray R = JetArray::zeros({dim, dim, dim, dim}, dim, order);
    for (int a = 0; a < dim; ++a)
        for (int b = a + 1; b < dim; ++b)
            for (int c = 0; c < dim; ++c)
                for (int d = 0; d < dim; ++d) {
                    Jet s = dG(a, c, b, d) - dG(b, c, a, d);
                    for (int e = 0; e < dim; ++e) s += Gt(c, a, e) * Gt(e, b, d) - Gt(c, b, e) * Gt(e, a, d);
                    R(b, a, c, d) = -s;
                    R(a, b, c, d) = std::move(s);
                }
    return R;
}

JetArray ricci(const JetArray& R) {
    int dim = R.shape()[0];
    JetArray Ric = JetArray::zeros({dim, dim}, dim, R.order());
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b)
            for (int d = 0; d < dim; ++d) Ric(a, b) += R(d, a, d, b);
    return Ric;
}

JetArray schouten(const JetArray& Ric) {
    int dim = Ric.shape()[0];
    double n = dim - 1;
    JetArray P = Ric;
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b)
            P(a, b) = (Ric(a, b) + Ric(b, a)) * (0.5 / n) + (Ric(a, b) - Ric(b, a)) * (0.5 / (n + 2));
    return P;
}

JetArray beta_tensor(const JetArray& P) { return permute(P, {1, 0}) - P; }

JetArray weyl(const JetArray& R, const JetArray& P) {
    int dim = R.shape()[0];
    JetArray C = R;
    JetArray beta = beta_tensor(P);
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b)
            for (int d = 0; d < dim; ++d) {
                C(a, b, a, d) -= P(b, d);
                C(a, b, b, d) += P(a, d);
                C(a, b, d, d) -= beta(a, b);
            }
    return C;
}

JetArray reassemble_riemann(const JetArray& C, const JetArray& P) {
    int dim = C.shape()[0];
    JetArray R = C;
    JetArray beta = beta_tensor(P);
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b)
            for (int d = 0; d < dim; ++d) {
                R(a, b, a, d) += P(b, d);
                R(a, b, b, d) -= P(a, d);
                R(a, b, d, d) += beta(a, b);
            }
    return R;
}

Jet scalar_curvature(const JetArray& ginv, const JetArray& Ric) {
    int dim = Ric.shape()[0];
    int order = std::min(ginv.order(), Ric.order());
    Jet s = Jet::zero(dim, order);
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b) s += ginv(a, b) * Ric(a, b);
    return s;
}

JetArray covariant_derivative(const JetArray& T, const std::vector<IndexKind>& kinds, double weight,
                              const JetArray& G, int density_sign) {
    int dim = G.shape()[0];
    if (static_cast<int>(kinds.size()) != T.rank()) throw IndexError("index kinds do not match tensor rank");
    int order = std::min(T.order() - 1, G.order());
    if (order < 0) throw JetOrderError("covariant derivative needs tensor jets of order >= 1");
    JetArray dT = T.gradient().truncated(order);
    JetArray Tt = T.truncated(order);
    JetArray Gt = G.truncated(order);
    int rank = T.rank();

    std::vector<size_t> stride(rank, 1);
    for (int r = rank - 2; r >= 0; --r) stride[r] = stride[r + 1] * T.shape()[r + 1];
    size_t vol = T.size();

    std::vector<Jet> trace(dim, Jet::zero(dim, order));
    for (int a = 0; a < dim; ++a)
        for (int e = 0; e < dim; ++e) trace[a] += Gt(e, e, a);
    double wfac = density_sign * weight / (dim + 1.0);

    JetArray out = dT;
    for (int a = 0; a < dim; ++a)
        for (size_t k = 0; k < vol; ++k) {
            Jet& acc = out[a * vol + k];
            auto idx = Tt.unflat(k);
            for (int r = 0; r < rank; ++r) {
                int i = idx[r];
                size_t base = k - static_cast<size_t>(i) * stride[r];
                for (int e = 0; e < dim; ++e) {
                    const Jet& t = Tt[base + e * stride[r]];
                    if (kinds[r] == IndexKind::Up)
                        acc += Gt(i, a, e) * t;
                    else
                        acc -= Gt(e, a, i) * t;
                }
            }
            if (wfac != 0.0) acc += trace[a] * Tt[k] * wfac;
        }
    return out;
}

TensorField covariant_derivative(const TensorField& T, const Connection& conn, int density_sign) {
    TensorField f;
    f.name = "nabla " + T.name;
    f.indices = T.indices;
    f.indices.insert(f.indices.begin(), IndexKind::Down);
    f.weight = T.weight;
    f.eval = [T, conn, density_sign](const Point& p, int order) {
        return covariant_derivative(T(p, order + 1), T.indices, T.weight, conn.gamma(p, order), density_sign);
    };
    return f;
}

CurvaturePack curvature_pack(const Connection& conn, const Point& p, int order) {
    CurvaturePack pk;
    pk.order = order;
    JetArray G = conn.gamma(p, order + 2);
    JetArray R = riemann(G);
    JetArray Ric = ricci(R);
    JetArray P = schouten(Ric);
    pk.cotton = cotton(P, G);
    pk.gamma = G.truncated(order);
    pk.riemann = R.truncated(order);
    pk.ricci = Ric.truncated(order);
    pk.schouten = P.truncated(order);
    pk.beta = beta_tensor(pk.schouten);
    pk.weyl = weyl(pk.riemann, pk.schouten);
    return pk;
}

JetArray cotton(const JetArray& P, const JetArray& G, double sign) {
    int dim = P.shape()[0];
    JetArray D = covariant_derivative(P, {IndexKind::Down, IndexKind::Down}, 0.0, G);
    JetArray Y = D;
    for (int a = 0; a < dim; ++a)
        for (int b = 0; b < dim; ++b)
            for (int c = 0; c < dim; ++c) Y(a, b, c) = (D(a, b, c) - D(b, a, c)) * sign;
    return Y;
}

Jet tau_from_metric(const JetArray& g) {
    int dim = g.shape()[0];
    Jet det = mat_det(g);
    if (det.value() == 0.0) throw PoleError("singular metric");
    if (det.value() < 0.0) det = -det;
    return pow(det, -1.0 / (dim + 1.0));
}

TensorField canonical_tau(const Geometry& geom) {
    TensorField f;
    f.name = "tau";
    f.weight = 2.0;
    f.eval = [geom](const Point& p, int order) { return JetArray({}, tau_from_metric(geom.metric(p, order))); };
    return f;
}

double special_defect(const Connection& conn, const Point& p) {
    JetArray R = riemann(conn.gamma(p, 1));
    double m = 0.0;
    for (int a = 0; a < conn.dim; ++a)
        for (int b = 0; b < conn.dim; ++b) {
            double s = 0.0;
            for (int c = 0; c < conn.dim; ++c) s += R(a, b, c, c).value();
            m = std::max(m, std::abs(s));
        }
    return m;
}

}  // namespace tractorlab
