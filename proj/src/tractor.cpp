#include "tractorlab/tractor.hpp"

#include <algorithm>
#include <cmath>

#include "tractorlab/errors.hpp"

namespace tractorlab {

namespace {

std::vector<size_t> strides(const std::vector<int>& shape) {
    std::vector<size_t> s(shape.size(), 1);
    for (int r = static_cast<int>(shape.size()) - 2; r >= 0; --r) s[r] = s[r + 1] * shape[r + 1];
    return s;
}

// out[.. i ..] = sum_j M(i, j) c[.. j ..] at index position `pos`.
JetArray apply_matrix(const JetArray& c, int pos, const JetArray& M, int order) {
    auto st = strides(c.shape());
    int N = c.shape()[pos];
    JetArray out = JetArray::zeros(c.shape(), c.jet_dim(), order);
    for (size_t k = 0; k < c.size(); ++k) {
        auto idx = c.unflat(k);
        int i = idx[pos];
        size_t base = k - static_cast<size_t>(i) * st[pos];
        Jet& acc = out[k];
        for (int j = 0; j < N; ++j) {
            const Jet& m = M(i, j);
            if (m.max_abs() == 0.0) continue;
            acc += m * c[base + j * st[pos]];
        }
    }
    return out;
}

void check_layout(const TractorTensor& t) {
    int rank = t.forms + static_cast<int>(t.slots.size());
    if (t.c.rank() != rank) throw IndexError("tractor components do not match slots and form indices");
}

}  // namespace

TractorTensor make_tractor(std::vector<Slot> slots, int forms, JetArray c, std::string splitting) {
    TractorTensor t{std::move(slots), forms, std::move(c), std::move(splitting)};
    check_layout(t);
    return t;
}

JetArray splitting_matrix(const JetArray& Y) {
    int d = Y.shape()[0];
    int N = fiber_dim(d);
    JetArray S = JetArray::zeros({N, N}, Y.jet_dim(), Y.order());
    for (int i = 0; i < N; ++i) S(i, i) += 1.0;
    for (int a = 0; a < d; ++a) S(0, 1 + a) = -Y(a);
    return S;
}

JetArray splitting_matrix_inverse(const JetArray& Y) {
    int d = Y.shape()[0];
    int N = fiber_dim(d);
    JetArray S = JetArray::zeros({N, N}, Y.jet_dim(), Y.order());
    for (int i = 0; i < N; ++i) S(i, i) += 1.0;
    for (int a = 0; a < d; ++a) S(0, 1 + a) = Y(a);
    return S;
}

TractorTensor transform_fiber(const TractorTensor& t, const JetArray& M, const JetArray& Minv) {
    check_layout(t);
    int order = std::min(t.c.order(), std::min(M.order(), Minv.order()));
    JetArray MinvT = mat_transpose(Minv);
    JetArray c = t.c.truncated(order);
    for (size_t r = 0; r < t.slots.size(); ++r)
        c = apply_matrix(c, t.forms + static_cast<int>(r), t.slots[r] == Slot::T ? M : MinvT, order);
    return TractorTensor{t.slots, t.forms, std::move(c), t.splitting};
}

TractorTensor change_splitting(const TractorTensor& t, const JetArray& Y, const std::string& label) {
    TractorTensor out = transform_fiber(t, splitting_matrix(Y), splitting_matrix_inverse(Y));
    out.splitting = label.empty() ? t.splitting + "+Y" : label;
    return out;
}

JetArray std_connection_matrix(const JetArray& G, const JetArray& P) {
    int d = G.shape()[0];
    int N = fiber_dim(d);
    int order = std::min(G.order(), P.order());
    JetArray A = JetArray::zeros({d, N, N}, d, order);
    double inv = 1.0 / (d + 1.0);
    for (int a = 0; a < d; ++a) {
        Jet tr = Jet::zero(d, order);
        for (int e = 0; e < d; ++e) tr += G(e, e, a).truncated(order);
        A(a, 0, 0) = tr * (-inv);
        for (int b = 0; b < d; ++b) {
            A(a, 0, 1 + b) = -P(a, b).truncated(order);
            for (int c = 0; c < d; ++c) A(a, 1 + b, 1 + c) = G(b, a, c).truncated(order);
            A(a, 1 + b, 1 + b) -= tr * inv;
        }
        A(a, 1 + a, 0) += 1.0;
    }
    return A;
}

JetArray change_splitting_connection(const JetArray& A, const JetArray& Y) {
    int d = A.shape()[0];
    int order = std::min(A.order(), Y.order() - 1);
    if (order < 0) throw JetOrderError("splitting change of a connection needs Y one order higher");
    JetArray S = splitting_matrix(Y.truncated(order));
    JetArray Si = splitting_matrix_inverse(Y.truncated(order));
    JetArray dY = Y.gradient();  // dY(a, c) = d_a Y_c
    int N = fiber_dim(d);
    JetArray out = JetArray::zeros({d, N, N}, d, order);
    for (int a = 0; a < d; ++a) {
        JetArray Aa = JetArray::zeros({N, N}, d, order);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) Aa(i, j) = A(a, i, j).truncated(order);
        JetArray B = mat_mul(mat_mul(S, Aa), Si);
        for (int c = 0; c < d; ++c) B(0, 1 + c) += dY(a, c).truncated(order);
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j) out(a, i, j) = B(i, j);
    }
    return out;
}

JetArray TractorConnection::matrix(const Point& p, int order) const {
    JetArray G = base.gamma(p, order + 1);
    JetArray P = schouten(ricci(riemann(G)));
    JetArray A = std_connection_matrix(G.truncated(order), P);
    if (contorsion) A += contorsion(p, order).truncated(order);
    return A;
}

TractorConnection standard_tractor_connection(const Connection& base, const std::string& splitting) {
    return TractorConnection{base, {}, splitting};
}

TractorTensor tractor_derivative(const TractorTensor& t, const JetArray& A, const JetArray& G) {
    check_layout(t);
    int d = A.shape()[0];
    bool couple = G.size() > 0;
    int order = std::min(t.c.order() - 1, A.order());
    if (couple) order = std::min(order, G.order());
    if (order < 0) throw JetOrderError("tractor derivative needs component jets of order >= 1");
    JetArray c = t.c.truncated(order);
    JetArray out = t.c.gradient().truncated(order);
    const auto& shape = c.shape();
    auto st = strides(shape);
    size_t vol = c.size();
    int rank = c.rank();
    for (int a = 0; a < d; ++a)
        for (size_t k = 0; k < vol; ++k) {
            Jet& acc = out[a * vol + k];
            auto idx = c.unflat(k);
            for (int r = 0; r < rank; ++r) {
                int i = idx[r];
                size_t base = k - static_cast<size_t>(i) * st[r];
                if (r < t.forms) {
                    if (!couple) continue;
                    for (int e = 0; e < d; ++e) acc -= G(e, a, i).truncated(order) * c[base + e * st[r]];
                    continue;
                }
                bool up = t.slots[r - t.forms] == Slot::T;
                for (int j = 0; j < shape[r]; ++j) {
                    const Jet& m = up ? A(a, i, j) : A(a, j, i);
                    if (m.max_abs() == 0.0) continue;
                    if (up)
                        acc += m.truncated(order) * c[base + j * st[r]];
                    else
                        acc -= m.truncated(order) * c[base + j * st[r]];
                }
            }
        }
    return TractorTensor{t.slots, t.forms + 1, std::move(out), t.splitting};
}

JetArray tractor_curvature(const JetArray& A) {
    int d = A.shape()[0];
    int N = A.shape()[1];
    int order = A.order() - 1;
    if (order < 0) throw JetOrderError("tractor curvature needs connection jets of order >= 1");
    JetArray dA = A.gradient();  // dA(e, a, I, J) = d_e A_a
    JetArray At = A.truncated(order);
    JetArray F = JetArray::zeros({d, d, N, N}, d, order);
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b)
            for (int i = 0; i < N; ++i)
                for (int j = 0; j < N; ++j) {
                    Jet s = dA(a, b, i, j).truncated(order) - dA(b, a, i, j).truncated(order);
                    for (int k = 0; k < N; ++k) s += At(a, i, k) * At(b, k, j) - At(b, i, k) * At(a, k, j);
                    F(b, a, i, j) = -s;
                    F(a, b, i, j) = std::move(s);
                }
    return F;
}

JetArray standard_curvature_blocks(const JetArray& C, const JetArray& Y) {
    int d = C.shape()[0];
    int N = fiber_dim(d);
    int order = std::min(C.order(), Y.order());
    JetArray F = JetArray::zeros({d, d, N, N}, d, order);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int c = 0; c < d; ++c) {
                F(a, b, 0, 1 + c) = Y(a, b, c).truncated(order);
                for (int e = 0; e < d; ++e) F(a, b, 1 + e, 1 + c) = C(a, b, e, c).truncated(order);
            }
    return F;
}

JetArray l_tau_matrix(const Jet& tau, const JetArray& G, const JetArray& P) {
    int d = G.shape()[0];
    int N = fiber_dim(d);
    JetArray T({}, tau);
    JetArray Dt = covariant_derivative(T, {}, 2.0, G);
    JetArray DDt = covariant_derivative(Dt, {IndexKind::Down}, 2.0, G);
    int order = std::min(DDt.order(), P.order());
    JetArray L = JetArray::zeros({N, N}, d, order);
    L(0, 0) = tau.truncated(order);
    for (int a = 0; a < d; ++a) {
        L(0, 1 + a) = Dt(a).truncated(order) * 0.5;
        L(1 + a, 0) = L(0, 1 + a);
        for (int b = 0; b < d; ++b)
            L(1 + a, 1 + b) = (DDt(a, b).truncated(order) + DDt(b, a).truncated(order)) * 0.25 +
                              (P(a, b).truncated(order) + P(b, a).truncated(order)) * tau.truncated(order) * 0.5;
    }
    return L;
}

JetArray bgg_split_metricity(const JetArray& sigma, const JetArray& G, const JetArray& P) {
    int d = G.shape()[0];
    int N = fiber_dim(d);
    double np1 = d, np2 = d + 1.0;
    JetArray Ds = covariant_derivative(sigma, {IndexKind::Up, IndexKind::Up}, -2.0, G);  // (e, d, c)
    JetArray div = JetArray::zeros({d}, d, Ds.order());
    for (int c = 0; c < d; ++c)
        for (int e = 0; e < d; ++e) div(c) += Ds(e, e, c);
    JetArray Ddiv = covariant_derivative(div, {IndexKind::Up}, -2.0, G);
    int order = std::min(Ddiv.order(), P.order());
    Jet dd = Jet::zero(d, order), ps = Jet::zero(d, order);
    for (int e = 0; e < d; ++e) dd += Ddiv(e, e).truncated(order);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) ps += P(a, b).truncated(order) * sigma(a, b).truncated(order);
    JetArray H = JetArray::zeros({N, N}, d, order);
    H(0, 0) = dd * (1.0 / (np1 * np2)) + ps * (1.0 / np1);
    for (int c = 0; c < d; ++c) {
        H(0, 1 + c) = div(c).truncated(order) * (-1.0 / np2);
        H(1 + c, 0) = H(0, 1 + c);
        for (int e = 0; e < d; ++e) H(1 + c, 1 + e) = sigma(c, e).truncated(order);
    }
    return H;
}

JetArray tractor_metric_inverse(const JetArray& L) {
    int N = L.shape()[0];
    double scale = 0.0;
    for (size_t k = 0; k < L.size(); ++k) scale = std::max(scale, std::abs(L[k].value()));
    double det = mat_det(L).value();
    if (scale == 0.0 || std::abs(det) / std::pow(scale, N) < 1e-10)
        throw DegenerateError("degenerate boundary geometry: tractor metric is singular");
    return mat_inverse(L);
}

InverseSlots inverse_slots(const JetArray& Linv, const Jet& tau_hat) {
    int N = Linv.shape()[0];
    int d = N - 1;
    int order = std::min(Linv.order(), tau_hat.order());
    Jet th = tau_hat.truncated(order);
    InverseSlots s;
    s.rho_inv_P_inv = JetArray::zeros({d, d}, d, order);
    s.t = JetArray::zeros({d}, d, order);
    for (int a = 0; a < d; ++a) {
        s.t(a) = th * Linv(0, 1 + a).truncated(order) * 0.5;
        for (int b = 0; b < d; ++b) s.rho_inv_P_inv(a, b) = th * Linv(1 + a, 1 + b).truncated(order);
    }
    s.psi = th * Linv(0, 0).truncated(order);
    return s;
}

double metricity_residual(const Geometry& geom, const OneForm& upsilon, const Point& p) {
    int d = geom.dim;
    Connection m = projective_modify(levi_civita(geom), upsilon);
    JetArray G = m.gamma(p, 0);
    JetArray g = geom.metric(p, 1);
    JetArray dg = covariant_derivative(g, {IndexKind::Down, IndexKind::Down}, 0.0, G);
    Jet tau = tau_from_metric(g);
    JetArray sigma = tau.reciprocal() * mat_inverse(g);
    JetArray Ds = covariant_derivative(sigma, {IndexKind::Up, IndexKind::Up}, -2.0, G);
    double mid = 0.0;
    for (int c = 0; c < d; ++c) {
        double s = 0.0;
        for (int e = 0; e < d; ++e) s += Ds(e, e, c).value();
        mid = std::max(mid, std::abs(s) / (d + 1.0));
    }
    return dg.max_abs_value() + mid;
}

Jet fiber_pair(const JetArray& L, const JetArray& s1, const JetArray& s2) {
    int N = L.shape()[0];
    int order = std::min(L.order(), std::min(s1.order(), s2.order()));
    Jet acc = Jet::zero(L.jet_dim(), order);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) acc += L(i, j) * s1(i) * s2(j);
    return acc.truncated(order);
}

}  // namespace tractorlab
