#include "tractorlab/boundary.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "tractorlab/errors.hpp"
#include "tractorlab/expr.hpp"

namespace tractorlab {

namespace {

using IK = IndexKind;

std::string fmt(const Point& p) {
    std::ostringstream os;
    os.precision(6);
    os << '(';
    for (size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
    os << ')';
    return os.str();
}

Eigen::MatrixXd to_eigen(const Tensor& t) {
    int r = t.shape[0], c = t.shape[1];
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < c; ++j) m(i, j) = t.v[i * c + j];
    return m;
}

Tensor from_eigen(const Eigen::MatrixXd& m) {
    Tensor t({static_cast<int>(m.rows()), static_cast<int>(m.cols())});
    for (int i = 0; i < m.rows(); ++i)
        for (int j = 0; j < m.cols(); ++j) t.v[i * m.cols() + j] = m(i, j);
    return t;
}

double max_abs(const Tensor& t) { return t.max_abs(); }

// Levi-Civita data at an interior point.
struct LcData {
    JetArray G, P, ginv, g, Ric;
};

LcData lc_data(const Geometry& geom, const Point& x, int order) {
    LcData s;
    Connection lc = levi_civita(geom);
    s.G = lc.gamma(x, order + 2);
    JetArray R = riemann(s.G);
    s.Ric = ricci(R);
    s.P = schouten(s.Ric);
    s.g = geom.metric(x, order + 1);
    s.ginv = mat_inverse(s.g);
    return s;
}

// Frame contraction of a {dim, dim, N, N} two-form with tangential vectors.
JetArray tangential_two_form(const JetArray& F, const std::vector<Point>& basis) {
    int d = F.shape()[0], N = F.shape()[2];
    int n = static_cast<int>(basis.size());
    JetArray out = JetArray::zeros({n, n, N, N}, F.jet_dim(), F.order());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) {
                    double w = basis[i][a] * basis[j][b];
                    if (w == 0.0) continue;
                    for (int I = 0; I < N; ++I)
                        for (int J = 0; J < N; ++J) out(i, j, I, J) += F(a, b, I, J) * w;
                }
    return out;
}

// M^-1 F_ab M for every form pair.
JetArray conjugate_two_form(const JetArray& F, const JetArray& M, const JetArray& Minv) {
    int n = F.shape()[0], N = F.shape()[2];
    JetArray out = F;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            JetArray f = JetArray::zeros({N, N}, F.jet_dim(), F.order());
            for (int I = 0; I < N; ++I)
                for (int J = 0; J < N; ++J) f(I, J) = F(i, j, I, J);
            JetArray c = mat_mul(Minv.truncated(F.order()), mat_mul(f, M.truncated(F.order())));
            for (int I = 0; I < N; ++I)
                for (int J = 0; J < N; ++J) out(i, j, I, J) = c(I, J);
        }
    return out;
}

// Connection one-form in a new frame: M^-1 A_a M + M^-1 d_a M.
JetArray frame_connection(const JetArray& A, const JetArray& M) {
    int d = A.shape()[0], N = A.shape()[1];
    int order = std::min(A.order(), M.order() - 1);
    JetArray Mt = M.truncated(order);
    JetArray Minv = mat_inverse(Mt);
    JetArray dM = M.gradient();
    JetArray out = JetArray::zeros({d, N, N}, A.jet_dim(), order);
    for (int a = 0; a < d; ++a) {
        JetArray Aa = JetArray::zeros({N, N}, A.jet_dim(), order);
        JetArray dMa = JetArray::zeros({N, N}, A.jet_dim(), order);
        for (int I = 0; I < N; ++I)
            for (int J = 0; J < N; ++J) {
                Aa(I, J) = A(a, I, J).truncated(order);
                dMa(I, J) = dM(a, I, J).truncated(order);
            }
        JetArray r = mat_mul(Minv, mat_mul(Aa, Mt) + dMa);
        for (int I = 0; I < N; ++I)
            for (int J = 0; J < N; ++J) out(a, I, J) = r(I, J);
    }
    return out;
}

// Symmetric tangential restriction of a jet array {dim, dim}.
JetArray tangential_jets(const JetArray& T, const std::vector<Point>& basis) {
    int d = T.shape()[0];
    int n = static_cast<int>(basis.size());
    JetArray out = JetArray::zeros({n, n}, T.jet_dim(), T.order());
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) {
                    double w = basis[i][a] * basis[j][b];
                    if (w != 0.0) out(i, j) += T(a, b) * w;
                }
    return out;
}

void require_alpha2(const Geometry& geom, const char* what) {
    if (geom.alpha != 2.0) throw Error(std::string(what) + " needs a geometry of order alpha = 2");
}

}  // namespace

// ---------------------------------------------------------------------------

RhoScaleData rho_scale_data(const Geometry& geom, const Point& x, int order) {
    require_alpha2(geom, "rho-splitting data");
    int d = geom.dim;
    int N = fiber_dim(d);
    int K = order;
    RhoScaleData D;
    D.order = K;
    D.x = x;
    Connection rc = rho_connection(geom);
    JetArray G2 = rc.gamma(x, K + 2);
    JetArray Ph1 = schouten(ricci(riemann(G2)));
    Jet r3 = geom.rho_jet(x, K + 3);
    JetArray dr = JetArray::zeros({d}, d, K + 2);
    for (int a = 0; a < d; ++a) dr(a) = r3.partial(a);
    JetArray hess1 = covariant_derivative(dr, {IK::Down}, 0.0, G2);
    JetArray ddr = covariant_derivative(hess1, {IK::Down, IK::Down}, 0.0, G2);
    JetArray dPh = covariant_derivative(Ph1, {IK::Down, IK::Down}, 0.0, G2);

    D.rho = r3.truncated(K);
    D.drho = dr.truncated(K);
    D.gamma_hat = G2.truncated(K);
    D.P_hat = Ph1.truncated(K);
    D.hess = hess1.truncated(K);
    D.gamma = JetArray::zeros({d, d}, d, K);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            D.gamma(a, b) = (D.hess(a, b) + D.hess(b, a)) * 0.25 + D.rho * (D.P_hat(a, b) + D.P_hat(b, a)) * 0.5;

    D.L = JetArray::zeros({N, N}, d, K);
    D.L(0, 0) = D.rho;
    for (int a = 0; a < d; ++a) {
        D.L(0, 1 + a) = D.drho(a) * 0.5;
        D.L(1 + a, 0) = D.L(0, 1 + a);
        for (int b = 0; b < d; ++b) D.L(1 + a, 1 + b) = D.gamma(a, b);
    }
    D.Linv = tractor_metric_inverse(D.L);
    InverseSlots sl = inverse_slots(D.Linv, Jet::constant(d, K, 1.0));
    D.rho_inv_P_inv = sl.rho_inv_P_inv;
    D.t = sl.t;
    D.psi = sl.psi;

    D.rho_dP = JetArray::zeros({d, d, d}, d, K);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int c = 0; c < d; ++c)
                D.rho_dP(a, b, c) = ddr(a, b, c) * 0.5 + D.drho(a) * D.P_hat(b, c) + D.drho(b) * D.P_hat(a, c) * 0.5 +
                                    D.drho(c) * D.P_hat(a, b) * 0.5 + D.rho * dPh(a, b, c);

    JetArray B = JetArray::zeros({d, d, d}, d, K);  // B(a, e, c) = rdP_aec + rdP_cea - rdP_eac
    for (int a = 0; a < d; ++a)
        for (int e = 0; e < d; ++e)
            for (int c = 0; c < d; ++c) B(a, e, c) = D.rho_dP(a, e, c) + D.rho_dP(c, e, a) - D.rho_dP(e, a, c);
    D.A = JetArray::zeros({d, d, d}, d, K);
    D.psi_hat = JetArray::zeros({d, d}, d, K);
    for (int a = 0; a < d; ++a)
        for (int c = 0; c < d; ++c) {
            for (int e = 0; e < d; ++e) {
                D.psi_hat(a, c) += D.t(e) * B(a, e, c);
                for (int b = 0; b < d; ++b) D.A(a, b, c) += D.rho_inv_P_inv(b, e) * B(a, e, c) * 0.5;
            }
        }
    D.contorsion = JetArray::zeros({d, N, N}, d, K);
    for (int a = 0; a < d; ++a)
        for (int c = 0; c < d; ++c) {
            D.contorsion(a, 0, 1 + c) = D.psi_hat(a, c);
            for (int b = 0; b < d; ++b) D.contorsion(a, 1 + b, 1 + c) = D.A(a, b, c);
        }
    D.connection = std_connection_matrix(D.gamma_hat, D.P_hat) + D.contorsion;
    D.tau_hat = tau_hat(geom, x, K);
    return D;
}

JetArray rho_nabla_P_direct(const Geometry& geom, const Point& x, int order) {
    LcData s = lc_data(geom, x, order);
    JetArray dP = covariant_derivative(s.P, {IK::Down, IK::Down}, 0.0, s.G);
    Jet r = geom.rho_jet(x, order);
    return r * dP;
}

JetArray rho_nabla_P_from_phi(const Geometry& geom, const Point& x, int order) {
    int d = geom.dim;
    double n = geom.n();
    LcData s = lc_data(geom, x, order);
    Jet S = scalar_curvature(s.ginv, s.Ric);  // order + 1
    int K1 = order + 1;
    JetArray Phi = JetArray::zeros({d, d}, d, K1);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) Phi(a, b) = s.P(a, b) - S * s.g(a, b) / (n * (n + 1.0));
    JetArray Gh = rho_connection(geom).gamma(x, order);
    JetArray dPhi = covariant_derivative(Phi, {IK::Down, IK::Down}, 0.0, Gh);
    Jet r1 = geom.rho_jet(x, order + 1);
    Jet r = r1.truncated(order);
    JetArray out = JetArray::zeros({d, d, d}, d, order);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int c = 0; c < d; ++c) {
                Jet ra = r1.partial(a), rb = r1.partial(b), rc = r1.partial(c);
                out(a, b, c) = ra * Phi(b, c).truncated(order) + rb * Phi(a, c).truncated(order) * 0.5 +
                               rc * Phi(b, a).truncated(order) * 0.5 +
                               r * (dPhi(a, b, c) + s.g(b, c).truncated(order) * S.partial(a) / (n * (n + 1.0)));
            }
    return out;
}

JetArray lc_contorsion(const Geometry& geom, const Point& x, int order) {
    int d = geom.dim;
    int N = fiber_dim(d);
    LcData s = lc_data(geom, x, order);
    JetArray dP = covariant_derivative(s.P, {IK::Down, IK::Down}, 0.0, s.G);
    JetArray Pinv = mat_inverse(s.P.truncated(order));
    JetArray out = JetArray::zeros({d, N, N}, d, order);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b)
            for (int c = 0; c < d; ++c)
                for (int e = 0; e < d; ++e)
                    out(a, 1 + b, 1 + c) += Pinv(b, e) * (dP(a, e, c) + dP(c, e, a) - dP(e, a, c)) * 0.5;
    return out;
}

JetArray metric_curvature_blocks(const RhoScaleData& D) {
    if (D.order < 1) throw JetOrderError("curvature blocks need rho-splitting data of order >= 1");
    int d = D.x.size();
    int N = fiber_dim(d);
    int K = D.order - 1;
    JetArray R = riemann(D.gamma_hat);
    JetArray C = weyl(R, D.P_hat.truncated(K));
    JetArray Y = cotton(D.P_hat, D.gamma_hat);
    JetArray dA = covariant_derivative(D.A, {IK::Down, IK::Up, IK::Down}, 0.0, D.gamma_hat);
    JetArray dpsi = covariant_derivative(D.psi_hat, {IK::Down, IK::Down}, 0.0, D.gamma_hat);
    JetArray A = D.A.truncated(K);
    JetArray psi = D.psi_hat.truncated(K);
    JetArray P = D.P_hat.truncated(K);
    JetArray F = JetArray::zeros({d, d, N, N}, d, K);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            if (a == b) continue;
            for (int dd = 0; dd < d; ++dd) {
                Jet bl = Y(a, b, dd) + dpsi(a, b, dd) - dpsi(b, a, dd);
                for (int e = 0; e < d; ++e)
                    bl += (psi(e, a) - P(e, a)) * A(b, e, dd) - (psi(e, b) - P(e, b)) * A(a, e, dd);
                F(a, b, 0, 1 + dd) = bl;
                for (int c = 0; c < d; ++c) {
                    Jet tl = C(a, b, c, dd) + dA(a, b, c, dd) - dA(b, a, c, dd);
                    if (c == b) tl -= psi(dd, a);
                    if (c == a) tl += psi(dd, b);
                    for (int e = 0; e < d; ++e) tl += A(e, c, a) * A(b, e, dd) - A(e, c, b) * A(a, e, dd);
                    F(a, b, 1 + c, 1 + dd) = tl;
                }
            }
        }
    return F;
}

double metric_compatibility_residual(const RhoScaleData& D, int pairs, std::uint64_t seed) {
    if (D.order < 1) throw JetOrderError("metric compatibility needs rho-splitting data of order >= 1");
    int d = D.x.size();
    int N = fiber_dim(d);
    int K = D.order;
    JetArray L = D.tau_hat * D.L;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Jet> X;
    for (int i = 0; i < d; ++i) X.push_back(Jet::variable(i, 0.0, d, K));
    auto section = [&]() {
        JetArray s = JetArray::zeros({N}, d, K);
        for (int I = 0; I < N; ++I) {
            Jet v = Jet::constant(d, K, u(rng));
            for (int i = 0; i < d; ++i) {
                v += X[i] * u(rng);
                for (int j = i; j < d; ++j) v += X[i] * X[j] * u(rng);
            }
            s(I) = v;
        }
        return s;
    };
    auto pair = [&](const JetArray& s1, const JetArray& s2) {
        Jet f = Jet::zero(d, K);
        for (int I = 0; I < N; ++I)
            for (int J = 0; J < N; ++J) f += L(I, J) * s1(I) * s2(J);
        return f;
    };
    auto derivative = [&](const JetArray& s, int a, int I) {
        double v = s(I).partial(a).value();
        for (int J = 0; J < N; ++J) v += D.connection(a, I, J).value() * s(J).value();
        return v;
    };
    double worst = 0.0;
    for (int k = 0; k < pairs; ++k) {
        JetArray s1 = section(), s2 = section();
        Jet f = pair(s1, s2);
        for (int a = 0; a < d; ++a) {
            double lhs = f.partial(a).value();
            double rhs = 0.0, scale = std::abs(lhs);
            for (int I = 0; I < N; ++I)
                for (int J = 0; J < N; ++J) {
                    double l = L(I, J).value();
                    double t1 = l * derivative(s1, a, I) * s2(J).value();
                    double t2 = l * s1(I).value() * derivative(s2, a, J);
                    rhs += t1 + t2;
                    scale = std::max({scale, std::abs(t1), std::abs(t2)});
                }
            worst = std::max(worst, std::abs(lhs - rhs) / (1.0 + scale));
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------

namespace {

struct OdeState {
    Point x, mu;
};

OdeState ode_rhs(const Connection& rc, const OdeState& s) {
    int d = s.x.size();
    JetArray G = rc.gamma(s.x, 0);
    OdeState r{s.mu, Point(d, 0.0)};
    for (int c = 0; c < d; ++c)
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) r.mu[c] -= G(c, a, b).value() * s.mu[a] * s.mu[b];
    return r;
}

OdeState rk4_step(const Connection& rc, const OdeState& s, double h) {
    int d = s.x.size();
    auto axpy = [&](const OdeState& a, const OdeState& k, double f) {
        OdeState o = a;
        for (int i = 0; i < d; ++i) {
            o.x[i] += f * k.x[i];
            o.mu[i] += f * k.mu[i];
        }
        return o;
    };
    OdeState k1 = ode_rhs(rc, s);
    OdeState k2 = ode_rhs(rc, axpy(s, k1, h / 2));
    OdeState k3 = ode_rhs(rc, axpy(s, k2, h / 2));
    OdeState k4 = ode_rhs(rc, axpy(s, k3, h));
    OdeState o = s;
    for (int i = 0; i < d; ++i) {
        o.x[i] += h / 6 * (k1.x[i] + 2 * k2.x[i] + 2 * k3.x[i] + k4.x[i]);
        o.mu[i] += h / 6 * (k1.mu[i] + 2 * k2.mu[i] + 2 * k3.mu[i] + k4.mu[i]);
    }
    return o;
}

OdeState integrate_to(const Geometry& geom, const Connection& rc, const OdeState& s0, double t, double step) {
    int steps = std::max(1, static_cast<int>(std::ceil(t / step - 1e-9)));
    double h = t / steps;
    OdeState s = s0;
    for (int k = 0; k < steps; ++k) {
        s = rk4_step(rc, s, h);
        if (!geom.in_box(s.x)) throw DomainError("transversal leaves the chart domain at " + fmt(s.x));
    }
    return s;
}

}  // namespace

TransversalCurve geodetic_transversal(const Geometry& geom, const Point& y, const Point& mu0, double step,
                                      double horizon) {
    int d = geom.dim;
    if (static_cast<int>(y.size()) != d || static_cast<int>(mu0.size()) != d)
        throw IndexError("transversal needs points of the geometry's dimension");
    TransversalCurve c;
    c.y = y;
    c.mu0 = mu0;
    Point g = geom.rho_gradient(y);
    for (int a = 0; a < d; ++a) c.drho_mu0 += g[a] * mu0[a];
    if (std::abs(c.drho_mu0 - 1.0) > 1e-10)
        throw DomainError("transversal needs drho(mu0) = 1, got " + std::to_string(c.drho_mu0));
    Connection rc = rho_connection(geom);
    rc.gamma(y, 0);  // raises PoleError when the connection does not extend at y
    OdeState s{y, mu0};
    int steps = static_cast<int>(std::lround(horizon / step));
    c.samples.push_back({0.0, s.x, s.mu});
    for (int k = 1; k <= steps; ++k) {
        s = rk4_step(rc, s, step);
        if (!geom.in_box(s.x)) throw DomainError("transversal leaves the chart domain at " + fmt(s.x));
        c.samples.push_back({k * step, s.x, s.mu});
    }
    // hat nabla_mu mu along the samples: 5-point derivative of mu plus Gamma(mu, mu)
    for (size_t k = 2; k + 2 < c.samples.size(); ++k) {
        JetArray G = rc.gamma(c.samples[k].x, 0);
        const Point& m = c.samples[k].mu;
        for (int cc = 0; cc < d; ++cc) {
            double dm = (c.samples[k - 2].mu[cc] - 8 * c.samples[k - 1].mu[cc] + 8 * c.samples[k + 1].mu[cc] -
                         c.samples[k + 2].mu[cc]) /
                        (12 * step);
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) dm += G(cc, a, b).value() * m[a] * m[b];
            c.residual = std::max(c.residual, std::abs(dm));
        }
    }
    return c;
}

double rho2_g_mu_mu(const Geometry& geom, const TransversalSample& s) {
    double r = geom.rho_value(s.x);
    if (r <= 0.0) throw PoleError("rho^2 g(mu, mu) needs an interior point");
    JetArray g = geom.metric(s.x, 0);
    int d = geom.dim;
    double v = 0.0;
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) v += g(a, b).value() * s.mu[a] * s.mu[b];
    return r * r * v;
}

Collar collar_sample(const Geometry& geom, const std::vector<Point>& grid, const std::vector<double>& ts, double step) {
    Collar col;
    col.grid = grid;
    col.ts = ts;
    Connection rc = rho_connection(geom);
    for (const auto& y : grid) {
        std::vector<Point> row;
        OdeState s0{y, geom.transversal(y)};
        for (double t : ts) row.push_back(t == 0.0 ? y : integrate_to(geom, rc, s0, t, step).x);
        col.points.push_back(std::move(row));
    }
    col.min_distance = std::numeric_limits<double>::infinity();
    size_t m = ts.size();
    for (size_t p = 0; p < grid.size() * m; ++p)
        for (size_t q = p + 1; q < grid.size() * m; ++q) {
            const Point& a = col.points[p / m][p % m];
            const Point& b = col.points[q / m][q % m];
            double dist = 0.0;
            for (size_t i = 0; i < a.size(); ++i) dist += (a[i] - b[i]) * (a[i] - b[i]);
            dist = std::sqrt(dist);
            if (dist <= 1e-12)
                throw CollisionError("collar is not injective: (grid " + std::to_string(p / m) + ", t " +
                                     std::to_string(ts[p % m]) + ") and (grid " + std::to_string(q / m) + ", t " +
                                     std::to_string(ts[q % m]) + ") both map to " + fmt(a));
            col.min_distance = std::min(col.min_distance, dist);
        }
    return col;
}

// ---------------------------------------------------------------------------

Tensor tangential(const Tensor& T, const std::vector<Point>& basis) {
    int d = T.shape[0];
    int n = static_cast<int>(basis.size());
    Tensor out({n, n});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) s += basis[i][a] * basis[j][b] * T.v[a * d + b];
            out(i, j) = s;
        }
    return out;
}

namespace {

Tensor hessian_values(const JetArray& G, const Jet& rho2) {
    int d = G.shape()[0];
    Tensor H({d, d});
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            double v = rho2.partial(a).partial(b).value();
            for (int c = 0; c < d; ++c) v -= G(c, a, b).value() * rho2.partial(c).value();
            H(a, b) = v;
        }
    return H;
}

double min_singular(const Tensor& T) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(to_eigen(T));
    return svd.singularValues().minCoeff();
}

std::string random_polynomial(std::mt19937_64& rng, const std::vector<std::string>& coords, double size) {
    std::uniform_real_distribution<double> u(-size, size);
    std::ostringstream os;
    os.precision(17);
    os << u(rng);
    for (size_t i = 0; i < coords.size(); ++i) {
        os << " + " << u(rng) << "*" << coords[i];
        os << " + " << u(rng) << "*" << coords[i] << "*" << coords[(i + 1) % coords.size()];
    }
    return os.str();
}

}  // namespace

SecondFundamentalForm second_fundamental_form(const Geometry& geom, const Point& y, const LimitPlan& plan,
                                              std::uint64_t seed) {
    SecondFundamentalForm sf;
    sf.y = y;
    sf.basis = geom.tangential_basis(y);
    Connection rc = rho_connection(geom);
    JetArray G = rc.gamma(y, 0);
    Jet r2 = geom.rho_jet(y, 2);
    Tensor H = hessian_values(G, r2);
    sf.direct = tangential(H, sf.basis);
    sf.min_singular = min_singular(sf.direct);

    Connection generic = rho_connection(geom, RhoExtension{false, false});
    auto lim = boundary_limit(
        [&](double e) {
            Point x = geom.ray_point(y, e);
            return tangential(hessian_values(generic.gamma(x, 0), geom.rho_jet(x, 2)), sf.basis).v;
        },
        plan);
    if (lim.diverged) throw PoleError("tangential hessian diverges towards the boundary");
    sf.extrapolated = Tensor(sf.direct.shape);
    sf.extrapolated.v = lim.value;
    sf.extrapolation_error = lim.error;
    for (size_t k = 0; k < sf.direct.v.size(); ++k)
        sf.agreement = std::max(sf.agreement, std::abs(sf.direct.v[k] - sf.extrapolated.v[k]));

    std::mt19937_64 rng(seed);
    double scale = 1.0 + max_abs(sf.direct);
    {
        // rho' = e^f rho: the rho'-modified connection is hat nabla + df/alpha
        Expr f = parse_expr(random_polynomial(rng, geom.coords, 0.3), geom.coords);
        Connection rc2 = projective_modify(rc, gradient_form(f, 1.0 / geom.alpha));
        Jet ef = exp(eval_jet(f, y, 2));
        Tensor H2 = tangential(hessian_values(rc2.gamma(y, 0), ef * r2), sf.basis);
        double c = std::exp(eval_scalar(f, y));
        for (size_t k = 0; k < H2.v.size(); ++k)
            sf.conformal_residual = std::max(sf.conformal_residual, std::abs(H2.v[k] - c * sf.direct.v[k]) / (c * scale));
    }
    {
        Expr f = parse_expr(random_polynomial(rng, geom.coords, 0.5), geom.coords);
        Connection rc3 = projective_modify(rc, gradient_form(f));
        Tensor H3 = tangential(hessian_values(rc3.gamma(y, 0), r2), sf.basis);
        for (size_t k = 0; k < H3.v.size(); ++k)
            sf.projective_residual = std::max(sf.projective_residual, std::abs(H3.v[k] - sf.direct.v[k]) / scale);
    }
    return sf;
}

AsymptoticReport asymptotic_h(const Geometry& geom, const std::vector<Point>& points, const LimitPlan& plan) {
    AsymptoticReport rep;
    rep.points = points;
    if (!geom.has_metric()) {
        rep.error = "geometry carries no metric";
        return rep;
    }
    int d = geom.dim;
    double n = geom.n();
    Connection lc = levi_civita(geom);
    auto scalar_at = [&](const Point& x) {
        JetArray G = lc.gamma(x, 1);
        JetArray Ric = ricci(riemann(G));
        JetArray ginv = mat_inverse(geom.metric(x, 0));
        return scalar_curvature(ginv, Ric).value();
    };
    double smin = std::numeric_limits<double>::infinity(), smax = -smin, ssum = 0.0;
    for (const auto& y : points) {
        auto lim = boundary_limit_scalar([&](double e) { return scalar_at(geom.ray_point(y, e)); }, plan);
        rep.S.push_back(lim.value[0]);
        rep.S_error.push_back(lim.error);
        if (lim.diverged) rep.error = "scalar curvature diverges towards the boundary at " + fmt(y);
        smin = std::min(smin, lim.value[0]);
        smax = std::max(smax, lim.value[0]);
        ssum += lim.value[0];
    }
    if (points.empty()) {
        rep.error = "no boundary points";
        return rep;
    }
    rep.S_spread = smax - smin;
    double S = ssum / points.size();
    if (std::abs(S) < 1e-8) {
        rep.error = "boundary value of the scalar curvature vanishes";
        return rep;
    }
    rep.C = -n * (n + 1.0) / (4.0 * S);
    const Point& y = points[0];
    auto basis = geom.tangential_basis(y);
    auto lim = boundary_limit(
        [&](double e) {
            Point x = geom.ray_point(y, e);
            JetArray g = geom.metric(x, 0);
            Jet r = geom.rho_jet(x, 1);
            double rv = r.value();
            Tensor h({d, d});
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b)
                    h(a, b) = rv * g(a, b).value() - rep.C / rv * r.partial(a).value() * r.partial(b).value();
            return tangential(h, basis).v;
        },
        plan);
    rep.h_boundary = Tensor({d - 1, d - 1});
    rep.h_boundary.v = lim.value;
    rep.h_error = lim.error;
    if (lim.diverged) {
        rep.error = "h = rho g - (C/rho) drho drho does not extend to the boundary";
        return rep;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(to_eigen(rep.h_boundary));
    rep.h_min_eig = es.eigenvalues().cwiseAbs().minCoeff();
    return rep;
}

JetArray lc_riemann_via_rho(const Geometry& geom, const Point& x, int order) {
    int d = geom.dim;
    JetArray G = rho_connection(geom).gamma(x, order + 1).truncated(order + 1);
    Jet r = geom.rho_jet(x, order + 2);
    Jet inv = (r.truncated(order + 1) * (-geom.alpha)).reciprocal();
    for (int c = 0; c < d; ++c)
        for (int b = 0; b < d; ++b) {
            Jet y = r.partial(b) * inv;
            G(c, c, b) += y;
            G(c, b, c) += y;
        }
    return riemann(G);
}

Tensor tracefree_ricci_scaled(const Geometry& geom, const Point& x) {
    int d = geom.dim;
    double n = geom.n();
    Tensor out({d, d});
    const AsymptoticForm* form = geom.asymptotic_form();
    if (form && geom.alpha == 2.0) {
        // rho P = gamma - rho_a rho_b / (4 rho), rho g = h + C rho_a rho_b / rho and
        // g^{ab} rho_a rho_b / (4 rho^2) = q / (4 (rho + C q)) keep every pole explicit
        RhoScaleData D = rho_scale_data(geom, x, 0);
        Tensor G = values_of(rho_scaled_inverse_metric(geom, x, 0));
        Tensor gam = values_of(D.gamma);
        Point u = D.drho.values();
        double r = D.rho.value();
        double C = eval_scalar(form->C, x);
        Eigen::MatrixXd h(d, d);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) h(a, b) = eval_scalar(form->h[a][b], x);
        Eigen::VectorXd ue = Eigen::Map<const Eigen::VectorXd>(u.data(), d);
        double q = ue.dot(h.ldlt().solve(ue));
        double tr = -q / (4.0 * (r + C * q));
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b) tr += G(a, b) * gam(a, b);
        double pole = 0.25 + C * tr / (n + 1.0);
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                out(a, b) = n * (gam(a, b) - tr / (n + 1.0) * h(a, b) - pole * u[a] * u[b] / r);
        return out;
    }
    Connection lc = levi_civita(geom);
    JetArray Ric = ricci(riemann(lc.gamma(x, 1)));
    JetArray g = geom.metric(x, 0);
    double S = scalar_curvature(mat_inverse(g), Ric).value();
    double r = geom.rho_value(x);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) out(a, b) = r * (Ric(a, b).value() - S / (n + 1.0) * g(a, b).value());
    return out;
}

EinsteinReport einstein_asymptotics(const Geometry& geom, const Point& y, double C, const LimitPlan& plan) {
    EinsteinReport rep;
    int d = geom.dim;
    auto tf = boundary_limit(
        [&](double e) {
            Point x = geom.ray_point(y, e);
            Tensor t = tracefree_ricci_scaled(geom, x);
            double r = geom.rho_value(x);
            for (double& v : t.v) v /= r;
            return t.v;
        },
        plan);
    rep.tracefree_finite = !tf.diverged;
    rep.tracefree_error = tf.error;
    for (double v : tf.value) rep.tracefree_limit = std::max(rep.tracefree_limit, std::abs(v));

    auto basis = geom.tangential_basis(y);
    Point mu = geom.transversal(y);
    int n = d - 1;
    auto tt = boundary_limit(
        [&](double e) {
            Point x = geom.ray_point(y, e);
            Tensor t = tracefree_ricci_scaled(geom, x);
            double r = geom.rho_value(x);
            std::vector<double> out(n * d, 0.0);
            for (int i = 0; i < n; ++i)
                for (int a = 0; a < d; ++a)
                    for (int b = 0; b < d; ++b) out[i * d + b] += basis[i][a] * t(a, b) / r;
            return out;
        },
        plan);
    rep.tangential_finite = !tt.diverged;
    rep.tangential_error = tt.error;
    for (double v : tt.value) rep.tangential_limit = std::max(rep.tangential_limit, std::abs(v));
    auto nn = boundary_limit_scalar(
        [&](double e) {
            Tensor t = tracefree_ricci_scaled(geom, geom.ray_point(y, e));
            double v = 0.0;
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) v += mu[a] * mu[b] * t(a, b);
            return v;
        },
        plan);
    rep.normal_normal = nn.value[0];

    auto tail = boundary_limit(
        [&](double e) {
            Point x = geom.ray_point(y, e);
            JetArray R = lc_riemann_via_rho(geom, x, 0);
            JetArray g = geom.metric(x, 0);
            Jet r = geom.rho_jet(x, 1);
            double rv = r.value();
            std::vector<double> ra(d);
            for (int a = 0; a < d; ++a) ra[a] = r.partial(a).value();
            auto h = [&](int a, int b) { return rv * g(a, b).value() - C / rv * ra[a] * ra[b]; };
            std::vector<double> out(d * d * d * d);
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b)
                    for (int c = 0; c < d; ++c)
                        for (int dd = 0; dd < d; ++dd) {
                            double v = R(a, b, c, dd).value();
                            // + 1/(2 rho^2) delta^c_[a rho_b] rho_d + 1/(2 C rho) delta^c_[a h_b]d
                            double da = c == a, db = c == b;
                            v += (da * ra[b] - db * ra[a]) * ra[dd] / (4 * rv * rv);
                            v += (da * h(b, dd) - db * h(a, dd)) / (4 * C * rv);
                            out[((a * d + b) * d + c) * d + dd] = v;
                        }
            return out;
        },
        plan);
    rep.tail_finite = !tail.diverged;
    rep.tail_error = tail.error;
    rep.tail_slope = tail.slope;
    for (double v : tail.value) rep.tail_limit = std::max(rep.tail_limit, std::abs(v));
    return rep;
}

// ---------------------------------------------------------------------------

JetArray boundary_basis(const RhoScaleData& D, const std::vector<Point>& basis) {
    int d = D.x.size();
    int N = fiber_dim(d);
    int n = static_cast<int>(basis.size());
    int K = D.order;
    JetArray E = JetArray::zeros({N, N}, d, K);
    Jet inv = D.tau_hat.reciprocal();
    for (int a = 0; a < d; ++a) {
        E(1 + a, 0) = D.t(a) * inv;
        for (int i = 0; i < n; ++i) E(1 + a, 1 + i) += basis[i][a];
    }
    E(0, N - 1) += 1.0;
    return E;
}

BoundaryTractorData boundary_tractor_bundle(const Geometry& geom, const Point& y, int order) {
    require_alpha2(geom, "the boundary tractor bundle");
    if (!geom.has_metric()) throw Error("the boundary tractor bundle needs a metric");
    int d = geom.dim;
    int N = fiber_dim(d);
    int n = d - 1;
    // L(tau) in the Levi-Civita splitting is diag(tau, tau P): degenerate P
    // (e.g. flat) means no boundary tractor metric
    {
        Point x = geom.ray_point(y, 0.05);
        LcData s = lc_data(geom, x, 0);
        Tensor P = values_of(s.P.truncated(0));
        Eigen::MatrixXd M = to_eigen(P);
        double scale = std::max(M.cwiseAbs().maxCoeff(), 1e-300);
        if (std::abs((M / scale).determinant()) < 1e-10 || M.cwiseAbs().maxCoeff() < 1e-12)
            throw DegenerateError("degenerate boundary geometry: L(tau) is degenerate near " + fmt(y));
    }
    BoundaryTractorData B;
    B.y = y;
    B.basis = geom.tangential_basis(y);
    try {
        B.data = rho_scale_data(geom, y, order);
    } catch (const DegenerateError& e) {
        throw DegenerateError(std::string("degenerate boundary geometry: ") + e.what());
    }
    const RhoScaleData& D = B.data;
    B.tau_hat = D.tau_hat.value();
    B.psi = D.psi.value();
    B.t = D.t.truncated(0).values();
    Point dr = D.drho.truncated(0).values();
    for (int a = 0; a < d; ++a) B.t_dot_drho += B.t[a] * dr[a];

    B.gamma_ij = tangential(values_of(D.gamma.truncated(0)), B.basis);
    Eigen::MatrixXd g = to_eigen(B.gamma_ij);
    B.gamma_min_singular = Eigen::JacobiSVD<Eigen::MatrixXd>(g).singularValues().minCoeff();
    B.gamma_inv = from_eigen(g.inverse());
    // rho^-1 P^{ab} at the boundary is tangential and inverse to gamma_ij
    Tensor M = values_of(D.rho_inv_P_inv.truncated(0));
    Tensor Mt = tangential(M, B.basis);
    double res = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += Mt(i, k) * B.gamma_ij(k, j);
            res = std::max(res, std::abs(s - (i == j ? 1.0 : 0.0)));
        }
    for (int a = 0; a < d; ++a) {
        double s = 0.0;
        for (int b = 0; b < d; ++b) s += M(a, b) * dr[b];
        res = std::max(res, std::abs(s));
    }
    B.gamma_inverse_residual = res;

    JetArray E = boundary_basis(D, B.basis).truncated(0);
    B.E = values_of(E);
    Eigen::MatrixXd Em = to_eigen(B.E);
    B.Einv = from_eigen(Em.inverse());
    Eigen::MatrixXd L = to_eigen(values_of(D.L.truncated(0))) * B.tau_hat;
    Eigen::MatrixXd gram = Em.transpose() * L * Em;
    B.gram = from_eigen(gram);
    B.gram_expected = Tensor({N, N});
    B.gram_expected(0, N - 1) = 0.5;
    B.gram_expected(N - 1, 0) = 0.5;
    B.gram_expected(0, 0) = -0.25 * B.psi / B.tau_hat;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) B.gram_expected(1 + i, 1 + j) = B.tau_hat * B.gamma_ij(i, j);
    for (size_t k = 0; k < B.gram.v.size(); ++k)
        B.gram_residual = std::max(B.gram_residual, std::abs(B.gram.v[k] - B.gram_expected.v[k]));
    B.isotropy = std::abs(B.gram(N - 1, N - 1));
    Tensor hess = tangential(values_of(D.hess.truncated(0)), B.basis);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            B.quotient_residual =
                std::max(B.quotient_residual, std::abs(B.gram(1 + i, 1 + j) - 0.5 * B.tau_hat * 0.5 * (hess(i, j) + hess(j, i))));
    double scale = std::max(gram.cwiseAbs().maxCoeff(), 1e-300);
    B.det_scaled = (gram / scale).determinant();
    if (std::abs(B.det_scaled) < 1e-8) throw DegenerateError("degenerate boundary geometry at " + fmt(y));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (gram + gram.transpose()));
    for (int k = 0; k < N; ++k) (es.eigenvalues()(k) > 0 ? B.positive : B.negative)++;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eg(0.5 * (g + g.transpose()));
    for (int k = 0; k < n; ++k) (eg.eigenvalues()(k) > 0 ? B.gamma_positive : B.gamma_negative)++;
    return B;
}

CurvatureBlocks curvature_blocks_from(const BoundaryTractorData& B, const Tensor& Fe) {
    CurvatureBlocks cb;
    int n = Fe.shape[0];
    int N = Fe.shape[2];
    cb.F = Fe;
    cb.scale = Fe.max_abs();
    cb.V = Tensor({n, n, n});
    cb.W = Tensor({n, n, n, n});
    double pattern = 0.0, anti = 0.0, skew = 0.0, bm = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            for (int J = 0; J < N; ++J) {
                pattern = std::max(pattern, std::abs(Fe(i, j, 0, J)));
                pattern = std::max(pattern, std::abs(Fe(i, j, J, N - 1)));
                for (int I = 0; I < N; ++I) anti = std::max(anti, std::abs(Fe(i, j, I, J) + Fe(j, i, I, J)));
            }
            pattern = std::max(pattern, std::abs(Fe(i, j, N - 1, 0)));
            for (int k = 0; k < n; ++k) {
                cb.V(i, j, k) = Fe(i, j, 1 + k, 0);
                for (int l = 0; l < n; ++l) cb.W(i, j, k, l) = Fe(i, j, 1 + k, 1 + l);
            }
        }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int l = 0; l < n; ++l) {
                double expect = 0.0;
                for (int k = 0; k < n; ++k) expect += -2.0 * B.tau_hat * cb.V(i, j, k) * B.gamma_ij(k, l);
                bm = std::max(bm, std::abs(Fe(i, j, N - 1, 1 + l) - expect));
                for (int k = 0; k < n; ++k) {
                    double s = 0.0;
                    for (int r = 0; r < n; ++r)
                        s += cb.W(i, j, r, l) * B.gamma_ij(k, r) + cb.W(i, j, r, k) * B.gamma_ij(l, r);
                    skew = std::max(skew, std::abs(s));
                }
            }
    double norm = 1.0 + cb.scale;
    cb.pattern = pattern / norm;
    cb.antisymmetry = anti / norm;
    cb.gamma_skew = skew / norm;
    cb.bottom_middle = bm / norm;
    return cb;
}

CurvatureBlocks curvature_blocks(const Geometry& geom, const Point& y) {
    BoundaryTractorData B = boundary_tractor_bundle(geom, y, 1);
    JetArray F = tractor_curvature(B.data.connection);
    JetArray E = boundary_basis(B.data, B.basis).truncated(0);
    JetArray Fe = conjugate_two_form(tangential_two_form(F, B.basis), E, mat_inverse(E));
    return curvature_blocks_from(B, values_of(Fe));
}

Tensor normalization_phi(const Tensor& W, const Tensor& gamma_ij, const Tensor& gamma_inv) {
    int n = W.shape[0];
    double nn = n;
    double trace = 0.0;
    for (int k = 0; k < n; ++k)
        for (int r = 0; r < n; ++r)
            for (int s = 0; s < n; ++s) trace += W(k, r, k, s) * gamma_inv(r, s);
    Tensor phi({n, n});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double c = 0.0;
            for (int k = 0; k < n; ++k) c += W(k, i, k, j);
            phi(i, j) = -c / (nn - 2) + trace * gamma_ij(i, j) / (2 * (nn - 1) * (nn - 2));
        }
    return phi;
}

double ricci_contraction_residual(const Tensor& W, const Tensor& phi, const Tensor& gamma_ij, const Tensor& gamma_inv) {
    int n = W.shape[0];
    double tr = 0.0;
    for (int k = 0; k < n; ++k)
        for (int r = 0; r < n; ++r) tr += phi(k, r) * gamma_inv(k, r);
    double worst = 0.0;
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
            double s = (n - 2) * phi(j, l) + tr * gamma_ij(j, l);
            for (int k = 0; k < n; ++k) s += W(k, j, k, l);
            worst = std::max(worst, std::abs(s));
        }
    return worst / (1.0 + W.max_abs());
}

NormalizationReport normalize_boundary_connection(const Geometry& geom, const Point& y) {
    int d = geom.dim;
    int n = d - 1;
    int N = fiber_dim(d);
    if (n < 3) throw Error("unsupported dimension: the normalization needs a boundary of dimension >= 3");
    NormalizationReport rep;
    BoundaryTractorData B = boundary_tractor_bundle(geom, y, 2);
    const RhoScaleData& D = B.data;
    const auto& T = B.basis;

    JetArray Ft = tractor_curvature(D.connection);  // order 1
    JetArray E = boundary_basis(D, T);             // order 2
    JetArray E1 = E.truncated(1);
    JetArray Fe = conjugate_two_form(tangential_two_form(Ft, T), E1, mat_inverse(E1));
    JetArray gij = tangential_jets(D.gamma.truncated(1), T);
    JetArray ginv = mat_inverse(gij);
    Jet th_inv = D.tau_hat.truncated(1).reciprocal();

    // phi and Psi-tilde as jets (the extension off the boundary is arbitrary but smooth)
    double nn = n;
    Jet trace = Jet::zero(d, 1);
    for (int k = 0; k < n; ++k)
        for (int r = 0; r < n; ++r)
            for (int s = 0; s < n; ++s) trace += Fe(k, r, 1 + k, 1 + s) * ginv(r, s);
    JetArray phi = JetArray::zeros({n, n}, d, 1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            Jet c = Jet::zero(d, 1);
            for (int k = 0; k < n; ++k) c += Fe(k, i, 1 + k, 1 + j);
            phi(i, j) = c * (-1.0 / (nn - 2)) + trace * gij(i, j) * (1.0 / (2 * (nn - 1) * (nn - 2)));
        }
    JetArray Pt = JetArray::zeros({n, N, N}, d, 1);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            Jet s = Jet::zero(d, 1);
            for (int l = 0; l < n; ++l) s += phi(i, l) * ginv(k, l);
            Pt(i, 1 + k, 0) = s * th_inv * (-0.5);
            Pt(i, N - 1, 1 + k) = phi(i, k);
        }
    rep.phi = values_of(phi);
    rep.psi_tilde = values_of(Pt);

    // nabla^0 in the boundary basis, Psi-tilde spread along the coframe dual to T
    JetArray A0 = frame_connection(D.connection, E);  // order 1
    for (int a = 0; a < d; ++a)
        for (int i = 0; i < n; ++i) {
            if (T[i][a] == 0.0) continue;
            for (int I = 0; I < N; ++I)
                for (int J = 0; J < N; ++J) A0(a, I, J) += Pt(i, I, J) * T[i][a];
        }
    JetArray F0 = tangential_two_form(tractor_curvature(A0), T);
    rep.F0 = values_of(F0);
    double scale = 1.0 + rep.F0.max_abs();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            for (int I = 0; I < N; ++I) rep.t1_residual = std::max(rep.t1_residual, std::abs(rep.F0(i, j, I, N - 1)));
        }
    rep.t1_residual /= scale;
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += rep.F0(k, j, 1 + k, 1 + l);
            rep.ricci_residual = std::max(rep.ricci_residual, std::abs(s));
        }
    rep.ricci_residual /= scale;

    // metric: Psi-tilde skew and nabla^0 G = 0 for the Gram form along T
    JetArray Lj = D.tau_hat.truncated(1) * D.L.truncated(1);
    JetArray G = mat_mul(mat_transpose(E1), mat_mul(Lj, E1));
    Tensor Gv = values_of(G.truncated(0));
    double gscale = 1.0 + Gv.max_abs();
    for (int i = 0; i < n; ++i)
        for (int I = 0; I < N; ++I)
            for (int J = 0; J < N; ++J) {
                double s = 0.0;
                for (int K = 0; K < N; ++K) s += rep.psi_tilde(i, K, I) * Gv(K, J) + Gv(I, K) * rep.psi_tilde(i, K, J);
                rep.skew_residual = std::max(rep.skew_residual, std::abs(s) / gscale);
            }
    JetArray dG = G.gradient();
    for (int i = 0; i < n; ++i)
        for (int I = 0; I < N; ++I)
            for (int J = 0; J < N; ++J) {
                double s = 0.0;
                for (int a = 0; a < d; ++a) {
                    if (T[i][a] == 0.0) continue;
                    double v = dG(a, I, J).value();
                    for (int K = 0; K < N; ++K)
                        v -= A0(a, K, I).value() * Gv(K, J) + Gv(I, K) * A0(a, K, J).value();
                    s += T[i][a] * v;
                }
                rep.metric_residual = std::max(rep.metric_residual, std::abs(s) / gscale);
            }

    // algebraic residual of the contraction and the injected fault
    Tensor W({n, n, n, n});
    Tensor Fv = values_of(Fe.truncated(0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) W(i, j, k, l) = Fv(i, j, 1 + k, 1 + l);
    rep.formula_residual = ricci_contraction_residual(W, rep.phi, B.gamma_ij, B.gamma_inv);
    Tensor Wf = W;
    Tensor dW({n, n, n, n});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    dW(i, j, k, l) = (k == i ? B.gamma_ij(j, l) : 0.0) - (k == j ? B.gamma_ij(i, l) : 0.0);
    double m = dW.max_abs();
    for (size_t k = 0; k < Wf.v.size(); ++k) Wf.v[k] += dW.v[k] / m;
    rep.fault_residual = ricci_contraction_residual(Wf, rep.phi, B.gamma_ij, B.gamma_inv);
    return rep;
}

ParallelReport asymptotically_parallel_check(const Geometry& geom, const Point& y, const LimitPlan& plan) {
    ParallelReport rep;
    int d = geom.dim;
    int n = d - 1;
    if (geom.alpha != 2.0 || d < 4) {
        rep.reason = "needs alpha = 2 and dimension >= 4";
        return rep;
    }
    BoundaryTractorData B = boundary_tractor_bundle(geom, y, 1);
    const RhoScaleData& D = B.data;
    rep.hypothesis = (D.tau_hat.truncated(0) * D.rho_dP.truncated(0)).max_abs_value();
    rep.holds = rep.hypothesis <= 1e-6;
    EinsteinReport er = einstein_asymptotics(geom, y, 1.0, plan);
    rep.tracefree_ricci = er.tracefree_limit;
    if (!rep.holds) {
        rep.reason = "tau nabla P does not vanish at the boundary (max " + std::to_string(rep.hypothesis) + ")";
        return rep;
    }
    JetArray A = std_connection_matrix(D.gamma_hat, D.P_hat);
    JetArray F = tractor_curvature(A);
    JetArray E = boundary_basis(D, B.basis).truncated(0);
    Tensor Fe = values_of(conjugate_two_form(tangential_two_form(F, B.basis), E, mat_inverse(E)));
    int N = fiber_dim(d);
    double scale = 1.0 + Fe.max_abs();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int I = 0; I < N; ++I) rep.t1_residual = std::max(rep.t1_residual, std::abs(Fe(i, j, I, N - 1)) / scale);
    for (int j = 0; j < n; ++j)
        for (int l = 0; l < n; ++l) {
            double s = 0.0;
            for (int k = 0; k < n; ++k) s += Fe(k, j, 1 + k, 1 + l);
            rep.ricci_residual = std::max(rep.ricci_residual, std::abs(s) / scale);
        }
    return rep;
}

}  // namespace tractorlab
