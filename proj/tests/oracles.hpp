// Independent reference computations shared by the unit and acceptance tests.
#pragma once

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "tractorlab/expr.hpp"

namespace oracle {

using tractorlab::Expr;
using tractorlab::Func;

// Random smooth function of `dim` variables, domain-safe everywhere.
inline Expr random_smooth(std::mt19937_64& rng, int dim, int depth) {
    std::uniform_int_distribution<int> pick(0, 9);
    std::uniform_real_distribution<double> coef(-1.5, 1.5);
    auto leaf = [&]() -> Expr {
        std::uniform_int_distribution<int> v(0, dim);
        int k = v(rng);
        if (k == dim) return Expr::num(std::round(coef(rng) * 100) / 100);
        return Expr::var(k, "x" + std::to_string(k));
    };
    if (depth == 0) return leaf();
    Expr a = random_smooth(rng, dim, depth - 1);
    switch (pick(rng)) {
        case 0: return a + random_smooth(rng, dim, depth - 1);
        case 1: return a - random_smooth(rng, dim, depth - 1);
        case 2: return a * random_smooth(rng, dim, depth - 1);
        case 3: return a / (Expr::num(2.0) + Expr::pow(random_smooth(rng, dim, depth - 1), 2));
        case 4: return Expr::call(Func::Exp, Expr::num(0.5) * a);
        case 5: return Expr::call(Func::Sin, a);
        case 6: return Expr::call(Func::Cos, a);
        case 7: return Expr::call(Func::Atan, a);
        case 8: return Expr::call(Func::Log, Expr::num(1.5) + Expr::pow(a, 2));
        default: return Expr::call(Func::Sqrt, Expr::num(1.0) + Expr::pow(a, 2));
    }
}

// Mixed partial derivative of multi-index m by nested central differences,
// evaluated in extended precision so that third derivatives at step 1e-4
// are not swamped by rounding.
inline long double central_difference(const Expr& f, std::vector<long double> x, std::vector<int> m,
                                      long double h = 1e-4L) {
    int i = -1;
    for (size_t k = 0; k < m.size(); ++k)
        if (m[k] > 0) {
            i = static_cast<int>(k);
            break;
        }
    if (i < 0) return tractorlab::eval_scalar_ld(f, x);
    m[i] -= 1;
    auto xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    return (central_difference(f, xp, m, h) - central_difference(f, xm, m, h)) / (2 * h);
}


// Christoffel symbols of a metric given by component expressions, from
// central differences of the metric and a long double inverse.
inline std::vector<long double> koszul_christoffel(const std::vector<std::vector<Expr>>& g,
                                                   const std::vector<long double>& x, long double h = 1e-5L) {
    int d = static_cast<int>(x.size());
    std::vector<long double> gm(d * d), inv(d * d, 0.0L), dg(d * d * d);
    for (int a = 0; a < d; ++a)
        for (int b = 0; b < d; ++b) {
            gm[a * d + b] = tractorlab::eval_scalar_ld(g[a][b], x);
            for (int e = 0; e < d; ++e) {
                auto xp = x, xm = x;
                xp[e] += h;
                xm[e] -= h;
                dg[(e * d + a) * d + b] =
                    (tractorlab::eval_scalar_ld(g[a][b], xp) - tractorlab::eval_scalar_ld(g[a][b], xm)) / (2 * h);
            }
        }
    // Gauss-Jordan on a copy
    auto m = gm;
    for (int i = 0; i < d; ++i) inv[i * d + i] = 1.0L;
    for (int c = 0; c < d; ++c) {
        int piv = c;
        for (int r = c + 1; r < d; ++r)
            if (std::fabs(m[r * d + c]) > std::fabs(m[piv * d + c])) piv = r;
        for (int j = 0; j < d; ++j) {
            std::swap(m[c * d + j], m[piv * d + j]);
            std::swap(inv[c * d + j], inv[piv * d + j]);
        }
        long double p = m[c * d + c];
        for (int j = 0; j < d; ++j) m[c * d + j] /= p, inv[c * d + j] /= p;
        for (int r = 0; r < d; ++r) {
            if (r == c) continue;
            long double f = m[r * d + c];
            for (int j = 0; j < d; ++j) m[r * d + j] -= f * m[c * d + j], inv[r * d + j] -= f * inv[c * d + j];
        }
    }
    std::vector<long double> G(d * d * d, 0.0L);
    for (int c = 0; c < d; ++c)
        for (int a = 0; a < d; ++a)
            for (int b = 0; b < d; ++b)
                for (int e = 0; e < d; ++e)
                    G[(c * d + a) * d + b] += 0.5L * inv[c * d + e] *
                                              (dg[(a * d + e) * d + b] + dg[(b * d + e) * d + a] - dg[(e * d + a) * d + b]);
    return G;
}

}  // namespace oracle
