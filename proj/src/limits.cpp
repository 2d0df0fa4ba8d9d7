#include "tractorlab/limits.hpp"

#include <algorithm>
#include <cmath>

#include "tractorlab/errors.hpp"

namespace tractorlab {

namespace {

double norm_inf(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

std::vector<double> LimitPlan::ladder() const {
    std::vector<double> e(levels);
    for (int k = 0; k < levels; ++k) e[k] = std::ldexp(eps0, -k);
    return e;
}

LimitResult boundary_limit(const LadderFn& f, const LimitPlan& plan) {
    if (plan.levels < 2) throw Error("extrapolation needs at least two levels");
    LimitResult res;
    auto eps = plan.ladder();
    for (double e : eps) {
        try {
            res.samples.push_back(f(e));
        } catch (const PoleError& err) {
            res.diverged = true;
            res.note = std::string("pole at eps=") + std::to_string(e) + ": " + err.what();
            return res;
        }
        for (double x : res.samples.back())
            if (!std::isfinite(x)) {
                res.diverged = true;
                res.note = "non-finite sample at eps=" + std::to_string(e);
                return res;
            }
    }
    size_t m = res.samples[0].size();
    int L = plan.levels;

    // T[k][j] = T[k][j-1] + (T[k][j-1] - T[k-1][j-1]) / (2^j - 1)
    std::vector<std::vector<std::vector<double>>> T(L);
    for (int k = 0; k < L; ++k) {
        T[k].push_back(res.samples[k]);
        for (int j = 1; j <= k; ++j) {
            std::vector<double> v(m);
            double q = std::ldexp(1.0, j) - 1.0;
            for (size_t i = 0; i < m; ++i) v[i] = T[k][j - 1][i] + (T[k][j - 1][i] - T[k - 1][j - 1][i]) / q;
            T[k].push_back(std::move(v));
        }
    }
    res.value = T[L - 1][L - 1];
    double err = 0.0;
    for (size_t i = 0; i < m; ++i) err = std::max(err, std::abs(T[L - 1][L - 1][i] - T[L - 1][L - 2][i]));
    res.error = err;

    double first = norm_inf(res.samples.front());
    double last = norm_inf(res.samples.back());
    if (last > 10.0 * std::max(first, plan.growth_floor)) {
        res.diverged = true;
        res.note = "samples grow towards the boundary";
    }

    // log-log slope over samples with nonzero norm
    std::vector<double> lx, ly;
    for (int k = 0; k < L; ++k) {
        double nk = norm_inf(res.samples[k]);
        if (nk > 0.0) {
            lx.push_back(std::log(eps[k]));
            ly.push_back(std::log(nk));
        }
    }
    if (lx.size() >= 2) {
        double mx = 0, my = 0;
        for (size_t i = 0; i < lx.size(); ++i) mx += lx[i], my += ly[i];
        mx /= lx.size();
        my /= ly.size();
        double sxy = 0, sxx = 0;
        for (size_t i = 0; i < lx.size(); ++i) sxy += (lx[i] - mx) * (ly[i] - my), sxx += (lx[i] - mx) * (lx[i] - mx);
        res.slope = sxx > 0 ? sxy / sxx : 0.0;
    }
    // a smooth nonzero limit has slope near 0; power-law decay is flagged
    res.vanishing = res.slope > 0.25;
    return res;
}

LimitResult boundary_limit_scalar(const std::function<double(double)>& f, const LimitPlan& plan) {
    return boundary_limit([&](double e) { return std::vector<double>{f(e)}; }, plan);
}

double neville(const std::vector<double>& xs, const std::vector<double>& ys, double t) {
    std::vector<double> p = ys;
    size_t n = xs.size();
    for (size_t j = 1; j < n; ++j)
        for (size_t i = 0; i + j < n; ++i)
            p[i] = ((t - xs[i + j]) * p[i] + (xs[i] - t) * p[i + 1]) / (xs[i] - xs[i + j]);
    return p[0];
}

}  // namespace tractorlab
