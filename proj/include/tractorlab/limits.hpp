#pragma once

#include <functional>
#include <string>
#include <vector>

namespace tractorlab {

// Dyadic ladder eps_k = eps0 * 2^-k, k = 0..levels-1.
struct LimitPlan {
    double eps0 = 0.05;
    int levels = 6;
    // growth below this size is roundoff, not divergence
    double growth_floor = 1e-6;

    std::vector<double> ladder() const;
};

struct LimitResult {
    std::vector<double> value;
    double error = 0.0;      // size of the last Richardson correction
    bool diverged = false;   // pole hit, or samples grew by more than 10x
    bool vanishing = false;  // samples decay like a positive power of eps
    double slope = 0.0;      // least-squares slope of log|f| against log eps
    std::string note;
    std::vector<std::vector<double>> samples;
};

using LadderFn = std::function<std::vector<double>(double eps)>;

// Richardson extrapolation to eps -> 0 assuming f is smooth in eps.
LimitResult boundary_limit(const LadderFn& f, const LimitPlan& plan = {});
LimitResult boundary_limit_scalar(const std::function<double(double)>& f, const LimitPlan& plan = {});

// Interpolating polynomial through (xs, ys) evaluated at t (Neville).
double neville(const std::vector<double>& xs, const std::vector<double>& ys, double t);

}  // namespace tractorlab
