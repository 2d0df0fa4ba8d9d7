#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tractorlab/geometry.hpp"
#include "tractorlab/limits.hpp"

namespace tractorlab {

struct SamplingPlan {
    int interior_points = 8;
    int boundary_points = 5;
    std::uint64_t seed = 1;
    LimitPlan limit{};
    double ode_step = 1e-3;
    double ode_horizon = 0.2;
};

enum class Status { Pass, Fail, Skip, Error };
const char* status_name(Status s);

struct Detail {
    int point = -1;        // index into the interior or boundary sample, -1 for global
    std::string where;     // "interior", "boundary" or "global"
    std::string quantity;
    double residual = 0.0;  // may be +inf for a detected divergence
    double tolerance = 0.0; // 0: the check's tolerance
    std::string note;
};

struct CheckReport {
    std::string id, paper_ref;
    Status status = Status::Pass;
    // the detail with the largest residual / tolerance ratio, so that
    // pass <=> max_residual <= tolerance
    double max_residual = 0.0;
    double tolerance = 0.0;
    int n_points = 0;
    std::vector<Detail> details;
    double wall_time = 0.0;
    std::string reason;  // skip or error message
};

struct CheckContext {
    const Geometry& geom;
    const SamplingPlan& plan;
    std::vector<Point> interior, boundary;
};

struct Check {
    std::string id;
    std::string paper_ref;             // plain statement of the property
    std::vector<std::string> needs;     // "metric", "alpha=2", "alpha=1", "n>=3"
    double tolerance = 1e-7;
    std::function<std::vector<Detail>(const CheckContext&)> evaluate;
};

const std::vector<Check>& registry();

// Empty when the check applies, else the skip reason.
std::string inapplicable_reason(const Check& c, const Geometry& geom);

// ids: exact ids, prefixes ending at a dash boundary ("thm-4.4"), or "all".
// Throws ValidationError for a selector that matches nothing.
std::vector<const Check*> select_checks(const std::vector<std::string>& ids);

std::vector<CheckReport> run_suite(const Geometry& geom, const std::vector<std::string>& ids, const SamplingPlan& plan);

std::string reports_to_json(const std::vector<CheckReport>& reports, bool timing = true);
std::string reports_to_csv(const std::vector<CheckReport>& reports, bool timing = true);

bool any_failed(const std::vector<CheckReport>& reports);

}  // namespace tractorlab
