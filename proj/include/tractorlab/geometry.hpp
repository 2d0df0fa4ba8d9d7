#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tractorlab/expr.hpp"
#include "tractorlab/tensor.hpp"

namespace tractorlab {

// g = h / rho^(2/alpha) + C drho^2 / rho^(4/alpha)
struct AsymptoticForm {
    Expr C;
    std::vector<std::vector<Expr>> h;
};

struct Geometry {
    std::string name;
    int dim = 0;
    std::vector<std::string> coords;
    Expr rho;
    double alpha = 2.0;
    std::string signature = "unknown";

    // Exactly one of these describes the interior geometry.
    std::vector<std::vector<Expr>> metric_exprs;
    std::optional<AsymptoticForm> asymptotic;
    std::vector<Expr> christoffel_exprs;  // Gamma^c_ab at [(c*dim + a)*dim + b]
    // Optional asymptotic form that metric_exprs equal identically; only used
    // for cancellation-free evaluation near rho = 0.
    std::optional<AsymptoticForm> equivalent_form;

    // Sampling domain: coordinate box plus a lower bound on rho for interior points.
    std::vector<std::pair<double, double>> box;
    double interior_rho_min = 0.05;

    std::map<std::string, std::string> params;

    int n() const { return dim - 1; }
    bool has_metric() const { return !metric_exprs.empty() || asymptotic.has_value(); }
    const AsymptoticForm* asymptotic_form() const {
        return asymptotic ? &*asymptotic : equivalent_form ? &*equivalent_form : nullptr;
    }

    JetArray metric(const Point& p, int order) const;
    JetArray christoffel_data(const Point& p, int order) const;
    TensorField metric_field() const;

    Jet rho_jet(const Point& p, int order) const;
    double rho_value(const Point& p) const;
    Point rho_gradient(const Point& p) const;

    bool in_box(const Point& p) const;
    std::vector<Point> sample_interior(int count, std::uint64_t seed) const;
    std::vector<Point> sample_boundary(int count, std::uint64_t seed) const;
    Point project_to_boundary(Point p) const;
    // Inward transversal at a boundary point: Euclidean gradient of rho scaled so drho(mu0) = 1.
    Point transversal(const Point& y) const;
    // Point on the straight ray y + s mu0 where rho equals eps.
    Point ray_point(const Point& y, double eps) const;
    // Euclidean orthonormal basis of ker drho at p (n vectors).
    std::vector<Point> tangential_basis(const Point& p) const;
};

// g = h / rho^(2/alpha) + C drho^2 / rho^(4/alpha) evaluated for the given form.
JetArray form_metric(const Geometry& geom, const AsymptoticForm& form, const Point& p, int order);

using Params = std::map<std::string, std::string>;

Geometry builtin_geometry(const std::string& name, int dim, const Params& params = {});
std::vector<std::string> builtin_names();

Geometry load_geometry(const std::string& json_text);
Geometry load_geometry_file(const std::string& path);
std::string geometry_to_json(const Geometry& g);

// Throws ValidationError naming the failing point.
void validate_geometry(const Geometry& g);

}  // namespace tractorlab
