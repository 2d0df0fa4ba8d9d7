#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tractorlab/geometry.hpp"
#include "tractorlab/limits.hpp"
#include "tractorlab/tensor.hpp"

namespace tractorlab {

using PointFn = std::function<JetArray(const Point&, int)>;

// Christoffel symbols Gamma^c_ab stored as G(c, a, b); nabla_a xi^c = d_a xi^c + G(c, a, b) xi^b.
struct Connection {
    int dim = 0;
    PointFn christoffel;
    bool torsion_free = true;
    bool special = true;
    std::string provenance = "custom";

    JetArray gamma(const Point& p, int order) const { return christoffel(p, order); }
};

struct OneForm {
    PointFn eval;        // shape {dim}
    bool exact = false;  // known to be closed; keeps a special connection special
};

Connection levi_civita(const TensorField& g, int dim);
Connection levi_civita(const Geometry& geom);
Connection explicit_connection(const Geometry& geom);
// Levi-Civita connection when the geometry has a metric, else its explicit Christoffels.
Connection interior_connection(const Geometry& geom);

// hat Gamma^c_ab = Gamma^c_ab + delta^c_a Y_b + delta^c_b Y_a
Connection projective_modify(const Connection& conn, const OneForm& upsilon);
OneForm gradient_form(const Expr& f, double scale = 1.0);

// d rho / (alpha rho); pole at rho = 0.
OneForm rho_upsilon(const Geometry& geom);

struct RhoExtension {
    bool enabled = true;
    // Use the cancellation-free formula when the metric has a known asymptotic form.
    bool closed_form = true;
    double threshold = 1e-4;  // |rho| below this is handled by interpolation along the ray
    LimitPlan plan{};
};

// ^rho nabla. Near rho = 0 every jet coefficient is interpolated from the
// inward ray ladder; a ladder that blows up raises PoleError.
Connection rho_connection(const Geometry& geom, RhoExtension ext = {});

// ^rho nabla for g = h / rho^s + C drho^2 / rho^(2s), s = 2/alpha, written so
// that no pole terms are formed: smooth through rho = 0 whenever it extends.
JetArray rho_christoffel_closed_form(const Geometry& geom, const Point& p, int order);

// tau / rho, the rho-parallel scale; cancellation-free for asymptotic forms with alpha = 2.
Jet tau_hat(const Geometry& geom, const Point& p, int order);

// rho^-1 g^{ab}; cancellation-free for asymptotic forms with alpha = 2:
// h^-1 - C v v / (rho + C q).
JetArray rho_scaled_inverse_metric(const Geometry& geom, const Point& p, int order);

// Pointwise curvature from Christoffel jets; each output loses one order.
JetArray riemann(const JetArray& G);                 // R(a, b, c, d) = R_ab^c_d
JetArray ricci(const JetArray& R);                   // R_ab = R_da^d_b
JetArray schouten(const JetArray& Ric);              // (1/n) R_(ab) + (1/(n+2)) R_[ab]
JetArray beta_tensor(const JetArray& P);             // P_ba - P_ab
JetArray weyl(const JetArray& R, const JetArray& P);
JetArray reassemble_riemann(const JetArray& C, const JetArray& P);
Jet scalar_curvature(const JetArray& ginv, const JetArray& Ric);

// Sign of the Cotton tensor Y_abc = s (nabla_a P_bc - nabla_b P_ac). Fixed by
// the tractor curvature comparison (see tests).
inline constexpr double kCottonSign = -1.0;
JetArray cotton(const JetArray& P, const JetArray& G, double sign = kCottonSign);

struct CurvaturePack {
    int order = 0;
    JetArray gamma, riemann, ricci, schouten, beta, weyl, cotton;
};

// All tensors at jet order `order` (Christoffels are fetched at order + 2).
CurvaturePack curvature_pack(const Connection& conn, const Point& p, int order);

// Density term sign in the weighted covariant derivative; +1 is the pinned
// choice that makes tau parallel for the Levi-Civita connection.
inline constexpr int kDensitySign = +1;

// (nabla T)_{a ...} with the derivative index first. T carries projective
// weight w; the density part contributes sign * w/(n+2) Gamma^e_ea T.
JetArray covariant_derivative(const JetArray& T, const std::vector<IndexKind>& kinds, double weight,
                              const JetArray& G, int density_sign = kDensitySign);
TensorField covariant_derivative(const TensorField& T, const Connection& conn, int density_sign = kDensitySign);

// tau in E(2): |det g|^(-1/(n+2)).
TensorField canonical_tau(const Geometry& geom);
Jet tau_from_metric(const JetArray& g);

// Max |R_ab^c_c| at p; zero for a special connection.
double special_defect(const Connection& conn, const Point& p);

}  // namespace tractorlab
