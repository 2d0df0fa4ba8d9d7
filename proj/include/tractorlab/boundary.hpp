#pragma once

#include <string>
#include <vector>

#include "tractorlab/affine.hpp"
#include "tractorlab/geometry.hpp"
#include "tractorlab/limits.hpp"
#include "tractorlab/tensor.hpp"
#include "tractorlab/tractor.hpp"

namespace tractorlab {

// Everything in the splitting of the rho-modified connection, built only from
// quantities that are smooth up to rho = 0. L is L(tau)/tau-hat, so the slots
// of its inverse are (rho^-1 P^{ab}; 2 t^a; psi) without tau-hat factors.
struct RhoScaleData {
    int order = 0;
    Point x;
    Jet rho, tau_hat;
    JetArray drho;        // rho_a
    JetArray gamma_hat;   // Christoffels of the rho-modified connection
    JetArray P_hat;       // its Schouten tensor
    JetArray hess;        // hat nabla_a rho_b
    JetArray gamma;       // 1/2 hess + rho P-hat = rho P + rho_a rho_b / (4 rho)
    JetArray L, Linv;     // {N, N}
    JetArray rho_inv_P_inv, t;
    Jet psi;
    JetArray rho_dP;      // rho nabla_a P_bc, from the smooth right-hand side
    JetArray A;           // A(a, b, c) = A_a^b_c
    JetArray psi_hat;     // psi(a, c)
    JetArray contorsion;  // {dim, N, N}
    JetArray connection;  // standard connection plus contorsion, {dim, N, N}
};

// Needs alpha = 2 and a special connection. Christoffels are fetched at order + 2.
RhoScaleData rho_scale_data(const Geometry& geom, const Point& x, int order);

// rho nabla_a P_bc for the interior Levi-Civita connection, computed directly.
JetArray rho_nabla_P_direct(const Geometry& geom, const Point& x, int order);
// Same quantity from Phi = P - S g / (n(n+1)):
// rho_a Phi_bc + 1/2 rho_b Phi_ac + 1/2 rho_c Phi_ba + rho (hat nabla_a Phi_bc + g_bc hat nabla_a S / (n(n+1))).
JetArray rho_nabla_P_from_phi(const Geometry& geom, const Point& x, int order);

// Contorsion in the Levi-Civita splitting: only the A slot, A = 1/2 P^{bd}(-nabla_a P_dc - nabla_c P_da + nabla_d P_ac).
JetArray lc_contorsion(const Geometry& geom, const Point& x, int order);

// The curvature of the metric tractor connection assembled from Weyl, Cotton,
// hat nabla A, hat nabla psi, P-hat and the contorsion (needs data order >= 1).
JetArray metric_curvature_blocks(const RhoScaleData& D);

// Residual of xi . L(s1, s2) - L(nabla s1, s2) - L(s1, nabla s2) over `pairs`
// random polynomial sections, for L = tau-hat * D.L and the connection D.connection.
double metric_compatibility_residual(const RhoScaleData& D, int pairs, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Geodetic transversals

struct TransversalSample {
    double t = 0.0;
    Point x, mu;
};

struct TransversalCurve {
    Point y, mu0;
    std::vector<TransversalSample> samples;
    double drho_mu0 = 0.0;
    double residual = 0.0;  // max |hat nabla_mu mu| from a 5-point stencil on the samples
};

// Classical RK4 for x' = mu, mu' = -Gamma-hat(mu, mu), fixed step.
TransversalCurve geodetic_transversal(const Geometry& geom, const Point& y, const Point& mu0, double step = 1e-3,
                                      double horizon = 0.2);

// rho^2 g(mu, mu) at a sample (interior points only).
double rho2_g_mu_mu(const Geometry& geom, const TransversalSample& s);

struct Collar {
    std::vector<Point> grid;
    std::vector<double> ts;
    std::vector<std::vector<Point>> points;  // points[i][k]: transversal from grid[i] at ts[k]
    double min_distance = 0.0;
};

// Throws CollisionError naming the offending pair when two samples coincide.
Collar collar_sample(const Geometry& geom, const std::vector<Point>& grid, const std::vector<double>& ts,
                     double step = 1e-3);

// ---------------------------------------------------------------------------
// Second fundamental form and asymptotics

struct SecondFundamentalForm {
    Point y;
    std::vector<Point> basis;  // Euclidean orthonormal basis of ker drho
    Tensor direct;             // tangential hat nabla_a rho_b evaluated at rho = 0
    Tensor extrapolated;       // same from the inward ladder
    double agreement = 0.0;
    double extrapolation_error = 0.0;
    double conformal_residual = 0.0;   // rho' = e^f rho: positive multiple
    double projective_residual = 0.0;  // random exact projective change: unchanged
    double min_singular = 0.0;
};

SecondFundamentalForm second_fundamental_form(const Geometry& geom, const Point& y, const LimitPlan& plan = {},
                                              std::uint64_t seed = 1);

// Tangential restriction of a symmetric {dim, dim} value table.
Tensor tangential(const Tensor& T, const std::vector<Point>& basis);

struct AsymptoticReport {
    std::vector<Point> points;
    std::vector<double> S;       // boundary limits of the scalar curvature
    std::vector<double> S_error;
    double S_spread = 0.0;
    double C = 0.0;              // -n(n+1)/(4S)
    Tensor h_boundary;           // tangential h at points[0]
    double h_min_eig = 0.0;
    double h_error = 0.0;
    std::string error;           // set when S vanishes or diverges
};

AsymptoticReport asymptotic_h(const Geometry& geom, const std::vector<Point>& points, const LimitPlan& plan = {});

struct EinsteinReport {
    double tracefree_limit = 0.0;   // max |boundary value of R_ab - S g_ab/(n+1)|
    double tracefree_error = 0.0;
    bool tracefree_finite = true;
    // components with at least one slot tangential to the boundary
    double tangential_limit = 0.0;
    double tangential_error = 0.0;
    bool tangential_finite = true;
    double normal_normal = 0.0;     // boundary value of rho (R - S g/(n+1))(mu0, mu0)
    double tail_limit = 0.0;        // max |limit of the curvature tail|
    double tail_error = 0.0;
    bool tail_finite = true;
    double tail_slope = 0.0;
};

// Levi-Civita curvature as the rho-modified one plus the projective change by
// -drho/(alpha rho); avoids inverting the blowing-up metric.
JetArray lc_riemann_via_rho(const Geometry& geom, const Point& x, int order);

// rho (R_ab - S g_ab / (n+1)) for the Levi-Civita connection at an interior point.
Tensor tracefree_ricci_scaled(const Geometry& geom, const Point& x);

// Trace-free Ricci and R + delta rho rho/(2 rho^2) + delta h/(2 C rho) near y.
EinsteinReport einstein_asymptotics(const Geometry& geom, const Point& y, double C, const LimitPlan& plan = {});

// ---------------------------------------------------------------------------
// Boundary tractor bundle and the connections along the boundary

struct BoundaryTractorData {
    Point y;
    std::vector<Point> basis;
    RhoScaleData data;    // at y
    double tau_hat = 0.0, psi = 0.0;
    Tensor gamma_ij, gamma_inv;
    Point t;
    double t_dot_drho = 0.0;
    Tensor E, Einv;       // columns (beta, xi^i, sigma) in rho-splitting components
    Tensor gram;          // L(tau) in the (beta; xi; sigma) basis
    Tensor gram_expected; // 1/2 b s + 1/2 b s + tau-hat gamma xi xi - 1/4 psi / tau-hat b b
    double gram_residual = 0.0;
    double isotropy = 0.0;           // |L(sigma, sigma)|
    double quotient_residual = 0.0;  // bottom slot vs 1/2 tau-hat hess restricted
    double det_scaled = 0.0;
    int positive = 0, negative = 0;
    int gamma_positive = 0, gamma_negative = 0;
    double gamma_min_singular = 0.0;
    double gamma_inverse_residual = 0.0;
};

// Throws DegenerateError("degenerate boundary geometry") when L(tau) is
// degenerate at y.
BoundaryTractorData boundary_tractor_bundle(const Geometry& geom, const Point& y, int order = 0);

struct CurvatureBlocks {
    Tensor F;   // {n, n, N, N} curvature in the (beta; xi; sigma) basis, tangential form indices
    Tensor V;   // {n, n, n}
    Tensor W;   // {n, n, n, n}
    double pattern = 0.0;        // zero blocks
    double antisymmetry = 0.0;   // in the form indices
    double gamma_skew = 0.0;
    double bottom_middle = 0.0;  // vs -2 tau-hat V gamma
    double scale = 0.0;
};

// Curvature of the metric tractor connection restricted to the boundary
// (direct evaluation at rho = 0).
CurvatureBlocks curvature_blocks(const Geometry& geom, const Point& y);
CurvatureBlocks curvature_blocks_from(const BoundaryTractorData& B, const Tensor& Fe);

struct NormalizationReport {
    Tensor phi;
    Tensor psi_tilde;            // {n, N, N}
    double formula_residual = 0.0;   // W_kj^k_l + (n-2) phi_jl + phi_kr gamma^kr gamma_jl
    double skew_residual = 0.0;      // Psi-tilde skew for the Gram form
    double metric_residual = 0.0;    // nabla^0 preserves L(tau) along the boundary
    double t1_residual = 0.0;        // curvature of nabla^0 kills the sigma line
    double ricci_residual = 0.0;     // Ricci-type contraction of its W block
    double fault_residual = 0.0;     // formula residual after a unit perturbation of W
    Tensor F0;                       // {n, n, N, N}
};

// Requires n = dim - 1 >= 3; throws Error("unsupported dimension") otherwise.
NormalizationReport normalize_boundary_connection(const Geometry& geom, const Point& y);

// phi from W and gamma; exposed for fault injection.
Tensor normalization_phi(const Tensor& W, const Tensor& gamma_ij, const Tensor& gamma_inv);
double ricci_contraction_residual(const Tensor& W, const Tensor& phi, const Tensor& gamma_ij, const Tensor& gamma_inv);

struct ParallelReport {
    double hypothesis = 0.0;     // max |tau nabla_a P_bc| at the boundary
    bool holds = false;
    double t1_residual = 0.0;    // standard connection along the boundary
    double ricci_residual = 0.0;
    double tracefree_ricci = 0.0;
    std::string reason;
};

ParallelReport asymptotically_parallel_check(const Geometry& geom, const Point& y, const LimitPlan& plan = {});

// Basis matrix of the (beta; xi; sigma) splitting at a point near the boundary.
JetArray boundary_basis(const RhoScaleData& D, const std::vector<Point>& basis);

}  // namespace tractorlab
