#pragma once

#include <string>
#include <vector>

#include "tractorlab/affine.hpp"
#include "tractorlab/tensor.hpp"

namespace tractorlab {

// Tractor fiber layout: index 0 is the sigma (E(-1) subbundle) direction,
// indices 1..dim are the nu^a quotient directions. A T* index uses the dual
// basis, so L(s1, s2) = L_IJ s1^I s2^J.
enum class Slot { T, Tstar };

inline int fiber_dim(int dim) { return dim + 1; }

// Components carry `forms` one-form indices first, then one fiber index per slot.
struct TractorTensor {
    std::vector<Slot> slots;
    int forms = 0;
    JetArray c;
    std::string splitting;

    int dim() const { return c.jet_dim(); }
};

TractorTensor make_tractor(std::vector<Slot> slots, int forms, JetArray c, std::string splitting);

// S(Y): (sigma, nu) -> (sigma - Y_a nu^a, nu). Maps components in the splitting
// of a connection D to the splitting of D + Y.
JetArray splitting_matrix(const JetArray& Y);
JetArray splitting_matrix_inverse(const JetArray& Y);

// S on every T index, S^{-T} on every T* index.
TractorTensor change_splitting(const TractorTensor& t, const JetArray& Y, const std::string& label = "");
// Fiber-only transform by an arbitrary invertible matrix M (T indices get M,
// T* indices get M^{-T}).
TractorTensor transform_fiber(const TractorTensor& t, const JetArray& M, const JetArray& Minv);

// Standard tractor connection matrix A(a, I, J) in the splitting of the
// connection with Christoffels G and Schouten P: nabla_a s^I = d_a s^I + A(a, I, J) s^J.
JetArray std_connection_matrix(const JetArray& G, const JetArray& P);
// A' = S A S^{-1} - (dS) S^{-1}; needs Y one order higher than A.
JetArray change_splitting_connection(const JetArray& A, const JetArray& Y);

// Tractor connection: standard connection of `base` plus an End(T)-valued
// one-form (in the splitting of `base`), shape {dim, N, N}.
struct TractorConnection {
    Connection base;
    PointFn contorsion;  // empty: standard connection
    std::string splitting;

    JetArray matrix(const Point& p, int order) const;
};

TractorConnection standard_tractor_connection(const Connection& base, const std::string& splitting);

// Leibniz derivative over all tractor slots; one-form indices are coupled to G
// when given (G may be empty for none). Output prepends a one-form index.
TractorTensor tractor_derivative(const TractorTensor& t, const JetArray& A, const JetArray& G = {});

// F(a, b, I, J) = d_a A_b - d_b A_a + [A_a, A_b].
JetArray tractor_curvature(const JetArray& A);

// (C, Y) block form of the standard connection's curvature for a torsion-free
// base: C in the nu-nu block, the Cotton tensor in the sigma-nu block, zero column 0.
JetArray standard_curvature_blocks(const JetArray& C, const JetArray& Y);

// L(tau) in the splitting of G: (tau; 1/2 D tau; 1/2 D_(a D_b) tau + P_(ab) tau).
// tau is a weight-2 density jet; two orders are consumed.
JetArray l_tau_matrix(const Jet& tau, const JetArray& G, const JetArray& P);

// BGG splitting of sigma^{ab} of weight -2 into S^2 T:
// (sigma; -1/(n+2) D_d sigma^{dc}; 1/((n+1)(n+2)) D_d D_e sigma^{de} + 1/(n+1) P_de sigma^{de}).
JetArray bgg_split_metricity(const JetArray& sigma, const JetArray& G, const JetArray& P);

// Fiberwise inverse of an S^2 T* or S^2 T matrix; throws DegenerateError
// when |det| after scaling is below 1e-10.
JetArray tractor_metric_inverse(const JetArray& L);

// Slots of the inverse of L(tau) in the splitting of rho nabla:
// (tauhat^-1 rho^-1 P^{ab}; 2 tauhat^-1 t^a; tauhat^-1 psi).
struct InverseSlots {
    JetArray rho_inv_P_inv;  // rho^-1 P^{ab}
    JetArray t;              // t^a
    Jet psi;
};
InverseSlots inverse_slots(const JetArray& Linv, const Jet& tau_hat);

// |nabla' g| plus the middle slot of the metricity splitting of tau^-1 g^{ab}
// in the splitting of nabla' = LC + Y.
double metricity_residual(const Geometry& geom, const OneForm& upsilon, const Point& p);

// Fiber Gram form evaluation L(s1, s2).
Jet fiber_pair(const JetArray& L, const JetArray& s1, const JetArray& s2);

}  // namespace tractorlab
