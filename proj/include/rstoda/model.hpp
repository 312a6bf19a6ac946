#pragma once

// Trigonometric Ruijsenaars-Schneider model: Lax matrices, Hamiltonians,
// their gradients and the algebraic identities tying them to the pole
// dynamics of the 2D Toda hierarchy.
//
// Gauge: every place where w_i^{1/2} appears uses e^{gamma x_i}, so the
// exponential-variable form of L coincides entrywise with the sinh form.

#include <cstddef>

#include "rstoda/linalg.hpp"

namespace rstoda {

struct ModelParams {
    cplx gamma{0.5, 0.0};
    cplx eta{1.0, 0.0};
    std::size_t n = 3;
    /// Collision threshold for |sinh| denominators and q-separation of w.
    double collision_eps = 1e-8;
    /// Largest |m| for which q^m != 1 is enforced.
    int max_flow_index = 3;

    cplx q() const { return std::exp(2.0 * gamma * eta); }
    cplx sqrt_q() const { return std::exp(gamma * eta); }
    /// kappa_m = sinh(m gamma eta) / (m gamma eta).
    cplx kappa(int m) const;
    /// Throws Error(ConfigError) when gamma*eta is resonant.
    void validate() const;
};

struct PhaseState {
    CVector x;
    CVector p;
};

// --- state checks --------------------------------------------------------

/// Throws Error(CollisionSingularity) when the state violates the
/// separation invariants (pairwise sinh factors, q-separation of w).
void check_state(const ModelParams& params, const PhaseState& state);
/// Smallest |sinh(gamma(x_i-x_j))|, |sinh(gamma(x_i-x_j +- eta))| over i != j.
double min_separation(const ModelParams& params, std::span<const cplx> x);

CVector exp_positions(const ModelParams& params, std::span<const cplx> x);   ///< w_i = e^{2 gamma x_i}
CVector sqrt_positions(const ModelParams& params, std::span<const cplx> x);  ///< e^{gamma x_i}

// --- velocities ----------------------------------------------------------

/// xdot_i = eta e^{eta p_i} prod_{k != i} sinh(gamma(x_ik + eta)) / sinh(gamma x_ik).
CVector velocity_map(const ModelParams& params, const PhaseState& state);
/// Inverse of velocity_map at fixed positions (principal log per factor).
/// Throws Error(ZeroVelocity).
CVector momenta_from_velocities(const ModelParams& params, std::span<const cplx> x, std::span<const cplx> xdot);
/// Equations of motion of the t_1 flow.
CVector rs_accelerations(const ModelParams& params, const PhaseState& state);
/// Same right-hand side from positions and velocities directly.
CVector rs_accelerations(const ModelParams& params, std::span<const cplx> x, std::span<const cplx> xdot);

// --- Lax matrices --------------------------------------------------------

/// L_ij = gamma eta e^{eta p_i} prod_{l != i}[...] / sinh(gamma(x_ij - eta)).
ComplexMatrix lax_matrix(const ModelParams& params, const PhaseState& state);
/// L_ij = gamma xdot_i / sinh(gamma(x_ij - eta)).
ComplexMatrix lax_matrix_from_velocities(const ModelParams& params, std::span<const cplx> x,
                                         std::span<const cplx> xdot);
/// L_ij = 2 gamma q^{1/2} xdot_i w_i^{1/2} w_j^{1/2} / (w_i - q w_j).
ComplexMatrix lax_matrix_exponential_form(const ModelParams& params, std::span<const cplx> x,
                                          std::span<const cplx> xdot);

struct LaxPair {
    ComplexMatrix m;        ///< evolution of the psi coefficients
    ComplexMatrix m_tilde;  ///< evolution of the adjoint coefficients
    ComplexMatrix m_prime;  ///< sinh-form companion: dL/dt + [L, M'] = 0
};
LaxPair lax_pair_matrices(const ModelParams& params, const PhaseState& state);

/// Analytic t_1 derivative of L using xdot and the accelerations.
ComplexMatrix lax_time_derivative(const ModelParams& params, const PhaseState& state);
/// max |dL/dt + [L, M']|.
double lax_equation_residual(const ModelParams& params, const PhaseState& state);

/// max |q^{-1/2} W L - q^{1/2} L W - W^{-1/2} Wdot E W^{1/2}|, divided by
/// the largest entry of q^{-1/2} W L and q^{1/2} L W.
double commutation_residual(const ModelParams& params, const PhaseState& state);

// --- Hamiltonians --------------------------------------------------------

/// H_m for m > 0, Hbar_{|m|} for m < 0. Throws Error(SingularLax).
cplx hamiltonian(const ModelParams& params, const PhaseState& state, int m);
/// H_1 as the explicit sum over particles.
cplx hamiltonian_h1_direct(const ModelParams& params, const PhaseState& state);
/// Hbar_1 as the explicit sum over particles.
cplx hamiltonian_hbar1_direct(const ModelParams& params, const PhaseState& state);

struct Gradients {
    CVector dp;  ///< dH/dp_i
    CVector dx;  ///< dH/dx_i
};
/// Analytic gradients through tr(E_i L^m) and tr(A^(i) L^{m-1}).
Gradients hamiltonian_gradients(const ModelParams& params, const PhaseState& state, int m);

/// tr L^k for k = 1..n (no eigensolver).
CVector conserved_spectrum(const ModelParams& params, const PhaseState& state);
/// tr L^{-k} for k = 1..n.
CVector conserved_spectrum_inverse(const ModelParams& params, const PhaseState& state);

/// {H_m, H_n} from analytic gradients.
cplx poisson_bracket(const ModelParams& params, const PhaseState& state, int m, int n);

// --- higher-flow matrices ------------------------------------------------

ComplexMatrix a_matrix(const ModelParams& params, const PhaseState& state, std::size_t i);
ComplexMatrix c_matrix(const ModelParams& params, const PhaseState& state, std::size_t i);
/// Closed form of dL/dx_i at fixed momenta.
ComplexMatrix lax_x_derivative(const ModelParams& params, const PhaseState& state, std::size_t i);
/// max_i |A^(i) + dL/dx_i + [C^(i), L]|.
double a_matrix_identity_residual(const ModelParams& params, const PhaseState& state);

// --- negative flows ------------------------------------------------------

/// d x_i / d tbar_1 from the product relation between the two first flows.
CVector negative_velocities(const ModelParams& params, const PhaseState& state);
ComplexMatrix lax_bar_matrix(const ModelParams& params, const PhaseState& state);
/// Diagonal of U_+ (sign = +1) or U_- (sign = -1).
CVector u_diagonal(const ModelParams& params, std::span<const cplx> w, int sign);
/// max |L^{-1} + S Lbar^T S^{-1}|, S = W^{-1} U_-.
double similarity_residual(const ModelParams& params, const PhaseState& state);
/// Commutation relation of Lbar with dW/dtbar_1 (relative, as above).
double lax_bar_commutation_residual(const ModelParams& params, const PhaseState& state);

/// C_ij = 1 / (w_i - q w_j).
ComplexMatrix cauchy_matrix(const ModelParams& params, std::span<const cplx> w);
/// Closed-form inverse of cauchy_matrix. Throws Error(DegenerateNodes).
ComplexMatrix cauchy_inverse(const ModelParams& params, std::span<const cplx> w);

}  // namespace rstoda
