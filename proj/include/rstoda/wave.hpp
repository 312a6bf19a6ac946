#pragma once

// Pole-ansatz wave functions psi, psi^dag (t_1 flow) and phi, phi^dag
// (tbar_1 flow): coefficient systems, evaluation, the auxiliary linear
// problems along integrated flows, and the residue formula for velocities.

#include "rstoda/flow.hpp"
#include "rstoda/model.hpp"

namespace rstoda {

enum class WaveKind {
    C,      ///< psi:      (z - q^{1/2} L) c~ = Xdot W^{1/2} e
    CStar,  ///< psi^dag:  c~* Xdot^{-1} (z - q^{-1/2} L) = -e^T W^{1/2}
    B,      ///< phi:      b~^T Xbar^{-1} (z^{-1} + q^{-1/2} Lbar) = e^T W^{1/2}
    BStar,  ///< phi^dag:  (z^{-1} + q^{1/2} Lbar) b~* = -Xbar W^{1/2} e
};

const char* to_string(WaveKind kind);

struct WaveCoefficients {
    WaveKind kind = WaveKind::C;
    cplx z{};
    CVector gauged;  ///< c~, c~*, b~ or b~*
    CVector values;  ///< c_i = w_i^{1/2} c~_i (and likewise), w_i^{1/2} = e^{gamma x_i}
};

/// Throws Error(ResolventSingular) when z (or -1/z) meets the spectrum.
WaveCoefficients solve_wave_coefficients(const ModelParams& params, const PhaseState& state, cplx z, WaveKind kind);

/// Relative residual of the defining linear system after re-substitution.
double wave_system_residual(const ModelParams& params, const PhaseState& state, const WaveCoefficients& c);

/// Rational part of the ansatz: 1 + sum 2 gamma c_i / (w - w_i) for C and CStar,
/// 1 + sum 2 gamma b_i / (q w - w_i) for B, 1 + sum 2 gamma b*_i / (w/q - w_i)
/// for BStar. Throws Error(PoleEvaluation).
cplx wave_rational_part(const ModelParams& params, const PhaseState& state, const WaveCoefficients& c, cplx w);

/// Full wave function at spectral parameter z, flow time (t_1 for C/CStar,
/// tbar_1 for B/BStar) and continuous variable x (w = e^{2 gamma x}):
/// psi = z^{x/eta} e^{t z} (...), psi^dag = z^{-x/eta} e^{-t z} (...),
/// phi = z^{x/eta} e^{t/z} (...), phi^dag = z^{-x/eta} e^{-t/z} (...).
cplx wave_eval(const ModelParams& params, const PhaseState& state, cplx z, cplx time, cplx x, WaveKind kind);

/// v(w) = sum_i udot_i/(w - w_i) - udot_i/(q w - w_i), udot_i = 2 gamma w_i dx_i/dt,
/// with dx/dt the t_1 velocities (negative = false) or tbar_1 velocities.
cplx potential_pole_sum(const ModelParams& params, const PhaseState& state, cplx w, bool negative);

/// Largest residual of the auxiliary linear problem for the given kind
/// along a trajectory of the t_1 flow (C, CStar) or tbar_1 flow (B, BStar),
/// at the interior samples, with the time derivative of the rational part
/// taken by central differences between neighbouring samples. Residuals are
/// divided by the exponential prefactor of the ansatz.
///   C:     -d_t psi(x) + psi(x + eta) + v(x) psi(x)
///   CStar:  d_t psi^dag(x) + psi^dag(x - eta) + v(x - eta) psi^dag(x)
///   B:      d_t phi(x) - phi(x - eta) + vbar(x) phi(x)
///   BStar: -d_t phi^dag(x) - phi^dag(x + eta) + vbar(x - eta) phi^dag(x)
/// Throws Error(ConfigError) for fewer than three samples or unequal spacing.
double linear_problem_residual(const ModelParams& params, const Trajectory& trajectory, cplx z, cplx x,
                               WaveKind kind);

struct ResidueVelocities {
    CVector contour;  ///< quadrature of the residue of the coefficient product
    CVector trace;    ///< dH/dp_i from traces of L^{+-|m|}
    double max_difference() const;
};

/// d x_i / d t_m two ways. m > 0: -2 gamma res_inf(z^m c~*_i c~_i / wdot_i);
/// m < 0: -2 gamma res_0(z^{-|m|-2} b~*_i b~_i / wbar_i'). A radius <= 0 selects
/// the default: twice (resp. half the inverse of) the spectral radius of
/// q^{+-1/2} L (resp. q^{+-1/2} Lbar).
ResidueVelocities residue_velocity_identity(const ModelParams& params, const PhaseState& state, int m,
                                            double radius = 0.0, int nodes = 256);

}  // namespace rstoda
