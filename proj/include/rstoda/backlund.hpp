#pragma once

// Backlund pairs (x, y) of pole systems related by the Miwa shift
// t -> t - [mu^{-1}], and the discrete-time equation generated by the
// shifts +-[mu^{-1}].

#include "rstoda/tau.hpp"

namespace rstoda {

struct BacklundPair {
    cplx mu{};
    CVector x, y;        ///< zeros of tau' at t and at t - [mu^{-1}]
    CVector xdot, ydot;  ///< t_1 velocities read off the evolved frames
};

/// y_i matched to x_i in the log plane, with the x branch carried over.
/// Throws Error(ResolventSingular) or Error(NoConvergence).
BacklundPair backlund_partner(const TauContext& ctx, const HierarchyTimes& times, cplx mu);

/// Both equations of the pair, 2N residuals: entries 0..N-1 are
/// gamma xdot_i + mu sinh(gamma eta) prod_{j!=i} s(x_ij - eta)/s(x_ij) prod_k s(x_i - y_k)/s(x_i - y_k - eta),
/// entries N..2N-1 the same with x <-> y and eta -> -eta, s = sinh(gamma .).
/// Throws Error(CollisionSingularity) when a denominator vanishes.
CVector backlund_residual(const ModelParams& params, const BacklundPair& pair);

/// ydot by central differences of the partner zeros along t_1.
CVector partner_velocity_fd(const TauContext& ctx, const HierarchyTimes& times, cplx mu, double h = 1e-5);

/// max_i |d^2 y_i/dt_1^2 (central differences, step h) - RS acceleration at (y, ydot)|.
double partner_acceleration_defect(const TauContext& ctx, const HierarchyTimes& times, cplx mu, double h = 2e-4);

/// max_i |x_i - x'_i| where x' are the zeros at +[mu^{-1}] of the tau-function
/// built from the y-system as initial data (times zero only).
double backlund_role_involution(const TauContext& ctx, cplx mu);

/// For each i: prod_k [s(x_i - y+_k)/s(x_i - y+_k + eta)] [s(x_i - x_k + eta)/s(x_i - x_k - eta)]
/// [s(x_i - y-_k - eta)/s(x_i - y-_k)] + 1, y+- the zeros at t -+ [mu^{-1}].
CVector discrete_time_residual(const TauContext& ctx, const HierarchyTimes& times, cplx mu);

struct DiscreteExpansion {
    CVector self_limit;        ///< mu log(-k=i factor) extrapolated to mu = infinity
    CVector total_limit;       ///< mu log(-product) extrapolated to mu = infinity
    CVector acceleration;      ///< xdot_i * self_limit
    CVector rs_acceleration;   ///< RS equations of motion at the same state
    double max_difference() const;  ///< max |acceleration - rs_acceleration|
};

/// Neville extrapolation in 1/mu over mu = base * 2^k, k < levels, along
/// direction arg(mu) = phase (times zero).
DiscreteExpansion discrete_time_expansion(const TauContext& ctx, double base, int levels = 6, double phase = 0.7);

}  // namespace rstoda
