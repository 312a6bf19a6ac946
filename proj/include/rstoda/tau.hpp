#pragma once

// Determinant tau-function of the 2D Toda hierarchy built from an RS initial
// state, its zeros, the evolved (W, L) frame and the rank-1 formulas for
// Miwa-shifted tau-functions.

#include <functional>
#include <map>
#include <optional>

#include "rstoda/linalg.hpp"
#include "rstoda/model.hpp"

namespace rstoda {

/// Sparse positive times t_m and negative times tbar_m, indices >= 1.
struct HierarchyTimes {
    std::map<int, cplx> positive;
    std::map<int, cplx> negative;

    /// t_m = value for m > 0, tbar_|m| = value for m < 0, all others zero.
    static HierarchyTimes single(int m, cplx value);
    bool has_negative() const;
    int max_index() const;
    /// Adds value to t_m (m > 0) or tbar_|m| (m < 0).
    HierarchyTimes shifted(int m, cplx value) const;
};

/// Initial Lax data L0 = L(x0, p0), W0 = diag(e^{2 gamma x0}).
class TauContext {
public:
    /// Throws Error(ConfigError) when the commutation relation fails to
    /// hold to 1e-11 (relative) at the initial state.
    TauContext(const ModelParams& params, const PhaseState& state0);

    const ModelParams& params() const noexcept { return params_; }
    const PhaseState& state0() const noexcept { return state0_; }
    const ComplexMatrix& l0() const noexcept { return l0_; }
    const CVector& w0() const noexcept { return w0_; }
    const CVector& sqrt_w0() const noexcept { return sqrt_w0_; }
    const CVector& w0_dot() const noexcept { return w0_dot_; }
    /// L0^{-1}; throws Error(SingularLax) when L0 is singular.
    const ComplexMatrix& l0_inverse() const;

private:
    ModelParams params_;
    PhaseState state0_;
    ComplexMatrix l0_;
    std::optional<ComplexMatrix> l0_inv_;
    CVector w0_, sqrt_w0_, w0_dot_;
};

enum class ShiftKind {
    None,
    PlusLambda,         ///< t + [lambda^{-1}]
    MinusMu,            ///< t - [mu^{-1}]
    PlusLambdaMinusMu,  ///< t + [lambda^{-1}] - [mu^{-1}]
    MinusNu,            ///< tbar - [nu]
    PlusNu,             ///< tbar + [nu]
    PlusLambdaMinusNu,  ///< t + [lambda^{-1}], tbar - [nu]
};

struct MiwaShift {
    ShiftKind kind = ShiftKind::None;
    cplx a{};  ///< lambda, mu or nu (first parameter of the kind)
    cplx b{};  ///< mu or nu for the combined kinds

    static MiwaShift plus_lambda(cplx lambda) { return {ShiftKind::PlusLambda, lambda, {}}; }
    static MiwaShift minus_mu(cplx mu) { return {ShiftKind::MinusMu, mu, {}}; }
    static MiwaShift plus_lambda_minus_mu(cplx lambda, cplx mu) { return {ShiftKind::PlusLambdaMinusMu, lambda, mu}; }
    static MiwaShift minus_nu(cplx nu) { return {ShiftKind::MinusNu, nu, {}}; }
    static MiwaShift plus_nu(cplx nu) { return {ShiftKind::PlusNu, nu, {}}; }
    static MiwaShift plus_lambda_minus_nu(cplx lambda, cplx nu) { return {ShiftKind::PlusLambdaMinusNu, lambda, nu}; }
};

/// sum_k (q^{-k/2} - q^{k/2}) (t_k L0^k - tbar_k L0^{-k}).
ComplexMatrix tau_exponent(const TauContext& ctx, const HierarchyTimes& times);
/// Closed form of exp of the exponent increment produced by a Miwa shift,
/// e.g. (lambda - q^{1/2} L0)(lambda - q^{-1/2} L0)^{-1} for +[lambda^{-1}].
ComplexMatrix shift_factor(const TauContext& ctx, const MiwaShift& shift);
/// Explicit times with the shift series truncated after k = terms.
HierarchyTimes truncated_shift(const HierarchyTimes& times, const MiwaShift& shift, int terms);
/// exp(exponent) * shift_factor * W0; tau' is det(w - tau_matrix).
ComplexMatrix tau_matrix(const TauContext& ctx, const HierarchyTimes& times, const MiwaShift& shift = {});
/// W0^{-1} shift_factor^{-1} exp(-exponent), without inverting tau_matrix.
ComplexMatrix tau_matrix_inverse(const TauContext& ctx, const HierarchyTimes& times, const MiwaShift& shift = {});

/// tau'(w; t, tbar) = det(w I - exp(...) W0).
cplx tau_prime_eval(const TauContext& ctx, const HierarchyTimes& times, cplx w);
/// tau = exp(-sum_k k t_k tbar_k) tau'.
cplx tau_from_tau_prime(const HierarchyTimes& times, cplx value);

/// Raw coefficients (ascending, N + 1 values) of tau' in w obtained by
/// evaluation on N + 1 points of a circle and discrete Fourier inversion.
CVector tau_coefficients(const ComplexMatrix& a);

struct ZeroSet {
    CVector w;                             ///< roots of tau'
    CVector x;                             ///< branch-tracked (2 gamma)^{-1} log w
    std::vector<std::size_t> permutation;  ///< root finder output index per slot
};

/// Zeros of det(w - a). Large roots come from a, small ones from a_inv
/// (u = 1/w), each polished by Newton steps on its determinant. When
/// previous is given, roots are matched to it greedily by |log(w/w_prev)|
/// and x continues through log(w/w_prev); otherwise x uses the principal
/// branch. Throws Error(NoConvergence).
ZeroSet matrix_zeros(const ModelParams& params, const ComplexMatrix& a, const ComplexMatrix& a_inv,
                     const ZeroSet* previous = nullptr);
/// Same with a_inv computed by LU.
ZeroSet matrix_zeros(const ModelParams& params, const ComplexMatrix& a, const ZeroSet* previous = nullptr);
ZeroSet tau_zeros(const TauContext& ctx, const HierarchyTimes& times, const ZeroSet* previous = nullptr,
                  const MiwaShift& shift = {});
/// Largest ln|w_i/w_j| = Re 2 gamma (x_i - x_j) over a set of positions.
double log_magnitude_spread(const ModelParams& params, std::span<const cplx> x);
/// Spread beyond which the zeros of one double-precision determinant are no
/// longer all resolvable to 1e-6 in x.
inline constexpr double kResolvableLogSpread = 25.0;

/// Zero set of the initial data, labelled like state0.
ZeroSet initial_zeros(const TauContext& ctx);

/// Zeros at path(s_k), s_k = k / (samples - 1), tracked from s = 0. The
/// internal step is halved until the smallest root distance exceeds three
/// times the largest root motion of the step, both measured in log w.
std::vector<ZeroSet> track_zeros(const TauContext& ctx, const std::function<HierarchyTimes(double)>& path,
                                 std::size_t samples, const MiwaShift& shift = {});
/// Convenience: path t_m (or tbar_|m| for m < 0) from 0 to duration.
std::vector<ZeroSet> track_zeros_along(const TauContext& ctx, int m, cplx duration, std::size_t samples);

/// Evolved frame: W = diag(w), L = V L0 V^{-1} with the gauge
/// e^T W0^{1/2} = e^T W^{1/2} V, and Etilde = q^{-1/2} W L - q^{1/2} L W.
struct TauFrame {
    CVector w;
    CVector x;
    CVector sqrt_w;  ///< e^{gamma x}
    ComplexMatrix l;
    ComplexMatrix e_tilde;
    CVector xdot;  ///< t_1 velocities read off diag(L)

    /// Momenta through momenta_from_velocities.
    PhaseState state(const ModelParams& params) const;
};
TauFrame tau_frame(const TauContext& ctx, const HierarchyTimes& times, const ZeroSet& zeros,
                   const MiwaShift& shift = {});
/// Relative deviation of Etilde from W^{-1/2} Wdot E W^{1/2} with
/// wdot_k = (q^{-1/2} - q^{1/2}) w_k L_kk.
double gauge_transport_residual(const ModelParams& params, const TauFrame& frame);

/// tau'(w) at the shifted times from the rank-1 trace formulas in the frame.
/// Throws Error(ResolventSingular).
cplx shifted_tau_prime(const ModelParams& params, const TauFrame& frame, cplx w, const MiwaShift& shift);
/// tau'(shifted)/tau'(unshifted). Throws Error(ResolventSingular) or
/// Error(PoleEvaluation) when w is a zero of tau'.
cplx shifted_tau_ratio(const TauContext& ctx, const HierarchyTimes& times, cplx w, const MiwaShift& shift);

struct IdentityResidual {
    cplx value;
    double scale;  ///< largest magnitude among the terms of the identity
    double relative() const { return scale > 0.0 ? std::abs(value) / scale : std::abs(value); }
};

/// Three-term identity for +[lambda^{-1}], -[mu^{-1}] at w and q w.
IdentityResidual bilinear_residual_positive(const TauContext& ctx, const HierarchyTimes& times, cplx w,
                                            cplx lambda, cplx mu);
/// Mixed identity for +[lambda^{-1}] and tbar - [nu] at w/q, w and q w.
IdentityResidual bilinear_residual_mixed(const TauContext& ctx, const HierarchyTimes& times, cplx w, cplx lambda,
                                         cplx nu);

/// d_{t1} d_{tbar1} log tau' - 1 + tau'(qw) tau'(w/q) / tau'(w)^2 by central
/// differences with step h.
IdentityResidual toda_equation_residual(const TauContext& ctx, const HierarchyTimes& times, cplx w,
                                        double h = 1e-4);
/// d_{t2} log(tau(qw)/tau(w)) - d_{t1}^2 log(tau(qw) tau(w)) - (d_{t1} log(tau(qw)/tau(w)))^2
/// with first derivatives at step h1 and the second derivative at step h2.
IdentityResidual mkp_equation_residual(const TauContext& ctx, const HierarchyTimes& times, cplx w,
                                       double h1 = 1e-6, double h2 = 1e-4);

/// v = d_{t1} log(tau(qw)/tau(w)) by central differences.
cplx field_v(const TauContext& ctx, const HierarchyTimes& times, cplx w, double h = 1e-6);
/// v = sum_i wdot_i/(w - w_i) - wdot_i/(q w - w_i) from the frame.
cplx field_v_pole_sum(const ModelParams& params, const TauFrame& frame, cplx w);
/// c = tau(qw) tau(w/q) / tau(w)^2.
cplx field_c(const TauContext& ctx, const HierarchyTimes& times, cplx w);

/// Point w on a grid of radii between the smallest and largest |zero| and
/// 32 angles for which w/q, w and q w are farthest, in log distance, from
/// every zero. Used to place finite-difference evaluations away from poles
/// of log tau'.
cplx separated_point(const ModelParams& params, const CVector& zeros);

}  // namespace rstoda
