#pragma once

// Adaptive integration of the hierarchy flows t_m (m > 0) and tbar_|m|
// (m < 0) along a straight segment in the complex time plane.

#include <vector>

#include "rstoda/errors.hpp"
#include "rstoda/model.hpp"

namespace rstoda {

struct FlowSpec {
    int m = 1;
    cplx duration{0.3, 0.0};
    double rtol = 1e-10;
    double atol = 1e-12;
    double max_step = 0.05;    ///< largest |delta tau| of a single step
    std::size_t samples = 11;  ///< equally spaced, both endpoints included
    std::size_t max_steps = 200000;

    /// Throws Error(ConfigError).
    void validate(const ModelParams& params) const;
};

struct TrajectorySample {
    cplx time;
    PhaseState state;
    CVector invariants;          ///< tr L^k, k = 1..N
    CVector inverse_invariants;  ///< tr L^{-k}, k = 1..N
};

struct Trajectory {
    std::vector<TrajectorySample> samples;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;

    /// Largest relative change of tr L^{+-k} between the first and last sample.
    /// Each denominator is max(|I_k(0)|, 1e-3 N rho^k) with rho a bound on
    /// the spectral radius of L (resp. L^{-1}), so accidental near-zero
    /// traces do not blow the ratio up.
    double max_relative_drift(bool inverse = false) const;
};

/// Thrown when every step size down to the underflow limit hits the
/// singular set. Carries the last state that passed check_state.
class CollisionError : public Error {
public:
    CollisionError(const std::string& what, cplx time, PhaseState last)
        : Error(ErrorKind::CollisionEncountered, what), time_(time), last_(std::move(last)) {}
    cplx time() const noexcept { return time_; }
    const PhaseState& last_good_state() const noexcept { return last_; }

private:
    cplx time_;
    PhaseState last_;
};

/// (dx/dtau, dp/dtau) = (dH/dp, -dH/dx) for H = H_m or Hbar_|m|.
Gradients flow_vector_field(const ModelParams& params, const PhaseState& state, int m);

/// Dormand-Prince 5(4) on the real parameter s in [0, 1], tau = s * duration.
/// Throws CollisionError or Error(StepUnderflow).
Trajectory integrate_flow(const ModelParams& params, const PhaseState& state0, const FlowSpec& spec);

/// Final state only.
PhaseState evolve(const ModelParams& params, const PhaseState& state0, const FlowSpec& spec);

/// max-norm distance over (x, p) between flow_b(flow_a(s0)) and flow_a(flow_b(s0)),
/// after pairing particles of the two end states by proximity and reducing
/// x modulo i pi / gamma and p modulo 2 pi i / eta (the paths may permute
/// labels and wind around the periods).
double flow_commutator_defect(const ModelParams& params, const PhaseState& state0, const FlowSpec& a,
                              const FlowSpec& b);

}  // namespace rstoda
