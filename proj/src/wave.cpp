#include "rstoda/wave.hpp"

#include <algorithm>
#include <cmath>

#include "rstoda/errors.hpp"

namespace rstoda {

namespace {

bool is_negative(WaveKind kind) { return kind == WaveKind::B || kind == WaveKind::BStar; }

LuFactor factor_resolvent(const ComplexMatrix& a) {
    try {
        return LuFactor(a);
    } catch (const Error&) {
        throw Error(ErrorKind::ResolventSingular, "spectral parameter meets the Lax spectrum");
    }
}

/// The matrix of the defining system for each kind.
ComplexMatrix system_matrix(const ModelParams& pr, const PhaseState& s, cplx z, WaveKind kind) {
    const std::size_t n = pr.n;
    const ComplexMatrix id = ComplexMatrix::identity(n);
    const cplx sq = pr.sqrt_q();
    switch (kind) {
        case WaveKind::C: return z * id - sq * lax_matrix(pr, s);
        case WaveKind::CStar: return z * id - (1.0 / sq) * lax_matrix(pr, s);
        case WaveKind::B: return (1.0 / z) * id + (1.0 / sq) * lax_bar_matrix(pr, s);
        case WaveKind::BStar: return (1.0 / z) * id + sq * lax_bar_matrix(pr, s);
    }
    return id;
}

CVector flow_velocities(const ModelParams& pr, const PhaseState& s, WaveKind kind) {
    return is_negative(kind) ? negative_velocities(pr, s) : velocity_map(pr, s);
}

/// Right-hand side of the system in the orientation used by the solver.
CVector system_rhs(const ModelParams& pr, const PhaseState& s, WaveKind kind, const CVector& vel) {
    const CVector h = sqrt_positions(pr, s.x);
    CVector r(pr.n);
    for (std::size_t i = 0; i < pr.n; ++i) {
        switch (kind) {
            case WaveKind::C: r[i] = vel[i] * h[i]; break;
            case WaveKind::CStar: r[i] = -h[i]; break;
            case WaveKind::B: r[i] = h[i]; break;
            case WaveKind::BStar: r[i] = -vel[i] * h[i]; break;
        }
    }
    return r;
}

bool row_system(WaveKind kind) { return kind == WaveKind::CStar || kind == WaveKind::B; }

/// Pole location scale: w for C and CStar, q w for B, w / q for BStar.
cplx argument_scale(const ModelParams& pr, WaveKind kind) {
    switch (kind) {
        case WaveKind::B: return pr.q();
        case WaveKind::BStar: return 1.0 / pr.q();
        default: return 1.0;
    }
}

cplx rational_part(const ModelParams& pr, const CVector& w, const CVector& values, WaveKind kind, cplx at) {
    const cplx arg = argument_scale(pr, kind) * at;
    cplx f = 1.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const cplx d = arg - w[i];
        if (std::abs(d) <= 1e-14 * std::max(std::abs(arg), 1e-300))
            throw Error(ErrorKind::PoleEvaluation, "evaluation point is a pole of the wave function");
        f += 2.0 * pr.gamma * values[i] / d;
    }
    return f;
}

cplx pole_sum(const ModelParams& pr, const CVector& w, const CVector& vel, cplx at) {
    const cplx q = pr.q();
    cplx v = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const cplx u = 2.0 * pr.gamma * w[i] * vel[i];
        v += u / (at - w[i]) - u / (q * at - w[i]);
    }
    return v;
}

}  // namespace

const char* to_string(WaveKind kind) {
    switch (kind) {
        case WaveKind::C: return "c";
        case WaveKind::CStar: return "c*";
        case WaveKind::B: return "b";
        case WaveKind::BStar: return "b*";
    }
    return "?";
}

WaveCoefficients solve_wave_coefficients(const ModelParams& params, const PhaseState& state, cplx z,
                                         WaveKind kind) {
    check_state(params, state);
    if (z == 0.0) throw Error(ErrorKind::ResolventSingular, "spectral parameter z = 0");
    const CVector vel = flow_velocities(params, state, kind);
    const LuFactor lu = factor_resolvent(system_matrix(params, state, z, kind));
    const CVector rhs = system_rhs(params, state, kind, vel);

    WaveCoefficients c;
    c.kind = kind;
    c.z = z;
    if (row_system(kind)) {
        c.gauged = lu.solve_transposed(rhs);
        for (std::size_t i = 0; i < params.n; ++i) c.gauged[i] *= vel[i];
    } else {
        c.gauged = lu.solve(rhs);
    }
    const CVector h = sqrt_positions(params, state.x);
    c.values.resize(params.n);
    for (std::size_t i = 0; i < params.n; ++i) c.values[i] = h[i] * c.gauged[i];
    return c;
}

double wave_system_residual(const ModelParams& params, const PhaseState& state, const WaveCoefficients& c) {
    const CVector vel = flow_velocities(params, state, c.kind);
    const ComplexMatrix a = system_matrix(params, state, c.z, c.kind);
    const CVector rhs = system_rhs(params, state, c.kind, vel);
    CVector lhs;
    if (row_system(c.kind)) {
        CVector y(params.n);
        for (std::size_t i = 0; i < params.n; ++i) y[i] = c.gauged[i] / vel[i];
        lhs = left_multiply(y, a);
    } else {
        lhs = a * std::span<const cplx>(c.gauged);
    }
    double resid = 0.0;
    for (std::size_t i = 0; i < params.n; ++i) resid = std::max(resid, std::abs(lhs[i] - rhs[i]));
    double scale = 0.0;
    for (const auto& r : rhs) scale = std::max(scale, std::abs(r));
    return scale > 0.0 ? resid / scale : resid;
}

cplx wave_rational_part(const ModelParams& params, const PhaseState& state, const WaveCoefficients& c, cplx w) {
    return rational_part(params, exp_positions(params, state.x), c.values, c.kind, w);
}

cplx wave_eval(const ModelParams& params, const PhaseState& state, cplx z, cplx time, cplx x, WaveKind kind) {
    const WaveCoefficients c = solve_wave_coefficients(params, state, z, kind);
    const cplx w = std::exp(2.0 * params.gamma * x);
    const cplx power = std::exp(x / params.eta * std::log(z));
    cplx prefactor;
    switch (kind) {
        case WaveKind::C: prefactor = power * std::exp(time * z); break;
        case WaveKind::CStar: prefactor = std::exp(-time * z) / power; break;
        case WaveKind::B: prefactor = power * std::exp(time / z); break;
        case WaveKind::BStar: prefactor = std::exp(-time / z) / power; break;
    }
    return prefactor * wave_rational_part(params, state, c, w);
}

cplx potential_pole_sum(const ModelParams& params, const PhaseState& state, cplx w, bool negative) {
    const CVector vel = negative ? negative_velocities(params, state) : velocity_map(params, state);
    return pole_sum(params, exp_positions(params, state.x), vel, w);
}

double linear_problem_residual(const ModelParams& params, const Trajectory& trajectory, cplx z, cplx x,
                               WaveKind kind) {
    const auto& s = trajectory.samples;
    if (s.size() < 3) throw Error(ErrorKind::ConfigError, "linear problem residual needs at least three samples");
    const cplx h = s[1].time - s[0].time;
    for (std::size_t k = 1; k < s.size(); ++k)
        if (std::abs((s[k].time - s[k - 1].time) - h) > 1e-12 * std::abs(h))
            throw Error(ErrorKind::ConfigError, "trajectory samples must be equally spaced");

    const cplx q = params.q();
    const cplx w = std::exp(2.0 * params.gamma * x);

    std::vector<CVector> ws(s.size()), values(s.size());
    for (std::size_t k = 0; k < s.size(); ++k) {
        ws[k] = exp_positions(params, s[k].state.x);
        values[k] = solve_wave_coefficients(params, s[k].state, z, kind).values;
    }
    const auto f = [&](std::size_t k, cplx at) { return rational_part(params, ws[k], values[k], kind, at); };

    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < s.size(); ++k) {
        const CVector vel = flow_velocities(params, s[k].state, kind);
        const cplx fdot = (f(k + 1, w) - f(k - 1, w)) / (2.0 * h);
        const cplx f0 = f(k, w);
        cplx r;
        switch (kind) {
            case WaveKind::C: r = -z * f0 - fdot + z * f(k, q * w) + pole_sum(params, ws[k], vel, w) * f0; break;
            case WaveKind::CStar:
                r = -z * f0 + fdot + z * f(k, w / q) + pole_sum(params, ws[k], vel, w / q) * f0;
                break;
            case WaveKind::B: r = f0 / z + fdot - f(k, w / q) / z + pole_sum(params, ws[k], vel, w) * f0; break;
            case WaveKind::BStar:
                r = f0 / z - fdot - f(k, q * w) / z + pole_sum(params, ws[k], vel, w / q) * f0;
                break;
        }
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

double ResidueVelocities::max_difference() const {
    double d = 0.0;
    for (std::size_t i = 0; i < contour.size(); ++i) d = std::max(d, std::abs(contour[i] - trace[i]));
    return d;
}

ResidueVelocities residue_velocity_identity(const ModelParams& params, const PhaseState& state, int m,
                                            double radius, int nodes) {
    if (m == 0) throw Error(ErrorKind::ConfigError, "flow index must be nonzero");
    check_state(params, state);
    const std::size_t n = params.n;
    const int k = std::abs(m);
    const double qmax = std::max(std::abs(params.sqrt_q()), 1.0 / std::abs(params.sqrt_q()));
    const CVector w = exp_positions(params, state.x);
    const cplx eta = params.eta;

    ResidueVelocities out;
    out.contour.resize(n);
    out.trace.resize(n);
    if (m > 0) {
        const ComplexMatrix l = lax_matrix(params, state);
        if (radius <= 0.0) radius = 2.0 * qmax * spectral_radius_bound(l);
        const CVector vel = velocity_map(params, state);
        const ComplexMatrix lm = matrix_power(l, static_cast<unsigned>(k));
        for (std::size_t i = 0; i < n; ++i) {
            const cplx wdot = 2.0 * params.gamma * w[i] * vel[i];
            const auto integrand = [&](cplx z) {
                const auto c = solve_wave_coefficients(params, state, z, WaveKind::C);
                const auto cs = solve_wave_coefficients(params, state, z, WaveKind::CStar);
                return -2.0 * params.gamma * cs.gauged[i] * c.gauged[i] / wdot;
            };
            out.contour[i] = contour_residue_at_infinity(integrand, m, radius, nodes);
            out.trace[i] = -params.kappa(k) * static_cast<double>(k) * eta * lm(i, i);
        }
    } else {
        const ComplexMatrix lbar = lax_bar_matrix(params, state);
        if (radius <= 0.0) radius = 0.5 / (qmax * spectral_radius_bound(lbar));
        const CVector vel = negative_velocities(params, state);
        const ComplexMatrix li = inverse(lax_matrix(params, state));
        const ComplexMatrix lm = matrix_power(li, static_cast<unsigned>(k));
        for (std::size_t i = 0; i < n; ++i) {
            const cplx wdot = 2.0 * params.gamma * w[i] * vel[i];
            const auto integrand = [&](cplx z) {
                const auto b = solve_wave_coefficients(params, state, z, WaveKind::B);
                const auto bs = solve_wave_coefficients(params, state, z, WaveKind::BStar);
                return -2.0 * params.gamma * bs.gauged[i] * b.gauged[i] / wdot;
            };
            out.contour[i] = contour_residue_at_zero(integrand, -k - 2, radius, nodes);
            out.trace[i] = params.kappa(k) * static_cast<double>(k) * eta * lm(i, i);
        }
    }
    return out;
}

}  // namespace rstoda
