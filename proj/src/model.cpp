#include "rstoda/model.hpp"

#include <cmath>
#include <numbers>

#include "rstoda/errors.hpp"

namespace rstoda {

namespace {

cplx coth(cplx z) { return std::cosh(z) / std::sinh(z); }

/// prod_{k != i} sinh(gamma(x_ik + s eta)) / sinh(gamma x_ik)
cplx interaction_product(const ModelParams& pr, std::span<const cplx> x, std::size_t i, double s) {
    cplx prod = 1.0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        if (k == i) continue;
        const cplx d = x[i] - x[k];
        prod *= std::sinh(pr.gamma * (d + s * pr.eta)) / std::sinh(pr.gamma * d);
    }
    return prod;
}

/// (a + b) / (a - b), the ubiquitous coth-type ratio in exponential variables.
cplx ratio(cplx a, cplx b) { return (a + b) / (a - b); }

double delta(std::size_t a, std::size_t b) { return a == b ? 1.0 : 0.0; }

LuFactor factor_lax(const ComplexMatrix& l) {
    try {
        return LuFactor(l);
    } catch (const Error&) {
        throw Error(ErrorKind::SingularLax, "Lax matrix is numerically singular");
    }
}

}  // namespace

cplx ModelParams::kappa(int m) const {
    const cplx a = static_cast<double>(m) * gamma * eta;
    return std::sinh(a) / a;
}

void ModelParams::validate() const {
    if (n == 0) throw Error(ErrorKind::ConfigError, "particle number must be positive");
    const cplx ge = gamma * eta;
    if (std::abs(std::sinh(ge)) < 1e-12)
        throw Error(ErrorKind::ConfigError, "gamma*eta lies on i*pi*Z (sinh(gamma eta) = 0)");
    for (int m = 1; m <= max_flow_index; ++m) {
        if (std::abs(std::pow(q(), m) - 1.0) < 1e-12)
            throw Error(ErrorKind::ConfigError, "q^m = 1 for m = " + std::to_string(m));
    }
}

double min_separation(const ModelParams& params, std::span<const cplx> x) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t k = 0; k < x.size(); ++k) {
            if (i == k) continue;
            const cplx d = x[i] - x[k];
            best = std::min(best, std::abs(std::sinh(params.gamma * d)));
            best = std::min(best, std::abs(std::sinh(params.gamma * (d + params.eta))));
        }
    return best;
}

void check_state(const ModelParams& params, const PhaseState& state) {
    if (state.x.size() != params.n || state.p.size() != params.n)
        throw Error(ErrorKind::ConfigError, "state size does not match particle number");
    for (std::size_t i = 0; i < params.n; ++i) {
        if (!std::isfinite(std::abs(state.x[i])) || !std::isfinite(std::abs(state.p[i])))
            throw Error(ErrorKind::CollisionSingularity, "non-finite coordinate");
    }
    if (min_separation(params, state.x) < params.collision_eps)
        throw Error(ErrorKind::CollisionSingularity, "particles collide (sinh factor below threshold)");
    const CVector w = exp_positions(params, state.x);
    const cplx q = params.q();
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t j = 0; j < w.size(); ++j) {
            if (i == j) continue;
            const double scale = params.collision_eps * std::abs(w[i]);
            if (std::abs(w[i] - w[j]) < scale || std::abs(w[i] - q * w[j]) < scale ||
                std::abs(w[i] - w[j] / q) < scale)
                throw Error(ErrorKind::CollisionSingularity, "exponential positions are not q-separated");
        }
}

CVector exp_positions(const ModelParams& params, std::span<const cplx> x) {
    CVector w(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) w[i] = std::exp(2.0 * params.gamma * x[i]);
    return w;
}

CVector sqrt_positions(const ModelParams& params, std::span<const cplx> x) {
    CVector s(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) s[i] = std::exp(params.gamma * x[i]);
    return s;
}

// ---------------------------------------------------------------------------

CVector velocity_map(const ModelParams& params, const PhaseState& state) {
    check_state(params, state);
    CVector v(params.n);
    for (std::size_t i = 0; i < params.n; ++i)
        v[i] = params.eta * std::exp(params.eta * state.p[i]) * interaction_product(params, state.x, i, 1.0);
    return v;
}

CVector momenta_from_velocities(const ModelParams& params, std::span<const cplx> x, std::span<const cplx> xdot) {
    CVector p(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (xdot[i] == 0.0) throw Error(ErrorKind::ZeroVelocity, "velocity " + std::to_string(i) + " vanishes");
        cplx s = std::log(xdot[i]) - std::log(params.eta);
        for (std::size_t k = 0; k < x.size(); ++k) {
            if (k == i) continue;
            const cplx d = x[i] - x[k];
            s -= std::log(std::sinh(params.gamma * (d + params.eta)) / std::sinh(params.gamma * d));
        }
        p[i] = s / params.eta;
    }
    return p;
}

CVector rs_accelerations(const ModelParams& params, std::span<const cplx> x, std::span<const cplx> xdot) {
    const cplx g = params.gamma;
    const cplx e = params.eta;
    CVector a(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t k = 0; k < x.size(); ++k) {
            if (k == i) continue;
            const cplx d = x[i] - x[k];
            a[i] -= g * xdot[i] * xdot[k] * (coth(g * (d + e)) + coth(g * (d - e)) - 2.0 * coth(g * d));
        }
    return a;
}

CVector rs_accelerations(const ModelParams& params, const PhaseState& state) {
    return rs_accelerations(params, state.x, velocity_map(params, state));
}

// ---------------------------------------------------------------------------

ComplexMatrix lax_matrix(const ModelParams& params, const PhaseState& state) {
    check_state(params, state);
    const std::size_t n = params.n;
    const cplx g = params.gamma;
    const cplx e = params.eta;
    ComplexMatrix l(n);
    for (std::size_t i = 0; i < n; ++i) {
        const cplx pref = g * e * std::exp(e * state.p[i]) * interaction_product(params, state.x, i, 1.0);
        for (std::size_t j = 0; j < n; ++j) l(i, j) = pref / std::sinh(g * (state.x[i] - state.x[j] - e));
    }
    return l;
}

ComplexMatrix lax_matrix_from_velocities(const ModelParams& params, std::span<const cplx> x,
                                         std::span<const cplx> xdot) {
    const std::size_t n = x.size();
    ComplexMatrix l(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            l(i, j) = params.gamma * xdot[i] / std::sinh(params.gamma * (x[i] - x[j] - params.eta));
    return l;
}

ComplexMatrix lax_matrix_exponential_form(const ModelParams& params, std::span<const cplx> x,
                                          std::span<const cplx> xdot) {
    const std::size_t n = x.size();
    const CVector w = exp_positions(params, x);
    const CVector s = sqrt_positions(params, x);
    const cplx q = params.q();
    ComplexMatrix l(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            l(i, j) = 2.0 * params.gamma * params.sqrt_q() * xdot[i] * s[i] * s[j] / (w[i] - q * w[j]);
    return l;
}

LaxPair lax_pair_matrices(const ModelParams& params, const PhaseState& state) {
    const std::size_t n = params.n;
    const CVector v = velocity_map(params, state);
    const CVector w = exp_positions(params, state.x);
    const CVector s = sqrt_positions(params, state.x);
    const cplx g = params.gamma;
    const cplx e = params.eta;
    const cplx q = params.q();
    const auto& x = state.x;

    LaxPair out{ComplexMatrix(n), ComplexMatrix(n), ComplexMatrix(n)};
    for (std::size_t i = 0; i < n; ++i) {
        cplx dm = 0.0;
        cplx dmt = 0.0;
        cplx dmp = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            if (k != i) {
                dm += ratio(w[i], w[k]) * v[k];
                dmt += ratio(w[i], w[k]) * v[k];
                dmp += v[k] * coth(g * (x[i] - x[k]));
            }
            dm -= ratio(q * w[i], w[k]) * v[k];
            dmt -= ratio(w[i], q * w[k]) * v[k];
            dmp -= v[k] * coth(g * (x[i] - x[k] + e));
        }
        for (std::size_t j = 0; j < n; ++j) {
            const cplx gauge = v[i] * s[i] * s[j];
            cplx m = -2.0 * g * q * gauge / (w[i] - q * w[j]);
            cplx mt = -2.0 * g * gauge / (w[j] - q * w[i]);
            if (i == j) {
                m += g * dm;
                mt -= g * dmt;
                out.m_prime(i, i) = g * dmp;
            } else {
                m += 2.0 * g * gauge / (w[i] - w[j]);
                mt += 2.0 * g * gauge / (w[j] - w[i]);
                out.m_prime(i, j) = g * v[i] / std::sinh(g * (x[i] - x[j]));
            }
            out.m(i, j) = m;
            out.m_tilde(j, i) = mt;
        }
    }
    return out;
}

ComplexMatrix lax_time_derivative(const ModelParams& params, const PhaseState& state) {
    const std::size_t n = params.n;
    const CVector v = velocity_map(params, state);
    const CVector a = rs_accelerations(params, state.x, v);
    const cplx g = params.gamma;
    ComplexMatrix dl(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const cplx arg = g * (state.x[i] - state.x[j] - params.eta);
            const cplx sh = std::sinh(arg);
            dl(i, j) = g * a[i] / sh - g * g * v[i] * (v[i] - v[j]) * std::cosh(arg) / (sh * sh);
        }
    return dl;
}

double lax_equation_residual(const ModelParams& params, const PhaseState& state) {
    const ComplexMatrix l = lax_matrix(params, state);
    const LaxPair pair = lax_pair_matrices(params, state);
    return (lax_time_derivative(params, state) + commutator(l, pair.m_prime)).max_abs();
}

double commutation_residual(const ModelParams& params, const PhaseState& state) {
    const std::size_t n = params.n;
    const ComplexMatrix l = lax_matrix(params, state);
    const CVector v = velocity_map(params, state);
    const CVector w = exp_positions(params, state.x);
    const CVector s = sqrt_positions(params, state.x);
    const cplx sq = params.sqrt_q();
    double resid = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const cplx lhs_a = w[i] * l(i, j) / sq;
            const cplx lhs_b = sq * l(i, j) * w[j];
            const cplx wdot_i = 2.0 * params.gamma * w[i] * v[i];
            const cplx rhs = wdot_i * s[j] / s[i];
            resid = std::max(resid, std::abs(lhs_a - lhs_b - rhs));
            scale = std::max({scale, std::abs(lhs_a), std::abs(lhs_b)});
        }
    return scale > 0.0 ? resid / scale : resid;
}

// ---------------------------------------------------------------------------

cplx hamiltonian(const ModelParams& params, const PhaseState& state, int m) {
    if (m == 0) throw Error(ErrorKind::ConfigError, "hamiltonian index must be nonzero");
    const ComplexMatrix l = lax_matrix(params, state);
    const unsigned k = static_cast<unsigned>(std::abs(m));
    if (m > 0) return -params.kappa(static_cast<int>(k)) * matrix_power(l, k).trace();
    const ComplexMatrix li = factor_lax(l).inverse();
    return -params.kappa(static_cast<int>(k)) * matrix_power(li, k).trace();
}

cplx hamiltonian_h1_direct(const ModelParams& params, const PhaseState& state) {
    check_state(params, state);
    cplx h = 0.0;
    for (std::size_t i = 0; i < params.n; ++i)
        h += std::exp(params.eta * state.p[i]) * interaction_product(params, state.x, i, 1.0);
    return h;
}

cplx hamiltonian_hbar1_direct(const ModelParams& params, const PhaseState& state) {
    check_state(params, state);
    const cplx ge = params.gamma * params.eta;
    const cplx pref = std::sinh(ge) * std::sinh(ge) / (ge * ge);
    cplx h = 0.0;
    for (std::size_t i = 0; i < params.n; ++i)
        h += std::exp(-params.eta * state.p[i]) * interaction_product(params, state.x, i, -1.0);
    return pref * h;
}

Gradients hamiltonian_gradients(const ModelParams& params, const PhaseState& state, int m) {
    if (m == 0) throw Error(ErrorKind::ConfigError, "hamiltonian index must be nonzero");
    const std::size_t n = params.n;
    const ComplexMatrix l = lax_matrix(params, state);
    const unsigned k = static_cast<unsigned>(std::abs(m));
    const cplx kap = params.kappa(static_cast<int>(k));
    const double kd = static_cast<double>(k);

    ComplexMatrix power;      // L^m or L^{-|m|}
    ComplexMatrix companion;  // L^{m-1} or L^{-|m|-1}
    double sign = 1.0;
    if (m > 0) {
        companion = matrix_power(l, k - 1);
        power = companion * l;
    } else {
        const ComplexMatrix li = factor_lax(l).inverse();
        power = matrix_power(li, k);
        companion = power * li;
        sign = -1.0;
    }

    Gradients g{CVector(n), CVector(n)};
    for (std::size_t i = 0; i < n; ++i) {
        g.dp[i] = -sign * kap * kd * params.eta * power(i, i);
        const ComplexMatrix a = a_matrix(params, state, i);
        cplx tr = 0.0;
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c < n; ++c) tr += a(r, c) * companion(c, r);
        g.dx[i] = sign * kap * kd * tr;
    }
    return g;
}

CVector conserved_spectrum(const ModelParams& params, const PhaseState& state) {
    const ComplexMatrix l = lax_matrix(params, state);
    CVector tr(params.n);
    ComplexMatrix p = l;
    for (std::size_t k = 0; k < params.n; ++k) {
        if (k > 0) p = p * l;
        tr[k] = p.trace();
    }
    return tr;
}

CVector conserved_spectrum_inverse(const ModelParams& params, const PhaseState& state) {
    const ComplexMatrix li = factor_lax(lax_matrix(params, state)).inverse();
    CVector tr(params.n);
    ComplexMatrix p = li;
    for (std::size_t k = 0; k < params.n; ++k) {
        if (k > 0) p = p * li;
        tr[k] = p.trace();
    }
    return tr;
}

cplx poisson_bracket(const ModelParams& params, const PhaseState& state, int m, int n) {
    const Gradients a = hamiltonian_gradients(params, state, m);
    const Gradients b = m == n ? a : hamiltonian_gradients(params, state, n);
    cplx s = 0.0;
    for (std::size_t i = 0; i < params.n; ++i) s += a.dp[i] * b.dx[i] - a.dx[i] * b.dp[i];
    return s;
}

// ---------------------------------------------------------------------------

ComplexMatrix a_matrix(const ModelParams& params, const PhaseState& state, std::size_t i) {
    const std::size_t n = params.n;
    const ComplexMatrix l = lax_matrix(params, state);
    const CVector w = exp_positions(params, state.x);
    const cplx q = params.q();
    cplx diag_sum = 0.0;
    for (std::size_t r = 0; r < n; ++r)
        if (r != i) diag_sum += ratio(q * w[i], w[r]) - ratio(w[i], w[r]);

    ComplexMatrix a(n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
            cplx f = 0.0;
            if (k != i) f += ratio(w[i], w[k]);
            if (j != i) f -= ratio(w[i], q * w[k]);
            f += ratio(q * w[i], w[j]) * (delta(i, k) - delta(i, j));
            if (j == i) f -= diag_sum;
            a(j, k) = params.gamma * l(j, k) * f;
        }
    return a;
}

ComplexMatrix c_matrix(const ModelParams& params, const PhaseState& state, std::size_t i) {
    const CVector w = exp_positions(params, state.x);
    const cplx q = params.q();
    CVector d(params.n);
    for (std::size_t l = 0; l < params.n; ++l) {
        d[l] = params.gamma * ratio(q * w[l], w[i]);
        if (l != i) d[l] -= params.gamma * ratio(w[l], w[i]);
    }
    return ComplexMatrix::diagonal(d);
}

ComplexMatrix lax_x_derivative(const ModelParams& params, const PhaseState& state, std::size_t i) {
    const std::size_t n = params.n;
    const ComplexMatrix l = lax_matrix(params, state);
    const CVector w = exp_positions(params, state.x);
    const cplx q = params.q();
    cplx diag_sum = 0.0;
    for (std::size_t r = 0; r < n; ++r)
        if (r != i) diag_sum += ratio(q * w[i], w[r]) - ratio(w[i], w[r]);

    ComplexMatrix d(n);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t k = 0; k < n; ++k) {
            cplx f = ratio(w[j], q * w[k]) * (delta(i, k) - delta(i, j));
            if (j != i)
                f += ratio(w[i], q * w[j]) - ratio(w[i], w[j]);
            else
                f += diag_sum;
            d(j, k) = params.gamma * l(j, k) * f;
        }
    return d;
}

double a_matrix_identity_residual(const ModelParams& params, const PhaseState& state) {
    const ComplexMatrix l = lax_matrix(params, state);
    double worst = 0.0;
    for (std::size_t i = 0; i < params.n; ++i) {
        const ComplexMatrix c = c_matrix(params, state, i);
        const ComplexMatrix r = a_matrix(params, state, i) + lax_x_derivative(params, state, i) + commutator(c, l);
        worst = std::max(worst, r.max_abs());
    }
    return worst;
}

// ---------------------------------------------------------------------------

CVector negative_velocities(const ModelParams& params, const PhaseState& state) {
    const std::size_t n = params.n;
    const CVector v = velocity_map(params, state);
    const CVector w = exp_positions(params, state.x);
    const cplx q = params.q();
    const cplx g2 = 2.0 * params.gamma;
    CVector xb(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (v[i] == 0.0) throw Error(ErrorKind::ZeroVelocity, "velocity " + std::to_string(i) + " vanishes");
        cplx num = 1.0;
        cplx den = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
            num *= (q * w[i] - w[k]) * (w[i] / q - w[k]);
            if (k != i) den *= (w[i] - w[k]) * (w[i] - w[k]);
        }
        const cplx wdot = g2 * w[i] * v[i];
        const cplx wbar_dot = num / den / wdot;
        xb[i] = wbar_dot / (g2 * w[i]);
    }
    return xb;
}

ComplexMatrix lax_bar_matrix(const ModelParams& params, const PhaseState& state) {
    const CVector xb = negative_velocities(params, state);
    return lax_matrix_exponential_form(params, state.x, xb);
}

CVector u_diagonal(const ModelParams& params, std::span<const cplx> w, int sign) {
    const cplx qs = sign > 0 ? params.q() : 1.0 / params.q();
    CVector u(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        cplx num = 1.0;
        cplx den = 1.0;
        for (std::size_t k = 0; k < w.size(); ++k) {
            num *= w[i] - qs * w[k];
            if (k != i) den *= w[i] - w[k];
        }
        u[i] = num / den;
    }
    return u;
}

double similarity_residual(const ModelParams& params, const PhaseState& state) {
    const ComplexMatrix l = lax_matrix(params, state);
    const ComplexMatrix li = factor_lax(l).inverse();
    const ComplexMatrix lb = lax_bar_matrix(params, state);
    const CVector w = exp_positions(params, state.x);
    const CVector um = u_diagonal(params, w, -1);
    CVector s(params.n);
    CVector s_inv(params.n);
    for (std::size_t i = 0; i < params.n; ++i) {
        s[i] = um[i] / w[i];
        s_inv[i] = 1.0 / s[i];
    }
    return (li + scale_rows_cols(s, lb.transpose(), s_inv)).max_abs();
}

double lax_bar_commutation_residual(const ModelParams& params, const PhaseState& state) {
    const std::size_t n = params.n;
    const ComplexMatrix lb = lax_bar_matrix(params, state);
    const CVector xb = negative_velocities(params, state);
    const CVector w = exp_positions(params, state.x);
    const CVector s = sqrt_positions(params, state.x);
    const cplx sq = params.sqrt_q();
    double resid = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const cplx a = w[i] * lb(i, j) / sq;
            const cplx b = sq * lb(i, j) * w[j];
            const cplx rhs = 2.0 * params.gamma * w[i] * xb[i] * s[j] / s[i];
            resid = std::max(resid, std::abs(a - b - rhs));
            scale = std::max({scale, std::abs(a), std::abs(b)});
        }
    return scale > 0.0 ? resid / scale : resid;
}

ComplexMatrix cauchy_matrix(const ModelParams& params, std::span<const cplx> w) {
    const cplx q = params.q();
    ComplexMatrix c(w.size());
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t j = 0; j < w.size(); ++j) c(i, j) = 1.0 / (w[i] - q * w[j]);
    return c;
}

ComplexMatrix cauchy_inverse(const ModelParams& params, std::span<const cplx> w) {
    const std::size_t n = w.size();
    const cplx q = params.q();
    double scale = 0.0;
    for (const auto& v : w) scale = std::max(scale, std::abs(v));
    const double tol = params.collision_eps * scale;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && std::abs(w[i] - w[j]) < tol)
                throw Error(ErrorKind::DegenerateNodes, "Cauchy nodes coincide");
            if (std::abs(w[i] - q * w[j]) < tol) throw Error(ErrorKind::DegenerateNodes, "Cauchy nodes are q-resonant");
        }

    // Row factors prod_k (q w_i - w_k) / prod_{l != i}(w_i - w_l) and column
    // factors prod_k (w_j - q w_k) / prod_{l != j}(w_j - w_l).
    CVector row(n);
    CVector col(n);
    for (std::size_t i = 0; i < n; ++i) {
        cplx a = 1.0;
        cplx b = 1.0;
        cplx den = 1.0;
        for (std::size_t k = 0; k < n; ++k) {
            a *= q * w[i] - w[k];
            b *= w[i] - q * w[k];
            if (k != i) den *= w[i] - w[k];
        }
        row[i] = a / den;
        col[i] = b / den;
    }
    const cplx qn = std::pow(q, static_cast<int>(n) - 1);
    ComplexMatrix ci(n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) ci(i, j) = row[i] * col[j] / (qn * (q * w[i] - w[j]));
    return ci;
}

}  // namespace rstoda
