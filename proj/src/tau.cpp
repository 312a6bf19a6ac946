#include "rstoda/tau.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "rstoda/errors.hpp"

namespace rstoda {

namespace {

ComplexMatrix resolvent_inverse(const ComplexMatrix& a, const char* what) {
    try {
        return LuFactor(a).inverse();
    } catch (const Error&) {
        throw Error(ErrorKind::ResolventSingular, what);
    }
}

/// (a I + b L)(c I + d L)^{-1}
ComplexMatrix mobius(const ComplexMatrix& l, cplx a, cplx b, cplx c, cplx d) {
    const std::size_t n = l.n();
    const ComplexMatrix id = ComplexMatrix::identity(n);
    return (a * id + b * l) * resolvent_inverse(c * id + d * l, "shift parameter hits the Lax spectrum");
}

cplx product_shifted(const CVector& w, cplx z, cplx scale) {
    cplx p = 1.0;
    for (const auto& wk : w) p *= z - scale * wk;
    return p;
}

void check_pole(const CVector& w, cplx z, cplx scale) {
    for (const auto& wk : w)
        if (std::abs(z - scale * wk) <= 1e-14 * std::max(std::abs(z), 1e-300))
            throw Error(ErrorKind::PoleEvaluation, "evaluation point is a zero of the tau-function");
}

ComplexMatrix diag_inverse_shift(const CVector& w, cplx z, cplx scale, cplx numerator) {
    CVector d(w.size());
    for (std::size_t k = 0; k < w.size(); ++k) d[k] = numerator / (z - scale * w[k]);
    return ComplexMatrix::diagonal(d);
}

/// |log(a/b)|: distance in the log plane, blind to the 2 pi i winding.
double log_distance(cplx a, cplx b) { return std::abs(std::log(a / b)); }

double min_pairwise(const CVector& w) {
    double d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < w.size(); ++i)
        for (std::size_t j = i + 1; j < w.size(); ++j) d = std::min(d, log_distance(w[i], w[j]));
    return d;
}

TauFrame frame_at(const TauContext& ctx, const HierarchyTimes& times) {
    return tau_frame(ctx, times, tau_zeros(ctx, times));
}

cplx log_ratio(cplx num, cplx den) { return std::log(num / den); }

}  // namespace

// --- times -----------------------------------------------------------------

HierarchyTimes HierarchyTimes::single(int m, cplx value) {
    HierarchyTimes t;
    if (m > 0) t.positive[m] = value;
    if (m < 0) t.negative[-m] = value;
    return t;
}

bool HierarchyTimes::has_negative() const {
    return std::any_of(negative.begin(), negative.end(), [](const auto& kv) { return kv.second != 0.0; });
}

int HierarchyTimes::max_index() const {
    int m = 0;
    for (const auto& kv : positive) m = std::max(m, kv.first);
    for (const auto& kv : negative) m = std::max(m, kv.first);
    return m;
}

HierarchyTimes HierarchyTimes::shifted(int m, cplx value) const {
    HierarchyTimes t = *this;
    if (m > 0) t.positive[m] += value;
    if (m < 0) t.negative[-m] += value;
    return t;
}

// --- context ---------------------------------------------------------------

TauContext::TauContext(const ModelParams& params, const PhaseState& state0)
    : params_(params), state0_(state0) {
    params_.validate();
    check_state(params_, state0_);
    l0_ = lax_matrix(params_, state0_);
    w0_ = exp_positions(params_, state0_.x);
    sqrt_w0_ = sqrt_positions(params_, state0_.x);
    const CVector v = velocity_map(params_, state0_);
    w0_dot_.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) w0_dot_[i] = 2.0 * params_.gamma * w0_[i] * v[i];
    const double r = commutation_residual(params_, state0_);
    if (!(r <= 1e-11)) throw Error(ErrorKind::ConfigError, "initial data violate the rank-1 commutation relation");
    try {
        l0_inv_ = LuFactor(l0_).inverse();
    } catch (const Error&) {
        l0_inv_.reset();
    }
}

const ComplexMatrix& TauContext::l0_inverse() const {
    if (!l0_inv_) throw Error(ErrorKind::SingularLax, "L0 is singular; negative times are unavailable");
    return *l0_inv_;
}

// --- determinant formula ---------------------------------------------------

ComplexMatrix tau_exponent(const TauContext& ctx, const HierarchyTimes& times) {
    const std::size_t n = ctx.params().n;
    const cplx sq = ctx.params().sqrt_q();
    ComplexMatrix x(n);
    ComplexMatrix power = ComplexMatrix::identity(n);
    int k = 0;
    for (const auto& [m, t] : times.positive) {
        if (m < 1) throw Error(ErrorKind::ConfigError, "time indices start at 1");
        while (k < m) {
            power = power * ctx.l0();
            ++k;
        }
        x += ((std::pow(sq, -m) - std::pow(sq, m)) * t) * power;
    }
    if (times.has_negative()) {
        const ComplexMatrix& li = ctx.l0_inverse();
        power = ComplexMatrix::identity(n);
        k = 0;
        for (const auto& [m, t] : times.negative) {
            if (m < 1) throw Error(ErrorKind::ConfigError, "time indices start at 1");
            while (k < m) {
                power = power * li;
                ++k;
            }
            x -= ((std::pow(sq, -m) - std::pow(sq, m)) * t) * power;
        }
    }
    return x;
}

ComplexMatrix shift_factor(const TauContext& ctx, const MiwaShift& shift) {
    const ComplexMatrix& l = ctx.l0();
    const cplx s = ctx.params().sqrt_q();
    const cplx a = shift.a;
    const cplx b = shift.b;
    switch (shift.kind) {
        case ShiftKind::None: return ComplexMatrix::identity(l.n());
        case ShiftKind::PlusLambda: return mobius(l, a, -s, a, -1.0 / s);
        case ShiftKind::MinusMu: return mobius(l, a, -1.0 / s, a, -s);
        case ShiftKind::PlusLambdaMinusMu: return mobius(l, a, -s, a, -1.0 / s) * mobius(l, b, -1.0 / s, b, -s);
        case ShiftKind::MinusNu: return mobius(l, -s * a, 1.0, -a / s, 1.0);
        case ShiftKind::PlusNu: return mobius(l, -a / s, 1.0, -s * a, 1.0);
        case ShiftKind::PlusLambdaMinusNu: return mobius(l, a, -s, a, -1.0 / s) * mobius(l, -s * b, 1.0, -b / s, 1.0);
    }
    return ComplexMatrix::identity(l.n());
}

HierarchyTimes truncated_shift(const HierarchyTimes& times, const MiwaShift& shift, int terms) {
    HierarchyTimes t = times;
    for (int k = 1; k <= terms; ++k) {
        const double kd = k;
        switch (shift.kind) {
            case ShiftKind::None: break;
            case ShiftKind::PlusLambda: t.positive[k] += std::pow(shift.a, -k) / kd; break;
            case ShiftKind::MinusMu: t.positive[k] -= std::pow(shift.a, -k) / kd; break;
            case ShiftKind::PlusLambdaMinusMu:
                t.positive[k] += (std::pow(shift.a, -k) - std::pow(shift.b, -k)) / kd;
                break;
            case ShiftKind::MinusNu: t.negative[k] -= std::pow(shift.a, k) / kd; break;
            case ShiftKind::PlusNu: t.negative[k] += std::pow(shift.a, k) / kd; break;
            case ShiftKind::PlusLambdaMinusNu:
                t.positive[k] += std::pow(shift.a, -k) / kd;
                t.negative[k] -= std::pow(shift.b, k) / kd;
                break;
        }
    }
    return t;
}

ComplexMatrix tau_matrix(const TauContext& ctx, const HierarchyTimes& times, const MiwaShift& shift) {
    ComplexMatrix g = mat_exp(tau_exponent(ctx, times));
    if (shift.kind != ShiftKind::None) g = g * shift_factor(ctx, shift);
    const CVector ones(ctx.params().n, 1.0);
    return scale_rows_cols(ones, g, ctx.w0());
}

ComplexMatrix tau_matrix_inverse(const TauContext& ctx, const HierarchyTimes& times, const MiwaShift& shift) {
    ComplexMatrix g = mat_exp(-1.0 * tau_exponent(ctx, times));
    if (shift.kind != ShiftKind::None) g = inverse(shift_factor(ctx, shift)) * g;
    CVector w0_inv(ctx.params().n);
    for (std::size_t i = 0; i < w0_inv.size(); ++i) w0_inv[i] = 1.0 / ctx.w0()[i];
    const CVector ones(ctx.params().n, 1.0);
    return scale_rows_cols(w0_inv, g, ones);
}

cplx tau_prime_eval(const TauContext& ctx, const HierarchyTimes& times, cplx w) {
    const ComplexMatrix a = tau_matrix(ctx, times);
    return determinant(w * ComplexMatrix::identity(a.n()) - a);
}

cplx tau_from_tau_prime(const HierarchyTimes& times, cplx value) {
    cplx s = 0.0;
    for (const auto& [k, t] : times.positive) {
        const auto it = times.negative.find(k);
        if (it != times.negative.end()) s += static_cast<double>(k) * t * it->second;
    }
    return std::exp(-s) * value;
}

// --- zeros -----------------------------------------------------------------

CVector tau_coefficients(const ComplexMatrix& a) {
    const std::size_t n = a.n();
    const std::size_t nodes = n + 1;
    const double radius = std::max(2.0 * spectral_radius_bound(a), 1e-300);
    const ComplexMatrix id = ComplexMatrix::identity(n);
    CVector z(nodes), v(nodes);
    for (std::size_t j = 0; j < nodes; ++j) {
        z[j] = std::polar(radius, 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(nodes));
        v[j] = determinant(z[j] * id - a);
    }
    CVector c(nodes, 0.0);
    for (std::size_t k = 0; k < nodes; ++k) {
        for (std::size_t j = 0; j < nodes; ++j) c[k] += v[j] * std::pow(z[j], -static_cast<int>(k));
        c[k] /= static_cast<double>(nodes);
    }
    return c;
}

ZeroSet matrix_zeros(const ModelParams& params, const ComplexMatrix& a, const ComplexMatrix& a_inv,
                     const ZeroSet* previous) {
    const std::size_t n = a.n();
    const ComplexMatrix id = ComplexMatrix::identity(n);

    // Candidates: roots of det(w - A) and of det(u - A^{-1}), u = 1/w. Each is
    // refined by Newton steps on the determinant that is better conditioned at
    // it (A^{-1} when |w|^2 < rho(A)/rho(A^{-1})); only converged values count.
    const double threshold = spectral_radius_bound(a) / std::max(spectral_radius_bound(a_inv), 1e-300);
    const auto polish = [&](cplx w) -> std::optional<cplx> {
        const bool inverted = std::norm(w) < threshold;
        const ComplexMatrix& m = inverted ? a_inv : a;
        cplx z = inverted ? 1.0 / w : w;
        double last = std::numeric_limits<double>::infinity();
        for (int it = 0; it < 60; ++it) {
            cplx step;
            try {
                step = 1.0 / LuFactor(z * id - m, 0.0).inverse().trace();
            } catch (const Error&) {
                return inverted ? 1.0 / z : z;  // exact zero of the determinant
            }
            if (!std::isfinite(std::abs(step))) return inverted ? 1.0 / z : z;  // numerically singular
            z -= step;
            const double size = std::abs(step);
            // Converged, or stalled at the rounding floor of the determinant.
            if (size <= 1e-13 * std::abs(z) || (size <= 1e-6 * std::abs(z) && size >= 0.5 * last))
                return inverted ? 1.0 / z : z;
            last = size;
        }
        return std::nullopt;
    };

    CVector candidates;
    {
        CVector warm_big, warm_small;
        if (previous) {
            warm_big = previous->w;
            for (const auto& w : previous->w) warm_small.push_back(1.0 / w);
        }
        const ComplexPolynomial big(tau_coefficients(a));
        const ComplexPolynomial small(tau_coefficients(a_inv));
        candidates = previous ? poly_roots(big, std::span<const cplx>(warm_big)) : poly_roots(big);
        const CVector us = previous ? poly_roots(small, std::span<const cplx>(warm_small)) : poly_roots(small);
        for (const auto& u : us) candidates.push_back(1.0 / u);
    }
    CVector roots;
    for (const auto& c : candidates) {
        if (!std::isfinite(std::abs(c)) || c == 0.0) continue;
        const auto w = polish(c);
        if (!w || *w == 0.0 || !std::isfinite(std::abs(*w))) continue;
        if (std::none_of(roots.begin(), roots.end(), [&](cplx r) { return log_distance(r, *w) <= 1e-5; }))
            roots.push_back(*w);
    }
    if (roots.size() != n) throw Error(ErrorKind::NoConvergence, "tau-function zeros collide or were lost");

    ZeroSet z;
    z.permutation.resize(n);
    if (previous) {
        // Greedy global matching in the log plane: repeatedly take the closest free pair.
        std::vector<bool> slot_used(n, false), root_used(n, false);
        for (std::size_t round = 0; round < n; ++round) {
            double best = std::numeric_limits<double>::infinity();
            std::size_t bi = 0, bj = 0;
            for (std::size_t i = 0; i < n; ++i) {
                if (slot_used[i]) continue;
                for (std::size_t j = 0; j < n; ++j) {
                    if (root_used[j]) continue;
                    const double d = log_distance(previous->w[i], roots[j]);
                    if (d < best) {
                        best = d;
                        bi = i;
                        bj = j;
                    }
                }
            }
            slot_used[bi] = root_used[bj] = true;
            z.permutation[bi] = bj;
        }
    } else {
        for (std::size_t i = 0; i < n; ++i) z.permutation[i] = i;
    }
    z.w.resize(n);
    z.x.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        z.w[i] = roots[z.permutation[i]];
        z.x[i] = previous ? previous->x[i] + std::log(z.w[i] / previous->w[i]) / (2.0 * params.gamma)
                          : std::log(z.w[i]) / (2.0 * params.gamma);
    }
    return z;
}

ZeroSet matrix_zeros(const ModelParams& params, const ComplexMatrix& a, const ZeroSet* previous) {
    return matrix_zeros(params, a, inverse(a), previous);
}

ZeroSet tau_zeros(const TauContext& ctx, const HierarchyTimes& times, const ZeroSet* previous,
                  const MiwaShift& shift) {
    return matrix_zeros(ctx.params(), tau_matrix(ctx, times, shift), tau_matrix_inverse(ctx, times, shift), previous);
}

double log_magnitude_spread(const ModelParams& params, std::span<const cplx> x) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& xi : x) {
        const double r = std::real(2.0 * params.gamma * xi);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    return x.empty() ? 0.0 : hi - lo;
}

ZeroSet initial_zeros(const TauContext& ctx) {
    ZeroSet z{ctx.w0(), ctx.state0().x, {}};
    z.permutation.resize(z.w.size());
    for (std::size_t i = 0; i < z.w.size(); ++i) z.permutation[i] = i;
    return z;
}

std::vector<ZeroSet> track_zeros(const TauContext& ctx, const std::function<HierarchyTimes(double)>& path,
                                 std::size_t samples, const MiwaShift& shift) {
    if (samples < 2) throw Error(ErrorKind::ConfigError, "at least two samples are required");
    const ZeroSet start = initial_zeros(ctx);
    std::vector<ZeroSet> out;
    out.reserve(samples);
    out.push_back(tau_zeros(ctx, path(0.0), &start, shift));

    ZeroSet current = out.front();
    double s = 0.0;
    double ds = 1.0 / static_cast<double>(samples - 1);
    for (std::size_t k = 1; k < samples; ++k) {
        const double target = static_cast<double>(k) / static_cast<double>(samples - 1);
        while (s < target) {
            const double next = std::min(target, s + ds);
            bool accept = false;
            ZeroSet candidate;
            try {
                candidate = tau_zeros(ctx, path(next), &current, shift);
                double motion = 0.0;
                for (std::size_t i = 0; i < candidate.w.size(); ++i)
                    motion = std::max(motion, log_distance(candidate.w[i], current.w[i]));
                const double sep = std::min(min_pairwise(candidate.w), min_pairwise(current.w));
                accept = 3.0 * motion < sep || candidate.w.size() == 1;
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::NoConvergence) throw;
            }
            if (!accept) {
                ds = 0.5 * (next - s);
                if (ds < 1e-7) throw Error(ErrorKind::NoConvergence, "zero tracking step underflow");
                continue;
            }
            current = std::move(candidate);
            s = next;
            ds = std::min(2.0 * ds, 1.0 / static_cast<double>(samples - 1));
        }
        out.push_back(current);
    }
    return out;
}

std::vector<ZeroSet> track_zeros_along(const TauContext& ctx, int m, cplx duration, std::size_t samples) {
    return track_zeros(ctx, [&](double s) { return HierarchyTimes::single(m, s * duration); }, samples);
}

// --- frame -----------------------------------------------------------------

PhaseState TauFrame::state(const ModelParams& params) const {
    return PhaseState{x, momenta_from_velocities(params, x, xdot)};
}

TauFrame tau_frame(const TauContext& ctx, const HierarchyTimes& times, const ZeroSet& zeros,
                   const MiwaShift& shift) {
    const ModelParams& pr = ctx.params();
    const std::size_t n = pr.n;
    const ComplexMatrix a = tau_matrix(ctx, times, shift);
    const ComplexMatrix id = ComplexMatrix::identity(n);

    TauFrame f;
    f.w = zeros.w;
    f.x = zeros.x;
    f.sqrt_w = sqrt_positions(pr, f.x);

    // Right eigenvectors by inverse iteration, scaled so that
    // sum_j e^{gamma x0_j} r_kj = e^{gamma x_k}.
    ComplexMatrix r(n);
    for (std::size_t k = 0; k < n; ++k) {
        const cplx sigma = f.w[k] * cplx(1.0 + 1e-10, 1e-10);
        const LuFactor lu(a - sigma * id, 0.0);
        CVector v(n);
        for (std::size_t j = 0; j < n; ++j) v[j] = cplx(1.0 + 0.1 * static_cast<double>(j), 0.05 * static_cast<double>(j));
        for (int it = 0; it < 3; ++it) {
            v = lu.solve(v);
            double m = 0.0;
            for (const auto& e : v) m = std::max(m, std::abs(e));
            for (auto& e : v) e /= m;
        }
        cplx d = 0.0;
        double mag = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            d += ctx.sqrt_w0()[j] * v[j];
            mag += std::abs(ctx.sqrt_w0()[j] * v[j]);
        }
        if (std::abs(d) <= 1e-13 * mag) throw Error(ErrorKind::ResolventSingular, "gauge normalisation breaks down");
        for (std::size_t j = 0; j < n; ++j) r(j, k) = v[j] * f.sqrt_w[k] / d;
    }
    f.l = inverse(r) * ctx.l0() * r;

    const cplx sq = pr.sqrt_q();
    f.e_tilde = ComplexMatrix(n);
    f.xdot.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) f.e_tilde(i, j) = (f.w[i] / sq - sq * f.w[j]) * f.l(i, j);
        f.xdot[i] = -std::sinh(pr.gamma * pr.eta) / pr.gamma * f.l(i, i);
    }
    return f;
}

double gauge_transport_residual(const ModelParams& params, const TauFrame& frame) {
    const std::size_t n = frame.w.size();
    const cplx sq = params.sqrt_q();
    double resid = 0.0;
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const cplx wdot = (1.0 / sq - sq) * frame.w[i] * frame.l(i, i);
        for (std::size_t j = 0; j < n; ++j) {
            const cplx expected = wdot * frame.sqrt_w[j] / frame.sqrt_w[i];
            resid = std::max(resid, std::abs(frame.e_tilde(i, j) - expected));
            scale = std::max(scale, std::abs(frame.e_tilde(i, j)));
        }
    }
    return scale > 0.0 ? resid / scale : resid;
}

// --- shifted tau-functions -------------------------------------------------

cplx shifted_tau_prime(const ModelParams& params, const TauFrame& frame, cplx w, const MiwaShift& shift) {
    const std::size_t n = frame.w.size();
    const ComplexMatrix id = ComplexMatrix::identity(n);
    const ComplexMatrix& l = frame.l;
    const ComplexMatrix& e = frame.e_tilde;
    const cplx s = params.sqrt_q();
    const cplx q = params.q();
    const auto res_minus = [&](cplx z) {  // (z - q^{-1/2} L)^{-1}
        return resolvent_inverse(z * id - (1.0 / s) * l, "spectral parameter hits q^{-1/2} L");
    };
    const auto res_plus = [&](cplx z) {  // (z - q^{1/2} L)^{-1}
        return resolvent_inverse(z * id - s * l, "spectral parameter hits q^{1/2} L");
    };

    switch (shift.kind) {
        case ShiftKind::None: return product_shifted(frame.w, w, 1.0);
        case ShiftKind::PlusLambda: {
            check_pole(frame.w, w, 1.0);
            const ComplexMatrix rw = diag_inverse_shift(frame.w, w, 1.0, 1.0);
            return product_shifted(frame.w, w, 1.0) * (1.0 - (res_minus(shift.a) * rw * e).trace());
        }
        case ShiftKind::MinusMu: {
            check_pole(frame.w, w, 1.0);
            const ComplexMatrix rw = diag_inverse_shift(frame.w, w, 1.0, 1.0);
            return product_shifted(frame.w, w, 1.0) * (1.0 + (rw * res_plus(shift.a) * e).trace());
        }
        case ShiftKind::PlusLambdaMinusMu: {
            check_pole(frame.w, w, 1.0);
            const ComplexMatrix rw = diag_inverse_shift(frame.w, w, 1.0, 1.0);
            const cplx t = (res_minus(shift.a) * rw * res_plus(shift.b) * e).trace();
            return product_shifted(frame.w, w, 1.0) * (1.0 + (shift.a - shift.b) * t);
        }
        case ShiftKind::MinusNu: {
            check_pole(frame.w, w, q);
            const ComplexMatrix rq = diag_inverse_shift(frame.w, w, q, q);
            return product_shifted(frame.w, w, q) * (1.0 + (rq * res_plus(shift.a) * e).trace());
        }
        case ShiftKind::PlusNu: {
            check_pole(frame.w, w, 1.0 / q);
            const ComplexMatrix rm = diag_inverse_shift(frame.w, w, 1.0 / q, 1.0);
            const ComplexMatrix rl = resolvent_inverse(l - (s * shift.a) * id, "nu hits q^{-1/2} spectrum");
            return product_shifted(frame.w, w, 1.0 / q) * (1.0 + (rl * rm * e).trace() / s);
        }
        case ShiftKind::PlusLambdaMinusNu: {
            check_pole(frame.w, w, q);
            const ComplexMatrix rq = diag_inverse_shift(frame.w, w, q, q);
            const cplx t = (res_minus(shift.a) * rq * res_plus(shift.b) * e).trace();
            return product_shifted(frame.w, w, q) * (1.0 + (shift.a - shift.b) * t);
        }
    }
    return product_shifted(frame.w, w, 1.0);
}

cplx shifted_tau_ratio(const TauContext& ctx, const HierarchyTimes& times, cplx w, const MiwaShift& shift) {
    const TauFrame f = frame_at(ctx, times);
    check_pole(f.w, w, 1.0);
    return shifted_tau_prime(ctx.params(), f, w, shift) / product_shifted(f.w, w, 1.0);
}

// --- bilinear identities ---------------------------------------------------

IdentityResidual bilinear_residual_positive(const TauContext& ctx, const HierarchyTimes& times, cplx w,
                                            cplx lambda, cplx mu) {
    const ModelParams& pr = ctx.params();
    const TauFrame f = frame_at(ctx, times);
    const cplx qw = pr.q() * w;
    const auto ratio = [&](cplx z, const MiwaShift& s) {
        return shifted_tau_prime(pr, f, z, s) / shifted_tau_prime(pr, f, z, {});
    };
    const MiwaShift both = MiwaShift::plus_lambda_minus_mu(lambda, mu);
    const cplx t1 = mu * ratio(qw, both);
    const cplx t2 = -lambda * ratio(w, both);
    const cplx t3 = (lambda - mu) * ratio(qw, MiwaShift::plus_lambda(lambda)) * ratio(w, MiwaShift::minus_mu(mu));
    return {t1 + t2 + t3, std::max({std::abs(t1), std::abs(t2), std::abs(t3)})};
}

IdentityResidual bilinear_residual_mixed(const TauContext& ctx, const HierarchyTimes& times, cplx w, cplx lambda,
                                         cplx nu) {
    const ModelParams& pr = ctx.params();
    const TauFrame f = frame_at(ctx, times);
    const cplx q = pr.q();
    const auto tau = [&](cplx z, const MiwaShift& s) { return shifted_tau_prime(pr, f, z, s); };
    const MiwaShift both = MiwaShift::plus_lambda_minus_nu(lambda, nu);
    const cplx below = tau(w / q, {});  // tau'(x - eta)
    const cplx here = tau(w, {});
    const cplx a = tau(w, both) / below;
    const cplx b = (nu / lambda) * tau(q * w, both) / here;
    const cplx c = (1.0 - nu / lambda) * tau(w, MiwaShift::minus_nu(nu)) / below *
                   (tau(w, MiwaShift::plus_lambda(lambda)) / here);
    return {a - b - c, std::max({std::abs(a), std::abs(b), std::abs(c)})};
}

// --- tau-form equations ----------------------------------------------------

IdentityResidual toda_equation_residual(const TauContext& ctx, const HierarchyTimes& times, cplx w, double h) {
    const cplx q = ctx.params().q();
    const cplx base = tau_prime_eval(ctx, times, w);
    const auto f = [&](double a, double b) {
        return log_ratio(tau_prime_eval(ctx, times.shifted(1, a).shifted(-1, b), w), base);
    };
    const cplx mixed = (f(h, h) - f(h, -h) - f(-h, h) + f(-h, -h)) / (4.0 * h * h);
    const cplx c = tau_prime_eval(ctx, times, q * w) * tau_prime_eval(ctx, times, w / q) / (base * base);
    return {mixed - 1.0 + c, std::max({std::abs(mixed), 1.0, std::abs(c)})};
}

IdentityResidual mkp_equation_residual(const TauContext& ctx, const HierarchyTimes& times, cplx w, double h1,
                                       double h2) {
    const cplx q = ctx.params().q();
    const auto tau = [&](const HierarchyTimes& t, cplx z) { return tau_from_tau_prime(t, tau_prime_eval(ctx, t, z)); };
    const cplx up0 = tau(times, q * w);
    const cplx at0 = tau(times, w);
    const auto r = [&](double a, double b) {
        const HierarchyTimes t = times.shifted(1, a).shifted(2, b);
        return log_ratio(tau(t, q * w) / tau(t, w), up0 / at0);
    };
    const auto s = [&](double a) {
        const HierarchyTimes t = times.shifted(1, a);
        return log_ratio(tau(t, q * w) * tau(t, w), up0 * at0);
    };
    const cplx d2 = (r(0.0, h1) - r(0.0, -h1)) / (2.0 * h1);
    const cplx d11 = (s(h2) - 2.0 * s(0.0) + s(-h2)) / (h2 * h2);
    const cplx d1 = (r(h1, 0.0) - r(-h1, 0.0)) / (2.0 * h1);
    return {d2 - d11 - d1 * d1, std::max({std::abs(d2), std::abs(d11), std::abs(d1 * d1)})};
}

cplx field_v(const TauContext& ctx, const HierarchyTimes& times, cplx w, double h) {
    const cplx q = ctx.params().q();
    const cplx base = tau_prime_eval(ctx, times, q * w) / tau_prime_eval(ctx, times, w);
    const auto r = [&](double a) {
        const HierarchyTimes t = times.shifted(1, a);
        return log_ratio(tau_prime_eval(ctx, t, q * w) / tau_prime_eval(ctx, t, w), base);
    };
    return (r(h) - r(-h)) / (2.0 * h);
}

cplx field_v_pole_sum(const ModelParams& params, const TauFrame& frame, cplx w) {
    const cplx q = params.q();
    cplx v = 0.0;
    for (std::size_t i = 0; i < frame.w.size(); ++i) {
        const cplx wdot = 2.0 * params.gamma * frame.w[i] * frame.xdot[i];
        v += wdot / (w - frame.w[i]) - wdot / (q * w - frame.w[i]);
    }
    return v;
}

cplx field_c(const TauContext& ctx, const HierarchyTimes& times, cplx w) {
    const cplx q = ctx.params().q();
    const cplx t = tau_prime_eval(ctx, times, w);
    return tau_prime_eval(ctx, times, q * w) * tau_prime_eval(ctx, times, w / q) / (t * t);
}

cplx separated_point(const ModelParams& params, const CVector& zeros) {
    if (zeros.empty()) return 1.0;
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (const auto& z : zeros) {
        lo = std::min(lo, std::abs(z));
        hi = std::max(hi, std::abs(z));
    }
    const cplx q = params.q();
    cplx best = zeros.front();
    double best_score = -1.0;
    constexpr int kRadii = 9, kAngles = 32;
    for (int r = 0; r < kRadii; ++r) {
        const double radius = lo * std::pow(hi / lo, r / (kRadii - 1.0));
        for (int a = 0; a < kAngles; ++a) {
            const cplx w = std::polar(radius, 2.0 * std::numbers::pi * (a + 0.5) / kAngles);
            double score = std::numeric_limits<double>::infinity();
            for (const cplx at : {w / q, w, q * w})
                for (const auto& z : zeros) score = std::min(score, log_distance(at, z));
            if (score > best_score) {
                best_score = score;
                best = w;
            }
        }
    }
    return best;
}

}  // namespace rstoda
