#include "rstoda/backlund.hpp"

#include <algorithm>
#include <cmath>

#include "rstoda/errors.hpp"

namespace rstoda {

namespace {

cplx s_of(const ModelParams& pr, cplx z) { return std::sinh(pr.gamma * z); }

cplx checked_ratio(cplx num, cplx den, double eps) {
    if (std::abs(den) < eps) throw Error(ErrorKind::CollisionSingularity, "Backlund denominator vanishes");
    return num / den;
}

/// gamma a_i + mu sinh(gamma eta) prod_{j!=i} s(u_ij + sign eta)/s(u_ij) prod_k s(u_i - v_k)/s(u_i - v_k + sign eta).
cplx pair_equation(const ModelParams& pr, const CVector& u, const CVector& v, cplx udot, std::size_t i, cplx mu,
                   double sign) {
    const cplx e = sign * pr.eta;
    cplx prod = 1.0;
    for (std::size_t j = 0; j < u.size(); ++j)
        if (j != i) prod *= checked_ratio(s_of(pr, u[i] - u[j] + e), s_of(pr, u[i] - u[j]), pr.collision_eps);
    for (std::size_t k = 0; k < v.size(); ++k)
        prod *= checked_ratio(s_of(pr, u[i] - v[k]), s_of(pr, u[i] - v[k] + e), pr.collision_eps);
    return pr.gamma * udot + mu * std::sinh(pr.gamma * pr.eta) * prod;
}

ZeroSet base_zeros(const TauContext& ctx, const HierarchyTimes& times) {
    const ZeroSet init = initial_zeros(ctx);
    if (times.positive.empty() && times.negative.empty()) return init;
    return tau_zeros(ctx, times, &init);
}

/// Factor k of the discrete-time product at particle i.
cplx discrete_factor(const ModelParams& pr, const CVector& x, const CVector& yp, const CVector& ym, std::size_t i,
                     std::size_t k) {
    const cplx e = pr.eta;
    const double eps = pr.collision_eps;
    return checked_ratio(s_of(pr, x[i] - yp[k]), s_of(pr, x[i] - yp[k] + e), eps) *
           checked_ratio(s_of(pr, x[i] - x[k] + e), s_of(pr, x[i] - x[k] - e), eps) *
           checked_ratio(s_of(pr, x[i] - ym[k] - e), s_of(pr, x[i] - ym[k]), eps);
}

struct ShiftedZeros {
    CVector x, yp, ym;
};

ShiftedZeros shifted_zeros(const TauContext& ctx, const HierarchyTimes& times, cplx mu) {
    const ZeroSet xz = base_zeros(ctx, times);
    return {xz.x, tau_zeros(ctx, times, &xz, MiwaShift::plus_lambda(mu)).x,
            tau_zeros(ctx, times, &xz, MiwaShift::minus_mu(mu)).x};
}

cplx neville_at_zero(const std::vector<double>& h, CVector values) {
    const std::size_t n = values.size();
    for (std::size_t level = 1; level < n; ++level)
        for (std::size_t i = 0; i + level < n; ++i)
            values[i] = (h[i + level] * values[i] - h[i] * values[i + 1]) / (h[i + level] - h[i]);
    return values[0];
}

}  // namespace

BacklundPair backlund_partner(const TauContext& ctx, const HierarchyTimes& times, cplx mu) {
    if (mu == 0.0) throw Error(ErrorKind::ConfigError, "Backlund parameter mu must be nonzero");
    const ZeroSet xz = base_zeros(ctx, times);
    const MiwaShift shift = MiwaShift::minus_mu(mu);
    const ZeroSet yz = tau_zeros(ctx, times, &xz, shift);
    BacklundPair pair;
    pair.mu = mu;
    pair.x = xz.x;
    pair.y = yz.x;
    pair.xdot = tau_frame(ctx, times, xz).xdot;
    pair.ydot = tau_frame(ctx, times, yz, shift).xdot;
    return pair;
}

CVector backlund_residual(const ModelParams& params, const BacklundPair& pair) {
    const std::size_t n = pair.x.size();
    if (pair.y.size() != n || pair.xdot.size() != n || pair.ydot.size() != n)
        throw Error(ErrorKind::ConfigError, "Backlund pair components differ in size");
    CVector r(2 * n);
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = pair_equation(params, pair.x, pair.y, pair.xdot[i], i, pair.mu, -1.0);
        r[n + i] = pair_equation(params, pair.y, pair.x, pair.ydot[i], i, pair.mu, 1.0);
    }
    return r;
}

CVector partner_velocity_fd(const TauContext& ctx, const HierarchyTimes& times, cplx mu, double h) {
    const ZeroSet xz = base_zeros(ctx, times);
    const MiwaShift shift = MiwaShift::minus_mu(mu);
    const ZeroSet y0 = tau_zeros(ctx, times, &xz, shift);
    const ZeroSet yp = tau_zeros(ctx, times.shifted(1, h), &y0, shift);
    const ZeroSet ym = tau_zeros(ctx, times.shifted(1, -h), &y0, shift);
    CVector d(y0.x.size());
    for (std::size_t i = 0; i < d.size(); ++i) d[i] = (yp.x[i] - ym.x[i]) / (2.0 * h);
    return d;
}

double partner_acceleration_defect(const TauContext& ctx, const HierarchyTimes& times, cplx mu, double h) {
    const BacklundPair pair = backlund_partner(ctx, times, mu);
    const MiwaShift shift = MiwaShift::minus_mu(mu);
    ZeroSet y0;
    y0.x = pair.y;
    y0.w = exp_positions(ctx.params(), pair.y);
    const ZeroSet yp = tau_zeros(ctx, times.shifted(1, h), &y0, shift);
    const ZeroSet ym = tau_zeros(ctx, times.shifted(1, -h), &y0, shift);
    const CVector acc = rs_accelerations(ctx.params(), pair.y, pair.ydot);
    double worst = 0.0;
    for (std::size_t i = 0; i < acc.size(); ++i) {
        const cplx fd = (yp.x[i] - 2.0 * pair.y[i] + ym.x[i]) / (h * h);
        worst = std::max(worst, std::abs(fd - acc[i]));
    }
    return worst;
}

double backlund_role_involution(const TauContext& ctx, cplx mu) {
    const BacklundPair pair = backlund_partner(ctx, HierarchyTimes{}, mu);
    const ModelParams& pr = ctx.params();
    const PhaseState ystate{pair.y, momenta_from_velocities(pr, pair.y, pair.ydot)};
    const TauContext yctx(pr, ystate);
    const ZeroSet yz = initial_zeros(yctx);
    const ZeroSet back = tau_zeros(yctx, HierarchyTimes{}, &yz, MiwaShift::plus_lambda(mu));
    // back.x continues from y; compare modulo the period i pi / gamma.
    const cplx period = cplx(0.0, M_PI) / pr.gamma;
    double worst = 0.0;
    for (std::size_t i = 0; i < pair.x.size(); ++i) {
        const cplx d = back.x[i] - pair.x[i];
        const double turns = std::round((d / period).real());
        worst = std::max(worst, std::abs(d - turns * period));
    }
    return worst;
}

CVector discrete_time_residual(const TauContext& ctx, const HierarchyTimes& times, cplx mu) {
    if (mu == 0.0) throw Error(ErrorKind::ConfigError, "Backlund parameter mu must be nonzero");
    const ModelParams& pr = ctx.params();
    const ShiftedZeros z = shifted_zeros(ctx, times, mu);
    const std::size_t n = z.x.size();
    CVector r(n);
    for (std::size_t i = 0; i < n; ++i) {
        cplx prod = 1.0;
        for (std::size_t k = 0; k < n; ++k) prod *= discrete_factor(pr, z.x, z.yp, z.ym, i, k);
        r[i] = prod + 1.0;
    }
    return r;
}

double DiscreteExpansion::max_difference() const {
    double d = 0.0;
    for (std::size_t i = 0; i < acceleration.size(); ++i)
        d = std::max(d, std::abs(acceleration[i] - rs_acceleration[i]));
    return d;
}

DiscreteExpansion discrete_time_expansion(const TauContext& ctx, double base, int levels, double phase) {
    if (levels < 2 || base <= 0.0) throw Error(ErrorKind::ConfigError, "expansion needs base > 0 and two levels");
    const ModelParams& pr = ctx.params();
    const std::size_t n = pr.n;
    const HierarchyTimes zero;
    const cplx direction = std::polar(1.0, phase);

    std::vector<double> h(static_cast<std::size_t>(levels));
    std::vector<CVector> self(n, CVector(h.size())), total(n, CVector(h.size()));
    for (std::size_t l = 0; l < h.size(); ++l) {
        h[l] = std::ldexp(1.0, -static_cast<int>(l));
        const cplx mu = base / h[l] * direction;
        const ShiftedZeros z = shifted_zeros(ctx, zero, mu);
        for (std::size_t i = 0; i < n; ++i) {
            cplx log_total = 0.0;
            for (std::size_t k = 0; k < n; ++k) {
                const cplx f = discrete_factor(pr, z.x, z.yp, z.ym, i, k);
                log_total += k == i ? std::log(-f) : std::log(f);
                if (k == i) self[i][l] = mu * std::log(-f);
            }
            total[i][l] = mu * log_total;
        }
    }

    DiscreteExpansion out;
    out.self_limit.resize(n);
    out.total_limit.resize(n);
    out.acceleration.resize(n);
    const CVector xdot = velocity_map(pr, ctx.state0());
    out.rs_acceleration = rs_accelerations(pr, ctx.state0());
    for (std::size_t i = 0; i < n; ++i) {
        out.self_limit[i] = neville_at_zero(h, self[i]);
        out.total_limit[i] = neville_at_zero(h, total[i]);
        out.acceleration[i] = xdot[i] * out.self_limit[i];
    }
    return out;
}

}  // namespace rstoda
