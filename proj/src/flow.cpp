#include "rstoda/flow.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <tuple>

namespace rstoda {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

constexpr double min_step = 1e-13;

using Vec = CVector;

struct Rhs {
    const ModelParams& params;
    int m;
    cplx duration;

    Vec operator()(const Vec& y) const {
        const std::size_t n = params.n;
        PhaseState s{Vec(y.begin(), y.begin() + n), Vec(y.begin() + n, y.end())};
        const Gradients g = flow_vector_field(params, s, m);
        Vec f(2 * n);
        for (std::size_t i = 0; i < n; ++i) {
            f[i] = duration * g.dp[i];
            f[n + i] = duration * g.dx[i];
        }
        return f;
    }
};

Vec pack(const PhaseState& s) {
    Vec y(s.x);
    y.insert(y.end(), s.p.begin(), s.p.end());
    return y;
}

PhaseState unpack(const Vec& y) {
    const std::size_t n = y.size() / 2;
    return PhaseState{Vec(y.begin(), y.begin() + n), Vec(y.begin() + n, y.end())};
}

Vec combine(const Vec& y, double h, std::initializer_list<std::pair<double, const Vec*>> terms) {
    Vec out(y);
    for (std::size_t i = 0; i < y.size(); ++i) {
        cplx acc = 0.0;
        for (const auto& [c, k] : terms) acc += c * (*k)[i];
        out[i] += h * acc;
    }
    return out;
}

bool is_singular(const Error& e) {
    return e.kind() == ErrorKind::CollisionSingularity || e.kind() == ErrorKind::SingularLax ||
           e.kind() == ErrorKind::SingularMatrix || e.kind() == ErrorKind::ZeroVelocity;
}

TrajectorySample make_sample(const ModelParams& params, cplx t, const PhaseState& s) {
    TrajectorySample out{t, s, conserved_spectrum(params, s), {}};
    try {
        out.inverse_invariants = conserved_spectrum_inverse(params, s);
    } catch (const Error&) {
        out.inverse_invariants.assign(params.n, cplx(std::nan(""), 0.0));
    }
    return out;
}

}  // namespace

void FlowSpec::validate(const ModelParams& params) const {
    if (m == 0 || std::abs(m) > params.max_flow_index)
        throw Error(ErrorKind::ConfigError, "flow index must satisfy 0 < |m| <= max_flow_index");
    if (!(rtol >= 1e-13)) throw Error(ErrorKind::ConfigError, "rtol must be at least 1e-13");
    if (!(atol > 0.0)) throw Error(ErrorKind::ConfigError, "atol must be positive");
    if (!(max_step > 0.0)) throw Error(ErrorKind::ConfigError, "max_step must be positive");
    if (samples < 2) throw Error(ErrorKind::ConfigError, "at least two samples are required");
    if (!std::isfinite(std::abs(duration))) throw Error(ErrorKind::ConfigError, "duration must be finite");
}

double Trajectory::max_relative_drift(bool inverse) const {
    if (samples.size() < 2) return 0.0;
    const auto& first = samples.front();
    const auto& last = samples.back();
    const CVector& a = inverse ? first.inverse_invariants : first.invariants;
    const CVector& b = inverse ? last.inverse_invariants : last.invariants;
    // Spectral radius bound from the traces themselves: |tr L^k|^{1/k} <= N^{1/k} rho.
    double rho = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        rho = std::max(rho, std::pow(std::abs(a[k]) / static_cast<double>(a.size()), 1.0 / (k + 1.0)));
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        const double floor = 1e-3 * static_cast<double>(a.size()) * std::pow(rho, k + 1.0);
        const double denom = std::max(std::abs(a[k]), floor);
        const double d = std::abs(b[k] - a[k]) / (denom > 0.0 ? denom : 1.0);
        worst = std::max(worst, std::isnan(d) ? std::numeric_limits<double>::infinity() : d);
    }
    return worst;
}

Gradients flow_vector_field(const ModelParams& params, const PhaseState& state, int m) {
    Gradients g = hamiltonian_gradients(params, state, m);
    for (auto& v : g.dx) v = -v;
    return g;
}

Trajectory integrate_flow(const ModelParams& params, const PhaseState& state0, const FlowSpec& spec) {
    spec.validate(params);
    check_state(params, state0);

    const Rhs rhs{params, spec.m, spec.duration};
    const double span = std::abs(spec.duration);
    const double h_max = span > 0.0 ? std::min(1.0, spec.max_step / span) : 1.0;

    Trajectory traj;
    traj.samples.reserve(spec.samples);
    traj.samples.push_back(make_sample(params, 0.0, state0));
    if (span == 0.0) {
        for (std::size_t k = 1; k < spec.samples; ++k) traj.samples.push_back(traj.samples.front());
        return traj;
    }

    Vec y = pack(state0);
    Vec k1 = rhs(y);
    double s = 0.0;
    double h = std::min(h_max, 1.0 / 64.0);
    std::size_t steps = 0;

    for (std::size_t seg = 1; seg < spec.samples; ++seg) {
        const double s_end = static_cast<double>(seg) / static_cast<double>(spec.samples - 1);
        while (s < s_end - 1e-15) {
            if (++steps > spec.max_steps) throw Error(ErrorKind::StepUnderflow, "step budget exhausted");
            const bool clipped = s + h >= s_end;
            const double step = clipped ? s_end - s : h;

            bool singular = false;
            Vec y_new, k7, err;
            try {
                const Vec k2 = rhs(combine(y, step, {{a21, &k1}}));
                const Vec k3 = rhs(combine(y, step, {{a31, &k1}, {a32, &k2}}));
                const Vec k4 = rhs(combine(y, step, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
                const Vec k5 = rhs(combine(y, step, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
                const Vec k6 = rhs(combine(y, step, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
                y_new = combine(y, step, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
                check_state(params, unpack(y_new));
                k7 = rhs(y_new);
                err = combine(Vec(y.size(), 0.0), step,
                              {{e1, &k1}, {e3, &k3}, {e4, &k4}, {e5, &k5}, {e6, &k6}, {e7, &k7}});
            } catch (const Error& e) {
                if (!is_singular(e)) throw;
                singular = true;
            }

            double err_norm = 0.0;
            if (!singular) {
                for (std::size_t i = 0; i < y.size(); ++i) {
                    const double sc = spec.atol + spec.rtol * std::max(std::abs(y[i]), std::abs(y_new[i]));
                    const double r = std::abs(err[i]) / sc;
                    err_norm += r * r;
                }
                err_norm = std::sqrt(err_norm / static_cast<double>(y.size()));
                if (!std::isfinite(err_norm)) singular = true;
            }

            if (singular) {
                ++traj.rejected_steps;
                h = 0.5 * step;
                if (h < min_step)
                    throw CollisionError("flow reached the singular set", s * spec.duration, unpack(y));
                continue;
            }
            if (err_norm <= 1.0) {
                ++traj.accepted_steps;
                s = clipped ? s_end : s + step;
                y = std::move(y_new);
                k1 = std::move(k7);
                const double grow = err_norm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err_norm, -0.2), 0.2, 5.0);
                // A step clipped at a sample point says little about the natural size.
                h = std::min(h_max, clipped ? std::max(h, step * grow) : step * grow);
            } else {
                ++traj.rejected_steps;
                h = step * std::clamp(0.9 * std::pow(err_norm, -0.2), 0.1, 0.5);
                if (h < min_step) throw Error(ErrorKind::StepUnderflow, "step size underflow");
            }
        }
        traj.samples.push_back(make_sample(params, s_end * spec.duration, unpack(y)));
    }
    return traj;
}

PhaseState evolve(const ModelParams& params, const PhaseState& state0, const FlowSpec& spec) {
    FlowSpec s = spec;
    s.samples = 2;
    return integrate_flow(params, state0, s).samples.back().state;
}

double flow_commutator_defect(const ModelParams& params, const PhaseState& state0, const FlowSpec& a,
                              const FlowSpec& b) {
    const PhaseState ab = evolve(params, evolve(params, state0, a), b);
    const PhaseState ba = evolve(params, evolve(params, state0, b), a);
    // The two paths may permute the particle labels and wind x and p by
    // their periods; pair (x_i, p_i) with (x_j, p_j) greedily by distance
    // modulo the periods before comparing.
    const std::size_t n = params.n;
    const cplx x_period = cplx(0.0, std::numbers::pi) / params.gamma;
    const cplx p_period = cplx(0.0, 2.0 * std::numbers::pi) / params.eta;
    const auto reduced = [](cplx d, cplx period) { return std::abs(d - std::round((d / period).real()) * period); };
    std::vector<std::tuple<double, std::size_t, std::size_t>> pairs;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            pairs.emplace_back(
                std::max(reduced(ab.x[i] - ba.x[j], x_period), reduced(ab.p[i] - ba.p[j], p_period)), i, j);
    std::sort(pairs.begin(), pairs.end());
    std::vector<bool> used_i(n, false), used_j(n, false);
    double d = 0.0;
    for (const auto& [dist, i, j] : pairs) {
        if (used_i[i] || used_j[j]) continue;
        used_i[i] = used_j[j] = true;
        d = std::max(d, dist);
    }
    return d;
}

}  // namespace rstoda
