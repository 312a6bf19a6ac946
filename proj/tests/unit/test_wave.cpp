#include "doctest.h"
#include "helpers.hpp"
#include "rstoda/wave.hpp"

using namespace rstoda;
using testing::draw;
using testing::params_for;

namespace {

const WaveKind kAllKinds[] = {WaveKind::C, WaveKind::CStar, WaveKind::B, WaveKind::BStar};

Trajectory flow_for(const ModelParams& pr, const PhaseState& s, WaveKind kind, std::size_t samples) {
    FlowSpec spec;
    spec.m = (kind == WaveKind::C || kind == WaveKind::CStar) ? 1 : -1;
    spec.duration = 0.02;
    spec.samples = samples;
    spec.rtol = 1e-12;
    spec.atol = 1e-14;
    return integrate_flow(pr, s, spec);
}

}  // namespace

TEST_CASE("one particle coefficient") {
    const ModelParams pr = params_for(1);
    const PhaseState s{{cplx(0.3, 0.1)}, {cplx(-0.2, 0.05)}};
    const cplx z(1.7, -0.4);
    const auto c = solve_wave_coefficients(pr, s, z, WaveKind::C);
    const cplx xdot = velocity_map(pr, s)[0];
    const cplx l11 = lax_matrix(pr, s)(0, 0);
    const cplx expected = xdot * std::exp(pr.gamma * s.x[0]) / (z - pr.sqrt_q() * l11);
    CHECK(std::abs(c.gauged[0] - expected) <= 1e-14 * std::abs(expected));
}

TEST_CASE("coefficient systems are satisfied after solving") {
    const ModelParams pr = params_for(3);
    const PhaseState s = draw(pr, 81);
    for (cplx z : {cplx(2.5, 0.3), cplx(-0.7, 1.9), cplx(0.2, -0.1)}) {
        for (WaveKind k : kAllKinds) {
            const std::string kind_name = to_string(k);
            CAPTURE(kind_name);
            const auto c = solve_wave_coefficients(pr, s, z, k);
            CHECK(wave_system_residual(pr, s, c) <= 1e-11);
        }
    }
}

TEST_CASE("matrix systems agree with the pole-cancellation conditions") {
    // Elementwise: z c_i - q sum_k wdot_i c_k / (w_i - q w_k) = wdot_i / (2 gamma),
    //              z c*_i - sum_k wdot_i c*_k / (w_k - q w_i) = -wdot_i / (2 gamma).
    const ModelParams pr = params_for(4);
    const PhaseState s = draw(pr, 82);
    const cplx z(1.1, 0.6);
    const CVector w = exp_positions(pr, s.x);
    const CVector v = velocity_map(pr, s);
    const cplx q = pr.q();
    const auto c = solve_wave_coefficients(pr, s, z, WaveKind::C).values;
    const auto cs = solve_wave_coefficients(pr, s, z, WaveKind::CStar).values;
    for (std::size_t i = 0; i < 4; ++i) {
        const cplx wdot = 2.0 * pr.gamma * w[i] * v[i];
        cplx a = z * c[i], b = z * cs[i];
        for (std::size_t k = 0; k < 4; ++k) {
            a -= q * wdot * c[k] / (w[i] - q * w[k]);
            b -= wdot * cs[k] / (w[k] - q * w[i]);
        }
        CHECK(std::abs(a - wdot / (2.0 * pr.gamma)) <= 1e-11 * std::abs(wdot));
        CHECK(std::abs(b + wdot / (2.0 * pr.gamma)) <= 1e-11 * std::abs(wdot));
    }
}

TEST_CASE("coefficients decay like 1/z") {
    const ModelParams pr = params_for(3);
    const PhaseState s = draw(pr, 83);
    const CVector v = velocity_map(pr, s);
    const CVector h = sqrt_positions(pr, s.x);
    for (double r : {1e4, 1e6}) {
        const cplx z = std::polar(r, 0.3);
        const auto c = solve_wave_coefficients(pr, s, z, WaveKind::C);
        for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(z * c.gauged[i] - v[i] * h[i]) <= 1e2 / r);
    }
}

TEST_CASE("wave function normalisation") {
    const ModelParams pr = params_for(3);
    const PhaseState s = draw(pr, 84);
    const cplx far(40.0, 0.1);
    for (WaveKind k : kAllKinds) {
        const std::string kind_name = to_string(k);
            CAPTURE(kind_name);
        CHECK(std::abs(wave_eval(pr, s, 1.0, 0.0, far, k) - 1.0) <= 1e-12);
    }
    const cplx z(1.3, 0.4), t(0.2, 0.0), x(0.1, 0.05);
    const cplx prefactor = std::exp(x / pr.eta * std::log(z)) * std::exp(t * z);
    const auto c = solve_wave_coefficients(pr, s, z, WaveKind::C);
    CHECK(std::abs(wave_eval(pr, s, z, t, x, WaveKind::C) -
                   prefactor * wave_rational_part(pr, s, c, std::exp(2.0 * pr.gamma * x))) <= 1e-12);
    CHECK_THROWS_AS(wave_rational_part(pr, s, c, exp_positions(pr, s.x)[1]), Error);
}

TEST_CASE("auxiliary linear problems along the flows") {
    // Im x = pi/(4 gamma) turns w by 90 degrees, away from every pole.
    const cplx z(1.3, 0.4), x(0.37, 1.5707963267948966);
    for (std::size_t n : {1, 3}) {
        const ModelParams pr = params_for(n);
        const PhaseState s = draw(pr, 90 + n);
        for (WaveKind k : kAllKinds) {
            CAPTURE(n);
            const std::string kind_name = to_string(k);
            CAPTURE(kind_name);
            const double r = linear_problem_residual(pr, flow_for(pr, s, k, 9), z, x, k);
            CHECK(r <= (n == 1 ? 1e-6 : 1e-5));
        }
    }
}

TEST_CASE("linear problem residual is second order in the sample spacing") {
    const ModelParams pr = params_for(3);
    const PhaseState s = draw(pr, 95);
    // Im x = pi/(4 gamma) turns w by 90 degrees, away from every pole.
    const cplx z(1.3, 0.4), x(0.37, 1.5707963267948966);
    for (WaveKind k : kAllKinds) {
        const std::string kind_name = to_string(k);
            CAPTURE(kind_name);
        const double coarse = linear_problem_residual(pr, flow_for(pr, s, k, 3), z, x, k);
        const double fine = linear_problem_residual(pr, flow_for(pr, s, k, 5), z, x, k);
        CHECK(std::log2(coarse / fine) == doctest::Approx(2.0).epsilon(0.25));
    }
}

TEST_CASE("residue formula for the velocities") {
    const ModelParams one = params_for(1);
    const PhaseState s1{{cplx(0.0)}, {cplx(0.0)}};
    const auto r1 = residue_velocity_identity(one, s1, 1);
    CHECK(std::abs(r1.trace[0] - 1.0) <= 1e-14);
    CHECK(std::abs(r1.contour[0] - 1.0) <= 1e-12);

    for (std::size_t n : {2, 3, 4}) {
        const ModelParams pr = params_for(n);
        const PhaseState s = draw(pr, 120 + n);
        for (int m : {1, 2, 3, -1, -2, -3}) {
            CAPTURE(n);
            CAPTURE(m);
            const auto r = residue_velocity_identity(pr, s, m);
            CHECK(r.max_difference() <= 1e-8);
            const CVector dp = hamiltonian_gradients(pr, s, m).dp;
            CHECK(testing::max_abs_diff(r.trace, dp) <= 1e-10 * std::max(1.0, testing::max_abs(dp)));
            if (m == 1) CHECK(testing::max_abs_diff(r.trace, velocity_map(pr, s)) <= 1e-10);
        }
    }
}

TEST_CASE("residue quadrature does not depend on the radius") {
    const ModelParams pr = params_for(3);
    const PhaseState s = draw(pr, 130);
    const double rho = spectral_radius_bound(lax_matrix(pr, s)) * std::exp(0.5);
    const double rho_bar = spectral_radius_bound(lax_bar_matrix(pr, s)) * std::exp(0.5);
    for (int m : {1, 2, 3}) {
        const auto a = residue_velocity_identity(pr, s, m, 2.0 * rho);
        const auto b = residue_velocity_identity(pr, s, m, 3.0 * rho);
        CHECK(testing::max_abs_diff(a.contour, b.contour) <= 1e-9);
        const auto c = residue_velocity_identity(pr, s, -m, 0.5 / rho_bar);
        const auto d = residue_velocity_identity(pr, s, -m, 0.3 / rho_bar);
        CHECK(testing::max_abs_diff(c.contour, d.contour) <= 1e-9);
    }
}
