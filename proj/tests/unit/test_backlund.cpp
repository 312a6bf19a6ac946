#include "doctest.h"
#include "helpers.hpp"
#include "rstoda/backlund.hpp"
#include "rstoda/errors.hpp"

using namespace rstoda;
using testing::draw;
using testing::max_abs;
using testing::max_abs_diff;
using testing::params_for;

namespace {

cplx mu_at(const TauContext& ctx, double factor, double phase = 0.7) {
    return factor * spectral_radius_bound(ctx.l0()) * std::polar(1.0, phase);
}

}  // namespace

TEST_CASE("partner approaches x as mu grows") {
    const ModelParams pr = params_for(3);
    const TauContext ctx(pr, draw(pr, 610));
    const auto pair = backlund_partner(ctx, {}, mu_at(ctx, 1e8));
    CHECK(max_abs_diff(pair.x, pair.y) <= 1e-6);
}

TEST_CASE("one particle partner in closed form") {
    // t - [mu^{-1}] sums -(mu^{-k}/k)(q^{-k/2} - q^{k/2}) l^k to
    // log((mu - q^{-1/2} l)/(mu - q^{1/2} l)).
    const ModelParams pr = params_for(1);
    const PhaseState s{{cplx(0.3, 0.1)}, {cplx(-0.2, 0.05)}};
    const TauContext ctx(pr, s);
    const cplx l = lax_matrix(pr, s)(0, 0);
    const cplx mu(2.1, 1.3);
    const cplx v = std::exp(2.0 * pr.gamma * s.x[0]) * (mu - l / pr.sqrt_q()) / (mu - pr.sqrt_q() * l);
    const auto pair = backlund_partner(ctx, {}, mu);
    CHECK(std::abs(std::exp(2.0 * pr.gamma * pair.y[0]) - v) <= 1e-10 * std::abs(v));
    CHECK(max_abs(backlund_residual(pr, pair)) <= 1e-10);
}

TEST_CASE("partner equals zeros at truncated shifted times") {
    const ModelParams pr = params_for(3);
    for (std::uint64_t seed : {620, 621, 622}) {
        const TauContext ctx(pr, draw(pr, seed));
        const cplx mu = mu_at(ctx, 5.0);
        const auto pair = backlund_partner(ctx, {}, mu);
        const ZeroSet xz = initial_zeros(ctx);
        const ZeroSet direct = tau_zeros(ctx, truncated_shift({}, MiwaShift::minus_mu(mu), 60), &xz);
        CAPTURE(seed);
        CHECK(max_abs_diff(pair.y, direct.x) <= 1e-9);
    }
}

TEST_CASE("pair equations hold with frame velocities") {
    for (std::size_t n : {2u, 3u, 4u}) {
        const ModelParams pr = params_for(n);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const TauContext ctx(pr, draw(pr, 630 + 10 * n + seed));
            const auto pair = backlund_partner(ctx, {}, mu_at(ctx, 5.0));
            CAPTURE(n);
            CAPTURE(seed);
            CHECK(max_abs_diff(pair.xdot, velocity_map(pr, ctx.state0())) <= 1e-9);
            CHECK(max_abs(backlund_residual(pr, pair)) <= 1e-8);
        }
    }
}

TEST_CASE("pair equations at two values of mu") {
    const ModelParams pr = params_for(2);
    const TauContext ctx(pr, draw(pr, 640));
    const auto a = backlund_partner(ctx, {}, mu_at(ctx, 5.0, 0.7));
    const auto b = backlund_partner(ctx, {}, mu_at(ctx, 7.0, -1.9));
    CHECK(max_abs_diff(a.y, b.y) > 1e-3);
    CHECK(max_abs(backlund_residual(pr, a)) <= 1e-8);
    CHECK(max_abs(backlund_residual(pr, b)) <= 1e-8);
}

TEST_CASE("pair equations at evolved times with difference velocities") {
    const ModelParams pr = params_for(3);
    const TauContext ctx(pr, draw(pr, 650));
    const HierarchyTimes times = HierarchyTimes::single(1, 0.05).shifted(-1, cplx(0.02, 0.01));
    const cplx mu = mu_at(ctx, 5.0);
    BacklundPair pair = backlund_partner(ctx, times, mu);
    CHECK(max_abs(backlund_residual(pr, pair)) <= 1e-8);
    pair.ydot = partner_velocity_fd(ctx, times, mu);
    CHECK(max_abs(backlund_residual(pr, pair)) <= 1e-5);
}

TEST_CASE("partner follows the RS equations of motion") {
    const ModelParams pr = params_for(3);
    const TauContext ctx(pr, draw(pr, 660));
    CHECK(partner_acceleration_defect(ctx, {}, mu_at(ctx, 5.0)) <= 1e-5);
}

TEST_CASE("shifting the partner back returns x") {
    for (std::size_t n : {1u, 2u, 3u, 4u}) {
        const ModelParams pr = params_for(n);
        const TauContext ctx(pr, draw(pr, 670 + n));
        CAPTURE(n);
        CHECK(backlund_role_involution(ctx, mu_at(ctx, 5.0)) <= 1e-8);
    }
}

TEST_CASE("one particle discrete equation") {
    const ModelParams pr = params_for(1);
    const TauContext ctx(pr, PhaseState{{cplx(0.3, 0.1)}, {cplx(-0.2, 0.05)}});
    CHECK(max_abs(discrete_time_residual(ctx, {}, cplx(2.1, 1.3))) <= 1e-10);
}

TEST_CASE("discrete equation on random draws") {
    for (std::size_t n : {2u, 3u, 4u}) {
        const ModelParams pr = params_for(n);
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const TauContext ctx(pr, draw(pr, 680 + 10 * n + seed));
            CAPTURE(n);
            CAPTURE(seed);
            CHECK(max_abs(discrete_time_residual(ctx, {}, mu_at(ctx, 5.0))) <= 1e-8);
            CHECK(max_abs(discrete_time_residual(ctx, HierarchyTimes::single(2, 0.03), mu_at(ctx, 4.0, -0.4))) <=
                  1e-8);
        }
    }
}

TEST_CASE("first order of the discrete equation is the RS equation of motion") {
    for (std::size_t n : {1u, 2u, 3u, 4u}) {
        const ModelParams pr = params_for(n);
        const TauContext ctx(pr, draw(pr, 690 + n));
        const auto ex = discrete_time_expansion(ctx, 20.0 * spectral_radius_bound(ctx.l0()));
        CAPTURE(n);
        CHECK(ex.max_difference() <= 1e-5 * std::max(1.0, max_abs(ex.rs_acceleration)));
        CHECK(max_abs(ex.total_limit) <= 1e-5);
    }
}

TEST_CASE("partner rejects mu = 0") {
    const ModelParams pr = params_for(2);
    const TauContext ctx(pr, draw(pr, 700));
    CHECK_THROWS_AS(backlund_partner(ctx, {}, 0.0), Error);
    CHECK_THROWS_AS(discrete_time_residual(ctx, {}, 0.0), Error);
}
