#include "doctest.h"
#include "helpers.hpp"
#include "rstoda/flow.hpp"

using namespace rstoda;
using testing::draw;
using testing::params_for;

namespace {

double state_distance(const PhaseState& a, const PhaseState& b) {
    return std::max(testing::max_abs_diff(a.x, b.x), testing::max_abs_diff(a.p, b.p));
}

}  // namespace

TEST_CASE("free flow of one particle") {
    const ModelParams pr = params_for(1);
    const PhaseState s{{cplx(0.2, 0.1)}, {cplx(-0.3, 0.05)}};
    FlowSpec spec;
    spec.duration = 1.0;
    const Trajectory t = integrate_flow(pr, s, spec);
    REQUIRE(t.samples.size() == spec.samples);
    const cplx v = pr.eta * std::exp(pr.eta * s.p[0]);
    CHECK(std::abs(t.samples.back().state.x[0] - (s.x[0] + v)) <= 1e-12);
    CHECK(std::abs(t.samples.back().state.p[0] - s.p[0]) <= 1e-14);
    CHECK(std::abs(t.samples[5].time - 0.5) < 1e-15);

    // tbar_1: dx/dtbar = dHbar_1/dp = -(sinh^2(gamma eta)/(gamma eta)^2) eta e^{-eta p}.
    spec.m = -1;
    spec.duration = cplx(0.4, -0.2);
    const PhaseState e = evolve(pr, s, spec);
    const double k = std::sinh(0.5) * std::sinh(0.5) / 0.25;
    CHECK(std::abs(e.x[0] - (s.x[0] - spec.duration * k * std::exp(-s.p[0]))) <= 1e-12);
}

TEST_CASE("isospectrality along every flow") {
    for (std::size_t n : {2, 3, 4}) {
        const ModelParams pr = params_for(n);
        const PhaseState s = draw(pr, 100 + n);
        for (int m : {1, 2, 3, -1, -2, -3}) {
            FlowSpec spec;
            spec.m = m;
            spec.duration = 0.3;
            const Trajectory t = integrate_flow(pr, s, spec);
            CHECK(t.max_relative_drift(false) <= 1e-7);
            CHECK(t.max_relative_drift(true) <= 1e-7);
            const cplx h0 = hamiltonian(pr, t.samples.front().state, m);
            const cplx h1 = hamiltonian(pr, t.samples.back().state, m);
            CHECK(std::abs(h1 - h0) <= 1e-8 * std::abs(h0));
        }
    }
}

TEST_CASE("complex time and time reversal") {
    const ModelParams pr = params_for(3);
    const PhaseState s = draw(pr, 21);
    FlowSpec spec;
    spec.m = 2;
    spec.duration = cplx(0.15, 0.1);
    const PhaseState fwd = evolve(pr, s, spec);
    spec.duration = -spec.duration;
    const PhaseState back = evolve(pr, fwd, spec);
    CHECK(state_distance(back, s) <= 1e-8);
}

TEST_CASE("flow velocity matches rs dynamics") {
    const ModelParams pr = params_for(3);
    const PhaseState s = draw(pr, 5);
    const Gradients g = flow_vector_field(pr, s, 1);
    CHECK(testing::max_abs_diff(g.dp, velocity_map(pr, s)) <= 1e-12 * testing::max_abs(g.dp));
}

TEST_CASE("flows commute") {
    const ModelParams p1 = params_for(1);
    const PhaseState s1{{0.1}, {0.2}};
    FlowSpec a, b;
    a.m = 1;
    b.m = -2;
    a.duration = b.duration = 0.3;
    CHECK(flow_commutator_defect(p1, s1, a, b) <= 1e-10);

    const ModelParams pr = params_for(3);
    const PhaseState s = draw(pr, 33);
    CHECK(flow_commutator_defect(pr, s, a, a) <= 1e-9);
    b.m = 2;
    const double d10 = flow_commutator_defect(pr, s, a, b);
    CHECK(d10 <= 1e-6);
    a.rtol = b.rtol = 0.5e-10;
    CHECK(flow_commutator_defect(pr, s, a, b) <= std::max(d10, 1e-12) * 2.0);
}

TEST_CASE("invalid specs and collisions") {
    const ModelParams pr = params_for(2);
    const PhaseState s = draw(pr, 1);
    FlowSpec bad;
    bad.m = 0;
    CHECK_THROWS_AS(integrate_flow(pr, s, bad), Error);
    bad.m = 4;
    CHECK_THROWS_AS(integrate_flow(pr, s, bad), Error);
    bad.m = 1;
    bad.rtol = 1e-14;
    CHECK_THROWS_AS(integrate_flow(pr, s, bad), Error);

    // Two particles approaching head-on: x_1 - x_2 runs into -eta.
    const PhaseState head{{0.0, 2.0}, {1.5, -3.0}};
    FlowSpec spec;
    spec.duration = 50.0;
    spec.max_step = 0.5;
    bool caught = false;
    try {
        integrate_flow(pr, head, spec);
    } catch (const CollisionError& e) {
        caught = true;
        CHECK(e.kind() == ErrorKind::CollisionEncountered);
        CHECK_NOTHROW(check_state(pr, e.last_good_state()));
    } catch (const Error& e) {
        caught = e.kind() == ErrorKind::StepUnderflow;
    }
    CHECK(caught);
}
