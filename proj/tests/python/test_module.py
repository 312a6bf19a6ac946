import numpy as np
import pytest

import rstoda


@pytest.fixture
def setup():
    params = rstoda.ModelParams(3, 0.5, 1.0)
    return params, rstoda.random_state(params, 11)


def test_random_state_is_seeded(setup):
    params, state = setup
    again = rstoda.random_state(params, 11)
    assert np.array_equal(state.x, again.x)
    assert np.array_equal(state.p, again.p)


def test_lax_matrices(setup):
    params, state = setup
    lax = rstoda.lax_matrix(params, state)
    assert lax.shape == (3, 3)
    diagonal = -params.gamma / np.sinh(params.gamma * params.eta) * np.asarray(rstoda.velocity_map(params, state))
    assert np.allclose(np.diag(lax), diagonal)
    assert rstoda.commutation_residual(params, state) < 1e-11
    assert rstoda.lax_equation_residual(params, state) < 1e-10


def test_flow_conserves_spectrum(setup):
    params, state = setup
    out = rstoda.integrate_flow(params, state, 2, 0.3)
    assert out["x"].shape == (11, 3)
    assert out["max_relative_drift"] < 1e-7


def test_tau_zeros_follow_flow(setup):
    params, state = setup
    flow = rstoda.integrate_flow(params, state, 1, 0.2, samples=5)
    zeros = rstoda.tau_zeros_along(params, state, 1, 0.2, samples=5)
    for row_flow, row_zero in zip(flow["x"], zeros):
        assert sorted(row_flow, key=lambda z: (z.real, z.imag)) == pytest.approx(
            sorted(row_zero, key=lambda z: (z.real, z.imag)), abs=1e-6)


def test_backlund_pair(setup):
    params, state = setup
    out = rstoda.backlund(params, state, 5.0)
    assert len(out["y"]) == 3
    assert max(abs(r) for r in out["residual"]) < 1e-8
    assert max(abs(r) for r in out["discrete_residual"]) < 1e-8


def test_residue_velocities(setup):
    params, state = setup
    contour, trace = rstoda.residue_velocities(params, state, 2)
    assert np.allclose(contour, trace, atol=1e-8)


def test_verify_default_passes():
    report = rstoda.verify()
    assert report["summary"]["all_passed"]
    assert len(report["records"]) == len(rstoda.check_names()) == 16


def test_errors_are_typed():
    with pytest.raises(rstoda.RstodaError):
        rstoda.ModelParams(0, 0.5, 1.0)
    with pytest.raises(rstoda.RstodaError):
        rstoda.verify({"checks": ["no-such-check"]})
